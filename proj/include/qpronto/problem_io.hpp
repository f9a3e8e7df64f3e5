#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qpronto/gate_design.hpp"
#include "qpronto/solver.hpp"

namespace qpronto::io {

/// Everything a problem file describes, ready to hand to solve().
struct ProblemSpec {
  std::string name;
  Problem problem;
  InitialGuess guess;
  SolverOptions options;
  std::optional<GateProblem> gate;
  Eigen::Index levels = 0;  // Hilbert-space dimension of one wavefunction
};

/// Parses a JSON problem document. Relative paths inside it resolve against `base_dir`.
/// Throws InputError naming the offending section and field.
ProblemSpec parse_problem(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ProblemSpec load_problem(const std::filesystem::path& path);

/// |<n|psi_b(t_i)>|^2 for every stacked block b and level n; rows are grid nodes.
Eigen::MatrixXd populations(const Curve& xi, Eigen::Index levels);

void write_trajectory_csv(const std::filesystem::path& path, const Curve& xi);
void write_populations_csv(const std::filesystem::path& path, const Curve& xi, Eigen::Index levels);
void write_convergence_jsonl(const std::filesystem::path& path,
                             const std::vector<ConvergenceRecord>& records);
nlohmann::json convergence_record_json(const ConvergenceRecord& rec);
nlohmann::json summary_json(const ProblemSpec& spec, const SolveResult& result);

/// Reads a trajectory.csv back into a curve on `grid`. Throws InputError on shape mismatch.
Curve read_trajectory_csv(const std::filesystem::path& path, const TimeGrid& grid,
                          Eigen::Index state_dim, Eigen::Index input_dim);

/// Writes trajectory, populations, convergence log and summary into `dir`.
void write_results(const std::filesystem::path& dir, const ProblemSpec& spec, const SolveResult& result);

/// Side-by-side report of two result directories. Throws InputError on missing files or
/// mismatched grids.
nlohmann::json compare_runs(const std::filesystem::path& a, const std::filesystem::path& b);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace qpronto::io
