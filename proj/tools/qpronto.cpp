// qpronto: solve a quantum optimal control problem file and write the results.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qpronto/errors.hpp"
#include "qpronto/problem_io.hpp"
#include "qpronto/solver.hpp"

namespace fs = std::filesystem;
using namespace qpronto;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitInput = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitStall = 3;

struct RunArgs {
  std::string problem;
  std::string output = "out";
  std::optional<double> tol;
  std::optional<int> max_iter;
  bool no_regulator = false;
  bool validate_only = false;
  bool verbose = false;
};

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return kExitConverged;
    case SolveStatus::max_iterations: return kExitMaxIter;
    case SolveStatus::armijo_stall: return kExitStall;
  }
  return kExitInput;
}

int run(const RunArgs& args) {
  io::ProblemSpec spec = io::load_problem(args.problem);
  if (args.tol) spec.options.tol = *args.tol;
  if (args.max_iter) spec.options.max_iter = *args.max_iter;
  if (args.no_regulator) spec.options.regulator.enabled = false;
  spec.options.validate();

  if (args.validate_only) {
    std::cout << spec.name << ": ok (" << spec.problem.model.state_dim() << " states, "
              << spec.problem.model.input_dim() << " inputs, N = " << spec.problem.grid.steps << ")\n";
    return kExitConverged;
  }

  IterationObserver observer;
  if (args.verbose) {
    observer = [](const ConvergenceRecord& rec) {
      std::cerr << io::convergence_record_json(rec).dump() << std::endl;
    };
  }
  const SolveResult result = solve(spec.problem, spec.guess, spec.options, observer);
  io::write_results(args.output, spec, result);

  std::cout << spec.name << ": " << to_string(result.status) << " after " << result.iterations
            << " iterations, cost " << io::format_double(result.cost) << "\n";
  return exit_code(result.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regulated projection-operator Newton solver for quantum optimal control"};
  app.require_subcommand(1);

  RunArgs args;
  CLI::App* run_cmd = app.add_subcommand("run", "Solve a problem file");
  run_cmd->add_option("problem", args.problem, "Problem file (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output", args.output, "Output directory")->capture_default_str();
  run_cmd->add_option("--tol", args.tol, "Override the exit tolerance on -Dg");
  run_cmd->add_option("--max-iter", args.max_iter, "Override the iteration limit");
  run_cmd->add_flag("--no-regulator", args.no_regulator, "Project with K_r = 0");
  run_cmd->add_flag("--validate-only", args.validate_only, "Parse and check the problem, write nothing");
  run_cmd->add_flag("-v,--verbose", args.verbose, "Print each iteration record to stderr");

  std::string dir_a, dir_b;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Side-by-side report of two result directories");
  cmp_cmd->add_option("run_a", dir_a)->required();
  cmp_cmd->add_option("run_b", dir_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*run_cmd) return run(args);
    std::cout << io::compare_runs(dir_a, dir_b).dump(2) << "\n";
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
