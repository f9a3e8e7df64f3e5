#include "qpronto/problem_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qpronto/errors.hpp"
#include "qpronto/real_embedding.hpp"

namespace qpronto::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, "missing required field '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), where + "." + key);
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::MatrixXd real_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::vector<double> row = number_list(v[static_cast<std::size_t>(i)], where + "[" + std::to_string(i) + "]");
    if (i == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) fail(where, "ragged matrix rows");
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

// {"re": [[...]], "im": [[...]]} or a plain real array of rows.
Eigen::MatrixXcd complex_matrix(const json& v, const std::string& where) {
  if (v.is_array()) return real_matrix(v, where).cast<std::complex<double>>();
  const Eigen::MatrixXd re = real_matrix(require(v, "re", where), where + ".re");
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (v.contains("im")) {
    im = real_matrix(v.at("im"), where + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols()) fail(where, "re and im parts differ in shape");
  }
  Eigen::MatrixXcd m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

// {"re": [...], "im": [...]}, {"level": k}, or a plain real array.
Eigen::VectorXcd complex_vector(const json& v, Eigen::Index n, const std::string& where) {
  Eigen::VectorXcd out;
  if (v.is_object() && v.contains("level")) {
    const double lvl = number(v.at("level"), where + ".level");
    if (lvl < 0 || lvl >= static_cast<double>(n) || lvl != std::floor(lvl)) fail(where, "level out of range");
    out = Eigen::VectorXcd::Zero(n);
    out(static_cast<Eigen::Index>(lvl)) = 1.0;
    return out;
  }
  std::vector<double> re, im;
  if (v.is_array()) {
    re = number_list(v, where);
  } else {
    re = number_list(require(v, "re", where), where + ".re");
    if (v.contains("im")) im = number_list(v.at("im"), where + ".im");
  }
  if (static_cast<Eigen::Index>(re.size()) != n) fail(where, "expected " + std::to_string(n) + " entries");
  if (!im.empty() && im.size() != re.size()) fail(where, "re and im parts differ in length");
  out.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out(i) = {re[k], im.empty() ? 0.0 : im[k]};
  }
  return out;
}

Eigen::VectorXcd unit_vector(const json& v, Eigen::Index n, const std::string& where) {
  Eigen::VectorXcd psi = complex_vector(v, n, where);
  if (std::abs(psi.norm() - 1.0) > 1e-9) fail(where, "state must have unit norm");
  return psi;
}

SmoothScalarFn scalar_fn(const json& v, const std::string& where) {
  const std::string kind = v.is_string() ? v.get<std::string>()
                                         : require(v, "kind", where).get<std::string>();
  if (kind == "identity") return SmoothScalarFn::identity();
  if (kind == "sin") return SmoothScalarFn::sine();
  if (kind == "one_minus_cos") return SmoothScalarFn::one_minus_cos();
  if (kind == "scaled_affine") {
    return SmoothScalarFn::scaled_affine(number(require(v, "a", where), where + ".a"),
                                         number(require(v, "b", where), where + ".b"));
  }
  fail(where, "unknown scalar function kind '" + kind + "'");
}

Eigen::MatrixXcd outer(Eigen::Index n, Eigen::Index i, Eigen::Index j, std::complex<double> c) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  m(i, j) = c;
  return m;
}

// Returns (H0, controls, fns) for a system section.
struct SystemMatrices {
  Eigen::MatrixXcd drift;
  std::vector<Eigen::MatrixXcd> controls;
  std::vector<SmoothScalarFn> fns;
};

SystemMatrices system_matrices(const json& sys) {
  const std::string where = "system";
  SystemMatrices s;
  const std::complex<double> I(0.0, 1.0);
  if (sys.contains("preset")) {
    const std::string preset = sys.at("preset").get<std::string>();
    if (preset == "lambda") {
      // Three-level Lambda system driven by two complex pump/Stokes fields (real/imag channels).
      const double dp = number(require(sys, "delta_P", where), where + ".delta_P");
      const double ds = number(require(sys, "delta_S", where), where + ".delta_S");
      s.drift = dp * outer(3, 0, 0, 1.0) + ds * outer(3, 1, 1, 1.0);
      s.controls = {
          -0.5 * (outer(3, 0, 2, 1.0) + outer(3, 2, 0, 1.0)),
          -0.5 * I * (outer(3, 0, 2, 1.0) - outer(3, 2, 0, 1.0)),
          -0.5 * (outer(3, 2, 1, 1.0) + outer(3, 1, 2, 1.0)),
          -0.5 * I * (outer(3, 2, 1, 1.0) - outer(3, 1, 2, 1.0)),
      };
      s.fns.assign(4, SmoothScalarFn::identity());
    } else if (preset == "fluxonium3") {
      const std::vector<double> e = number_list(require(sys, "energies", where), where + ".energies");
      if (e.size() != 3) fail(where + ".energies", "expected 3 energies");
      const json& c = require(sys, "couplings", where);
      const double o01 = number(require(c, "01", where + ".couplings"), where + ".couplings.01");
      const double o02 = number(require(c, "02", where + ".couplings"), where + ".couplings.02");
      const double o12 = number(require(c, "12", where + ".couplings"), where + ".couplings.12");
      s.drift = Eigen::MatrixXcd::Zero(3, 3);
      for (Eigen::Index i = 0; i < 3; ++i) s.drift(i, i) = e[static_cast<std::size_t>(i)];
      Eigen::MatrixXcd h1 = Eigen::MatrixXcd::Zero(3, 3);
      h1(0, 1) = h1(1, 0) = o01;
      h1(0, 2) = h1(2, 0) = o02;
      h1(1, 2) = h1(2, 1) = o12;
      s.controls = {h1};
      s.fns = {SmoothScalarFn::identity()};
    } else {
      fail(where + ".preset", "unknown preset '" + preset + "'");
    }
  } else {
    s.drift = complex_matrix(require(sys, "H0", where), where + ".H0");
    const json& chans = require(sys, "channels", where);
    if (!chans.is_array() || chans.empty()) fail(where + ".channels", "expected a non-empty array");
    for (std::size_t j = 0; j < chans.size(); ++j) {
      const std::string w = where + ".channels[" + std::to_string(j) + "]";
      s.controls.push_back(complex_matrix(require(chans[j], "H", w), w + ".H"));
      s.fns.push_back(chans[j].contains("f") ? scalar_fn(chans[j].at("f"), w + ".f")
                                             : SmoothScalarFn::identity());
    }
  }
  if (sys.contains("n") && number(sys.at("n"), where + ".n") != static_cast<double>(s.drift.rows())) {
    fail(where + ".n", "does not match the Hamiltonian dimension");
  }
  const double scale = number_or(sys, "energy_scale", 1.0, where);
  s.drift *= scale;
  for (auto& c : s.controls) c *= scale;
  return s;
}

Schedule schedule(const json& v, const TimeGrid& grid, const std::string& where) {
  if (v.is_number()) return Schedule::constant(v.get<double>());
  const std::string kind = require(v, "kind", where).get<std::string>();
  Schedule s;
  if (kind == "constant") {
    s = Schedule::constant(number(require(v, "value", where), where + ".value"));
  } else if (kind == "tanh_ramp") {
    s = Schedule::tanh_ramp(number(require(v, "scale", where), where + ".scale"),
                            number(require(v, "shift", where), where + ".shift"),
                            number(require(v, "offset", where), where + ".offset"),
                            number_or(v, "rate", 1.0, where));
  } else if (kind == "tabulated") {
    s = Schedule::tabulated(number_list(require(v, "values", where), where + ".values"));
  } else {
    fail(where, "unknown schedule kind '" + kind + "'");
  }
  try {
    s.check_grid(grid);
  } catch (const InputError& e) {
    fail(where, e.what());
  }
  return s;
}

double pulse_value(const json& p, double t, const std::string& where) {
  if (p.is_number()) return p.get<double>();
  const std::string kind = require(p, "kind", where).get<std::string>();
  if (kind == "zero") return 0.0;
  const double amp = number(require(p, "amplitude", where), where + ".amplitude");
  const double omega = number_or(p, "angular_frequency", 0.0, where);
  const double phase = number_or(p, "phase", 0.0, where);
  if (kind == "sine") return amp * std::sin(omega * t + phase);
  if (kind == "gaussian_cosine") {
    const double c = number(require(p, "center", where), where + ".center");
    const double w = number(require(p, "width", where), where + ".width");
    if (!(w > 0.0)) fail(where + ".width", "must be positive");
    return amp * std::exp(-(t - c) * (t - c) / (w * w)) * std::cos(omega * t + phase);
  }
  fail(where, "unknown pulse kind '" + kind + "'");
}

InitialGuess guess_section(const json& g, const ProblemSpec& spec, const RealState& blend_target,
                           const fs::path& base_dir) {
  const std::string where = "guess";
  const TimeGrid& grid = spec.problem.grid;
  const Eigen::Index n = spec.problem.model.state_dim();
  const Eigen::Index m = spec.problem.model.input_dim();
  const std::string kind = require(g, "kind", where).get<std::string>();
  InitialGuess guess;
  if (kind == "curve") guess.kind = InitialGuess::Kind::curve;
  else if (kind == "input_only") guess.kind = InitialGuess::Kind::input_only;
  else if (kind == "state_only") guess.kind = InitialGuess::Kind::state_only;
  else fail(where + ".kind", "unknown guess kind '" + kind + "'");

  if (g.contains("file")) {
    const fs::path file = base_dir / g.at("file").get<std::string>();
    Curve c;
    try {
      c = read_trajectory_csv(file, grid, n, m);
    } catch (const InputError& e) {
      fail(where + ".file", e.what());
    }
    guess.states = c.states;
    guess.inputs = c.inputs;
    return guess;
  }

  if (guess.kind != InitialGuess::Kind::state_only) {
    const json& inputs = require(g, "inputs", where);
    if (!inputs.is_array() || inputs.size() != static_cast<std::size_t>(m)) {
      fail(where + ".inputs", "expected one pulse per control channel (" + std::to_string(m) + ")");
    }
    guess.inputs.resize(m, grid.points());
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::string w = where + ".inputs[" + std::to_string(j) + "]";
      for (int i = 0; i < grid.points(); ++i) {
        guess.inputs(j, i) = pulse_value(inputs[static_cast<std::size_t>(j)], grid.time(i), w);
      }
    }
  }
  if (guess.kind != InitialGuess::Kind::input_only) {
    const json& states = require(g, "states", where);
    const std::string shape = require(states, "shape", where + ".states").get<std::string>();
    if (shape != "tanh_blend") fail(where + ".states.shape", "unknown shape '" + shape + "'");
    // (target - start) (tanh(2 pi t / T - pi) + 1) / 2 + start
    RealState target = blend_target;
    if (states.contains("to")) {
      target = embed_state(unit_vector(states.at("to"), n / 2, where + ".states.to"));
    }
    if (target.size() != n) fail(where + ".states", "no blend target available; give 'to'");
    const RealState& start = spec.problem.x0;
    guess.states.resize(n, grid.points());
    for (int i = 0; i < grid.points(); ++i) {
      const double s = 0.5 * (std::tanh(2.0 * std::numbers::pi * grid.time(i) / grid.horizon - std::numbers::pi) + 1.0);
      guess.states.col(i) = (target - start) * s + start;
    }
  }
  return guess;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) fail(where, "cannot parse number '" + s + "'");
  return v;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ProblemSpec parse_problem(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw InputError("problem: document must be a JSON object");
  ProblemSpec spec;
  spec.name = doc.value("name", std::string("problem"));

  try {
    const SystemMatrices sys = system_matrices(require(doc, "system", "problem"));
    const ControlHamiltonian base = make_control_hamiltonian(sys.drift, sys.controls, sys.fns);
    spec.levels = sys.drift.rows();
    const Eigen::Index n = spec.levels;

    const json& hz = require(doc, "horizon", "problem");
    spec.problem.grid.horizon = number(require(hz, "T", "horizon"), "horizon.T");
    const double steps = number_or(hz, "N", 1000.0, "horizon");
    if (!(spec.problem.grid.horizon > 0.0)) fail("horizon.T", "must be positive");
    if (steps < 1 || steps != std::floor(steps)) fail("horizon.N", "must be a positive integer");
    spec.problem.grid.steps = static_cast<int>(steps);
    const TimeGrid& grid = spec.problem.grid;

    const json empty = json::object();
    const json& cost = doc.contains("cost") ? doc.at("cost") : empty;
    RealState blend_target;

    // Per-wavefunction population projectors, stacked below for gates.
    std::vector<std::pair<Schedule, Eigen::MatrixXcd>> pops;
    if (cost.contains("populations")) {
      const json& list = cost.at("populations");
      if (!list.is_array()) fail("cost.populations", "expected an array");
      for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string w = "cost.populations[" + std::to_string(k) + "]";
        Schedule weight = schedule(require(list[k], "weight", w), grid, w + ".weight");
        Eigen::MatrixXcd proj;
        if (list[k].contains("level")) {
          const Eigen::VectorXcd e = complex_vector(json{{"level", list[k].at("level")}}, n, w);
          proj = e * e.adjoint();
        } else {
          proj = complex_matrix(require(list[k], "projector", w), w + ".projector");
          if (proj.rows() != n || proj.cols() != n) fail(w + ".projector", "wrong dimension");
        }
        pops.emplace_back(std::move(weight), std::move(proj));
      }
    }

    if (doc.contains("gate")) {
      const json& g = doc.at("gate");
      GateProblem gate;
      gate.base = base;
      gate.target = complex_matrix(require(g, "target", "gate"), "gate.target");
      const json& active = require(g, "active", "gate");
      if (!active.is_array()) fail("gate.active", "expected an array of column indices");
      for (const auto& a : active) gate.active.push_back(a.get<int>());
      try {
        gate.validate();
      } catch (const InputError& e) {
        fail("gate", e.what());
      }
      StackedGate stacked = stack_problem(gate);
      spec.problem.model = std::move(stacked.model);
      spec.problem.x0 = std::move(stacked.x0);
      spec.problem.terminal = std::move(stacked.terminal);
      if (g.contains("terminal_weight")) {
        const double w = number(g.at("terminal_weight"), "gate.terminal_weight");
        if (!(w > 0.0)) fail("gate.terminal_weight", "must be positive");
        spec.problem.terminal = spec.problem.terminal.scaled(w);
      }
      spec.problem.blocks = static_cast<int>(n);
      blend_target = spec.problem.terminal.center();
      for (auto& [w, p] : pops) {
        spec.problem.incremental.populations.push_back({w, stack_penalty(gate, embed_quadratic(p))});
      }
      spec.gate = std::move(gate);
    } else {
      spec.problem.model = base;
      spec.problem.x0 = embed_state(unit_vector(require(doc, "initial_state", "problem"), n, "initial_state"));
      const json& term = require(cost, "terminal", "cost");
      const std::string kind = require(term, "kind", "cost.terminal").get<std::string>();
      const RealState target = embed_state(unit_vector(require(term, "target", "cost.terminal"), n, "cost.terminal.target"));
      if (kind == "zero_phase") spec.problem.terminal = TerminalCost::zero_phase(target);
      else if (kind == "arbitrary_phase") spec.problem.terminal = TerminalCost::arbitrary_phase(target);
      else fail("cost.terminal.kind", "unknown terminal cost '" + kind + "'");
      blend_target = target;
      for (auto& [w, p] : pops) spec.problem.incremental.populations.push_back({w, embed_quadratic(p)});
    }

    const Eigen::Index m = spec.problem.model.input_dim();
    IncrementalCost& inc = spec.problem.incremental;
    inc.effort_base = Eigen::MatrixXd::Zero(m, m);
    const json& effort = cost.contains("effort") ? cost.at("effort") : json(1.0);
    if (effort.is_number()) {
      inc.effort_base = effort.get<double>() * Eigen::MatrixXd::Identity(m, m);
    } else if (effort.contains("matrix")) {
      inc.effort_base = real_matrix(effort.at("matrix"), "cost.effort.matrix");
      if (inc.effort_base.rows() != m || inc.effort_base.cols() != m) fail("cost.effort.matrix", "wrong dimension");
    } else if (effort.contains("diagonal")) {
      const json& d = effort.at("diagonal");
      if (!d.is_array() || d.size() != static_cast<std::size_t>(m)) {
        fail("cost.effort.diagonal", "expected one schedule per input (" + std::to_string(m) + ")");
      }
      for (std::size_t j = 0; j < d.size(); ++j) {
        inc.effort_diagonal.push_back(schedule(d[j], grid, "cost.effort.diagonal[" + std::to_string(j) + "]"));
      }
    } else {
      fail("cost.effort", "expected a number, 'matrix' or 'diagonal'");
    }
    try {
      inc.validate(grid, spec.problem.model.state_dim(), m);
    } catch (const InputError& e) {
      fail("cost", e.what());
    }

    if (doc.contains("regulator")) {
      const json& r = doc.at("regulator");
      const std::string mode = r.value("mode", std::string("arbitrary_phase"));
      if (mode == "global_phase") spec.options.regulator.mode = RegulatorSpec::Mode::global_phase;
      else if (mode == "arbitrary_phase") spec.options.regulator.mode = RegulatorSpec::Mode::arbitrary_phase;
      else fail("regulator.mode", "unknown mode '" + mode + "'");
      spec.options.regulator.c_R = number_or(r, "c_R", 1.0, "regulator");
      spec.options.regulator.c_P = number_or(r, "c_P", 1.0, "regulator");
      spec.options.regulator.enabled = r.value("enabled", true);
      try {
        spec.options.regulator.validate();
      } catch (const InputError& e) {
        fail("regulator", e.what());
      }
    }
    if (doc.contains("solver")) {
      const json& s = doc.at("solver");
      spec.options.tol = number_or(s, "tol", spec.options.tol, "solver");
      spec.options.max_iter = static_cast<int>(number_or(s, "max_iter", spec.options.max_iter, "solver"));
      if (!(spec.options.tol > 0.0)) fail("solver.tol", "must be positive");
      if (spec.options.max_iter < 0) fail("solver.max_iter", "must be non-negative");
    }

    spec.guess = guess_section(require(doc, "guess", "problem"), spec, blend_target, base_dir);
    spec.problem.validate();
  } catch (const json::exception& e) {
    throw InputError(std::string("problem: malformed field (") + e.what() + ")");
  }
  return spec;
}

ProblemSpec load_problem(const fs::path& path) {
  return parse_problem(read_json_file(path), path.parent_path());
}

Eigen::MatrixXd populations(const Curve& xi, Eigen::Index levels) {
  const Eigen::Index half = xi.state_dim() / 2;
  Eigen::MatrixXd out(xi.grid.points(), half);
  for (int i = 0; i < xi.grid.points(); ++i) {
    for (Eigen::Index k = 0; k < half; ++k) {
      const double re = xi.states(k, i);
      const double im = xi.states(half + k, i);
      out(i, k) = re * re + im * im;
    }
  }
  (void)levels;
  return out;
}

void write_trajectory_csv(const fs::path& path, const Curve& xi) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "t";
  for (Eigen::Index k = 0; k < xi.state_dim(); ++k) out << ",x" << k + 1;
  for (Eigen::Index j = 0; j < xi.input_dim(); ++j) out << ",u" << j + 1;
  out << "\n";
  for (int i = 0; i < xi.grid.points(); ++i) {
    out << format_double(xi.grid.time(i));
    for (Eigen::Index k = 0; k < xi.state_dim(); ++k) out << ',' << format_double(xi.states(k, i));
    for (Eigen::Index j = 0; j < xi.input_dim(); ++j) out << ',' << format_double(xi.inputs(j, i));
    out << "\n";
  }
}

void write_populations_csv(const fs::path& path, const Curve& xi, Eigen::Index levels) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const Eigen::MatrixXd pop = populations(xi, levels);
  const Eigen::Index blocks = pop.cols() / levels;
  out << "t";
  for (Eigen::Index b = 0; b < blocks; ++b) {
    for (Eigen::Index k = 0; k < levels; ++k) {
      if (blocks == 1) out << ",F" << k;
      else out << ",psi" << b << "_F" << k;
    }
  }
  out << "\n";
  for (int i = 0; i < xi.grid.points(); ++i) {
    out << format_double(xi.grid.time(i));
    for (Eigen::Index c = 0; c < pop.cols(); ++c) out << ',' << format_double(pop(i, c));
    out << "\n";
  }
}

json convergence_record_json(const ConvergenceRecord& rec) {
  return json{{"iteration", rec.iteration}, {"cost", rec.cost},           {"Dg", rec.Dg},
              {"sigma", rec.sigma},         {"step_kind", to_string(rec.step_kind)},
              {"backtracks", rec.backtracks}};
}

void write_convergence_jsonl(const fs::path& path, const std::vector<ConvergenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& rec : records) out << convergence_record_json(rec).dump() << "\n";
}

json summary_json(const ProblemSpec& spec, const SolveResult& result) {
  const Curve& xi = result.trajectory;
  const Eigen::MatrixXd pop = populations(xi, spec.levels);
  const Eigen::Index blocks = pop.cols() / spec.levels;

  // Per level: max over time and over the blocks that carry costs.
  std::vector<int> blocks_of_interest;
  if (spec.gate) blocks_of_interest = spec.gate->active;
  else blocks_of_interest = {0};
  std::vector<double> peak(static_cast<std::size_t>(spec.levels), 0.0);
  std::vector<double> final_pop(static_cast<std::size_t>(spec.levels), 0.0);
  for (int b : blocks_of_interest) {
    for (Eigen::Index k = 0; k < spec.levels; ++k) {
      const Eigen::Index c = b * spec.levels + k;
      peak[static_cast<std::size_t>(k)] = std::max(peak[static_cast<std::size_t>(k)], pop.col(c).maxCoeff());
      final_pop[static_cast<std::size_t>(k)] =
          std::max(final_pop[static_cast<std::size_t>(k)], pop(xi.grid.steps, c));
    }
  }

  json s;
  s["name"] = spec.name;
  s["status"] = to_string(result.status);
  s["converged"] = result.status == SolveStatus::converged;
  s["iterations"] = result.iterations;
  s["final_cost"] = result.cost;
  s["final_Dg"] = result.records.empty() ? 0.0 : result.records.back().Dg;
  s["tol"] = spec.options.tol;
  s["grid"] = {{"T", xi.grid.horizon}, {"N", xi.grid.steps}};
  s["regulator_enabled"] = spec.options.regulator.enabled;
  s["peak_populations"] = peak;
  s["final_populations"] = final_pop;
  s["blocks"] = blocks;
  if (spec.gate) {
    s["fidelity"] = gate_fidelity(xi, *spec.gate);
    const Eigen::MatrixXcd u = stacked_columns(xi, spec.levels, xi.grid.steps);
    const Eigen::MatrixXcd gram = u.adjoint() * u;
    s["gram_defect"] = (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  }
  return s;
}

Curve read_trajectory_csv(const fs::path& path, const TimeGrid& grid, Eigen::Index state_dim,
                          Eigen::Index input_dim) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = split_csv_line(line);
  const auto expected_cols = static_cast<std::size_t>(1 + state_dim + input_dim);
  if (header.size() != expected_cols) {
    throw InputError(path.string() + ": expected " + std::to_string(expected_cols) + " columns, found " +
                     std::to_string(header.size()));
  }
  Curve c{grid, Eigen::MatrixXd(state_dim, grid.points()), Eigen::MatrixXd(input_dim, grid.points())};
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= grid.points()) throw InputError(path.string() + ": more rows than grid nodes");
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + " row " + std::to_string(row + 1);
    if (cells.size() != expected_cols) fail(where, "wrong number of columns");
    const double t = parse_double(cells[0], where);
    if (std::abs(t - grid.time(row)) > 1e-9 * std::max(1.0, grid.horizon)) fail(where, "time does not match the grid");
    for (Eigen::Index k = 0; k < state_dim; ++k) c.states(k, row) = parse_double(cells[static_cast<std::size_t>(1 + k)], where);
    for (Eigen::Index j = 0; j < input_dim; ++j) {
      c.inputs(j, row) = parse_double(cells[static_cast<std::size_t>(1 + state_dim + j)], where);
    }
    ++row;
  }
  if (row != grid.points()) {
    throw InputError(path.string() + ": expected " + std::to_string(grid.points()) + " rows, found " + std::to_string(row));
  }
  return c;
}

void write_results(const fs::path& dir, const ProblemSpec& spec, const SolveResult& result) {
  fs::create_directories(dir);
  write_trajectory_csv(dir / "trajectory.csv", result.trajectory);
  write_populations_csv(dir / "populations.csv", result.trajectory, spec.levels);
  write_convergence_jsonl(dir / "convergence.jsonl", result.records);
  std::ofstream out(dir / "summary.json");
  if (!out) throw InputError("cannot write summary.json");
  out << summary_json(spec, result).dump(2) << "\n";
}

namespace {

struct RunData {
  json summary;
  std::vector<json> records;
  std::vector<double> times;
};

RunData read_run(const fs::path& dir) {
  RunData run;
  const fs::path conv = dir / "convergence.jsonl";
  if (!fs::exists(conv)) throw InputError("missing " + conv.string());
  std::ifstream in(conv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      run.records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw InputError(conv.string() + ": " + e.what());
    }
  }
  run.summary = read_json_file(dir / "summary.json");
  const fs::path traj = dir / "trajectory.csv";
  std::ifstream tin(traj);
  if (!tin) throw InputError("missing " + traj.string());
  std::getline(tin, line);
  while (std::getline(tin, line)) {
    if (line.empty()) continue;
    run.times.push_back(parse_double(line.substr(0, line.find(',')), traj.string()));
  }
  return run;
}

json run_report(const RunData& r) {
  std::vector<double> decrease;
  for (const auto& rec : r.records) decrease.push_back(-rec.at("Dg").get<double>());
  return json{{"iterations", r.summary.at("iterations")},
              {"status", r.summary.at("status")},
              {"final_cost", r.summary.at("final_cost")},
              {"neg_Dg", decrease},
              {"peak_populations", r.summary.at("peak_populations")}};
}

}  // namespace

json compare_runs(const fs::path& a, const fs::path& b) {
  const RunData ra = read_run(a);
  const RunData rb = read_run(b);
  if (ra.times.size() != rb.times.size()) {
    throw InputError("grid mismatch: " + std::to_string(ra.times.size()) + " vs " +
                     std::to_string(rb.times.size()) + " nodes");
  }
  for (std::size_t i = 0; i < ra.times.size(); ++i) {
    if (ra.times[i] != rb.times[i]) throw InputError("grid mismatch at node " + std::to_string(i));
  }
  json rep;
  rep["a"] = run_report(ra);
  rep["b"] = run_report(rb);
  rep["a"]["dir"] = a.string();
  rep["b"]["dir"] = b.string();

  const auto& da = rep["a"]["neg_Dg"];
  const auto& db = rep["b"]["neg_Dg"];
  double max_dg_diff = 0.0;
  for (std::size_t i = 0; i < std::min(da.size(), db.size()); ++i) {
    max_dg_diff = std::max(max_dg_diff, std::abs(da[i].get<double>() - db[i].get<double>()));
  }
  std::vector<double> peak_diff;
  const auto& pa = rep["a"]["peak_populations"];
  const auto& pb = rep["b"]["peak_populations"];
  for (std::size_t i = 0; i < std::min(pa.size(), pb.size()); ++i) {
    peak_diff.push_back(pb[i].get<double>() - pa[i].get<double>());
  }
  rep["diff"] = {{"iterations", rep["b"]["iterations"].get<int>() - rep["a"]["iterations"].get<int>()},
                 {"final_cost", rep["b"]["final_cost"].get<double>() - rep["a"]["final_cost"].get<double>()},
                 {"neg_Dg_max_abs", max_dg_diff},
                 {"neg_Dg_length", static_cast<int>(db.size()) - static_cast<int>(da.size())},
                 {"peak_populations", peak_diff}};
  return rep;
}

}  // namespace qpronto::io
