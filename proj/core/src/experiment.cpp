#include "dualhorizon/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dualhorizon/deadbeat.hpp"
#include "dualhorizon/errors.hpp"
#include "dualhorizon/linear_mhe.hpp"
#include "dualhorizon/min_energy.hpp"
#include "dualhorizon/nonlinear_observer.hpp"
#include "dualhorizon/random_systems.hpp"
#include "dualhorizon/tracker.hpp"

namespace dualhorizon::sim {

using nlohmann::json;

namespace {

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string what = context + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::kConfig: {
      const auto* ce = dynamic_cast<const ConfigError*>(&e);
      throw ConfigError(what, ce ? ce->violations() : std::vector<std::string>{});
    }
    case ErrorKind::kDimension: throw DimensionError(what);
    case ErrorKind::kSynthesis: throw SynthesisError(what);
    case ErrorKind::kSolver: {
      const auto* se = dynamic_cast<const SolverError*>(&e);
      throw SolverError(what, se ? se->best_residual() : std::nan(""));
    }
    case ErrorKind::kInfeasible: throw InfeasibleError(what);
    case ErrorKind::kDivergence: throw DivergenceError(what);
  }
  throw Error(e.kind(), what);
}

LinearSystem linear_of(const SystemBlock& s) { return LinearSystem(s.A, s.B, s.C); }

Vector or_zeros(const std::optional<Vector>& v, int dim) {
  return v ? *v : Vector::Zero(dim);
}

Matrix weight_or_identity(const ExperimentConfig& cfg, Eigen::Index dim) {
  return cfg.R ? *cfg.R : Matrix::Identity(dim, dim);
}

bool is_named(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

NonlinearSystem observer_system(const ExperimentConfig& cfg) {
  if (cfg.system.is_linear()) return as_nonlinear(linear_of(cfg.system));
  if (!is_named(registry::nonlinear_names(), cfg.system.name)) {
    throw ConfigError({"system: '" + cfg.system.name + "' is not an observer plant"});
  }
  return registry::make_nonlinear(cfg.system.name, cfg.system.params);
}

ControlledSystem tracker_system(const ExperimentConfig& cfg) {
  ControlledSystem sys = cfg.system.is_linear()
                             ? registry::make_linear_controlled(linear_of(cfg.system))
                             : registry::make_controlled(cfg.system.name, cfg.system.params);
  if (!cfg.finite_inputs.empty()) {
    for (const Vector& u : cfg.finite_inputs) {
      if (u.size() != sys.input_dim) {
        throw ConfigError({"inputs: entries must have " + std::to_string(sys.input_dim) +
                           " components"});
      }
    }
    sys.input_set = FiniteInputSet{cfg.finite_inputs};
  }
  return sys;
}

/// Stage cost on vectors of dimension `dim`. "minenergy" builds the weight
/// that reproduces the linear minimum-energy cost (needs B).
nl::StageCost stage_cost_of(const ExperimentConfig& cfg, int dim) {
  if (cfg.stage_cost == "table") return nl::tabulated(cfg.stage_cost_table);
  if (cfg.stage_cost == "minenergy") {
    if (!cfg.system.is_linear() || cfg.system.B.size() == 0) {
      throw ConfigError({"stage_cost: 'minenergy' needs a linear system with B"});
    }
    return nl::quadratic(min_energy::tracker_stage_weight(
        cfg.system.B, weight_or_identity(cfg, cfg.system.B.cols())));
  }
  if (cfg.stage_cost == "quad" && cfg.R) return nl::quadratic(*cfg.R);
  return nl::parse_stage_cost(cfg.stage_cost, dim);
}

optim::Minimizer minimizer_of(const ExperimentConfig& cfg, int dim) {
  optim::Minimizer m = cfg.minimizer;
  if (cfg.minimizer_box_set) {
    if (m.lower.size() == 1 && dim != 1) {
      m.lower = Vector::Constant(dim, m.lower(0));
      m.upper = Vector::Constant(dim, m.upper(0));
    }
    return m;
  }
  double scale = 1.0;
  for (const auto* v : {&cfg.x0, &cfg.z0, &cfg.xhat0}) {
    if (*v) scale = std::max(scale, v->value().cwiseAbs().maxCoeff());
  }
  const optim::Minimizer box = optim::Minimizer::box(dim, 2.0 * scale);
  m.lower = box.lower;
  m.upper = box.upper;
  return m;
}

void put_gain(RunReport& report, const std::string& key, const Matrix& m) {
  report.gains[key] = m;
}

double spectral_radius_of(const Matrix& m) { return linalg::spectral_radius(m); }

void run_deadbeat(const ExperimentConfig& cfg, RunReport& report) {
  const SystemBlock& s = cfg.system;
  const int n = static_cast<int>(s.A.rows());
  if (s.C.rows() == 1) {
    const Matrix l = deadbeat::observer_gain(s.A, s.C);
    put_gain(report, "L", l);
    report.spectral_radius = spectral_radius_of(s.A - l * s.C);
  } else {
    report.warnings.push_back("gain form needs a scalar output; only the stacked solve applies");
  }
  if (cfg.action != Action::kRun) return;
  deadbeat::EquationStackSolver solver;
  solver.strategy = deadbeat::EquationStackSolver::Strategy::kExactLinear;
  report.trace = deadbeat::run_observer(as_nonlinear(linear_of(s)), cfg.horizon,
                                        or_zeros(cfg.z0, n), *cfg.x0, cfg.steps, solver);
}

void run_mhe(const ExperimentConfig& cfg, RunReport& report) {
  const SystemBlock& s = cfg.system;
  const int n = static_cast<int>(s.A.rows());
  const Matrix r = weight_or_identity(cfg, s.C.rows());
  const mhe::ObserverGain g = mhe::observer_gain(s.A, s.C, cfg.horizon, r);
  put_gain(report, "L", g.L);
  put_gain(report, "Q", g.Q);
  put_gain(report, "H", g.H);
  report.spectral_radius = g.spectral_radius;
  report.metrics["symmetry_residual"] = mhe::symmetry_residual(
      mhe::HorizonWeights{cfg.horizon, r, g.Q, g.H});
  if (cfg.action != Action::kRun) return;
  report.trace = mhe::run(s.A, s.C, cfg.horizon, r, or_zeros(cfg.z0, n), *cfg.x0, cfg.steps);
}

void run_min_energy(const ExperimentConfig& cfg, RunReport& report) {
  const SystemBlock& s = cfg.system;
  const int n = static_cast<int>(s.A.rows());
  const Matrix r = weight_or_identity(cfg, s.B.cols());
  const Matrix k = min_energy::kleinman_gain(s.A, s.B, cfg.horizon, r);
  put_gain(report, "K", k);
  put_gain(report, "G", min_energy::weighted_gramian(s.A, s.B, cfg.horizon, r));
  report.spectral_radius = spectral_radius_of(s.A - s.B * k);
  if (!min_energy::cost_is_definite(s.A)) {
    report.warnings.push_back("A is singular: V is only positive semidefinite in xhat - x");
  }
  const Vector xhat0 = or_zeros(cfg.xhat0, n);
  if (cfg.x0) {
    const min_energy::Solution sol =
        min_energy::solve(s.A, s.B, cfg.horizon, r, xhat0, *cfg.x0);
    report.cost = sol.cost;
    report.metrics["V"] = min_energy::optimal_cost_V(s.A, s.B, cfg.horizon, r, xhat0, *cfg.x0);
    report.metrics["terminal_residual"] = sol.terminal_residual;
    Matrix inputs(s.B.cols(), static_cast<Eigen::Index>(sol.inputs.size()));
    for (size_t i = 0; i < sol.inputs.size(); ++i) {
      inputs.col(static_cast<Eigen::Index>(i)) = sol.inputs[i];
    }
    put_gain(report, "inputs", inputs);
  }
  if (cfg.action != Action::kRun) return;
  report.trace = min_energy::run_tracker(s.A, s.B, cfg.horizon, r, xhat0, *cfg.x0, cfg.steps);
}

void run_nl_observer(const ExperimentConfig& cfg, RunReport& report) {
  const NonlinearSystem sys = observer_system(cfg);
  const nl::StageCost cost = stage_cost_of(cfg, sys.output_dim);
  const optim::Minimizer m = minimizer_of(cfg, sys.state_dim);
  report.trace = nl::run_observer(sys, cost, cfg.horizon, or_zeros(cfg.z0, sys.state_dim),
                                  *cfg.x0, cfg.steps, m);
  if (static_cast<int>(report.trace.size()) >= cfg.horizon) {
    const nl::JSumCheck check = nl::check_jsum_bound(sys, cost, cfg.horizon, report.trace,
                                                     nl::parse_class_k(cfg.alpha));
    report.metrics["jsum_weighted"] = check.weighted_sum;
    report.metrics["jsum_bound"] = check.bound;
  }
  int degraded = 0;
  for (const TraceRecord& rec : report.trace) degraded += rec.feasible ? 0 : 1;
  report.metrics["degraded_steps"] = degraded;
  if (!sys.declared.uniformly_observable) {
    report.warnings.push_back("system does not declare uniform observability");
  }
}

nl::TrackerProgram tracker_program(const ExperimentConfig& cfg) {
  nl::TrackerProgram program;
  program.system = tracker_system(cfg);
  program.cost = stage_cost_of(cfg, program.system.state_dim);
  program.horizon = cfg.horizon;
  program.terminal_tolerance = cfg.terminal_tolerance;
  if (cfg.backend == "exhaustive") {
    program.backend = nl::TrackerProgram::Backend::kExhaustive;
  } else if (cfg.backend == "shooting") {
    program.backend = nl::TrackerProgram::Backend::kShooting;
  } else {
    program.backend = program.system.is_finite() ? nl::TrackerProgram::Backend::kExhaustive
                                                 : nl::TrackerProgram::Backend::kShooting;
  }
  if (program.backend == nl::TrackerProgram::Backend::kExhaustive &&
      !program.system.is_finite()) {
    throw ConfigError({"backend: 'exhaustive' needs a finite input set"});
  }
  return program;
}

void run_nl_tracker(const ExperimentConfig& cfg, RunReport& report) {
  const nl::TrackerProgram program = tracker_program(cfg);
  const int n = program.system.state_dim;
  report.trace = nl::run_tracker(program, or_zeros(cfg.xhat0, n), *cfg.x0, cfg.steps);
  if (!report.trace.empty() && report.trace.front().cost_V) {
    report.cost = *report.trace.front().cost_V;
  }
  report.metrics["decrease_violations"] = nl::count_decrease_violations(report.trace);
  report.metrics["equilibrium_reference"] =
      nl::is_equilibrium(program.system, *cfg.x0) ? 1.0 : 0.0;
}

void run_dualize(const ExperimentConfig& cfg, RunReport& report) {
  const SystemBlock& s = cfg.system;
  const bool to_estimation = cfg.direction == "control-to-estimation";
  const min_energy::GainFamily family = cfg.gain_family == "deadbeat"
                                            ? min_energy::GainFamily::kDeadbeat
                                            : min_energy::GainFamily::kOptimal;
  const Matrix& coupling = to_estimation ? s.B : s.C;
  const Eigen::Index rdim = to_estimation ? coupling.cols() : coupling.rows();
  const Matrix r = weight_or_identity(cfg, rdim);

  min_energy::GainProblem primal;
  primal.kind = to_estimation ? min_energy::GainProblem::Kind::kControl
                              : min_energy::GainProblem::Kind::kEstimation;
  primal.A = s.A;
  primal.coupling = coupling;
  primal.horizon = cfg.horizon;
  primal.R = r;
  primal.gain = primal.synthesize(family);

  const Matrix dual_gain = min_energy::dualize(
      s.A, coupling, cfg.horizon, r,
      to_estimation ? min_energy::Direction::kControlToEstimation
                    : min_energy::Direction::kEstimationToControl,
      family);
  put_gain(report, to_estimation ? "K" : "L", primal.gain);
  put_gain(report, to_estimation ? "L_dual" : "K_dual", dual_gain);
  report.metrics["duality_gap"] =
      (primal.gain - dual_gain.transpose()).cwiseAbs().maxCoeff();
  const min_energy::GainProblem round_trip = primal.dual().dual();
  report.metrics["involution_gap"] =
      std::max((round_trip.A - primal.A).cwiseAbs().maxCoeff(),
               (round_trip.gain - primal.gain).cwiseAbs().maxCoeff());
  report.spectral_radius = to_estimation ? spectral_radius_of(s.A - s.B * primal.gain)
                                         : spectral_radius_of(s.A - primal.gain * s.C);
}

void run_check_assumptions(const ExperimentConfig& cfg, RunReport& report) {
  const nl::ClassKFunction alpha = nl::parse_class_k(cfg.alpha);
  report.metrics["alpha_class_k_on_grid"] = nl::is_class_k_on_grid(alpha) ? 1.0 : 0.0;

  if (!cfg.system.is_linear() && is_named(registry::controlled_names(), cfg.system.name)) {
    const ControlledSystem sys = tracker_system(cfg);
    const nl::StageCost cost = stage_cost_of(cfg, sys.state_dim);
    const optim::Minimizer box = minimizer_of(cfg, sys.state_dim);
    const nl::StageCostCheck sc =
        nl::check_stage_cost(cost, box.lower, box.upper, cfg.samples, cfg.seed);
    report.metrics["stage_cost_ok"] = sc.ok() ? 1.0 : 0.0;
    report.metrics["stage_cost_bound_violations"] = sc.bound_violations;
    report.metrics["declared_continuous_optimal_cost"] =
        sys.declared.continuous_optimal_cost ? 1.0 : 0.0;
    return;
  }

  const NonlinearSystem sys = observer_system(cfg);
  const nl::StageCost cost = stage_cost_of(cfg, sys.output_dim);
  const optim::Minimizer m = minimizer_of(cfg, sys.state_dim);
  nl::SampleSpec spec;
  spec.lower = m.lower;
  spec.upper = m.upper;
  spec.samples = cfg.samples;
  spec.seed = cfg.seed;
  spec.alpha = alpha;

  const nl::ObservabilityReport obs =
      nl::check_uniform_observability(sys, cost, cfg.horizon, spec);
  report.metrics["observability_samples"] = obs.samples;
  report.metrics["observability_vacuous"] = obs.vacuous;
  report.metrics["observability_violations"] = obs.violations;
  report.metrics["observability_min_ratio"] = obs.min_ratio;

  const nl::DecayReport decay = nl::check_J_decay(sys, cost, cfg.horizon, spec, m);
  report.metrics["decay_samples"] = decay.samples;
  report.metrics["decay_violations"] = decay.violations;
  report.metrics["decay_max_excess"] = decay.max_excess;

  const Vector ylo = Vector::Constant(sys.output_dim, spec.lower.minCoeff());
  const Vector yhi = Vector::Constant(sys.output_dim, spec.upper.maxCoeff());
  const nl::StageCostCheck sc = nl::check_stage_cost(cost, ylo, yhi, cfg.samples, cfg.seed);
  report.metrics["stage_cost_ok"] = sc.ok() ? 1.0 : 0.0;
  report.metrics["stage_cost_bound_violations"] = sc.bound_violations;
  report.metrics["declared_uniformly_observable"] = sys.declared.uniformly_observable ? 1.0 : 0.0;
  report.metrics["declared_unique_stack_solution"] =
      sys.declared.unique_stack_solution ? 1.0 : 0.0;
}

void run_sweep_mode(const ExperimentConfig& cfg, RunReport& report) {
  const std::vector<SweepRow> rows = run_sweep(cfg);
  report.csv = sweep_to_csv(rows);
  double worst = 0.0;
  int unstable = 0;
  for (const SweepRow& row : rows) {
    worst = std::max(worst, row.spectral_radius);
    unstable += row.spectral_radius < 1.0 ? 0 : 1;
  }
  report.spectral_radius = worst;
  report.metrics["instances"] = static_cast<double>(rows.size());
  report.metrics["unstable"] = unstable;
}

std::string csv_file_name(Mode mode) { return std::string(to_string(mode)) + ".csv"; }

void append_opt(std::string& line, const std::optional<double>& v) {
  line += ',';
  if (v) line += format_double(*v);
}

void append_vec(std::string& line, const std::optional<Vector>& v, Eigen::Index dim) {
  for (Eigen::Index i = 0; i < dim; ++i) {
    line += ',';
    if (v && i < v->size()) line += format_double((*v)(i));
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_csv(Mode mode, const Trace& trace) {
  std::string out;
  const Eigen::Index n = trace.empty() ? 0 : trace.front().x.size();
  switch (mode) {
    case Mode::kDeadbeatObserver: {
      out = "k";
      for (Eigen::Index i = 0; i < n; ++i) out += ",x" + std::to_string(i + 1);
      for (Eigen::Index i = 0; i < n; ++i) out += ",xhat" + std::to_string(i + 1);
      out += ",err_norm\n";
      for (const TraceRecord& rec : trace) {
        std::string line = std::to_string(rec.k);
        append_vec(line, rec.x, n);
        append_vec(line, rec.xhat, n);
        line += ',' + format_double(rec.err_norm);
        out += line + '\n';
      }
      return out;
    }
    case Mode::kMhe:
      out = "k,err_norm,J,lyap_lhs,lyap_rhs,identity_residual\n";
      for (const TraceRecord& rec : trace) {
        std::string line = std::to_string(rec.k) + ',' + format_double(rec.err_norm);
        append_opt(line, rec.cost_J);
        append_opt(line, rec.lyap_lhs);
        append_opt(line, rec.lyap_rhs);
        append_opt(line, rec.identity_residual);
        out += line + '\n';
      }
      return out;
    case Mode::kMinEnergy: {
      Eigen::Index m = 0;
      for (const TraceRecord& rec : trace) {
        if (rec.u) m = std::max(m, rec.u->size());
      }
      out = "k,err_norm,V";
      for (Eigen::Index i = 0; i < m; ++i) out += ",u" + std::to_string(i + 1);
      out += '\n';
      for (const TraceRecord& rec : trace) {
        std::string line = std::to_string(rec.k) + ',' + format_double(rec.err_norm);
        append_opt(line, rec.cost_V);
        append_vec(line, rec.u, m);
        out += line + '\n';
      }
      return out;
    }
    case Mode::kNlObserver:
    case Mode::kNlTracker: {
      const bool observer = mode == Mode::kNlObserver;
      out = observer ? "k,err_norm,J,feasible\n" : "k,err_norm,V,feasible\n";
      for (const TraceRecord& rec : trace) {
        std::string line = std::to_string(rec.k) + ',' + format_double(rec.err_norm);
        append_opt(line, observer ? rec.cost_J : rec.cost_V);
        line += rec.feasible ? ",1" : ",0";
        out += line + '\n';
      }
      return out;
    }
    default:
      return {};
  }
}

Summary summarize(Mode mode, const Trace& trace) {
  Summary s;
  if (trace.empty()) return s;
  s.initial_error = trace.front().err_norm;
  s.final_error = trace.back().err_norm;
  for (size_t i = trace.size(); i-- > 0;) {
    if (!(trace[i].err_norm <= kConvergedError)) break;
    s.steps_to_tol = trace[i].k;
  }
  for (const TraceRecord& rec : trace) {
    if (rec.identity_residual) {
      s.max_identity_residual = std::max(s.max_identity_residual, *rec.identity_residual);
    }
  }
  if (mode == Mode::kMhe) {
    for (const TraceRecord& rec : trace) {
      if (rec.lyap_lhs && rec.lyap_rhs &&
          *rec.lyap_lhs > *rec.lyap_rhs + 1e-12 * (1.0 + std::abs(*rec.lyap_rhs))) {
        ++s.monotonicity_violations;
      }
    }
  } else if (mode == Mode::kMinEnergy || mode == Mode::kNlTracker) {
    for (size_t i = 0; i + 1 < trace.size(); ++i) {
      const auto& a = trace[i].cost_V;
      const auto& b = trace[i + 1].cost_V;
      if (a && b && *b > *a + 1e-8 * (1.0 + std::abs(*a))) ++s.monotonicity_violations;
    }
  }
  return s;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  RunReport report;
  report.mode = cfg.mode;
  report.horizon = cfg.horizon;
  report.seed = cfg.seed;
  report.system_label = cfg.mode == Mode::kSweep ? "random" : cfg.system.label();
  try {
    switch (cfg.mode) {
      case Mode::kDeadbeatObserver: run_deadbeat(cfg, report); break;
      case Mode::kMhe: run_mhe(cfg, report); break;
      case Mode::kMinEnergy: run_min_energy(cfg, report); break;
      case Mode::kNlObserver: run_nl_observer(cfg, report); break;
      case Mode::kNlTracker: run_nl_tracker(cfg, report); break;
      case Mode::kDualize: run_dualize(cfg, report); break;
      case Mode::kCheckAssumptions: run_check_assumptions(cfg, report); break;
      case Mode::kSweep: run_sweep_mode(cfg, report); break;
    }
  } catch (const Error& e) {
    rethrow_with_context(e, to_string(cfg.mode));
  }
  if (!report.trace.empty()) {
    report.csv = render_csv(cfg.mode, report.trace);
    report.summary = summarize(cfg.mode, report.trace);
  }
  if (!cfg.output_dir.empty() && !report.csv.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    const std::filesystem::path path =
        std::filesystem::path(cfg.output_dir) / csv_file_name(cfg.mode);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError({"output: cannot write '" + path.string() + "'"});
    out << report.csv;
    report.csv_path = path.string();
  }
  return report;
}

std::string report_to_json(const RunReport& report, int indent) {
  json j;
  j["mode"] = to_string(report.mode);
  j["system"] = report.system_label;
  j["N"] = report.horizon;
  j["seed"] = report.seed;
  json gains = json::object();
  for (const auto& [k, m] : report.gains) gains[k] = matrix_json(m);
  j["gains"] = gains;
  j["spectral_radius"] =
      report.spectral_radius ? number_or_null(*report.spectral_radius) : json(nullptr);
  j["cost"] = report.cost ? number_or_null(*report.cost) : json(nullptr);
  json metrics = json::object();
  for (const auto& [k, v] : report.metrics) metrics[k] = number_or_null(v);
  j["metrics"] = metrics;
  j["records"] = report.trace.size();
  if (!report.csv_path.empty()) j["csv_path"] = report.csv_path;
  json summary;
  summary["initial_error"] = number_or_null(report.summary.initial_error);
  summary["final_error"] = number_or_null(report.summary.final_error);
  summary["steps_to_tol"] =
      report.summary.steps_to_tol ? json(*report.summary.steps_to_tol) : json(nullptr);
  summary["max_identity_residual"] = number_or_null(report.summary.max_identity_residual);
  summary["monotonicity_violations"] = report.summary.monotonicity_violations;
  j["summary"] = summary;
  j["warnings"] = report.warnings;
  return j.dump(indent);
}

std::string ComparisonTable::to_csv() const {
  std::string out = "label,mode,N,spectral_radius,final_error,steps_to_tol\n";
  for (const ComparisonRow& row : rows) {
    out += row.label + ',' + row.mode + ',' + std::to_string(row.horizon) + ',';
    if (row.spectral_radius) out += format_double(*row.spectral_radius);
    out += ',' + format_double(row.final_error) + ',';
    if (row.steps_to_tol) out += std::to_string(*row.steps_to_tol);
    out += '\n';
  }
  return out;
}

ComparisonTable compare_runs(const std::vector<RunReport>& reports) {
  if (reports.size() < 2) throw ConfigError({"compare: need at least two reports"});
  for (const RunReport& r : reports) {
    if (r.system_label != reports.front().system_label) {
      throw ConfigError({"compare: reports describe different systems"});
    }
  }
  ComparisonTable table;
  for (size_t i = 0; i < reports.size(); ++i) {
    const RunReport& r = reports[i];
    ComparisonRow row;
    row.label = "run" + std::to_string(i);
    row.mode = to_string(r.mode);
    row.horizon = r.horizon;
    row.spectral_radius = r.spectral_radius;
    row.final_error = r.summary.final_error;
    row.steps_to_tol = r.summary.steps_to_tol;
    table.rows.push_back(row);
  }
  return table;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  const SweepSpec& spec = cfg.sweep;
  const size_t offsets = spec.horizon_offsets.size();
  std::vector<SweepRow> rows(static_cast<size_t>(spec.count) * offsets);

  const auto one = [&](int i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    random::Engine rng(seed);
    const int span = spec.max_state_dim - spec.min_state_dim + 1;
    const int n = spec.min_state_dim +
                  std::min(span - 1, static_cast<int>(random::uniform(rng, 0.0, span)));
    const int p = std::min(spec.output_dim, n);
    const LinearSystem sys = random::observable_system(rng, n, p, n);
    const Vector x0 = random::uniform_vector(rng, n);
    const Matrix r = Matrix::Identity(p, p);
    for (size_t j = 0; j < offsets; ++j) {
      const int horizon = n + spec.horizon_offsets[j];
      const mhe::ObserverGain g = mhe::observer_gain(sys.A(), sys.C(), horizon, r);
      const Trace trace =
          mhe::run(sys.A(), sys.C(), horizon, r, Vector::Zero(n), x0, cfg.steps);
      SweepRow& row = rows[static_cast<size_t>(i) * offsets + j];
      row.seed = seed;
      row.state_dim = n;
      row.output_dim = p;
      row.horizon = horizon;
      row.spectral_radius = g.spectral_radius;
      row.final_error = trace.back().err_norm;
    }
  };

  int threads = spec.threads > 0 ? spec.threads
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, spec.count);
  std::vector<std::future<void>> jobs;
  for (int t = 0; t < threads; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (int i = t; i < spec.count; i += threads) one(i);
    }));
  }
  for (auto& job : jobs) job.get();
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "seed,state_dim,output_dim,N,spectral_radius,final_error\n";
  for (const SweepRow& row : rows) {
    out += std::to_string(row.seed) + ',' + std::to_string(row.state_dim) + ',' +
           std::to_string(row.output_dim) + ',' + std::to_string(row.horizon) + ',' +
           format_double(row.spectral_radius) + ',' + format_double(row.final_error) + '\n';
  }
  return out;
}

}  // namespace dualhorizon::sim
