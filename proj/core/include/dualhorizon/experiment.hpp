#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualhorizon/config.hpp"
#include "dualhorizon/system_model.hpp"

namespace dualhorizon::sim {

/// Error threshold used for the steps-to-convergence metric.
constexpr double kConvergedError = 1e-6;

struct Summary {
  double initial_error = 0.0;
  double final_error = 0.0;
  /// First k from which every later err_norm is <= kConvergedError.
  std::optional<int> steps_to_tol;
  double max_identity_residual = 0.0;
  int monotonicity_violations = 0;
};

struct RunReport {
  Mode mode = Mode::kMhe;
  std::string system_label;
  int horizon = 1;
  std::uint64_t seed = 0;
  std::map<std::string, Matrix> gains;
  std::optional<double> spectral_radius;
  std::optional<double> cost;
  std::map<std::string, double> metrics;  // mode-specific scalars
  Trace trace;
  std::string csv;       // empty for synthesis-only runs
  std::string csv_path;  // set when written to disk
  Summary summary;
  std::vector<std::string> warnings;
};

/// Dispatches on cfg.mode / cfg.action. Deterministic in (cfg, seed). Writes
/// the CSV under cfg.output_dir when it is set.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Fixed per-mode CSV columns, 17 significant digits.
std::string render_csv(Mode mode, const Trace& trace);

/// Recomputes the summary from a trace.
Summary summarize(Mode mode, const Trace& trace);

std::string report_to_json(const RunReport& report, int indent = 2);

struct ComparisonRow {
  std::string label;
  std::string mode;
  int horizon = 1;
  std::optional<double> spectral_radius;
  double final_error = 0.0;
  std::optional<int> steps_to_tol;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::string to_csv() const;
};

/// Aligns at least two reports over the same system. Throws ConfigError
/// otherwise.
ComparisonTable compare_runs(const std::vector<RunReport>& reports);

struct SweepRow {
  std::uint64_t seed = 0;
  int state_dim = 0;
  int output_dim = 0;
  int horizon = 0;
  double spectral_radius = 0.0;
  double final_error = 0.0;
};

/// Random observable systems, one per seed (cfg.seed + i), each observed with
/// N = n + offset for every offset. Runs concurrently; row order is fixed.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Formats with 17 significant digits.
std::string format_double(double v);

}  // namespace dualhorizon::sim
