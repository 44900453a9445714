#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dualhorizon/linalg.hpp"
#include "dualhorizon/minimizer.hpp"
#include "dualhorizon/registry.hpp"

namespace dualhorizon::sim {

enum class Mode {
  kDeadbeatObserver,
  kMhe,
  kMinEnergy,
  kNlObserver,
  kNlTracker,
  kDualize,
  kCheckAssumptions,
  kSweep,
};

/// Synthesis only (gains, JSON) or a simulated run (trace, CSV).
enum class Action { kSynthesize, kRun };

const char* to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(const std::string& text);

/// Either explicit matrices or a registry entry.
struct SystemBlock {
  Matrix A;
  Matrix B;
  Matrix C;
  std::string name;  // empty for explicit matrices
  registry::Params params;

  bool is_linear() const { return name.empty(); }
  int state_dim() const;
  /// Stable text identifying the system, used to align reports.
  std::string label() const;
};

struct SweepSpec {
  int count = 20;
  int min_state_dim = 2;
  int max_state_dim = 4;
  int output_dim = 1;
  std::vector<int> horizon_offsets = {0, 1, 2};
  int threads = 0;  // 0: hardware concurrency
};

struct ExperimentConfig {
  Mode mode = Mode::kMhe;
  Action action = Action::kRun;
  SystemBlock system;
  int horizon = 1;
  std::optional<Matrix> R;
  std::string stage_cost = "quad";
  std::vector<std::pair<double, double>> stage_cost_table;
  std::optional<Vector> x0;
  std::optional<Vector> z0;
  std::optional<Vector> xhat0;
  int steps = 0;
  std::uint64_t seed = 0;
  std::string output_dir;
  optim::Minimizer minimizer;
  bool minimizer_box_set = false;
  std::string backend;  // "exhaustive" | "shooting" | "" (auto)
  std::vector<Vector> finite_inputs;
  double terminal_tolerance = 1e-6;
  std::string direction = "control-to-estimation";
  std::string gain_family = "optimal";
  int samples = 200;
  std::string alpha = "identity";
  SweepSpec sweep;
};

/// Reads and validates a JSON experiment document. Throws ConfigError with
/// every violation found; parse errors carry the byte offset.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

/// Reads a system document ({"A": ..., "C": ...} or {"name": ..., "params":
/// ...}), either bare or nested under "system".
SystemBlock load_system(const std::string& path);
SystemBlock parse_system(const std::string& json_text);

/// Parses "diag:r1,r2,...", "eye:c" or a plain number.
Matrix parse_weight(const std::string& text, int dim);

/// Comma-separated numbers.
Vector parse_vector(const std::string& text);

/// Checks the mode-specific requirements. Throws ConfigError listing every
/// violation.
void validate(const ExperimentConfig& cfg);

}  // namespace dualhorizon::sim
