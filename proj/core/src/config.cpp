#include "dualhorizon/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dualhorizon/errors.hpp"

namespace dualhorizon::sim {

using nlohmann::json;

namespace {

/// Accumulates violations instead of failing on the first.
class Problems {
 public:
  void add(std::string msg) { items_.push_back(std::move(msg)); }
  bool empty() const { return items_.empty(); }
  [[noreturn]] void raise() { throw ConfigError(std::move(items_)); }
  void raise_if_any() {
    if (!items_.empty()) raise();
  }

 private:
  std::vector<std::string> items_;
};

std::optional<Matrix> read_matrix(const json& j, const std::string& field, Problems& p) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) {
    p.add(field + ": expected a number or a nonempty array");
    return std::nullopt;
  }
  // A flat array is a single row.
  if (!j.front().is_array()) {
    Matrix m(1, static_cast<Eigen::Index>(j.size()));
    for (size_t c = 0; c < j.size(); ++c) {
      if (!j[c].is_number()) {
        p.add(field + ": entry " + std::to_string(c) + " is not a number");
        return std::nullopt;
      }
      m(0, static_cast<Eigen::Index>(c)) = j[c].get<double>();
    }
    return m;
  }
  const size_t rows = j.size();
  const size_t cols = j.front().size();
  if (cols == 0) {
    p.add(field + ": rows must be nonempty");
    return std::nullopt;
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      p.add(field + ": row " + std::to_string(r) + " has " +
            std::to_string(j[r].is_array() ? j[r].size() : 0) + " entries, expected " +
            std::to_string(cols));
      return std::nullopt;
    }
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        p.add(field + ": entry (" + std::to_string(r) + ", " + std::to_string(c) +
              ") is not a number");
        return std::nullopt;
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  if (!m.allFinite()) {
    p.add(field + ": entries must be finite");
    return std::nullopt;
  }
  return m;
}

std::optional<Vector> read_vector(const json& j, const std::string& field, Problems& p) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty()) {
    p.add(field + ": expected a number or a nonempty array of numbers");
    return std::nullopt;
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      p.add(field + ": entry " + std::to_string(i) + " is not a number");
      return std::nullopt;
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void read_system(const json& j, SystemBlock& out, Problems& p) {
  if (!j.is_object()) {
    p.add("system: expected an object");
    return;
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) {
      p.add("system.name: expected a string");
    } else {
      out.name = j["name"].get<std::string>();
    }
    if (j.contains("params")) {
      if (!j["params"].is_object()) {
        p.add("system.params: expected an object");
      } else {
        for (const auto& [key, value] : j["params"].items()) {
          if (!value.is_number()) {
            p.add("system.params." + key + ": expected a number");
          } else {
            out.params[key] = value.get<double>();
          }
        }
      }
    }
    return;
  }
  if (!j.contains("A")) {
    p.add("system: needs either 'name' or matrix 'A'");
    return;
  }
  if (auto a = read_matrix(j["A"], "A", p)) {
    if (a->rows() != a->cols()) {
      p.add("A: expected a square matrix, got " + shape(*a));
    } else {
      out.A = *a;
    }
  }
  const Eigen::Index n = out.A.rows();
  if (j.contains("B")) {
    if (auto b = read_matrix(j["B"], "B", p)) {
      // A flat array for B reads as a row; treat it as a column when that fits.
      if (n > 0 && b->rows() == 1 && b->cols() == n && n != 1) *b = b->transpose().eval();
      if (n > 0 && b->rows() != n) {
        p.add("B: expected " + std::to_string(n) + " rows, got " + shape(*b));
      } else {
        out.B = *b;
      }
    }
  }
  if (j.contains("C")) {
    if (auto c = read_matrix(j["C"], "C", p)) {
      if (n > 0 && c->cols() != n) {
        p.add("C: expected " + std::to_string(n) + " columns, got " + shape(*c));
      } else {
        out.C = *c;
      }
    }
  }
}

std::vector<double> split_numbers(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError({field + ": '" + item + "' is not a number"});
    }
  }
  if (out.empty()) throw ConfigError({field + ": no numbers given"});
  return out;
}

std::optional<optim::Minimizer::Strategy> parse_strategy(const std::string& s) {
  using S = optim::Minimizer::Strategy;
  if (s == "grid-gauss-newton") return S::kGridGaussNewton;
  if (s == "grid") return S::kGrid;
  if (s == "gauss-newton") return S::kGaussNewton;
  if (s == "nelder-mead") return S::kNelderMead;
  return std::nullopt;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what(),
                      {"parse error at byte " + std::to_string(e.byte)});
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read '" + path + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename T>
void read_int(const json& j, const char* key, T& out, Problems& p) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer()) {
    p.add(std::string(key) + ": expected an integer");
    return;
  }
  out = j[key].get<T>();
}

void read_double(const json& j, const char* key, double& out, Problems& p) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) {
    p.add(std::string(key) + ": expected a number");
    return;
  }
  out = j[key].get<double>();
}

void read_string(const json& j, const char* key, std::string& out, Problems& p) {
  if (!j.contains(key)) return;
  if (!j[key].is_string()) {
    p.add(std::string(key) + ": expected a string");
    return;
  }
  out = j[key].get<std::string>();
}

}  // namespace

const char* to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::kDeadbeatObserver: return "deadbeat-observer";
    case Mode::kMhe: return "mhe";
    case Mode::kMinEnergy: return "min-energy";
    case Mode::kNlObserver: return "nl-observer";
    case Mode::kNlTracker: return "nl-tracker";
    case Mode::kDualize: return "dualize";
    case Mode::kCheckAssumptions: return "check-assumptions";
    case Mode::kSweep: return "sweep";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(const std::string& text) {
  for (Mode m : {Mode::kDeadbeatObserver, Mode::kMhe, Mode::kMinEnergy, Mode::kNlObserver,
                 Mode::kNlTracker, Mode::kDualize, Mode::kCheckAssumptions, Mode::kSweep}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

int SystemBlock::state_dim() const {
  if (is_linear()) return static_cast<int>(A.rows());
  for (const std::string& n : registry::nonlinear_names()) {
    if (n == name) return registry::make_nonlinear(name, params).state_dim;
  }
  return registry::make_controlled(name, params).state_dim;
}

std::string SystemBlock::label() const {
  std::ostringstream out;
  out.precision(17);
  if (!is_linear()) {
    out << name;
    for (const auto& [k, v] : params) out << ';' << k << '=' << v;
    return out.str();
  }
  const auto dump = [&](const char* tag, const Matrix& m) {
    out << tag << '[';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c || r ? "," : "") << m(r, c);
    }
    out << ']';
  };
  dump("A", A);
  dump("B", B);
  dump("C", C);
  return out.str();
}

Matrix parse_weight(const std::string& text, int dim) {
  if (text.rfind("diag:", 0) == 0) {
    const std::vector<double> d = split_numbers(text.substr(5), "R");
    if (static_cast<int>(d.size()) != dim) {
      throw ConfigError({"R: diagonal has " + std::to_string(d.size()) +
                         " entries, expected " + std::to_string(dim)});
    }
    return Eigen::Map<const Vector>(d.data(), dim).asDiagonal();
  }
  if (text.rfind("eye:", 0) == 0) {
    const std::vector<double> d = split_numbers(text.substr(4), "R");
    if (d.size() != 1) throw ConfigError({"R: eye:c takes one number"});
    return d[0] * Matrix::Identity(dim, dim);
  }
  const std::vector<double> d = split_numbers(text, "R");
  if (d.size() != 1) throw ConfigError({"R: expected 'diag:...', 'eye:c' or a number"});
  return d[0] * Matrix::Identity(dim, dim);
}

Vector parse_vector(const std::string& text) {
  const std::vector<double> d = split_numbers(text, "vector");
  return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

SystemBlock parse_system(const std::string& json_text) {
  const json doc = parse_json(json_text);
  Problems p;
  SystemBlock out;
  read_system(doc.is_object() && doc.contains("system") ? doc["system"] : doc, out, p);
  p.raise_if_any();
  return out;
}

SystemBlock load_system(const std::string& path) { return parse_system(read_file(path)); }

ExperimentConfig parse_config(const std::string& json_text) {
  const json doc = parse_json(json_text);
  if (!doc.is_object()) throw ConfigError({"config: expected a JSON object"});
  Problems p;
  ExperimentConfig cfg;

  if (doc.contains("mode")) {
    std::optional<Mode> mode;
    if (doc["mode"].is_string()) mode = parse_mode(doc["mode"].get<std::string>());
    if (!mode) {
      p.add("mode: unknown mode " + doc["mode"].dump());
    } else {
      cfg.mode = *mode;
    }
  } else {
    p.add("mode: required");
  }
  if (doc.contains("action")) {
    const std::string a = doc["action"].is_string() ? doc["action"].get<std::string>() : "";
    if (a == "run") {
      cfg.action = Action::kRun;
    } else if (a == "synthesize") {
      cfg.action = Action::kSynthesize;
    } else {
      p.add("action: expected 'run' or 'synthesize'");
    }
  }
  if (doc.contains("system")) read_system(doc["system"], cfg.system, p);

  if (doc.contains("N")) {
    if (!doc["N"].is_number_integer()) {
      p.add("N: expected an integer");
    } else {
      cfg.horizon = doc["N"].get<int>();
    }
  }
  if (doc.contains("R")) {
    const json& r = doc["R"];
    if (r.is_string()) {
      const int dim = static_cast<int>(cfg.system.C.rows() > 0   ? cfg.system.C.rows()
                                       : cfg.system.B.cols() > 0 ? cfg.system.B.cols()
                                                                 : 1);
      try {
        cfg.R = parse_weight(r.get<std::string>(), dim);
      } catch (const ConfigError& e) {
        for (const auto& v : e.violations()) p.add(v);
      }
    } else if (auto m = read_matrix(r, "R", p)) {
      cfg.R = *m;
    }
  }
  if (doc.contains("stage_cost")) {
    const json& s = doc["stage_cost"];
    if (s.is_string()) {
      cfg.stage_cost = s.get<std::string>();
    } else if (s.is_object() && s.contains("table") && s["table"].is_array()) {
      cfg.stage_cost = "table";
      for (const json& pt : s["table"]) {
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
          p.add("stage_cost.table: entries must be [distance, value] pairs");
          break;
        }
        cfg.stage_cost_table.emplace_back(pt[0].get<double>(), pt[1].get<double>());
      }
    } else {
      p.add("stage_cost: expected a name or {\"table\": [...]}");
    }
  }
  if (doc.contains("x0")) cfg.x0 = read_vector(doc["x0"], "x0", p);
  if (doc.contains("z0")) cfg.z0 = read_vector(doc["z0"], "z0", p);
  if (doc.contains("xhat0")) cfg.xhat0 = read_vector(doc["xhat0"], "xhat0", p);
  read_int(doc, "steps", cfg.steps, p);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) {
      p.add("seed: expected a nonnegative integer");
    } else {
      cfg.seed = doc["seed"].get<std::uint64_t>();
    }
  }
  read_string(doc, "output", cfg.output_dir, p);
  read_string(doc, "backend", cfg.backend, p);
  read_double(doc, "terminal_tolerance", cfg.terminal_tolerance, p);
  read_string(doc, "direction", cfg.direction, p);
  read_string(doc, "gain_family", cfg.gain_family, p);
  read_int(doc, "samples", cfg.samples, p);
  read_string(doc, "alpha", cfg.alpha, p);

  if (doc.contains("inputs")) {
    const json& in = doc["inputs"];
    if (!in.is_array() || in.empty()) {
      p.add("inputs: expected a nonempty array");
    } else {
      for (size_t i = 0; i < in.size(); ++i) {
        if (auto v = read_vector(in[i], "inputs[" + std::to_string(i) + "]", p)) {
          cfg.finite_inputs.push_back(*v);
        }
      }
    }
  }

  if (doc.contains("minimizer")) {
    const json& m = doc["minimizer"];
    if (!m.is_object()) {
      p.add("minimizer: expected an object");
    } else {
      if (m.contains("strategy")) {
        std::optional<optim::Minimizer::Strategy> s;
        if (m["strategy"].is_string()) s = parse_strategy(m["strategy"].get<std::string>());
        if (!s) {
          p.add("minimizer.strategy: unknown strategy " + m["strategy"].dump());
        } else {
          cfg.minimizer.strategy = *s;
        }
      }
      read_int(m, "grid_points", cfg.minimizer.grid_points, p);
      read_int(m, "starts", cfg.minimizer.starts, p);
      read_double(m, "tolerance", cfg.minimizer.tolerance, p);
      read_int(m, "max_iterations", cfg.minimizer.max_iterations, p);
      if (m.contains("box")) {
        const json& b = m["box"];
        if (b.is_array() && b.size() == 2 && b[0].is_number() && b[1].is_number()) {
          // Expanded to the state dimension in validate().
          cfg.minimizer.lower = Vector::Constant(1, b[0].get<double>());
          cfg.minimizer.upper = Vector::Constant(1, b[1].get<double>());
          cfg.minimizer_box_set = true;
        } else if (b.is_object() && b.contains("lower") && b.contains("upper")) {
          auto lo = read_vector(b["lower"], "minimizer.box.lower", p);
          auto hi = read_vector(b["upper"], "minimizer.box.upper", p);
          if (lo && hi) {
            cfg.minimizer.lower = *lo;
            cfg.minimizer.upper = *hi;
            cfg.minimizer_box_set = true;
          }
        } else {
          p.add("minimizer.box: expected [lo, hi] or {\"lower\": [...], \"upper\": [...]}");
        }
      }
    }
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    if (!s.is_object()) {
      p.add("sweep: expected an object");
    } else {
      read_int(s, "count", cfg.sweep.count, p);
      read_int(s, "min_state_dim", cfg.sweep.min_state_dim, p);
      read_int(s, "max_state_dim", cfg.sweep.max_state_dim, p);
      read_int(s, "output_dim", cfg.sweep.output_dim, p);
      read_int(s, "threads", cfg.sweep.threads, p);
      if (s.contains("horizon_offsets")) {
        cfg.sweep.horizon_offsets.clear();
        const json& h = s["horizon_offsets"];
        if (!h.is_array() || h.empty()) {
          p.add("sweep.horizon_offsets: expected a nonempty integer array");
        } else {
          for (const json& v : h) {
            if (!v.is_number_integer() || v.get<int>() < 0) {
              p.add("sweep.horizon_offsets: entries must be nonnegative integers");
              break;
            }
            cfg.sweep.horizon_offsets.push_back(v.get<int>());
          }
        }
      }
    }
  }

  p.raise_if_any();
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

void validate(const ExperimentConfig& cfg) {
  Problems p;
  if (cfg.horizon < 1) p.add("N: must be >= 1");
  if (cfg.steps < 0) p.add("steps: must be >= 0");
  if (cfg.samples < 1) p.add("samples: must be >= 1");
  if (!(cfg.terminal_tolerance > 0.0)) p.add("terminal_tolerance: must be positive");
  if (cfg.minimizer.grid_points < 2) p.add("minimizer.grid_points: must be >= 2");
  if (cfg.minimizer.starts < 1) p.add("minimizer.starts: must be >= 1");
  if (cfg.minimizer.max_iterations < 1) p.add("minimizer.max_iterations: must be >= 1");

  const SystemBlock& sys = cfg.system;
  const bool linear_mode = cfg.mode == Mode::kDeadbeatObserver || cfg.mode == Mode::kMhe ||
                           cfg.mode == Mode::kMinEnergy || cfg.mode == Mode::kDualize;
  const bool has_system = sys.A.size() > 0 || !sys.name.empty();
  if (cfg.mode != Mode::kSweep && !has_system) p.add("system: required for this mode");
  if (linear_mode && has_system && !sys.is_linear()) {
    p.add("system: mode " + std::string(to_string(cfg.mode)) + " needs explicit matrices");
  }

  int dim = 0;
  if (has_system) {
    try {
      dim = sys.state_dim();
    } catch (const ConfigError& e) {
      for (const auto& v : e.violations()) p.add(v);
    }
  }

  const bool needs_c = cfg.mode == Mode::kDeadbeatObserver || cfg.mode == Mode::kMhe ||
                       (cfg.mode == Mode::kDualize && cfg.direction == "estimation-to-control") ||
                       ((cfg.mode == Mode::kNlObserver || cfg.mode == Mode::kCheckAssumptions) &&
                        sys.is_linear());
  const bool needs_b = cfg.mode == Mode::kMinEnergy ||
                       (cfg.mode == Mode::kDualize && cfg.direction == "control-to-estimation") ||
                       (cfg.mode == Mode::kNlTracker && sys.is_linear());
  if (has_system && sys.is_linear() && needs_c && sys.C.size() == 0) p.add("C: required for this mode");
  if (has_system && sys.is_linear() && needs_b && sys.B.size() == 0) p.add("B: required for this mode");
  if (cfg.mode == Mode::kDualize && cfg.direction != "control-to-estimation" &&
      cfg.direction != "estimation-to-control") {
    p.add("direction: expected 'control-to-estimation' or 'estimation-to-control'");
  }
  if (cfg.gain_family != "optimal" && cfg.gain_family != "deadbeat") {
    p.add("gain_family: expected 'optimal' or 'deadbeat'");
  }
  if (!cfg.backend.empty() && cfg.backend != "exhaustive" && cfg.backend != "shooting") {
    p.add("backend: expected 'exhaustive' or 'shooting'");
  }

  const bool runs = cfg.action == Action::kRun &&
                    (cfg.mode == Mode::kDeadbeatObserver || cfg.mode == Mode::kMhe ||
                     cfg.mode == Mode::kMinEnergy || cfg.mode == Mode::kNlObserver ||
                     cfg.mode == Mode::kNlTracker);
  if (runs && !cfg.x0) p.add("x0: required for this mode");
  if (dim > 0) {
    const auto check = [&](const std::optional<Vector>& v, const char* name) {
      if (v && v->size() != dim) {
        p.add(std::string(name) + ": has " + std::to_string(v->size()) +
              " entries, expected " + std::to_string(dim));
      }
    };
    check(cfg.x0, "x0");
    check(cfg.z0, "z0");
    check(cfg.xhat0, "xhat0");
    if (cfg.minimizer_box_set && cfg.minimizer.lower.size() != 1 &&
        cfg.minimizer.lower.size() != dim) {
      p.add("minimizer.box: bounds must have " + std::to_string(dim) + " entries");
    }
  }
  if (cfg.minimizer_box_set &&
      (cfg.minimizer.lower.size() != cfg.minimizer.upper.size() ||
       (cfg.minimizer.upper - cfg.minimizer.lower).minCoeff() < 0.0)) {
    p.add("minimizer.box: lower must not exceed upper");
  }
  if (cfg.mode == Mode::kDeadbeatObserver && runs && cfg.steps < cfg.horizon) {
    p.add("steps: must be >= N for a deadbeat run");
  }
  if (cfg.R && cfg.R->rows() != cfg.R->cols()) {
    p.add("R: expected a square matrix, got " + shape(*cfg.R));
  }
  if (cfg.mode == Mode::kSweep) {
    const SweepSpec& s = cfg.sweep;
    if (s.count < 1) p.add("sweep.count: must be >= 1");
    if (s.min_state_dim < 1 || s.max_state_dim < s.min_state_dim) {
      p.add("sweep: need 1 <= min_state_dim <= max_state_dim");
    }
    if (s.output_dim < 1) p.add("sweep.output_dim: must be >= 1");
  }
  p.raise_if_any();
}

}  // namespace dualhorizon::sim
