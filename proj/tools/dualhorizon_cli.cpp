// Command-line front end: one subcommand per experiment kind.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualhorizon/config.hpp"
#include "dualhorizon/errors.hpp"
#include "dualhorizon/experiment.hpp"

namespace dh = dualhorizon;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kSynthesis = 3, kSolver = 4, kInfeasible = 5 };

struct Command {
  const char* name;
  const char* help;
  const char* mode;
  const char* action;
};

const Command kCommands[] = {
    {"synth-deadbeat", "Deadbeat observer gain", "deadbeat-observer", "synthesize"},
    {"run-deadbeat", "Simulate the deadbeat observer", "deadbeat-observer", "run"},
    {"synth-mhe", "Moving-horizon observer gain and weights", "mhe", "synthesize"},
    {"run-mhe", "Simulate the moving-horizon observer", "mhe", "run"},
    {"synth-minenergy", "Minimum-energy tracker gain", "min-energy", "synthesize"},
    {"run-tracker", "Simulate the minimum-energy tracker", "min-energy", "run"},
    {"dualize", "Gain of the dual synthesis problem", "dualize", "synthesize"},
    {"run-nl-observer", "Simulate the nonlinear moving-horizon observer", "nl-observer", "run"},
    {"run-nl-tracker", "Simulate the nonlinear moving-horizon tracker", "nl-tracker", "run"},
    {"check-assumptions", "Sampled observability and cost-decay diagnostics",
     "check-assumptions", "synthesize"},
    {"sweep", "Moving-horizon observers on random systems", "sweep", "run"},
};

struct Flags {
  std::string config;
  std::string system;
  std::string out;
  std::string format;
  std::string R;
  std::string x0;
  std::string z0;
  std::string xhat0;
  std::optional<std::uint64_t> seed;
  std::optional<int> N;
  std::optional<int> steps;
};

int exit_code(dh::ErrorKind kind) {
  switch (kind) {
    case dh::ErrorKind::kConfig:
    case dh::ErrorKind::kDimension: return kConfig;
    case dh::ErrorKind::kSynthesis: return kSynthesis;
    case dh::ErrorKind::kSolver:
    case dh::ErrorKind::kDivergence: return kSolver;
    case dh::ErrorKind::kInfeasible: return kInfeasible;
  }
  return kOther;
}

int report_error(const std::string& kind, const std::string& message, int code,
                 const json& extra = json::object()) {
  json err = extra;
  err["error"] = kind;
  err["message"] = message;
  err["exit_code"] = code;
  std::cerr << err.dump() << '\n';
  return code;
}

json parse_document(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw dh::ConfigError(origin + ": JSON parse error at byte " + std::to_string(e.byte),
                          {origin + ": parse error at byte " + std::to_string(e.byte)});
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dh::ConfigError({"cannot read '" + path + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json vector_json(const std::string& text) {
  const dh::Vector v = dh::sim::parse_vector(text);
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

/// Merges the config file and the command-line overrides into one document.
dh::sim::ExperimentConfig build_config(const Command& cmd, const Flags& f) {
  json doc = f.config.empty() ? json::object() : parse_document(read_file(f.config), f.config);
  if (!doc.is_object()) throw dh::ConfigError({"config: expected a JSON object"});
  doc["mode"] = cmd.mode;
  doc["action"] = cmd.action;
  if (!f.system.empty()) {
    json sys = parse_document(read_file(f.system), f.system);
    doc["system"] = sys.is_object() && sys.contains("system") ? sys["system"] : sys;
  }
  if (f.N) doc["N"] = *f.N;
  if (f.steps) doc["steps"] = *f.steps;
  if (f.seed) doc["seed"] = *f.seed;
  if (!f.out.empty()) doc["output"] = f.out;
  if (!f.R.empty()) doc["R"] = f.R;
  if (!f.x0.empty()) doc["x0"] = vector_json(f.x0);
  if (!f.z0.empty()) doc["z0"] = vector_json(f.z0);
  if (!f.xhat0.empty()) doc["xhat0"] = vector_json(f.xhat0);
  return dh::sim::parse_config(doc.dump());
}

std::string key_value_csv(const dh::sim::RunReport& report) {
  std::string out = "name,value\n";
  for (const auto& [name, m] : report.gains) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        out += name + '[' + std::to_string(r) + ';' + std::to_string(c) + "]," +
               dh::sim::format_double(m(r, c)) + '\n';
      }
    }
  }
  if (report.spectral_radius) {
    out += "spectral_radius," + dh::sim::format_double(*report.spectral_radius) + '\n';
  }
  if (report.cost) out += "cost," + dh::sim::format_double(*report.cost) + '\n';
  for (const auto& [name, v] : report.metrics) {
    out += name + ',' + dh::sim::format_double(v) + '\n';
  }
  return out;
}

int run(const Command& cmd, const Flags& f) {
  const dh::sim::ExperimentConfig cfg = build_config(cmd, f);
  const dh::sim::RunReport report = dh::sim::run_experiment(cfg);

  const std::string json_text = dh::sim::report_to_json(report);
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream(std::filesystem::path(cfg.output_dir) / "report.json",
                  std::ios::binary | std::ios::trunc)
        << json_text << '\n';
  }

  std::string format = f.format;
  if (format.empty()) format = report.csv.empty() ? "json" : "csv";
  if (format == "json") {
    std::cout << json_text << '\n';
  } else {
    std::cout << (report.csv.empty() ? key_value_csv(report) : report.csv);
  }
  for (const std::string& w : report.warnings) {
    std::cerr << json{{"warning", w}}.dump() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadbeat, moving-horizon and minimum-energy observers and trackers"};
  app.require_subcommand(1);
  Flags flags;
  std::map<CLI::App*, const Command*> commands;
  for (const Command& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", flags.config, "JSON experiment file");
    sub->add_option("--system", flags.system, "JSON system file (overrides the config)");
    sub->add_option("--out", flags.out, "Output directory for CSV and report.json");
    sub->add_option("--seed", flags.seed, "Random seed");
    sub->add_option("--format", flags.format, "Output on stdout")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--N", flags.N, "Horizon length");
    sub->add_option("--R", flags.R, "Weight: diag:r1,r2 | eye:c | c");
    sub->add_option("--steps", flags.steps, "Simulation steps");
    sub->add_option("--x0", flags.x0, "Plant initial state, comma separated");
    sub->add_option("--z0", flags.z0, "Observer initial state, comma separated");
    sub->add_option("--xhat0", flags.xhat0, "Tracker initial state, comma separated");
    commands[sub] = &cmd;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("config", e.what(), kConfig);
  }

  const Command* cmd = nullptr;
  for (const auto& [sub, c] : commands) {
    if (sub->parsed()) cmd = c;
  }
  try {
    return run(*cmd, flags);
  } catch (const dh::ConfigError& e) {
    return report_error("config", e.what(), kConfig, json{{"violations", e.violations()}});
  } catch (const dh::SolverError& e) {
    const double r = e.best_residual();
    return report_error("solver", e.what(), kSolver,
                        json{{"best_residual", std::isfinite(r) ? json(r) : json(nullptr)}});
  } catch (const dh::Error& e) {
    return report_error(dh::to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kOther);
  }
}
