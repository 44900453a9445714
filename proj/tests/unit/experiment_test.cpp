#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dualhorizon/config.hpp"
#include "dualhorizon/errors.hpp"
#include "dualhorizon/experiment.hpp"

namespace dh = dualhorizon;
namespace sim = dualhorizon::sim;

namespace {

sim::ExperimentConfig golden(sim::Mode mode, int steps) {
  std::ostringstream doc;
  doc << R"({"mode": ")" << sim::to_string(mode) << R"(",
    "system": {"A": [[2]], "B": [[1]], "C": [[1]]},
    "N": 2, "R": 1, "x0": [0], "z0": [1], "xhat0": [1], "steps": )"
      << steps << "}";
  return sim::parse_config(doc.str());
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Experiment, MheGoldenReport) {
  const sim::RunReport r = sim::run_experiment(golden(sim::Mode::kMhe, 10));
  EXPECT_NEAR(r.gains.at("L")(0, 0), 1.6, 1e-12);
  EXPECT_NEAR(*r.spectral_radius, 0.4, 1e-12);
  const auto rows = lines(r.csv);
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0], "k,err_norm,J,lyap_lhs,lyap_rhs,identity_residual");
  EXPECT_EQ(rows[1].substr(0, 4), "0,2,");
  EXPECT_EQ(r.summary.monotonicity_violations, 0);
}

TEST(Experiment, MinEnergyGoldenCost) {
  sim::ExperimentConfig cfg = golden(sim::Mode::kMinEnergy, 0);
  cfg.action = sim::Action::kSynthesize;
  const sim::RunReport r = sim::run_experiment(cfg);
  ASSERT_TRUE(r.cost.has_value());
  EXPECT_NEAR(*r.cost, 3.2, 1e-12);
  EXPECT_NEAR(r.gains.at("K")(0, 0), 1.6, 1e-12);
  EXPECT_TRUE(r.csv.empty());
}

TEST(Experiment, ZeroStepsGivesInitialMetricsOnly) {
  const sim::RunReport r = sim::run_experiment(golden(sim::Mode::kMhe, 0));
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.summary.initial_error, r.summary.final_error);
  EXPECT_EQ(lines(r.csv).size(), 2u);
}

TEST(Experiment, SummaryRecomputableFromCsv) {
  const sim::RunReport r = sim::run_experiment(golden(sim::Mode::kMhe, 40));
  const auto rows = lines(r.csv);
  double final_error = 0.0;
  std::optional<int> steps_to_tol;
  double max_id = 0.0;
  for (size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> cells;
    std::stringstream ss(rows[i]);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    while (cells.size() < 6) cells.emplace_back();
    const double err = std::stod(cells[1]);
    final_error = err;
    if (err <= sim::kConvergedError) {
      if (!steps_to_tol) steps_to_tol = std::stoi(cells[0]);
    } else {
      steps_to_tol.reset();
    }
    if (!cells[5].empty()) max_id = std::max(max_id, std::stod(cells[5]));
  }
  EXPECT_EQ(final_error, r.summary.final_error);
  EXPECT_EQ(steps_to_tol, r.summary.steps_to_tol);
  EXPECT_EQ(max_id, r.summary.max_identity_residual);
}

TEST(Experiment, CsvIsDeterministic) {
  for (sim::Mode mode : {sim::Mode::kMhe, sim::Mode::kMinEnergy, sim::Mode::kDeadbeatObserver}) {
    sim::ExperimentConfig cfg = golden(mode, 15);
    if (mode == sim::Mode::kDeadbeatObserver) cfg.horizon = 1;  // square stack for n = 1
    const sim::RunReport a = sim::run_experiment(cfg);
    const sim::RunReport b = sim::run_experiment(cfg);
    EXPECT_EQ(a.csv, b.csv);
  }
}

TEST(Experiment, WritesCsvUnderOutputDir) {
  const auto dir = std::filesystem::temp_directory_path() / "dualhorizon_experiment_test";
  std::filesystem::remove_all(dir);
  sim::ExperimentConfig cfg = golden(sim::Mode::kMinEnergy, 5);
  cfg.output_dir = dir.string();
  const sim::RunReport r = sim::run_experiment(cfg);
  ASSERT_FALSE(r.csv_path.empty());
  std::ifstream in(r.csv_path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), r.csv);
  std::filesystem::remove_all(dir);
}

TEST(Experiment, ErrorsCarryModeContext) {
  sim::ExperimentConfig cfg = golden(sim::Mode::kMhe, 5);
  cfg.system.A = dh::Matrix::Identity(2, 2);
  cfg.system.C = (dh::Matrix(1, 2) << 1, 0).finished();
  cfg.system.B = dh::Matrix();
  cfg.x0 = dh::Vector::Zero(2);
  cfg.z0 = dh::Vector::Zero(2);
  cfg.xhat0.reset();
  try {
    sim::run_experiment(cfg);
    FAIL();
  } catch (const dh::SynthesisError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("mhe:", 0), 0u) << e.what();
  }
}

TEST(Experiment, DeadbeatVsMheAtFullHorizonCoincide) {
  const char* base = R"({"system": {"A": [[1.1, 0.4], [-0.3, 0.9]], "C": [1, 0.5]},
                         "N": 2, "x0": [1, -1], "z0": [0.5, 0.5], "steps": 12, "mode": ")";
  const sim::RunReport db = sim::run_experiment(sim::parse_config(std::string(base) + "deadbeat-observer\"}"));
  const sim::RunReport mh = sim::run_experiment(sim::parse_config(std::string(base) + "mhe\"}"));
  const sim::ComparisonTable t = sim::compare_runs({db, mh});
  ASSERT_EQ(t.rows.size(), 2u);
  ASSERT_TRUE(t.rows[0].steps_to_tol.has_value());
  EXPECT_EQ(t.rows[0].steps_to_tol, t.rows[1].steps_to_tol);
  EXPECT_EQ(lines(t.to_csv()).size(), 3u);
}

TEST(Experiment, CompareHorizonsBothStable) {
  const char* base = R"({"mode": "mhe", "system": {"A": [[1.1, 0.4], [-0.3, 0.9]], "C": [1, 0.5]},
                         "x0": [1, -1], "steps": 80, "N": )";
  const sim::RunReport a = sim::run_experiment(sim::parse_config(std::string(base) + "2}"));
  const sim::RunReport b = sim::run_experiment(sim::parse_config(std::string(base) + "4}"));
  const sim::ComparisonTable t = sim::compare_runs({a, b});
  for (const auto& row : t.rows) {
    EXPECT_LT(*row.spectral_radius, 1.0);
    EXPECT_LT(row.final_error, 1e-6);
  }
}

TEST(Experiment, CompareRejectsSingleOrMismatched) {
  const sim::RunReport a = sim::run_experiment(golden(sim::Mode::kMhe, 3));
  EXPECT_THROW(sim::compare_runs({a}), dh::ConfigError);
  sim::RunReport b = a;
  b.system_label = "other";
  EXPECT_THROW(sim::compare_runs({a, b}), dh::ConfigError);
}

TEST(Experiment, DualizeReportsZeroGap) {
  sim::ExperimentConfig cfg = golden(sim::Mode::kDualize, 0);
  const sim::RunReport r = sim::run_experiment(cfg);
  EXPECT_NEAR(r.gains.at("L_dual")(0, 0), 1.6, 1e-12);
  EXPECT_LE(r.metrics.at("duality_gap"), 1e-12);
  EXPECT_EQ(r.metrics.at("involution_gap"), 0.0);
}

TEST(Experiment, NonlinearModesProduceFlaggedCsv) {
  const sim::RunReport obs = sim::run_experiment(sim::parse_config(R"({
    "mode": "nl-observer", "system": {"name": "cubic_output"}, "N": 2,
    "x0": [1.5], "z0": [-1], "steps": 30})"));
  EXPECT_EQ(lines(obs.csv)[0], "k,err_norm,J,feasible");
  const sim::RunReport trk = sim::run_experiment(sim::parse_config(R"({
    "mode": "nl-tracker", "system": {"name": "integer_walk"}, "N": 5,
    "stage_cost": "abs", "x0": [0], "xhat0": [5], "steps": 8})"));
  const auto rows = lines(trk.csv);
  EXPECT_EQ(rows[0], "k,err_norm,V,feasible");
  EXPECT_EQ(rows[1], "0,5,5,1");
  EXPECT_EQ(trk.metrics.at("decrease_violations"), 0.0);
}

TEST(Experiment, InfeasibleTrackerPropagates) {
  EXPECT_THROW(sim::run_experiment(sim::parse_config(R"({
    "mode": "nl-tracker", "system": {"name": "integer_walk"}, "N": 2,
    "stage_cost": "abs", "x0": [0], "xhat0": [5], "steps": 3})")),
               dh::InfeasibleError);
}

TEST(Experiment, CheckAssumptionsOnLinearPair) {
  const sim::RunReport r = sim::run_experiment(sim::parse_config(R"({
    "mode": "check-assumptions", "system": {"A": [[0.9, 0.5], [-0.4, 1.05]], "C": [1, 0.3]},
    "N": 2, "samples": 50, "seed": 3, "alpha": "identity"})"));
  EXPECT_EQ(r.metrics.at("decay_violations"), 0.0);
  EXPECT_EQ(r.metrics.at("alpha_class_k_on_grid"), 1.0);
  EXPECT_EQ(r.metrics.at("stage_cost_ok"), 1.0);
}

TEST(Experiment, SweepIsDeterministicAndStable) {
  sim::ExperimentConfig cfg = sim::parse_config(R"({"mode": "sweep", "seed": 9, "steps": 50,
    "sweep": {"count": 12, "threads": 4}})");
  const sim::RunReport a = sim::run_experiment(cfg);
  cfg.sweep.threads = 1;
  const sim::RunReport b = sim::run_experiment(cfg);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(lines(a.csv).size(), 1u + 12u * 3u);
  EXPECT_LT(*a.spectral_radius, 1.0);
}

TEST(Experiment, FormatDoubleUsesSeventeenDigits) {
  EXPECT_EQ(sim::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(sim::format_double(2.0), "2");
  EXPECT_EQ(sim::format_double(std::nan("")), "nan");
}
