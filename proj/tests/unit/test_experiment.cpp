#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "airdsgd/experiment.hpp"

namespace airdsgd {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny() {
  ExperimentConfig c;
  apply_quick_preset(c);
  c.trials = 2;
  c.iterations = 10;
  return c;
}

TEST(Config, ParsesKeyValueText) {
  ExperimentConfig c;
  parse_config_text(
      "# grid\n"
      "n = 12\n"
      "sigma = [2, 5]\n"
      "tau-factor = 0.8, 1.6   # two values\n"
      "scheme = mac\n"
      "interference = true\n"
      "\n"
      "learning_rate = 0.05\n",
      c);
  EXPECT_EQ(c.n, 12u);
  EXPECT_EQ(c.sigma, (std::vector<double>{2.0, 5.0}));
  EXPECT_EQ(c.tau_factor, (std::vector<double>{0.8, 1.6}));
  EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::mac}));
  EXPECT_TRUE(c.interference);
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.05);
}

TEST(Config, ErrorsNameTheField) {
  ExperimentConfig c;
  try {
    parse_config_text("trials = many\n", c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "trials");
  }
  EXPECT_THROW(parse_config_text("bogus = 1\n", c), ConfigError);
  EXPECT_THROW(parse_config_text("just words\n", c), ConfigError);
  EXPECT_THROW(parse_config_text("sigma = [2, 5\n", c), ConfigError);
  EXPECT_THROW(parse_config_text("scheme = tdma\n", c), ConfigError);

  ExperimentConfig bad;
  bad.sigma = {-1.0};
  try {
    validate_config(bad);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "sigma");
  }
  bad = ExperimentConfig{};
  bad.task = "logistic";
  try {
    validate_config(bad);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "norm_bound");
  }
  bad = ExperimentConfig{};
  bad.coloring = "random";
  EXPECT_THROW(validate_config(bad), ConfigError);
  EXPECT_NO_THROW(validate_config(ExperimentConfig{}));
}

TEST(Config, JsonRoundTripThroughKeys) {
  ExperimentConfig c;
  c.n = 7;
  c.sigma = {3.0};
  const auto j = config_to_json(c);
  EXPECT_EQ(j["n"], "7");
  ExperimentConfig d;
  for (const auto& [k, v] : j.items()) set_config_value(d, k, v.get<std::string>());
  EXPECT_EQ(config_to_json(d), j);
}

TEST(Summary, SingleTrialMeanAndSlotAverage) {
  std::vector<TrialRecord> trials;
  for (std::size_t k = 0; k < 3; ++k) {
    TrialRecord t;
    t.sigma = 2.0;
    t.tau_factor = 0.8;
    t.trial = k;
    t.slots = 20;
    t.final_metric = 0.5 + 0.1 * static_cast<double>(k);
    trials.push_back(t);
  }
  TrialRecord failed = trials[0];
  failed.status = "numerical-divergence";
  failed.slots = 99;
  trials.push_back(failed);
  TrialRecord other = trials[0];
  other.scheme = Scheme::p2p;
  trials.push_back(other);

  const auto rows = summarize_table(trials);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].scheme, Scheme::mac);
  EXPECT_DOUBLE_EQ(rows[0].t_mean, 20.0);
  EXPECT_DOUBLE_EQ(rows[0].t_std, 0.0);
  EXPECT_EQ(rows[0].trials_ok, 3u);
  EXPECT_EQ(rows[0].trials_failed, 1u);
  EXPECT_NEAR(*rows[0].acc_final_mean, 0.6, 1e-15);
  EXPECT_NEAR(*rows[0].acc_final_std, 0.1, 1e-15);
  EXPECT_EQ(rows[1].trials_ok, 1u);
  EXPECT_DOUBLE_EQ(*rows[1].acc_final_mean, 0.5);
  EXPECT_DOUBLE_EQ(*rows[1].acc_final_std, 0.0);
}

TEST(Experiment, DefaultGridHasTwelveRows) {
  ExperimentConfig c = tiny();
  c.n = 20;
  c.trials = 1;
  c.iterations = 3;
  c.sigma = {2.0, 5.0};
  c.tau_factor = {0.8, 1.2, 1.6};
  const auto res = run_experiment(c);
  ASSERT_EQ(res.summary.size(), 12u);
  EXPECT_EQ(res.summary[0].sigma, 2.0);
  EXPECT_EQ(res.summary[0].tau_factor, 0.8);
  EXPECT_EQ(res.summary[0].scheme, Scheme::mac);
  EXPECT_EQ(res.summary[1].scheme, Scheme::p2p);
  EXPECT_EQ(res.summary[11].sigma, 5.0);
  EXPECT_EQ(res.metric_name, "optimality_gap");
}

TEST(Experiment, SchemesShareTopologyWithinATrial) {
  const auto res = run_experiment(tiny());
  for (const auto& a : res.trials) {
    for (const auto& b : res.trials) {
      if (a.trial == b.trial && a.sigma == b.sigma && a.tau_factor == b.tau_factor) {
        EXPECT_EQ(a.edges, b.edges);
        EXPECT_EQ(a.seed, b.seed);
      }
    }
  }
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
  ExperimentConfig c = tiny();
  const auto one = run_experiment(c);
  c.workers = 3;
  const auto three = run_experiment(c);
  std::ostringstream a, b;
  write_trials_csv(a, one.trials);
  write_trials_csv(b, three.trials);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Experiment, ImpossibleThresholdRecordedAsFailure) {
  ExperimentConfig c = tiny();
  c.tau_factor = {50.0};
  c.max_attempts = 3;
  const auto res = run_experiment(c);
  for (const auto& t : res.trials) EXPECT_EQ(t.status, "topology-generation-failure");
  EXPECT_EQ(res.summary[0].trials_failed, c.trials);
}

TEST(Experiment, OutputsAreByteIdenticalAcrossRuns) {
  const fs::path base = fs::temp_directory_path() / "airdsgd_experiment_test";
  fs::remove_all(base);
  const ExperimentConfig c = tiny();
  write_experiment_outputs(run_experiment(c), c, base / "a");
  write_experiment_outputs(run_experiment(c), c, base / "b");
  for (const char* f : {"summary.csv", "trials.csv", "meta.json"}) {
    EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
  }
  std::size_t traces = 0;
  for (const auto& e : fs::directory_iterator(base / "a" / "traces")) {
    ++traces;
    EXPECT_EQ(slurp(e.path()), slurp(base / "b" / "traces" / e.path().filename())) << e.path();
  }
  EXPECT_EQ(traces, c.sigma.size() * c.tau_factor.size() * c.schemes.size());
  EXPECT_TRUE(fs::exists(base / "a" / "traces" / "sigma2_tau0.8_mac.csv"));

  const auto head = slurp(base / "a" / "summary.csv").substr(0, 40);
  EXPECT_EQ(head.rfind("sigma,tau_factor,scheme,trials_ok", 0), 0u);
  fs::remove_all(base);
}

TEST(Experiment, TrialSeedsDistinct) {
  EXPECT_NE(trial_seed(1, 0, 0, 0), trial_seed(1, 0, 0, 1));
  EXPECT_NE(trial_seed(1, 0, 1, 0), trial_seed(1, 1, 0, 0));
  EXPECT_EQ(scenario_id(2.0, 1.2, Scheme::p2p), "sigma2_tau1.2_p2p");
}

}  // namespace
}  // namespace airdsgd
