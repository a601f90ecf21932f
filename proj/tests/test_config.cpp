#include <gtest/gtest.h>

#include "rramcim/config.hpp"
#include "rramcim/experiments.hpp"

using namespace rramcim;

namespace {
AppConfig parse(const std::string& s) { return parse_config_text(s); }
} // namespace

TEST(Config, MinimalFileGivesDefaults) {
  AppConfig c = parse(R"({"config_version": 1})");
  finalize(c);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.system.subarray_count, 4u);
  EXPECT_EQ(c.system.input_width(), 36u);
  EXPECT_EQ(c.system.variant, CellVariant::Compensated);
  EXPECT_DOUBLE_EQ(c.system.pcspc.v_ref, 0.2);
  EXPECT_EQ(c.system.pcspc.comparator_noise_sigma_v, 0.0);
  EXPECT_FALSE(c.trials.has_value());
}

TEST(Config, VersionRequiredAndChecked) {
  EXPECT_THROW(parse("{}"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 2})"), ConfigError);
}

TEST(Config, MalformedAndUnknownRejected) {
  EXPECT_THROW(parse(R"({"config_version": 1,)"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "sede": 3})"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "device": {"lrs_mean": 3}})"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "experiments": {"verfy": {}}})"), ConfigError);
  EXPECT_THROW(parse(R"([1, 2])"), ConfigError);
}

TEST(Config, TypeErrorsRejected) {
  EXPECT_THROW(parse(R"({"config_version": 1, "seed": "x"})"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "seed": -1})"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "seed": 1.5})"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "timestamp": 1})"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "device": {"lrs_mean_ohm": true}})"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "cell": {"variant": "other"}})"), ConfigError);
  EXPECT_THROW(parse(R"({"config_version": 1, "device": []})"), ConfigError);
}

TEST(Config, OverridesLand) {
  AppConfig c = parse(R"({
    "config_version": 1, "seed": 9, "trials": 1e4,
    "device": {"hrs_sigma_ohm": 5000, "yield_fault_prob": 0.001},
    "cell": {"variant": "baseline"},
    "array": {"subarray_count": 2},
    "pcspc": {"comparator_noise_sigma_v": 0.01, "t_d_s": 0, "charge_margin": 0},
    "experiments": {"ber_sweep": {"compute_bits": [2, 4]}, "protocol": {"bers": [0, 0.01]}, "trace": {"row": 7}}
  })");
  finalize(c);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.system.master_seed, 9u);
  EXPECT_EQ(*c.trials, 10000u);
  EXPECT_EQ(effective_trials(c, 123), 10000u);
  EXPECT_EQ(c.system.device.hrs_sigma_ohm, 5000.0);
  EXPECT_EQ(c.system.variant, CellVariant::Baseline1T1R);
  EXPECT_EQ(c.system.input_width(), 18u);
  EXPECT_EQ(c.system.pcspc.comparator_noise_sigma_v, 0.01);
  EXPECT_NEAR(c.system.pcspc.c1_farad, 0.25e-12, 1e-24);
  EXPECT_EQ(c.ber_sweep.compute_bits, (std::vector<unsigned>{2, 4}));
  EXPECT_EQ(c.protocol.bers.size(), 2u);
  EXPECT_EQ(c.trace.row, 7u);
}

TEST(Config, FinalizeChecksBounds) {
  auto bad = [](const std::string& s) {
    AppConfig c = parse_config_text(s);
    finalize(c);
  };
  EXPECT_THROW(bad(R"({"config_version": 1, "format": "xml"})"), ConfigError);
  EXPECT_THROW(bad(R"({"config_version": 1, "workload": {"input_density": 2}})"), ConfigError);
  EXPECT_THROW(bad(R"({"config_version": 1, "pcspc": {"v_ref": 0.5}})"), ConfigError);
  EXPECT_THROW(bad(R"({"config_version": 1, "device": {"lrs_sigma_ohm": -1}})"), ConfigError);
  EXPECT_THROW(bad(R"({"config_version": 1, "array": {"redundant_cols": 0}})"), ConfigError);
  EXPECT_THROW(bad(R"({"config_version": 1, "experiments": {"protocol": {"bers": [0.9]}}})"), ConfigError);
  EXPECT_THROW(bad(R"({"config_version": 1, "experiments": {"margins": {"trials_per_scenario": 10}}})"),
               ConfigError);
  EXPECT_THROW(bad(R"({"config_version": 1, "trials": 0})"), ConfigError);
  EXPECT_THROW(bad(R"({"config_version": 1, "experiments": {"verify": {"vector_path": "x.bmv"}}})"), ConfigError);
}

TEST(Config, ResolvedConfigRoundTrips) {
  AppConfig c = parse(R"({"config_version": 1, "seed": 5, "device": {"lrs_sigma_ohm": 80},
                          "pcspc": {"comparator_noise_sigma_v": 0.02}})");
  finalize(c);
  const auto j = to_json(c);
  AppConfig again = parse_config_text(j.dump());
  finalize(again);
  EXPECT_EQ(to_json(again), j);
  EXPECT_EQ(again.system.pcspc.c1_farad, c.system.pcspc.c1_farad);
  EXPECT_FALSE(j.contains("jobs"));
}

TEST(Report, HasSchemaKeysAndPerformance) {
  AppConfig c;
  c.timestamp = false;
  finalize(c);
  const auto r = run_experiment("perf", c);
  for (const char* key : {"report_version", "experiment", "status", "summary", "config", "checks", "results",
                          "performance"}) {
    EXPECT_TRUE(r.json.contains(key)) << key;
  }
  EXPECT_FALSE(r.json.contains("generated_at"));
  EXPECT_NEAR(r.json["performance"]["throughput_gbps"].get<double>(), 20.48, 1e-9);
  c.timestamp = true;
  const auto t = run_experiment("perf", c);
  EXPECT_TRUE(t.json.contains("generated_at"));
  EXPECT_EQ(comparable(t.json), r.json);
}

TEST(Report, UnknownExperiment) {
  AppConfig c;
  finalize(c);
  EXPECT_THROW(run_experiment("plot", c), ConfigError);
  EXPECT_TRUE(is_experiment("ber-sweep"));
  EXPECT_FALSE(is_experiment("ber_sweep"));
}
