#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "sdmm/experiment.hpp"

using namespace sdmm;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.schemes = {SchemeParams{MatDotParams{2, 1, 5}}}; // K = 5 = N
  config.dims = Dims{12, 12, 12};
  config.trials = 3;
  config.delta_rel = {1e-3};
  config.master_seed = 99;
  return config;
}

std::string csv_of(const SweepTable& table) {
  std::ostringstream out;
  emit_csv(table, out);
  return out.str();
}

}  // namespace

TEST_CASE("run_sweep is byte-identical across runs for a fixed seed") {
  const ExperimentConfig config = small_config();
  const std::string first = csv_of(run_sweep(config));
  const std::string second = csv_of(run_sweep(config));
  CHECK(first == second);
  CHECK(first.find("matdot,2,1,5,0,") != std::string::npos);

  ExperimentConfig reseeded = small_config();
  reseeded.master_seed = 100;
  CHECK(csv_of(run_sweep(reseeded)) != first);
}

TEST_CASE("run_sweep does not depend on the thread count") {
  ExperimentConfig config = small_config();
  config.trials = 8;
  config.threads = 1;
  const std::string serial = csv_of(run_sweep(config));
  config.threads = 4;
  const std::string parallel = csv_of(run_sweep(config));
  CHECK(serial == parallel);
}

TEST_CASE("sweep sigma2 equals the calibration module output exactly") {
  ExperimentConfig config = small_config();
  config.delta_rel = {1e-2, 1e-3};
  const SweepTable table = run_sweep(config);
  REQUIRE(table.cells.size() == 2);

  const auto points = EvaluationPoints::roots_of_unity(5);
  for (const CellStats& cs : table.cells) {
    const NoiseSpec expected =
        calibrate_sigma2(cs.delta_bits, config.dims, config.schemes[0], points, 1.0, 1.0,
                         SearchStrategy::kExhaustive);
    CHECK(cs.sigma2 == expected.sigma2); // bitwise
    CHECK(cs.delta_bits == cs.delta_rel * table.entropy_proxy_bits);
  }
}

TEST_CASE("emit_csv handles empty and single-cell tables") {
  SweepTable empty;
  const std::string empty_csv = csv_of(empty);
  CHECK(empty_csv ==
        "scheme,p_or_mn,X,N,stragglers,delta_bits,delta_relative,sigma2,trials,"
        "mean_err,median_err,std_err,mean_cond\n");

  const SweepTable one = run_sweep(small_config());
  const std::string one_csv = csv_of(one);
  CHECK(std::count(one_csv.begin(), one_csv.end(), '\n') == 2);
}

TEST_CASE("CSV round-trips at full double precision") {
  ExperimentConfig config = small_config();
  config.delta_rel = {1e-2, 1e-4};
  const SweepTable table = run_sweep(config);

  std::ostringstream out;
  emit_csv(table, out);
  std::istringstream in(out.str());
  const std::vector<CellStats> parsed = parse_csv(in);

  REQUIRE(parsed.size() == table.cells.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].scheme == table.cells[i].scheme);
    CHECK(parsed[i].stragglers == table.cells[i].stragglers);
    CHECK(parsed[i].delta_bits == table.cells[i].delta_bits);   // bitwise via %.17g
    CHECK(parsed[i].sigma2 == table.cells[i].sigma2);
    CHECK(parsed[i].mean_err == table.cells[i].mean_err);
    CHECK(parsed[i].median_err == table.cells[i].median_err);
    CHECK(parsed[i].std_err == table.cells[i].std_err);
    CHECK(parsed[i].mean_cond == table.cells[i].mean_cond);
  }
}

TEST_CASE("emit_json carries cells and optional trials") {
  ExperimentConfig config = small_config();
  config.keep_trials = true;
  const SweepTable table = run_sweep(config);

  std::ostringstream with_trials;
  emit_json(table, with_trials, true);
  CHECK(with_trials.str().find("\"trials\"") != std::string::npos);
  CHECK(with_trials.str().find("\"decode_condition\"") != std::string::npos);
  CHECK(with_trials.str().find("\"normalization\"") != std::string::npos);

  std::ostringstream without;
  emit_json(table, without, false);
  CHECK(without.str().find("\"decode_condition\"") == std::string::npos);
}

TEST_CASE("mean_error_vs_delta is sorted, monotone and errors on unknown cells") {
  ExperimentConfig config = small_config();
  config.schemes = {SchemeParams{MatDotParams{2, 1, 7}}}; // K = 5, N = 7
  config.trials = 24;
  config.delta_rel = {1e-1, 1e-4, 1e-2, 1e-3}; // deliberately unsorted
  const SweepTable table = run_sweep(config);

  const CellSelector selector{Scheme::kMatDot, 2, 1, 0};
  const auto series = mean_error_vs_delta(table, selector);
  REQUIRE(series.size() == 4);
  for (std::size_t i = 1; i < series.size(); ++i) {
    CHECK(series[i].first > series[i - 1].first);
  }

  // Larger budget -> smaller sigma2 -> smaller error, with 2-SE slack.
  for (std::size_t i = 1; i < series.size(); ++i) {
    const CellStats* prev = nullptr;
    const CellStats* cur = nullptr;
    for (const CellStats& cs : table.cells) {
      if (cs.delta_rel == series[i - 1].first) prev = &cs;
      if (cs.delta_rel == series[i].first) cur = &cs;
    }
    REQUIRE(prev != nullptr);
    REQUIRE(cur != nullptr);
    const double slack = 2.0 * std::sqrt(prev->std_err * prev->std_err +
                                         cur->std_err * cur->std_err) /
                         std::sqrt(static_cast<double>(cur->trials));
    CHECK(series[i].second <= series[i - 1].second + slack);
  }

  CHECK_THROWS_AS(mean_error_vs_delta(table, CellSelector{Scheme::kGasp, 4, 3, 0}),
                  InvalidArgument);
}

TEST_CASE("mean error grows with the collusion tolerance") {
  ExperimentConfig config;
  config.dims = Dims{12, 12, 12};
  config.trials = 24;
  config.delta_rel = {1e-3};
  config.master_seed = 7;
  config.schemes = {SchemeParams{MatDotParams{2, 1, 11}},
                    SchemeParams{MatDotParams{2, 3, 11}}}; // K = 5 resp. 9, same N
  const SweepTable table = run_sweep(config);

  const auto low_x = mean_error_vs_delta(table, CellSelector{Scheme::kMatDot, 2, 1, 0});
  const auto high_x = mean_error_vs_delta(table, CellSelector{Scheme::kMatDot, 2, 3, 0});
  CHECK(high_x[0].second > low_x[0].second);
}

TEST_CASE("mean error follows the inverse-delta scaling of the calibration") {
  ExperimentConfig config;
  config.dims = Dims{12, 12, 12};
  config.trials = 20;
  config.master_seed = 31;
  config.schemes = {SchemeParams{MatDotParams{2, 1, 5}}};
  config.delta_rel = {1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2};
  const SweepTable table = run_sweep(config);

  const auto series = mean_error_vs_delta(table, CellSelector{Scheme::kMatDot, 2, 1, 0});
  const double slope = log_log_slope(series);
  // sigma2 ~ 1/delta and the floating-point error scales with sigma2.
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("straggler sweep mean error is non-decreasing within slack") {
  ExperimentConfig config;
  config.dims = Dims{12, 12, 12};
  config.trials = 30;
  config.master_seed = 13;
  config.schemes = {SchemeParams{MatDotParams{2, 1, 9}}}; // K = 5
  config.delta_rel = {1e-3};
  config.straggler_counts = {0, 2, 4};
  const SweepTable table = run_sweep(config);
  REQUIRE(table.cells.size() == 3);

  for (std::size_t i = 1; i < table.cells.size(); ++i) {
    const CellStats& prev = table.cells[i - 1];
    const CellStats& cur = table.cells[i];
    const double slack =
        2.0 * std::sqrt(prev.std_err * prev.std_err + cur.std_err * cur.std_err) /
        std::sqrt(static_cast<double>(cur.trials));
    CHECK(cur.mean_err + slack >= prev.mean_err);
  }
  CHECK(std::abs(table.cells[0].mean_cond - 1.0) < 1e-9); // all roots used
  CHECK(table.cells[1].mean_cond > 1.0);
}

TEST_CASE("log_log_slope on an exact power law") {
  CHECK(log_log_slope({{1.0, 10.0}, {10.0, 1.0}}) == doctest::Approx(-1.0));
  CHECK(log_log_slope({{1.0, 2.0}, {100.0, 20.0}}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(log_log_slope({{1.0, 1.0}}), InvalidArgument);
}

TEST_CASE("config JSON round-trip and env overrides") {
  ExperimentConfig config;
  config.schemes = {SchemeParams{MatDotParams{4, 3, 21}}, SchemeParams{GaspParams{2, 2, 3, 13}}};
  config.dims = Dims{36, 36, 36};
  config.trials = 200;
  config.delta_rel = {1e-4, 1e-3};
  config.straggler_counts = {0, 1};
  config.master_seed = 12345;
  config.input = InputDistribution::kComplexGaussian;
  config.decode_policy = DecodePolicy::kFirstK;
  config.strategy = SearchStrategy::kConsecutive;

  const ExperimentConfig parsed = config_from_json(config_to_json(config));
  CHECK(parsed.schemes.size() == 2);
  CHECK(std::get<MatDotParams>(parsed.schemes[0]).p == 4);
  CHECK(std::get<GaspParams>(parsed.schemes[1]).m == 2);
  CHECK(parsed.trials == 200);
  CHECK(parsed.delta_rel == config.delta_rel);
  CHECK(parsed.straggler_counts == config.straggler_counts);
  CHECK(parsed.master_seed == 12345);
  CHECK(parsed.input == InputDistribution::kComplexGaussian);
  CHECK(parsed.decode_policy == DecodePolicy::kFirstK);
  REQUIRE(parsed.strategy.has_value());
  CHECK(*parsed.strategy == SearchStrategy::kConsecutive);

  ::setenv("SDMM_SEED", "777", 1);
  ExperimentConfig overridden = parsed;
  apply_env_overrides(overridden);
  CHECK(overridden.master_seed == 777);
  ::unsetenv("SDMM_SEED");
}
