#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdmm/runtime.hpp"
#include "sdmm/scheme.hpp"
#include "sdmm/security.hpp"

namespace sdmm {

enum class InputDistribution { kRealGaussian, kComplexGaussian };

/// Sweep configuration; cells are the cross product of scheme params,
/// relative leakage budgets and straggler counts.
struct ExperimentConfig {
  std::vector<SchemeParams> schemes;
  Dims dims{36, 36, 36};
  std::size_t trials = 1000;
  std::vector<double> delta_rel; // relative leakage fractions, > 0
  std::vector<std::size_t> straggler_counts{0};
  std::uint64_t master_seed = 0;
  InputDistribution input = InputDistribution::kRealGaussian;
  double input_variance = 1.0;
  /// All-responder decoding keeps the no-straggler system on the full root
  /// set (condition number 1), matching the figure experiments.
  DecodePolicy decode_policy = DecodePolicy::kAllResponses;
  std::optional<SearchStrategy> strategy; // unset -> size-based default
  StragglerSelection straggler_selection = StragglerSelection::kUniformRandom;
  std::size_t threads = 0; // 0 -> hardware concurrency (capped by SDMM_THREADS)
  bool keep_trials = false; // retain per-trial records in the table

  void validate() const;
};

/// Per-trial outcome annotated with its cell and index.
struct SweepTrial {
  std::size_t cell_id = 0;
  std::size_t trial_index = 0;
  TrialRecord record;
};

/// Aggregates for one (scheme, delta, stragglers) cell.
struct CellStats {
  std::size_t cell_id = 0;
  Scheme scheme = Scheme::kMatDot;
  std::size_t p_or_mn = 1;
  std::size_t x = 1;
  std::size_t n_servers = 0;
  std::size_t stragglers = 0;
  double delta_rel = 0.0;
  double delta_bits = 0.0;
  double sigma2 = 0.0;
  std::size_t trials = 0;
  double mean_err = 0.0;
  double median_err = 0.0;
  double std_err = 0.0; // sample standard deviation of the per-trial errors
  double mean_cond = 0.0;
};

struct SweepTable {
  ExperimentConfig config;
  double entropy_proxy_bits = 0.0; // denominator of the delta_rel axis
  std::vector<CellStats> cells;
  std::vector<SweepTrial> trials; // populated when config.keep_trials
};

SweepTable run_sweep(const ExperimentConfig& config);

/// Identifies one curve: scheme + partition (p or mn) + X + straggler count.
struct CellSelector {
  Scheme scheme = Scheme::kMatDot;
  std::size_t p_or_mn = 1;
  std::size_t x = 1;
  std::size_t stragglers = 0;
};

/// (delta_rel, mean error) sorted by delta. Throws InvalidArgument when the
/// selector matches nothing.
std::vector<std::pair<double, double>> mean_error_vs_delta(const SweepTable& table,
                                                           const CellSelector& selector);

void emit_csv(const SweepTable& table, std::ostream& out);
void emit_csv(const SweepTable& table, const std::string& path);
void emit_json(const SweepTable& table, std::ostream& out, bool include_trials = false);
void emit_json(const SweepTable& table, const std::string& path, bool include_trials = false);

/// Parses the written CSV back into cell stats (full double precision).
std::vector<CellStats> parse_csv(std::istream& in);

/// Least-squares slope of log10(y) against log10(x).
double log_log_slope(const std::vector<std::pair<double, double>>& series);

/// Experiment config from the sweep JSON document (schema in the README).
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

/// SDMM_SEED / SDMM_THREADS overrides.
void apply_env_overrides(ExperimentConfig& config);

}  // namespace sdmm
