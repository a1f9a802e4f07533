#include "sdmm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace sdmm {

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw InvalidArgument("sweep needs at least one scheme configuration");
  if (trials == 0) throw InvalidArgument("trials must be >= 1");
  if (delta_rel.empty()) throw InvalidArgument("sweep needs at least one delta value");
  for (double d : delta_rel) {
    if (!(d > 0.0)) throw InvalidArgument("delta values must be positive");
  }
  if (!(input_variance > 0.0)) throw InvalidArgument("input variance must be positive");
  for (const SchemeParams& params : schemes) {
    sdmm::validate(params);
    const std::size_t n = servers_of(params);
    const std::size_t k = threshold_of(params);
    for (std::size_t c : straggler_counts) {
      if (c > n - k) {
        throw InvalidArgument("straggler count " + std::to_string(c) + " exceeds N - K = " +
                              std::to_string(n - k) + " for " +
                              scheme_name(scheme_of(params)));
      }
    }
    if (scheme_of(params) == Scheme::kMatDot) {
      const auto& md = std::get<MatDotParams>(params);
      if (dims.s % md.p != 0) {
        throw InvalidArgument("dims.s must be divisible by p");
      }
    } else {
      const auto& gp = std::get<GaspParams>(params);
      if (dims.t % gp.m != 0 || dims.r % gp.n != 0) {
        throw InvalidArgument("dims.t and dims.r must be divisible by m and n");
      }
    }
  }
}

namespace {

ComplexMatrix sample_input(std::size_t rows, std::size_t cols, InputDistribution dist,
                           double variance, Rng& rng) {
  ComplexMatrix m(rows, cols);
  if (dist == InputDistribution::kRealGaussian) {
    const double sd = std::sqrt(variance);
    for (std::size_t e = 0; e < m.size(); ++e) {
      m.data()[e] = Complex(sd * rng.gaussian(), 0.0);
    }
  } else {
    for (std::size_t e = 0; e < m.size(); ++e) {
      m.data()[e] = rng.circular_gaussian(variance);
    }
  }
  return m;
}

std::size_t partition_size(const SchemeParams& params) {
  if (scheme_of(params) == Scheme::kMatDot) {
    return std::get<MatDotParams>(params).p;
  }
  const auto& gp = std::get<GaspParams>(params);
  return gp.m * gp.n;
}

struct Cell {
  std::size_t cell_id;
  SchemeParams params;
  double delta_rel;
  std::size_t stragglers;
  double delta_bits;
  double sigma2;
};

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double sample_stddev(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += (v - mean) * (v - mean);
  return std::sqrt(sum / static_cast<double>(values.size() - 1));
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t threads = requested;
  if (const char* env = std::getenv("SDMM_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) {
      threads = threads == 0 ? static_cast<std::size_t>(cap)
                             : std::min(threads, static_cast<std::size_t>(cap));
    }
  }
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  return threads;
}

}  // namespace

SweepTable run_sweep(const ExperimentConfig& config) {
  config.validate();

  SweepTable table;
  table.config = config;
  table.entropy_proxy_bits =
      input_entropy_proxy_bits(config.dims, config.input == InputDistribution::kComplexGaussian,
                               config.input_variance);

  // Cell order is part of the output contract: scheme, then delta, then
  // straggler count, all in config order.
  std::vector<Cell> cells;
  std::size_t cell_id = 0;
  for (const SchemeParams& params : config.schemes) {
    const EvaluationPoints points = EvaluationPoints::roots_of_unity(servers_of(params));
    const SearchStrategy strategy = config.strategy.value_or(
        default_strategy(servers_of(params), collusion_of(params)));
    for (double delta_rel : config.delta_rel) {
      const double delta_bits = delta_rel * table.entropy_proxy_bits;
      const NoiseSpec calibrated =
          calibrate_sigma2(delta_bits, config.dims, params, points, config.input_variance,
                           config.input_variance, strategy);
      for (std::size_t straggler_count : config.straggler_counts) {
        cells.push_back(Cell{cell_id++, params, delta_rel, straggler_count, delta_bits,
                             calibrated.sigma2});
      }
    }
  }

  struct TrialSlot {
    double abs_error = 0.0;
    double condition = 1.0;
    TrialRecord record;
  };

  std::vector<CellStats> stats(cells.size());
  std::vector<std::vector<SweepTrial>> per_cell_trials(cells.size());

  for (const Cell& cell : cells) {
    std::vector<TrialSlot> slots(config.trials);

    // Trials are independent; each derives its own generators from
    // (master seed, cell id, trial index), so any schedule produces the
    // same table.
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t trial = next.fetch_add(1);
        if (trial >= config.trials) break;
        Rng input_rng = Rng::derive(config.master_seed, cell.cell_id * 0x10001ULL + 1, trial);
        const std::uint64_t job_seed =
            Rng::derive(config.master_seed, cell.cell_id * 0x10001ULL + 2, trial).next_u64();

        const ComplexMatrix a = sample_input(config.dims.t, config.dims.s, config.input,
                                             config.input_variance, input_rng);
        const ComplexMatrix b = sample_input(config.dims.s, config.dims.r, config.input,
                                             config.input_variance, input_rng);

        NoiseSpec noise{cell.sigma2, config.input_variance, config.input_variance};
        StragglerModel stragglers;
        stragglers.count = cell.stragglers;
        stragglers.selection = config.straggler_selection;

        JobOptions options;
        options.decode_policy = config.decode_policy;
        JobResult result = run_job(a, b, cell.params, noise, stragglers, job_seed, options);

        slots[trial].abs_error = result.record.abs_error;
        slots[trial].condition = result.record.decode_condition;
        slots[trial].record = std::move(result.record);
      }
    };

    const std::size_t n_threads = std::min(resolve_threads(config.threads), config.trials);
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(n_threads);
      for (std::size_t i = 0; i < n_threads; ++i) {
        pool.emplace_back(worker);
      }
      for (std::thread& t : pool) {
        t.join();
      }
    }

    std::vector<double> errors(config.trials);
    std::vector<double> conditions(config.trials);
    for (std::size_t i = 0; i < config.trials; ++i) {
      errors[i] = slots[i].abs_error;
      conditions[i] = slots[i].condition;
    }

    CellStats& cs = stats[cell.cell_id];
    cs.cell_id = cell.cell_id;
    cs.scheme = scheme_of(cell.params);
    cs.p_or_mn = partition_size(cell.params);
    cs.x = collusion_of(cell.params);
    cs.n_servers = servers_of(cell.params);
    cs.stragglers = cell.stragglers;
    cs.delta_rel = cell.delta_rel;
    cs.delta_bits = cell.delta_bits;
    cs.sigma2 = cell.sigma2;
    cs.trials = config.trials;
    cs.mean_err = mean_of(errors);
    cs.median_err = median_of(errors);
    cs.std_err = sample_stddev(errors, cs.mean_err);
    cs.mean_cond = mean_of(conditions);

    if (config.keep_trials) {
      auto& bucket = per_cell_trials[cell.cell_id];
      bucket.reserve(config.trials);
      for (std::size_t i = 0; i < config.trials; ++i) {
        bucket.push_back(SweepTrial{cell.cell_id, i, std::move(slots[i].record)});
      }
    }
  }

  table.cells = std::move(stats);
  if (config.keep_trials) {
    for (auto& bucket : per_cell_trials) {
      for (auto& trial : bucket) {
        table.trials.push_back(std::move(trial));
      }
    }
  }
  return table;
}

std::vector<std::pair<double, double>> mean_error_vs_delta(const SweepTable& table,
                                                           const CellSelector& selector) {
  std::vector<std::pair<double, double>> series;
  for (const CellStats& cs : table.cells) {
    if (cs.scheme == selector.scheme && cs.p_or_mn == selector.p_or_mn && cs.x == selector.x &&
        cs.stragglers == selector.stragglers) {
      series.emplace_back(cs.delta_rel, cs.mean_err);
    }
  }
  if (series.empty()) {
    throw InvalidArgument("no sweep cell matches the selector (" +
                          scheme_name(selector.scheme) + ", partition " +
                          std::to_string(selector.p_or_mn) + ", X " +
                          std::to_string(selector.x) + ", stragglers " +
                          std::to_string(selector.stragglers) + ")");
  }
  std::sort(series.begin(), series.end());
  return series;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr char kCsvHeader[] =
    "scheme,p_or_mn,X,N,stragglers,delta_bits,delta_relative,sigma2,trials,"
    "mean_err,median_err,std_err,mean_cond";

}  // namespace

void emit_csv(const SweepTable& table, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const CellStats& cs : table.cells) {
    out << scheme_name(cs.scheme) << ',' << cs.p_or_mn << ',' << cs.x << ',' << cs.n_servers
        << ',' << cs.stragglers << ',' << format_double(cs.delta_bits) << ','
        << format_double(cs.delta_rel) << ',' << format_double(cs.sigma2) << ',' << cs.trials
        << ',' << format_double(cs.mean_err) << ',' << format_double(cs.median_err) << ','
        << format_double(cs.std_err) << ',' << format_double(cs.mean_cond) << "\n";
  }
  if (!out) {
    throw IoError("failed while writing sweep CSV");
  }
}

void emit_csv(const SweepTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  emit_csv(table, out);
}

namespace {

nlohmann::json params_to_json(const SchemeParams& params) {
  nlohmann::json j;
  j["scheme"] = scheme_name(scheme_of(params));
  if (scheme_of(params) == Scheme::kMatDot) {
    const auto& md = std::get<MatDotParams>(params);
    j["p"] = md.p;
    j["x"] = md.x;
    j["n_servers"] = md.n_servers;
  } else {
    const auto& gp = std::get<GaspParams>(params);
    j["m"] = gp.m;
    j["n"] = gp.n;
    j["x"] = gp.x;
    j["n_servers"] = gp.n_servers;
  }
  return j;
}

SchemeParams params_from_json(const nlohmann::json& j) {
  const std::string scheme = j.at("scheme").get<std::string>();
  if (scheme == "matdot") {
    MatDotParams p;
    p.p = j.at("p").get<std::size_t>();
    p.x = j.at("x").get<std::size_t>();
    p.n_servers = j.at("n_servers").get<std::size_t>();
    return p;
  }
  if (scheme == "gasp") {
    GaspParams p;
    p.m = j.at("m").get<std::size_t>();
    p.n = j.at("n").get<std::size_t>();
    p.x = j.at("x").get<std::size_t>();
    p.n_servers = j.at("n_servers").get<std::size_t>();
    return p;
  }
  throw InvalidArgument("unknown scheme '" + scheme + "' in config");
}

}  // namespace

void emit_json(const SweepTable& table, std::ostream& out, bool include_trials) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_to_json(table.config));
  j["entropy_proxy_bits"] = table.entropy_proxy_bits;
  j["normalization"] =
      "delta_relative = delta_bits / (per-entry differential entropy of the declared "
      "input distribution * (t*s + s*r))";
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const CellStats& cs : table.cells) {
    nlohmann::json c;
    c["cell_id"] = cs.cell_id;
    c["scheme"] = scheme_name(cs.scheme);
    c["p_or_mn"] = cs.p_or_mn;
    c["x"] = cs.x;
    c["n_servers"] = cs.n_servers;
    c["stragglers"] = cs.stragglers;
    c["delta_bits"] = cs.delta_bits;
    c["delta_relative"] = cs.delta_rel;
    c["sigma2"] = cs.sigma2;
    c["trials"] = cs.trials;
    c["mean_err"] = cs.mean_err;
    c["median_err"] = cs.median_err;
    c["std_err"] = cs.std_err;
    c["mean_cond"] = cs.mean_cond;
    cells.push_back(std::move(c));
  }
  if (include_trials && !table.trials.empty()) {
    auto& trials = j["trials"] = nlohmann::json::array();
    for (const SweepTrial& t : table.trials) {
      nlohmann::json tj;
      tj["cell_id"] = t.cell_id;
      tj["trial"] = t.trial_index;
      tj["seed"] = t.record.seed;
      tj["sigma2"] = t.record.sigma2;
      tj["stragglers"] = t.record.stragglers;
      tj["responders"] = t.record.responders;
      tj["abs_error"] = t.record.abs_error;
      tj["rel_error"] = t.record.rel_error;
      tj["decode_condition"] = t.record.decode_condition;
      trials.push_back(std::move(tj));
    }
  }
  out << j.dump(2) << "\n";
  if (!out) {
    throw IoError("failed while writing sweep JSON");
  }
}

void emit_json(const SweepTable& table, const std::string& path, bool include_trials) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  emit_json(table, out, include_trials);
}

std::vector<CellStats> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty CSV");
  }
  if (line != kCsvHeader) {
    throw IoError("unexpected CSV header: " + line);
  }
  std::vector<CellStats> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    auto next = [&]() -> std::string {
      if (!std::getline(ss, field, ',')) {
        throw IoError("short CSV row: " + line);
      }
      return field;
    };
    CellStats cs;
    const std::string scheme = next();
    cs.scheme = scheme == "matdot" ? Scheme::kMatDot : Scheme::kGasp;
    cs.p_or_mn = std::stoull(next());
    cs.x = std::stoull(next());
    cs.n_servers = std::stoull(next());
    cs.stragglers = std::stoull(next());
    cs.delta_bits = std::stod(next());
    cs.delta_rel = std::stod(next());
    cs.sigma2 = std::stod(next());
    cs.trials = std::stoull(next());
    cs.mean_err = std::stod(next());
    cs.median_err = std::stod(next());
    cs.std_err = std::stod(next());
    cs.mean_cond = std::stod(next());
    cs.cell_id = cells.size();
    cells.push_back(cs);
  }
  return cells;
}

double log_log_slope(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 2) {
    throw InvalidArgument("slope needs at least two points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(series.size());
  for (const auto& [x, y] : series) {
    const double lx = std::log10(x);
    const double ly = std::log10(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  auto& schemes = j["schemes"] = nlohmann::json::array();
  for (const SchemeParams& params : config.schemes) {
    schemes.push_back(params_to_json(params));
  }
  j["dims"] = {{"t", config.dims.t}, {"s", config.dims.s}, {"r", config.dims.r}};
  j["trials"] = config.trials;
  j["delta_rel"] = config.delta_rel;
  j["straggler_counts"] = config.straggler_counts;
  j["master_seed"] = config.master_seed;
  j["input"] = config.input == InputDistribution::kRealGaussian ? "real_gaussian"
                                                                : "complex_gaussian";
  j["input_variance"] = config.input_variance;
  j["decode_policy"] =
      config.decode_policy == DecodePolicy::kAllResponses ? "all_responses" : "first_k";
  if (config.strategy.has_value()) {
    j["strategy"] =
        *config.strategy == SearchStrategy::kExhaustive ? "exhaustive" : "consecutive";
  }
  j["straggler_selection"] = config.straggler_selection == StragglerSelection::kUniformRandom
                                 ? "uniform_random"
                                 : "fixed_set";
  j["threads"] = config.threads;
  j["keep_trials"] = config.keep_trials;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig config;
  for (const auto& params : j.at("schemes")) {
    config.schemes.push_back(params_from_json(params));
  }
  if (j.contains("dims")) {
    config.dims.t = j["dims"].at("t").get<std::size_t>();
    config.dims.s = j["dims"].at("s").get<std::size_t>();
    config.dims.r = j["dims"].at("r").get<std::size_t>();
  }
  if (j.contains("trials")) config.trials = j["trials"].get<std::size_t>();
  config.delta_rel = j.at("delta_rel").get<std::vector<double>>();
  if (j.contains("straggler_counts")) {
    config.straggler_counts = j["straggler_counts"].get<std::vector<std::size_t>>();
  }
  if (j.contains("master_seed")) config.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("input")) {
    const std::string input = j["input"].get<std::string>();
    if (input == "real_gaussian") {
      config.input = InputDistribution::kRealGaussian;
    } else if (input == "complex_gaussian") {
      config.input = InputDistribution::kComplexGaussian;
    } else {
      throw InvalidArgument("unknown input distribution '" + input + "'");
    }
  }
  if (j.contains("input_variance")) config.input_variance = j["input_variance"].get<double>();
  if (j.contains("decode_policy")) {
    const std::string policy = j["decode_policy"].get<std::string>();
    if (policy == "all_responses") {
      config.decode_policy = DecodePolicy::kAllResponses;
    } else if (policy == "first_k") {
      config.decode_policy = DecodePolicy::kFirstK;
    } else {
      throw InvalidArgument("unknown decode policy '" + policy + "'");
    }
  }
  if (j.contains("strategy")) {
    const std::string strategy = j["strategy"].get<std::string>();
    if (strategy == "exhaustive") {
      config.strategy = SearchStrategy::kExhaustive;
    } else if (strategy == "consecutive") {
      config.strategy = SearchStrategy::kConsecutive;
    } else {
      throw InvalidArgument("unknown strategy '" + strategy + "'");
    }
  }
  if (j.contains("straggler_selection")) {
    const std::string sel = j["straggler_selection"].get<std::string>();
    config.straggler_selection = sel == "fixed_set" ? StragglerSelection::kFixedSet
                                                    : StragglerSelection::kUniformRandom;
  }
  if (j.contains("threads")) config.threads = j["threads"].get<std::size_t>();
  if (j.contains("keep_trials")) config.keep_trials = j["keep_trials"].get<bool>();
  return config;
}

void apply_env_overrides(ExperimentConfig& config) {
  if (const char* env = std::getenv("SDMM_SEED")) {
    config.master_seed = std::strtoull(env, nullptr, 10);
  }
  // SDMM_THREADS is consumed at dispatch time (see resolve_threads), so both
  // config-file and CLI runs honor it.
}

}  // namespace sdmm
