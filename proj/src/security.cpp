#include "sdmm/security.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "sdmm/linalg.hpp"

namespace sdmm {

namespace {

ComplexMatrix exponent_rows(const std::vector<std::size_t>& exponents,
                            const EvaluationPoints& points) {
  ComplexMatrix rows(exponents.size(), points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    // One running power per column; exponents are sorted ascending.
    Complex power(1.0, 0.0);
    std::size_t current = 0;
    for (std::size_t j = 0; j < exponents.size(); ++j) {
      while (current < exponents[j]) {
        power *= points[i];
        ++current;
      }
      rows(j, i) = power;
    }
  }
  return rows;
}

GeneratorSplit make_split(Scheme scheme, Side side, std::size_t block_divisor,
                          std::vector<std::size_t> data_exponents,
                          std::vector<std::size_t> noise_exponents,
                          const EvaluationPoints& points) {
  GeneratorSplit split;
  split.scheme = scheme;
  split.side = side;
  split.block_divisor = block_divisor;
  split.data_rows = exponent_rows(data_exponents, points);
  split.noise_rows = exponent_rows(noise_exponents, points);
  split.data_exponents = std::move(data_exponents);
  split.noise_exponents = std::move(noise_exponents);
  return split;
}

std::vector<std::size_t> iota_exponents(std::size_t count, std::size_t base = 0,
                                        std::size_t stride = 1) {
  std::vector<std::size_t> exps(count);
  for (std::size_t j = 0; j < count; ++j) {
    exps[j] = base + stride * j;
  }
  return exps;
}

ComplexMatrix restrict_columns(const ComplexMatrix& rows, const CollusionSet& colluders) {
  ComplexMatrix out(rows.rows(), colluders.size());
  for (std::size_t c = 0; c < colluders.size(); ++c) {
    const std::size_t col = colluders.indices[c] - 1;
    if (col >= rows.cols()) {
      throw InvalidArgument("collusion set references server id " +
                            std::to_string(colluders.indices[c]) + " beyond N = " +
                            std::to_string(rows.cols()));
    }
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      out(i, c) = rows(i, col);
    }
  }
  return out;
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

bool is_cyclically_consecutive(const CollusionSet& set, std::size_t n_servers) {
  const std::size_t x = set.size();
  if (x <= 1) return true;
  // Sorted ids form a cyclic window iff some rotation starts a run of x
  // consecutive ids mod N.
  for (std::uint32_t start : set.indices) {
    bool all = true;
    for (std::size_t offset = 0; offset < x; ++offset) {
      const std::uint32_t want =
          static_cast<std::uint32_t>((start - 1 + offset) % n_servers + 1);
      if (!std::binary_search(set.indices.begin(), set.indices.end(), want)) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace

GeneratorSplit generator_split(const MatDotParams& params, const EvaluationPoints& points,
                               Side side) {
  params.validate();
  if (points.size() != params.n_servers) {
    throw InvalidArgument("evaluation point count does not match N");
  }
  // Both MatDot polynomials use data exponents {0..p-1} (g walks them in
  // reverse block order, which leaves the Gram unchanged) and noise
  // exponents {p..p+X-1}.
  return make_split(Scheme::kMatDot, side, params.p, iota_exponents(params.p),
                    iota_exponents(params.x, params.p), points);
}

GeneratorSplit generator_split(const GaspParams& params, const EvaluationPoints& points,
                               Side side) {
  params.validate();
  if (points.size() != params.n_servers) {
    throw InvalidArgument("evaluation point count does not match N");
  }
  const std::size_t mn = params.m * params.n;
  if (side == Side::kA) {
    return make_split(Scheme::kGasp, side, params.m, iota_exponents(params.m),
                      iota_exponents(params.x, mn), points);
  }
  return make_split(Scheme::kGasp, side, params.n, iota_exponents(params.n, 0, params.m),
                    iota_exponents(params.x, mn), points);
}

GeneratorSplit generator_split(const SchemeParams& params, const EvaluationPoints& points,
                               Side side) {
  return std::visit([&](const auto& p) { return generator_split(p, points, side); }, params);
}

double leakage_bound(const GeneratorSplit& split, const CollusionSet& colluders,
                     const NoiseSpec& noise, const Dims& dims) {
  noise.validate();
  if (colluders.size() != split.noise_rows.rows()) {
    throw InvalidArgument("collusion set size must equal X = " +
                          std::to_string(split.noise_rows.rows()));
  }

  const ComplexMatrix noise_cols = restrict_columns(split.noise_rows, colluders);
  const ComplexMatrix data_cols = restrict_columns(split.data_rows, colluders);

  // Gamma = (noise rows |_X)(noise rows |_X)^H. Always invertible for
  // distinct unit-circle points, but trace_of_solve guards regardless.
  const ComplexMatrix gamma = hermitian_gram(noise_cols);

  // Sigma'[i][k] = input_var * sum_j F[j][i] conj(F[j][k]) over data rows j,
  // i.e. the conjugate Gram of the restricted data columns.
  const double input_var = split.side == Side::kA ? noise.input_sigma2_a : noise.input_sigma2_b;
  const std::size_t x = colluders.size();
  ComplexMatrix sigma_prime(x, x);
  for (std::size_t i = 0; i < x; ++i) {
    for (std::size_t k = 0; k < x; ++k) {
      Complex acc(0.0, 0.0);
      for (std::size_t j = 0; j < data_cols.rows(); ++j) {
        acc += data_cols(j, i) * std::conj(data_cols(j, k));
      }
      sigma_prime(i, k) = input_var * acc;
    }
  }

  const double trace = trace_of_solve(gamma, sigma_prime);

  const std::size_t block_elements = split.side == Side::kA
                                         ? dims.t * dims.s / split.block_divisor
                                         : dims.s * dims.r / split.block_divisor;
  return static_cast<double>(block_elements) / std::numbers::ln2 / noise.sigma2 * trace;
}

SearchStrategy default_strategy(std::size_t n_servers, std::size_t x) {
  return binomial(n_servers, x) <= 20000 ? SearchStrategy::kExhaustive
                                         : SearchStrategy::kConsecutive;
}

namespace {

template <typename Visit>
void for_each_subset(std::size_t n, std::size_t x, Visit&& visit) {
  // Lexicographic enumeration of X-subsets of {1..N}.
  std::vector<std::uint32_t> current(x);
  for (std::size_t i = 0; i < x; ++i) {
    current[i] = static_cast<std::uint32_t>(i + 1);
  }
  while (true) {
    visit(current);
    std::size_t i = x;
    while (i > 0 && current[i - 1] == n - x + i) {
      --i;
    }
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < x; ++j) {
      current[j] = current[j - 1] + 1;
    }
  }
}

}  // namespace

WorstCollusion worst_collusion(const GeneratorSplit& split_a, const GeneratorSplit& split_b,
                               const NoiseSpec& noise, const Dims& dims, std::size_t n_servers,
                               std::size_t x, SearchStrategy strategy) {
  if (x == 0 || x > n_servers) {
    throw InvalidArgument("collusion size X must be in 1..N");
  }

  WorstCollusion best;
  best.strategy = strategy;
  bool have_best = false;

  auto consider = [&](const std::vector<std::uint32_t>& indices) {
    CollusionSet set{indices};
    const double a = leakage_bound(split_a, set, noise, dims);
    const double b = leakage_bound(split_b, set, noise, dims);
    const double total = a + b;
    // Strictly-greater comparison keeps the lexicographically smallest
    // argmax (subsets are visited in lexicographic order).
    if (!have_best || total > best.total_bits) {
      have_best = true;
      best.set = std::move(set);
      best.bound_a_bits = a;
      best.bound_b_bits = b;
      best.total_bits = total;
    }
  };

  if (strategy == SearchStrategy::kExhaustive) {
    if (binomial(n_servers, x) > 1000000) {
      throw InvalidArgument(
          "exhaustive collusion search would enumerate more than 10^6 subsets; "
          "use the consecutive strategy");
    }
    for_each_subset(n_servers, x, consider);
    best.consecutive_argmax = is_cyclically_consecutive(best.set, n_servers);
  } else {
    for (std::size_t start = 1; start <= n_servers; ++start) {
      std::vector<std::uint32_t> window(x);
      for (std::size_t offset = 0; offset < x; ++offset) {
        window[offset] = static_cast<std::uint32_t>((start - 1 + offset) % n_servers + 1);
      }
      std::sort(window.begin(), window.end());
      consider(window);
    }
  }
  return best;
}

NoiseSpec calibrate_sigma2(double delta_bits, const Dims& dims, const SchemeParams& params,
                           const EvaluationPoints& points, double input_sigma2_a,
                           double input_sigma2_b, SearchStrategy strategy) {
  if (!(delta_bits > 0.0)) {
    throw InvalidArgument("leakage budget delta must be positive");
  }
  const GeneratorSplit split_a = generator_split(params, points, Side::kA);
  const GeneratorSplit split_b = generator_split(params, points, Side::kB);
  NoiseSpec unit{1.0, input_sigma2_a, input_sigma2_b};
  const WorstCollusion worst = worst_collusion(split_a, split_b, unit, dims,
                                               servers_of(params), collusion_of(params), strategy);
  // total(sigma2) = total(1) / sigma2, so the budget is met with equality at
  // sigma2 = total(1) / delta. A single division keeps halving delta exactly
  // equivalent to doubling sigma2.
  NoiseSpec calibrated = unit;
  calibrated.sigma2 = worst.total_bits / delta_bits;
  return calibrated;
}

LeakageReport make_leakage_report(double delta_bits, const Dims& dims, const SchemeParams& params,
                                  const EvaluationPoints& points, double input_sigma2_a,
                                  double input_sigma2_b, std::optional<SearchStrategy> strategy) {
  LeakageReport report;
  report.scheme = scheme_of(params);
  report.params = params;
  report.dims = dims;
  report.delta_bits = delta_bits;
  const std::size_t n = servers_of(params);
  const std::size_t x = collusion_of(params);
  SearchStrategy chosen = strategy.value_or(default_strategy(n, x));
  report.heuristic_warning = !strategy.has_value() && chosen == SearchStrategy::kConsecutive;

  const NoiseSpec calibrated =
      calibrate_sigma2(delta_bits, dims, params, points, input_sigma2_a, input_sigma2_b, chosen);
  report.sigma2 = calibrated.sigma2;

  const GeneratorSplit split_a = generator_split(params, points, Side::kA);
  const GeneratorSplit split_b = generator_split(params, points, Side::kB);
  report.worst =
      worst_collusion(split_a, split_b, calibrated, dims, n, x, chosen);
  return report;
}

std::string leakage_report_to_json(const LeakageReport& report) {
  nlohmann::json j;
  j["scheme"] = scheme_name(report.scheme);
  if (report.scheme == Scheme::kMatDot) {
    const auto& p = std::get<MatDotParams>(report.params);
    j["params"] = {{"p", p.p}, {"x", p.x}, {"n_servers", p.n_servers}, {"threshold", p.threshold()}};
  } else {
    const auto& p = std::get<GaspParams>(report.params);
    j["params"] = {{"m", p.m},
                   {"n", p.n},
                   {"x", p.x},
                   {"n_servers", p.n_servers},
                   {"threshold", p.threshold()}};
    // Per-side element counts ts/m and sr/n extend the inner-product
    // bound's ts/p factor to the outer partition.
    j["bound_kind"] = "analog-GASP bound (extended)";
  }
  j["dims"] = {{"t", report.dims.t}, {"s", report.dims.s}, {"r", report.dims.r}};
  j["delta_bits"] = report.delta_bits;
  j["sigma2"] = report.sigma2;
  j["worst_set"] = report.worst.set.indices;
  j["bound_a_bits"] = report.worst.bound_a_bits;
  j["bound_b_bits"] = report.worst.bound_b_bits;
  j["strategy"] =
      report.worst.strategy == SearchStrategy::kExhaustive ? "exhaustive" : "consecutive";
  if (report.worst.consecutive_argmax.has_value()) {
    j["conjecture_verified"] = *report.worst.consecutive_argmax;
  } else {
    j["conjecture_verified"] = nullptr;
  }
  if (report.heuristic_warning) {
    j["heuristic_warning"] = true;
  }
  return j.dump(2);
}

double scalar_leakage_exact(double sigma_a2, double sigma_r2, Complex alpha) {
  if (!(sigma_a2 > 0.0) || !(sigma_r2 > 0.0)) {
    throw InvalidArgument("scalar leakage variances must be positive");
  }
  if (alpha == Complex(0.0, 0.0)) {
    throw InvalidArgument("alpha = 0 leaks the secret directly");
  }
  const double alpha2 = std::norm(alpha);
  return 0.5 * std::log2(1.0 + sigma_a2 / (alpha2 * sigma_r2));
}

double real_gaussian_entropy_bits(double variance) {
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * variance);
}

double complex_gaussian_entropy_bits(double variance) {
  return std::log2(std::numbers::pi * std::numbers::e * variance);
}

double input_entropy_proxy_bits(const Dims& dims, bool complex_inputs, double variance) {
  const double per_entry = complex_inputs ? complex_gaussian_entropy_bits(variance)
                                          : real_gaussian_entropy_bits(variance);
  return static_cast<double>(dims.t * dims.s + dims.s * dims.r) * per_entry;
}

}  // namespace sdmm
