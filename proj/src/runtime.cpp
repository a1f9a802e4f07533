#include "sdmm/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sdmm/bytes.hpp"
#include "sdmm/linalg.hpp"

namespace sdmm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::uint64_t matrix_digest(const ComplexMatrix& m) {
  return fnv1a_digest(reinterpret_cast<const std::uint8_t*>(m.data()),
                      m.size() * sizeof(Complex));
}

}  // namespace

WorkerPool WorkerPool::uniform(std::size_t n, double base_latency, double jitter_scale) {
  WorkerPool pool;
  pool.workers.reserve(n);
  pool.transcripts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pool.workers.push_back(
        WorkerConfig{static_cast<std::uint32_t>(i + 1), base_latency, jitter_scale});
  }
  return pool;
}

ResponseSet collect_fastest(std::vector<TimedResponse> pending, std::size_t k, Scheme scheme) {
  if (pending.size() < k) {
    throw NotEnoughResponses(pending.size(), k);
  }
  std::sort(pending.begin(), pending.end(), [](const TimedResponse& a, const TimedResponse& b) {
    if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
    return a.response.server_id < b.response.server_id;
  });
  ResponseSet set;
  set.scheme = scheme;
  set.responses.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    set.responses.push_back(std::move(pending[i].response));
  }
  return set;
}

ShareSet encode_job(const ComplexMatrix& a, const ComplexMatrix& b, const SchemeParams& params,
                    const NoiseSpec& noise, std::uint64_t seed) {
  validate(params);
  noise.validate();
  Rng mask_rng = Rng::derive(seed, 0x6d61736bULL); // mask stream
  const EvaluationPoints points = EvaluationPoints::roots_of_unity(servers_of(params));

  if (scheme_of(params) == Scheme::kMatDot) {
    const auto& md = std::get<MatDotParams>(params);
    const InnerPartition part = split_inner(a, b, md.p);
    const auto masks_r = sample_masks(part.blocks_a.front().rows(), part.blocks_a.front().cols(),
                                      md.x, noise.sigma2, mask_rng);
    const auto masks_s = sample_masks(part.blocks_b.front().rows(), part.blocks_b.front().cols(),
                                      md.x, noise.sigma2, mask_rng);
    return encode_matdot(part, masks_r, masks_s, points, noise);
  }
  const auto& gp = std::get<GaspParams>(params);
  const OuterPartition part = split_outer(a, b, gp.m, gp.n);
  const auto masks_r = sample_masks(part.blocks_a.front().rows(), part.blocks_a.front().cols(),
                                    gp.x, noise.sigma2, mask_rng);
  const auto masks_s = sample_masks(part.blocks_b.front().rows(), part.blocks_b.front().cols(),
                                    gp.x, noise.sigma2, mask_rng);
  return encode_gasp(part, masks_r, masks_s, points, noise);
}

std::vector<std::uint32_t> select_stragglers(const StragglerModel& model, std::size_t n_servers,
                                             Rng& rng) {
  if (model.count > n_servers) {
    throw InvalidArgument("straggler count exceeds server count");
  }
  std::vector<std::uint32_t> ids;
  if (model.selection == StragglerSelection::kFixedSet) {
    ids = model.fixed_set;
    if (ids.size() != model.count) {
      throw InvalidArgument("fixed straggler set size does not match count");
    }
  } else {
    // Partial Fisher-Yates over 1..N.
    std::vector<std::uint32_t> all(n_servers);
    for (std::size_t i = 0; i < n_servers; ++i) {
      all[i] = static_cast<std::uint32_t>(i + 1);
    }
    for (std::size_t i = 0; i < model.count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n_servers - i));
      std::swap(all[i], all[j]);
    }
    ids.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(model.count));
  }
  std::sort(ids.begin(), ids.end());
  for (std::uint32_t id : ids) {
    if (id == 0 || id > n_servers) {
      throw InvalidArgument("straggler id " + std::to_string(id) + " outside 1..N");
    }
  }
  return ids;
}

JobResult run_job(const ComplexMatrix& a, const ComplexMatrix& b, const SchemeParams& params,
                  const NoiseSpec& noise, const StragglerModel& stragglers, std::uint64_t seed,
                  const JobOptions& options) {
  const std::size_t n = servers_of(params);
  const std::size_t k = threshold_of(params);
  if (options.pool != nullptr && options.pool->transcripts.size() != n) {
    throw InvalidArgument("worker pool size does not match N");
  }

  TrialRecord record;
  record.seed = seed;
  record.sigma2 = noise.sigma2;

  const auto encode_start = std::chrono::steady_clock::now();
  const ShareSet shares = encode_job(a, b, params, noise, seed);
  record.timings.encode_seconds = seconds_since(encode_start);

  Rng sim_rng = Rng::derive(seed, 0x73696d00ULL); // simulation stream
  record.stragglers = select_stragglers(stragglers, n, sim_rng);

  // Per-worker delays are drawn for every worker (stragglers included) so
  // the straggler set does not shift the other workers' draws.
  std::vector<double> delays(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = sim_rng.uniform();
    while (u == 0.0) {
      u = sim_rng.uniform();
    }
    const double base = options.pool != nullptr ? options.pool->workers[i].base_latency
                                                : options.base_latency;
    const double jitter = options.pool != nullptr ? options.pool->workers[i].jitter_scale
                                                  : options.jitter_scale;
    delays[i] = base - jitter * std::log(u);
  }

  const auto compute_start = std::chrono::steady_clock::now();
  std::vector<TimedResponse> pending;
  pending.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Share& share = shares.shares[i];
    if (options.pool != nullptr) {
      options.pool->transcripts[i].append(TranscriptEntry{
          /*task_id=*/share.server_id, shares.header_for(i), matrix_digest(share.a_share),
          matrix_digest(share.b_share), share.a_share.rows(), share.a_share.cols(),
          share.b_share.rows(), share.b_share.cols(), delays[i]});
    }
    if (std::binary_search(record.stragglers.begin(), record.stragglers.end(), share.server_id)) {
      continue; // never responds
    }
    TimedResponse timed;
    timed.arrival_time = delays[i];
    timed.response.server_id = share.server_id;
    timed.response.point_index = share.point_index;
    timed.response.point = share.point;
    timed.response.product = matmul(share.a_share, share.b_share);
    pending.push_back(std::move(timed));
  }
  record.timings.compute_seconds = seconds_since(compute_start);

  const std::size_t wanted =
      options.decode_policy == DecodePolicy::kFirstK ? k : std::max(pending.size(), k);
  ResponseSet responses = collect_fastest(std::move(pending), wanted, scheme_of(params));
  record.responders = responses.responding_servers();
  record.decode_condition = decode_condition(responses, k, options.decode_policy);

  const auto decode_start = std::chrono::steady_clock::now();
  ComplexMatrix product = scheme_of(params) == Scheme::kMatDot
                              ? decode_matdot(responses, std::get<MatDotParams>(params),
                                              options.decode_policy)
                              : decode_gasp(responses, std::get<GaspParams>(params),
                                            options.decode_policy);
  record.timings.decode_seconds = seconds_since(decode_start);

  const ComplexMatrix oracle = matmul(a, b);
  record.abs_error = frobenius_distance(product, oracle);
  record.rel_error = record.abs_error / frobenius_norm(oracle);

  return JobResult{std::move(product), std::move(record)};
}

}  // namespace sdmm
