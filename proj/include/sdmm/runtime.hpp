#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdmm/codec.hpp"
#include "sdmm/scheme.hpp"
#include "sdmm/security.hpp"

namespace sdmm {

/// Delay model for one simulated worker: arrival = base_latency plus an
/// exponential jitter draw. Simulated seconds only order arrivals; nothing
/// sleeps in in-process mode.
struct WorkerConfig {
  std::uint32_t id = 0; // 1-based, unique in [N]
  double base_latency = 1e-3;
  double jitter_scale = 1e-3;
};

enum class StragglerSelection { kUniformRandom, kFixedSet };

/// Stragglers never respond (infinite delay): the figures' x-axis counts
/// dropped servers, not slowed ones.
struct StragglerModel {
  std::size_t count = 0;
  StragglerSelection selection = StragglerSelection::kUniformRandom;
  std::vector<std::uint32_t> fixed_set;
};

/// What one honest-but-curious worker has seen: share headers, payload
/// digests and shapes, arrival timestamps. Append-only.
struct TranscriptEntry {
  std::uint64_t task_id = 0;
  ShareHeader header;
  std::uint64_t a_digest = 0;
  std::uint64_t b_digest = 0;
  std::size_t a_rows = 0, a_cols = 0;
  std::size_t b_rows = 0, b_cols = 0;
  double timestamp = 0.0;
};

class TranscriptLog {
 public:
  void append(TranscriptEntry entry) { entries_.push_back(std::move(entry)); }
  const std::vector<TranscriptEntry>& entries() const { return entries_; }

 private:
  std::vector<TranscriptEntry> entries_;
};

/// Simulated worker pool; owns one transcript per worker so tests can check
/// what each server learned.
struct WorkerPool {
  std::vector<WorkerConfig> workers;
  std::vector<TranscriptLog> transcripts;

  static WorkerPool uniform(std::size_t n, double base_latency = 1e-3,
                            double jitter_scale = 1e-3);
};

struct PhaseTimings {
  double encode_seconds = 0.0;
  double compute_seconds = 0.0;
  double decode_seconds = 0.0;
};

/// One completed job: seeds, realized noise level, which servers straggled
/// and which responded (arrival order), accuracy vs. the local oracle, and
/// the conditioning of the decoding system.
struct TrialRecord {
  std::uint64_t seed = 0;
  double sigma2 = 0.0;
  std::vector<std::uint32_t> stragglers;
  std::vector<std::uint32_t> responders;
  double abs_error = 0.0;
  double rel_error = 0.0;
  double decode_condition = 1.0;
  PhaseTimings timings;
};

struct JobOptions {
  DecodePolicy decode_policy = DecodePolicy::kFirstK;
  /// When set, transcripts are appended to this pool (its size must be N).
  WorkerPool* pool = nullptr;
  double base_latency = 1e-3;
  double jitter_scale = 1e-3;
};

struct JobResult {
  ComplexMatrix product;
  TrialRecord record;
};

/// A response together with its simulated arrival time.
struct TimedResponse {
  double arrival_time = 0.0;
  Response response;
};

/// Sorts pending responses by (arrival time, server id) and keeps the first
/// k. Throws NotEnoughResponses when fewer than k are pending.
ResponseSet collect_fastest(std::vector<TimedResponse> pending, std::size_t k, Scheme scheme);

/// Encode -> dispatch to N simulated workers -> collect -> decode, fully
/// deterministic for a given seed. Workers compute correct products and log
/// everything they receive.
JobResult run_job(const ComplexMatrix& a, const ComplexMatrix& b, const SchemeParams& params,
                  const NoiseSpec& noise, const StragglerModel& stragglers, std::uint64_t seed,
                  const JobOptions& options = {});

/// Shared by the simulated and networked paths: split + mask + encode with
/// the job's deterministic mask stream.
ShareSet encode_job(const ComplexMatrix& a, const ComplexMatrix& b, const SchemeParams& params,
                    const NoiseSpec& noise, std::uint64_t seed);

/// Straggler ids for one trial (uniform-random draws come from the job's
/// simulation stream).
std::vector<std::uint32_t> select_stragglers(const StragglerModel& model, std::size_t n_servers,
                                             Rng& rng);

}  // namespace sdmm
