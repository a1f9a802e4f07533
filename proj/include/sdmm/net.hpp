#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "sdmm/codec.hpp"
#include "sdmm/runtime.hpp"
#include "sdmm/wire.hpp"

namespace sdmm {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// Parses "host:port".
Endpoint parse_endpoint(const std::string& text);

/// TCP worker: accepts connections and serves TASK frames in a loop
/// (multiply the two shares, answer RESULT). Malformed frames and share
/// mismatches are answered with ERROR frames; the connection stays alive.
/// Every task received is appended to the transcript.
class WorkerServer {
 public:
  WorkerServer() = default;
  ~WorkerServer();

  WorkerServer(const WorkerServer&) = delete;
  WorkerServer& operator=(const WorkerServer&) = delete;

  /// Binds and starts the accept loop. port == 0 picks an ephemeral port.
  void start(const std::string& host, std::uint16_t port);
  void stop();

  std::uint16_t port() const { return port_; }

  /// Snapshot of the transcript (copied under the log lock).
  std::vector<TranscriptEntry> transcript() const;

 private:
  void accept_loop();
  void serve_connection(int fd);
  void log_task(std::uint64_t task_id, const TaskPayload& task);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::vector<std::thread> connection_threads_;
  mutable std::mutex log_mutex_;
  TranscriptLog log_;
  std::chrono::steady_clock::time_point started_;
};

/// Runs a worker on the given endpoint until the process is terminated.
/// CLI entry point for `sdmm worker`.
void worker_serve(const Endpoint& endpoint);

struct NetworkJobOptions {
  DecodePolicy decode_policy = DecodePolicy::kFirstK;
  double timeout_seconds = 30.0;
};

/// Networked run: encodes exactly like the in-process path (same seed ->
/// same shares), ships share i to endpoints[i], collects the fastest K
/// responses (arrival order is real wall-clock order), decodes.
/// endpoints.size() must equal N.
JobResult run_networked_job(const ComplexMatrix& a, const ComplexMatrix& b,
                            const SchemeParams& params, const NoiseSpec& noise,
                            const std::vector<Endpoint>& endpoints, std::uint64_t seed,
                            const NetworkJobOptions& options = {});

}  // namespace sdmm
