#include "sdmm/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <mutex>

#include "sdmm/bytes.hpp"
#include "sdmm/linalg.hpp"

namespace sdmm {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

void set_recv_timeout(int fd, double seconds) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(seconds);
  tv.tv_usec = static_cast<suseconds_t>((seconds - static_cast<double>(tv.tv_sec)) * 1e6);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

bool send_all(int fd, const std::uint8_t* data, std::size_t size) {
  std::size_t sent = 0;
  while (sent < size) {
    const ssize_t n = ::send(fd, data + sent, size - sent, MSG_NOSIGNAL);
    if (n <= 0) {
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

// Reads exactly `size` bytes. Returns false on clean EOF before any byte.
// Timeouts (EAGAIN) retry while *keep_going stays true; a stopped server
// aborts the read instead of blocking its join.
bool recv_all(int fd, std::uint8_t* data, std::size_t size,
              const std::atomic<bool>* keep_going) {
  std::size_t got = 0;
  while (got < size) {
    const ssize_t n = ::recv(fd, data + got, size - got, 0);
    if (n == 0) {
      if (got == 0) {
        return false;
      }
      throw ProtocolError("connection closed mid-frame", kErrMalformed);
    }
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        if (keep_going != nullptr && !keep_going->load()) {
          throw ProtocolError("server shutting down", kErrInternal);
        }
        if (keep_going != nullptr) {
          continue;
        }
        throw ProtocolError("socket read timed out", kErrInternal);
      }
      throw ProtocolError("socket read failed: " + std::string(std::strerror(errno)),
                          kErrInternal);
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

bool send_frame(int fd, const Frame& frame) {
  const auto bytes = encode_frame(frame);
  return send_all(fd, bytes.data(), bytes.size());
}

// Reads one frame; returns false on clean EOF at a frame boundary.
bool recv_frame(int fd, Frame& out, const std::atomic<bool>* keep_going) {
  std::uint8_t len_bytes[4];
  if (!recv_all(fd, len_bytes, 4, keep_going)) {
    return false;
  }
  std::uint32_t length = 0;
  for (int i = 0; i < 4; ++i) {
    length |= static_cast<std::uint32_t>(len_bytes[i]) << (8 * i);
  }
  if (length < 9 || length > kMaxFrameLength) {
    throw ProtocolError("frame length " + std::to_string(length) + " out of range",
                        kErrMalformed);
  }
  std::vector<std::uint8_t> body(length);
  if (!recv_all(fd, body.data(), body.size(), keep_going)) {
    throw ProtocolError("connection closed mid-frame", kErrMalformed);
  }
  out = parse_frame_body(body.data(), body.size());
  return true;
}

int connect_to(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string port_text = std::to_string(endpoint.port);
  if (::getaddrinfo(endpoint.host.c_str(), port_text.c_str(), &hints, &result) != 0) {
    throw ProtocolError("cannot resolve " + endpoint.host, kErrInternal);
  }
  int fd = -1;
  for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    close_fd(fd);
  }
  ::freeaddrinfo(result);
  if (fd < 0) {
    throw ProtocolError("cannot connect to " + endpoint.host + ":" + port_text, kErrInternal);
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw InvalidArgument("endpoint must be host:port, got '" + text + "'");
  }
  Endpoint e;
  e.host = text.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw InvalidArgument("bad port in '" + text + "'");
  }
  if (port <= 0 || port > 0xffff) {
    throw InvalidArgument("port out of range in '" + text + "'");
  }
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

WorkerServer::~WorkerServer() { stop(); }

void WorkerServer::start(const std::string& host, std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) {
    throw ProtocolError("cannot create listening socket", kErrInternal);
  }
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    close_fd(listen_fd_);
    throw InvalidArgument("worker listen host must be an IPv4 address, got '" + host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    close_fd(listen_fd_);
    throw ProtocolError("cannot bind " + host + ":" + std::to_string(port), kErrInternal);
  }
  if (::listen(listen_fd_, 64) != 0) {
    close_fd(listen_fd_);
    throw ProtocolError("cannot listen", kErrInternal);
  }
  socklen_t addr_len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &addr_len);
  port_ = ntohs(addr.sin_port);

  started_ = std::chrono::steady_clock::now();
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void WorkerServer::stop() {
  if (!running_.exchange(false)) {
    return;
  }
  ::shutdown(listen_fd_, SHUT_RDWR);
  // Joining the accept thread first guarantees no new connection threads
  // appear while the existing ones are joined.
  if (accept_thread_.joinable()) {
    accept_thread_.join();
  }
  close_fd(listen_fd_);
  for (std::thread& t : connection_threads_) {
    if (t.joinable()) {
      t.join();
    }
  }
  connection_threads_.clear();
}

std::vector<TranscriptEntry> WorkerServer::transcript() const {
  std::lock_guard<std::mutex> lock(log_mutex_);
  return log_.entries();
}

void WorkerServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (running_ && (errno == EINTR || errno == ECONNABORTED)) {
        continue;
      }
      break;
    }
    // Short poll interval so serve loops notice stop() promptly.
    set_recv_timeout(fd, 0.2);
    connection_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void WorkerServer::log_task(std::uint64_t task_id, const TaskPayload& task) {
  TranscriptEntry entry;
  entry.task_id = task_id;
  entry.header = task.header;
  entry.a_digest = fnv1a_digest(reinterpret_cast<const std::uint8_t*>(task.a_share.data()),
                                task.a_share.size() * sizeof(Complex));
  entry.b_digest = fnv1a_digest(reinterpret_cast<const std::uint8_t*>(task.b_share.data()),
                                task.b_share.size() * sizeof(Complex));
  entry.a_rows = task.a_share.rows();
  entry.a_cols = task.a_share.cols();
  entry.b_rows = task.b_share.rows();
  entry.b_cols = task.b_share.cols();
  entry.timestamp =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  std::lock_guard<std::mutex> lock(log_mutex_);
  log_.append(std::move(entry));
}

void WorkerServer::serve_connection(int fd) {
  while (running_) {
    Frame frame;
    std::uint64_t task_id = 0;
    try {
      if (!recv_frame(fd, frame, &running_)) {
        break; // peer closed
      }
      task_id = frame.task_id;
      if (frame.type != FrameType::kTask) {
        if (!send_frame(fd, Frame{FrameType::kError, task_id,
                                  encode_error_payload(kErrMalformed, "expected TASK frame")})) {
          break;
        }
        continue;
      }
      const TaskPayload task = parse_task_payload(frame.payload);
      log_task(task_id, task);
      if (task.a_share.cols() != task.b_share.rows()) {
        if (!send_frame(fd, Frame{FrameType::kError, task_id,
                                  encode_error_payload(kErrShapeMismatch,
                                                       "share inner dimensions do not match")})) {
          break;
        }
        continue;
      }
      const ComplexMatrix product = matmul(task.a_share, task.b_share);
      if (!send_frame(fd, Frame{FrameType::kResult, task_id, encode_result_payload(product)})) {
        break;
      }
    } catch (const ProtocolError& e) {
      if (e.code == kErrInternal) {
        break; // socket-level failure or shutdown, nothing to answer
      }
      if (!send_frame(fd, Frame{FrameType::kError, task_id,
                                encode_error_payload(static_cast<std::uint16_t>(e.code),
                                                     e.what())})) {
        break;
      }
    } catch (const std::exception& e) {
      if (!send_frame(fd, Frame{FrameType::kError, task_id,
                                encode_error_payload(kErrInternal, e.what())})) {
        break;
      }
    }
  }
  int local = fd;
  close_fd(local);
}

void worker_serve(const Endpoint& endpoint) {
  WorkerServer server;
  server.start(endpoint.host, endpoint.port);
  while (true) {
    std::this_thread::sleep_for(std::chrono::seconds(3600));
  }
}

namespace {

struct Collector {
  std::mutex mutex;
  std::condition_variable cv;
  std::vector<TimedResponse> arrived;
  std::size_t failures = 0;
};

}  // namespace

JobResult run_networked_job(const ComplexMatrix& a, const ComplexMatrix& b,
                            const SchemeParams& params, const NoiseSpec& noise,
                            const std::vector<Endpoint>& endpoints, std::uint64_t seed,
                            const NetworkJobOptions& options) {
  const std::size_t n = servers_of(params);
  const std::size_t k = threshold_of(params);
  if (endpoints.size() != n) {
    throw InvalidArgument("need one endpoint per server: N = " + std::to_string(n) + ", got " +
                          std::to_string(endpoints.size()));
  }

  TrialRecord record;
  record.seed = seed;
  record.sigma2 = noise.sigma2;

  const auto encode_start = std::chrono::steady_clock::now();
  const ShareSet shares = encode_job(a, b, params, noise, seed);
  record.timings.encode_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - encode_start).count();

  const auto dispatch_start = std::chrono::steady_clock::now();
  Collector collector;
  std::vector<std::thread> senders;
  senders.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Everything a sender needs is copied; socket timeouts bound its
    // lifetime, so every sender is joined before this function returns.
    const Share& share = shares.shares[i];
    TaskPayload task{shares.header_for(i), share.a_share, share.b_share};
    senders.emplace_back([&collector, &dispatch_start, endpoint = endpoints[i],
                          request_id = static_cast<std::uint64_t>(share.server_id),
                          payload = encode_task_payload(task), server_id = share.server_id,
                          point_index = share.point_index, point = share.point,
                          timeout = options.timeout_seconds] {
      try {
        int fd = connect_to(endpoint);
        set_recv_timeout(fd, timeout + 1.0);
        Frame reply;
        const bool got_reply = send_frame(fd, Frame{FrameType::kTask, request_id, payload}) &&
                               recv_frame(fd, reply, nullptr);
        close_fd(fd);
        if (!got_reply) {
          throw ProtocolError("worker connection dropped", kErrInternal);
        }
        if (reply.type == FrameType::kError) {
          const ErrorPayload err = parse_error_payload(reply.payload);
          throw ProtocolError("worker error " + std::to_string(err.code) + ": " + err.message,
                              err.code);
        }
        if (reply.type != FrameType::kResult || reply.task_id != request_id) {
          throw ProtocolError("unexpected reply frame", kErrMalformed);
        }
        TimedResponse timed;
        timed.arrival_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - dispatch_start)
                .count();
        timed.response.server_id = server_id;
        timed.response.point_index = point_index;
        timed.response.point = point;
        timed.response.product = parse_result_payload(reply.payload);
        std::lock_guard<std::mutex> lock(collector.mutex);
        collector.arrived.push_back(std::move(timed));
        collector.cv.notify_all();
      } catch (const std::exception&) {
        std::lock_guard<std::mutex> lock(collector.mutex);
        ++collector.failures;
        collector.cv.notify_all();
      }
    });
  }

  // First-K barrier (all-answer barrier under kAllResponses). Late responses
  // beyond the barrier are discarded.
  const std::size_t wanted = options.decode_policy == DecodePolicy::kFirstK ? k : n;
  std::vector<TimedResponse> pending;
  {
    std::unique_lock<std::mutex> lock(collector.mutex);
    collector.cv.wait_for(lock, std::chrono::duration<double>(options.timeout_seconds), [&] {
      return collector.arrived.size() >= wanted ||
             collector.arrived.size() + collector.failures == n;
    });
    pending = collector.arrived;
  }
  for (std::thread& t : senders) {
    t.join();
  }
  record.timings.compute_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - dispatch_start).count();

  if (pending.size() < k) {
    throw NotEnoughResponses(pending.size(), k);
  }
  const std::size_t used = options.decode_policy == DecodePolicy::kFirstK ? k : pending.size();
  ResponseSet responses = collect_fastest(std::move(pending), used, scheme_of(params));
  record.responders = responses.responding_servers();
  record.decode_condition = decode_condition(responses, k, options.decode_policy);

  const auto decode_start = std::chrono::steady_clock::now();
  ComplexMatrix product =
      scheme_of(params) == Scheme::kMatDot
          ? decode_matdot(responses, std::get<MatDotParams>(params), options.decode_policy)
          : decode_gasp(responses, std::get<GaspParams>(params), options.decode_policy);
  record.timings.decode_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - decode_start).count();

  const ComplexMatrix oracle = matmul(a, b);
  record.abs_error = frobenius_distance(product, oracle);
  record.rel_error = record.abs_error / frobenius_norm(oracle);

  return JobResult{std::move(product), std::move(record)};
}

}  // namespace sdmm
