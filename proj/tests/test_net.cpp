#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "sdmm/bytes.hpp"
#include "sdmm/linalg.hpp"
#include "sdmm/net.hpp"

using namespace sdmm;

namespace {

ComplexMatrix random_real(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (std::size_t e = 0; e < m.size(); ++e) {
    m.data()[e] = Complex(rng.gaussian(), 0.0);
  }
  return m;
}

// Minimal blocking test client speaking raw frames.
class TestClient {
 public:
  explicit TestClient(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd_ >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
  }

  ~TestClient() { ::close(fd_); }

  void send_raw(const std::vector<std::uint8_t>& bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, 0);
      REQUIRE(n > 0);
      sent += static_cast<std::size_t>(n);
    }
  }

  void send_frame(const Frame& frame) { send_raw(encode_frame(frame)); }

  Frame recv_frame() {
    std::uint8_t len_bytes[4];
    recv_exact(len_bytes, 4);
    std::uint32_t length = 0;
    for (int i = 0; i < 4; ++i) {
      length |= static_cast<std::uint32_t>(len_bytes[i]) << (8 * i);
    }
    std::vector<std::uint8_t> body(length);
    recv_exact(body.data(), body.size());
    return parse_frame_body(body.data(), body.size());
  }

 private:
  void recv_exact(std::uint8_t* out, std::size_t size) {
    std::size_t got = 0;
    while (got < size) {
      const ssize_t n = ::recv(fd_, out + got, size - got, 0);
      REQUIRE(n > 0);
      got += static_cast<std::size_t>(n);
    }
  }

  int fd_ = -1;
};

}  // namespace

TEST_CASE("frame and payload encodings round-trip") {
  Rng rng(400);
  TaskPayload task;
  task.header = ShareHeader{1, 4, 4};
  task.a_share = random_real(2, 3, rng);
  task.b_share = random_real(3, 2, rng);

  Frame frame{FrameType::kTask, 42, encode_task_payload(task)};
  const auto bytes = encode_frame(frame);

  // Length prefix covers type + task id + payload.
  std::uint32_t length = 0;
  for (int i = 0; i < 4; ++i) {
    length |= static_cast<std::uint32_t>(bytes[static_cast<std::size_t>(i)]) << (8 * i);
  }
  CHECK(length == 1 + 8 + frame.payload.size());

  const Frame parsed = parse_frame_body(bytes.data() + 4, bytes.size() - 4);
  CHECK(parsed.type == FrameType::kTask);
  CHECK(parsed.task_id == 42);
  const TaskPayload parsed_task = parse_task_payload(parsed.payload);
  CHECK(parsed_task.header == task.header);
  CHECK(parsed_task.a_share == task.a_share);
  CHECK(parsed_task.b_share == task.b_share);

  const ErrorPayload err =
      parse_error_payload(encode_error_payload(kErrShapeMismatch, "bad shapes"));
  CHECK(err.code == kErrShapeMismatch);
  CHECK(err.message == "bad shapes");
}

TEST_CASE("worker answers a scalar task") {
  WorkerServer server;
  server.start("127.0.0.1", 0);

  TaskPayload task;
  task.header = ShareHeader{1, 1, 1};
  task.a_share = ComplexMatrix(1, 1, {Complex(2.0, 0.0)});
  task.b_share = ComplexMatrix(1, 1, {Complex(3.0, 0.0)});

  TestClient client(server.port());
  client.send_frame(Frame{FrameType::kTask, 9, encode_task_payload(task)});
  const Frame reply = client.recv_frame();
  CHECK(reply.type == FrameType::kResult);
  CHECK(reply.task_id == 9);
  const ComplexMatrix product = parse_result_payload(reply.payload);
  CHECK(product(0, 0) == Complex(6.0, 0.0));

  server.stop();
  REQUIRE(server.transcript().size() == 1);
  CHECK(server.transcript()[0].header.server_id == 1);
}

TEST_CASE("worker reports shape mismatches and stays alive") {
  WorkerServer server;
  server.start("127.0.0.1", 0);
  TestClient client(server.port());

  TaskPayload bad;
  bad.header = ShareHeader{1, 1, 1};
  bad.a_share = ComplexMatrix(1, 2);
  bad.b_share = ComplexMatrix(3, 1); // inner dims 2 vs 3
  client.send_frame(Frame{FrameType::kTask, 1, encode_task_payload(bad)});
  const Frame error_reply = client.recv_frame();
  CHECK(error_reply.type == FrameType::kError);
  CHECK(parse_error_payload(error_reply.payload).code == kErrShapeMismatch);

  // The connection survives; a valid task still gets served.
  TaskPayload good;
  good.header = ShareHeader{1, 1, 1};
  good.a_share = ComplexMatrix(1, 1, {Complex(5.0, 0.0)});
  good.b_share = ComplexMatrix(1, 1, {Complex(7.0, 0.0)});
  client.send_frame(Frame{FrameType::kTask, 2, encode_task_payload(good)});
  const Frame ok_reply = client.recv_frame();
  CHECK(ok_reply.type == FrameType::kResult);
  CHECK(parse_result_payload(ok_reply.payload)(0, 0) == Complex(35.0, 0.0));

  server.stop();
}

TEST_CASE("worker reports malformed frames and stays alive") {
  WorkerServer server;
  server.start("127.0.0.1", 0);
  TestClient client(server.port());

  // Garbage payload under a TASK header.
  client.send_frame(Frame{FrameType::kTask, 3, {0xde, 0xad, 0xbe, 0xef}});
  const Frame garbage_reply = client.recv_frame();
  CHECK(garbage_reply.type == FrameType::kError);
  CHECK(parse_error_payload(garbage_reply.payload).code == kErrMalformed);

  // RESULT frames make no sense towards a worker.
  client.send_frame(Frame{FrameType::kResult, 4, {}});
  const Frame wrong_type_reply = client.recv_frame();
  CHECK(wrong_type_reply.type == FrameType::kError);
  CHECK(parse_error_payload(wrong_type_reply.payload).code == kErrMalformed);

  TaskPayload good;
  good.header = ShareHeader{1, 1, 1};
  good.a_share = ComplexMatrix(1, 1, {Complex(1.0, 0.0)});
  good.b_share = ComplexMatrix(1, 1, {Complex(4.0, 0.0)});
  client.send_frame(Frame{FrameType::kTask, 5, encode_task_payload(good)});
  CHECK(client.recv_frame().type == FrameType::kResult);

  server.stop();
}

TEST_CASE("networked job with 21 concurrent tasks matches in-process mode") {
  Rng rng(401);
  const ComplexMatrix a = random_real(36, 36, rng);
  const ComplexMatrix b = random_real(36, 36, rng);
  const SchemeParams params = MatDotParams{4, 3, 21}; // N = 21 tasks, K = 13
  const NoiseSpec noise{100.0, 1.0, 1.0};
  const std::uint64_t seed = 2024;

  // Three worker processes share the 21 server roles.
  WorkerServer workers[3];
  std::vector<Endpoint> endpoints;
  for (auto& w : workers) {
    w.start("127.0.0.1", 0);
  }
  for (std::size_t i = 0; i < 21; ++i) {
    endpoints.push_back(Endpoint{"127.0.0.1", workers[i % 3].port()});
  }

  NetworkJobOptions options;
  options.decode_policy = DecodePolicy::kAllResponses;
  const JobResult networked = run_networked_job(a, b, params, noise, endpoints, seed, options);

  JobOptions local_options;
  local_options.decode_policy = DecodePolicy::kAllResponses;
  const JobResult local = run_job(a, b, params, noise, StragglerModel{}, seed, local_options);

  CHECK(relative_frobenius_distance(networked.product, local.product) < 1e-12);
  CHECK(networked.record.responders.size() == 21);

  std::size_t logged = 0;
  for (auto& w : workers) {
    w.stop();
    logged += w.transcript().size();
  }
  CHECK(logged == 21); // every task id answered exactly once
}

TEST_CASE("endpoint parsing") {
  const Endpoint e = parse_endpoint("127.0.0.1:9000");
  CHECK(e.host == "127.0.0.1");
  CHECK(e.port == 9000);
  CHECK_THROWS_AS(parse_endpoint("nonsense"), InvalidArgument);
  CHECK_THROWS_AS(parse_endpoint("host:99999"), InvalidArgument);
}
