#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "wsckit/scoring.h"

namespace wsckit {

inline constexpr int kProtocolVersion = 1;

// Newline-delimited JSON messages.
//   {"type":"hello","protocol":1,"vocab_digest":"<hex>"}
//   {"type":"score","id":..,"pieces":[..],"mask_positions":[..],"targets":[..]}
//   {"type":"result","id":..,"log_probs":[..]}      null encodes -inf
//   {"type":"error","id":..|null,"message":".."}
nlohmann::ordered_json encode_hello(std::string_view vocab_digest);
nlohmann::ordered_json encode_score(const ScorerRequest& request);
nlohmann::ordered_json encode_result(const ScorerResponse& response);
nlohmann::ordered_json encode_error(const std::optional<std::string>& id,
                                    std::string_view message);
// Throw ProtocolError on missing or mistyped fields.
ScorerRequest decode_score(const nlohmann::json& message);
ScorerResponse decode_result(const nlohmann::json& message);

// A bidirectional line stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(std::string_view line) = 0;
  // nullopt on end of stream. Throws ScorerError on timeout.
  virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
};

// Line channel over a pair of file descriptors (pipes or a socket).
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool owns_fds);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void write_line(std::string_view line) override;
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override;

 protected:
  void close_fds();

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
  bool eof_ = false;
};

// Runs `command` through /bin/sh with its stdin/stdout connected to the
// channel. Closing the channel closes the child's stdin and reaps it.
std::unique_ptr<LineChannel> spawn_process(const std::string& command);

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port);

// "exec:<shell command>" or "tcp:<host>:<port>".
std::unique_ptr<LineChannel> open_endpoint(const std::string& descriptor);

struct RemoteOptions {
  std::chrono::milliseconds timeout{30000};
  std::size_t max_in_flight = 16;
};

// Client side of the wire protocol. Sends up to max_in_flight requests
// before waiting and matches responses by id regardless of arrival order.
// Single-flight: concurrent score() calls are serialized.
class RemoteScorer : public Scorer {
 public:
  // Performs the handshake. Throws HandshakeError on a version or vocab
  // digest mismatch, ScorerError on transport failure or timeout.
  RemoteScorer(std::unique_ptr<LineChannel> channel, std::string vocab_digest,
               RemoteOptions options = {});

  static std::unique_ptr<RemoteScorer> connect(const std::string& descriptor,
                                               const std::string& vocab_digest,
                                               RemoteOptions options = {});

  std::vector<ScorerResponse> score(std::span<const ScorerRequest> requests) override;
  const std::string& vocab_digest() const override { return vocab_digest_; }
  std::string identity() const override { return "remote:" + vocab_digest_; }

 private:
  std::unique_ptr<LineChannel> channel_;
  std::string vocab_digest_;
  RemoteOptions options_;
  std::mutex mu_;
  bool broken_ = false;
};

// Answers one protocol line. `handshaken` tracks the connection state.
std::string handle_message(Scorer& scorer, std::string_view line, bool& handshaken);

// Serves the protocol on `channel` until end of stream.
void serve(Scorer& scorer, LineChannel& channel);

// Accepts connections one at a time and serves each to completion.
class TcpServer {
 public:
  // Port 0 picks an ephemeral port.
  TcpServer(const std::string& host, std::uint16_t port);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return port_; }
  // Returns after `max_connections` connections (0 = forever).
  void run(Scorer& scorer, std::size_t max_connections = 0);

 private:
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
};

// Records responses of an inner scorer keyed by request content (ids
// excluded) in a JSON-lines file and replays them on later runs, so runs
// against a remote scorer can be repeated byte-for-byte.
class ReplayCacheScorer : public Scorer {
 public:
  ReplayCacheScorer(Scorer& inner, std::string path);

  std::vector<ScorerResponse> score(std::span<const ScorerRequest> requests) override;
  const std::string& vocab_digest() const override { return inner_.vocab_digest(); }
  std::string identity() const override { return inner_.identity(); }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::string key(const ScorerRequest& request) const;

  Scorer& inner_;
  std::string path_;
  std::unordered_map<std::string, std::vector<double>> cache_;
  std::mutex mu_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace wsckit
