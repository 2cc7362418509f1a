#include "wsckit/protocol.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "wsckit/error.h"
#include "wsckit/hash.h"
#include "wsckit/text.h"

namespace wsckit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json encode_log_probs(const std::vector<double>& lps) {
  ordered_json arr = ordered_json::array();
  for (double lp : lps) {
    if (std::isfinite(lp)) {
      arr.push_back(lp);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

const json& field(const json& m, const char* name) {
  if (!m.is_object() || !m.contains(name)) {
    throw ProtocolError(std::string("message lacks field '") + name + "'");
  }
  return m.at(name);
}

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class ChildChannel : public FdChannel {
 public:
  ChildChannel(int read_fd, int write_fd, pid_t pid) : FdChannel(read_fd, write_fd, true), pid_(pid) {}
  ~ChildChannel() override {
    close_fds();
    for (int i = 0; i < 200; ++i) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) != 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

 private:
  pid_t pid_;
};

}  // namespace

ordered_json encode_hello(std::string_view vocab_digest) {
  ordered_json j;
  j["type"] = "hello";
  j["protocol"] = kProtocolVersion;
  j["vocab_digest"] = vocab_digest;
  return j;
}

ordered_json encode_score(const ScorerRequest& r) {
  ordered_json j;
  j["type"] = "score";
  j["id"] = r.id;
  j["pieces"] = r.pieces;
  j["mask_positions"] = r.mask_positions;
  j["targets"] = r.targets;
  return j;
}

ordered_json encode_result(const ScorerResponse& r) {
  ordered_json j;
  j["type"] = "result";
  j["id"] = r.id;
  j["log_probs"] = encode_log_probs(r.log_probs);
  return j;
}

ordered_json encode_error(const std::optional<std::string>& id, std::string_view message) {
  ordered_json j;
  j["type"] = "error";
  j["id"] = id ? ordered_json(*id) : ordered_json();
  j["message"] = message;
  return j;
}

ScorerRequest decode_score(const json& m) {
  try {
    ScorerRequest r;
    r.id = field(m, "id").get<std::string>();
    r.pieces = field(m, "pieces").get<std::vector<std::string>>();
    r.mask_positions = field(m, "mask_positions").get<std::vector<std::size_t>>();
    r.targets = field(m, "targets").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed score message: ") + e.what());
  }
}

ScorerResponse decode_result(const json& m) {
  ScorerResponse r;
  try {
    r.id = field(m, "id").get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed result id: ") + e.what());
  }
  const json& lps = field(m, "log_probs");
  if (!lps.is_array()) throw ProtocolError("log_probs is not an array");
  for (const json& v : lps) {
    if (v.is_null()) {
      r.log_probs.push_back(kNegInf);
    } else if (v.is_number()) {
      r.log_probs.push_back(v.get<double>());
    } else {
      throw ProtocolError("log_probs holds a non-number");
    }
  }
  return r;
}

FdChannel::FdChannel(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {
  ignore_sigpipe();
}

FdChannel::~FdChannel() { close_fds(); }

void FdChannel::close_fds() {
  if (!owns_) return;
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = write_fd_ = -1;
}

void FdChannel::write_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(errno_text("write to scorer failed"));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> FdChannel::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (eof_) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw ScorerError("timed out waiting for scorer");
    pollfd pfd{read_fd_, POLLIN, 0};
    const int wait_ms = static_cast<int>(std::min<long long>(left.count(), 1LL << 30));
    const int rc = ::poll(&pfd, 1, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(errno_text("poll failed"));
    }
    if (rc == 0) throw ScorerError("timed out waiting for scorer");
    char chunk[65536];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(errno_text("read from scorer failed"));
    }
    if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
}

std::unique_ptr<LineChannel> spawn_process(const std::string& command) {
  ignore_sigpipe();
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw ScorerError(errno_text("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ScorerError(errno_text("pipe"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw ScorerError(errno_text("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<ChildChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res); rc != 0) {
    throw ScorerError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ScorerError("cannot connect to " + host + ":" + port_str);
  return std::make_unique<FdChannel>(fd, fd, true);
}

std::unique_ptr<LineChannel> open_endpoint(const std::string& descriptor) {
  if (descriptor.starts_with("exec:")) return spawn_process(descriptor.substr(5));
  if (descriptor.starts_with("tcp:")) {
    const std::string rest = descriptor.substr(4);
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos) throw ScorerError("tcp endpoint needs host:port");
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw ScorerError("bad port in endpoint " + descriptor);
    }
    if (port <= 0 || port > 65535) throw ScorerError("bad port in endpoint " + descriptor);
    return connect_tcp(rest.substr(0, colon), static_cast<std::uint16_t>(port));
  }
  throw ScorerError("unknown scorer endpoint '" + descriptor + "' (want exec:... or tcp:...)");
}

RemoteScorer::RemoteScorer(std::unique_ptr<LineChannel> channel, std::string vocab_digest,
                           RemoteOptions options)
    : channel_(std::move(channel)), vocab_digest_(std::move(vocab_digest)), options_(options) {
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  channel_->write_line(encode_hello(vocab_digest_).dump());
  const std::optional<std::string> line = channel_->read_line(options_.timeout);
  if (!line) throw HandshakeError("scorer closed the connection during handshake");
  json reply;
  try {
    reply = json::parse(*line);
  } catch (const json::exception&) {
    throw HandshakeError("malformed handshake reply: " + *line);
  }
  const std::string type = reply.value("type", "");
  if (type == "error") {
    throw HandshakeError("scorer rejected handshake: " + reply.value("message", ""));
  }
  if (type != "hello") throw HandshakeError("expected hello, got: " + *line);
  if (reply.value("protocol", -1) != kProtocolVersion) {
    throw HandshakeError("protocol version mismatch");
  }
  if (reply.value("vocab_digest", "") != vocab_digest_) {
    throw HandshakeError("vocab digest mismatch: local " + vocab_digest_ + ", scorer " +
                         reply.value("vocab_digest", ""));
  }
}

std::unique_ptr<RemoteScorer> RemoteScorer::connect(const std::string& descriptor,
                                                    const std::string& vocab_digest,
                                                    RemoteOptions options) {
  return std::make_unique<RemoteScorer>(open_endpoint(descriptor), vocab_digest, options);
}

std::vector<ScorerResponse> RemoteScorer::score(std::span<const ScorerRequest> requests) {
  std::lock_guard<std::mutex> lock(mu_);
  if (broken_) throw ProtocolError("scorer connection is unusable after a protocol error");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    validate_request(requests[i]);
    if (!index.emplace(requests[i].id, i).second) {
      throw ScorerError("duplicate request id " + requests[i].id + " in batch");
    }
  }

  std::vector<std::optional<ScorerResponse>> out(requests.size());
  std::unordered_map<std::string, std::size_t> pending;
  std::size_t next = 0;
  std::size_t received = 0;
  std::optional<std::string> remote_error;

  auto protocol_failure = [&](const std::string& why) {
    broken_ = true;
    throw ProtocolError(why);
  };

  while (received < requests.size()) {
    while (!remote_error && next < requests.size() && pending.size() < options_.max_in_flight) {
      channel_->write_line(encode_score(requests[next]).dump());
      pending.emplace(requests[next].id, next);
      ++next;
    }
    if (pending.empty()) break;

    std::optional<std::string> line;
    try {
      line = channel_->read_line(options_.timeout);
    } catch (const ScorerError&) {
      broken_ = true;
      throw;
    }
    if (!line) {
      broken_ = true;
      throw ScorerError("scorer closed the connection");
    }
    json msg;
    try {
      msg = json::parse(*line);
    } catch (const json::exception&) {
      protocol_failure("malformed scorer message: " + *line);
    }
    const std::string type = msg.is_object() ? msg.value("type", "") : "";
    if (type == "error") {
      std::string id = msg.contains("id") && msg["id"].is_string() ? msg["id"].get<std::string>() : "";
      auto it = pending.find(id);
      if (it == pending.end()) protocol_failure("scorer error: " + msg.value("message", ""));
      pending.erase(it);
      ++received;
      if (!remote_error) remote_error = "scorer error for " + id + ": " + msg.value("message", "");
      continue;
    }
    if (type != "result") protocol_failure("unexpected message type '" + type + "'");
    ScorerResponse resp;
    try {
      resp = decode_result(msg);
    } catch (const ProtocolError& e) {
      protocol_failure(e.what());
    }
    auto it = pending.find(resp.id);
    if (it == pending.end()) protocol_failure("response with unknown id '" + resp.id + "'");
    const std::size_t idx = it->second;
    if (resp.log_probs.size() != requests[idx].mask_positions.size()) {
      protocol_failure("response " + resp.id + " has " + std::to_string(resp.log_probs.size()) +
                       " log_probs for " + std::to_string(requests[idx].mask_positions.size()) +
                       " masks");
    }
    pending.erase(it);
    out[idx] = std::move(resp);
    ++received;
    if (remote_error && pending.empty()) break;
  }
  if (remote_error) throw ScorerError(*remote_error);

  std::vector<ScorerResponse> result;
  result.reserve(out.size());
  for (auto& r : out) result.push_back(std::move(*r));
  return result;
}

std::string handle_message(Scorer& scorer, std::string_view line, bool& handshaken) {
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::exception&) {
    return encode_error(std::nullopt, "malformed JSON").dump();
  }
  if (!msg.is_object()) return encode_error(std::nullopt, "message is not an object").dump();
  std::optional<std::string> id;
  if (msg.contains("id") && msg["id"].is_string()) id = msg["id"].get<std::string>();
  const std::string type = msg.value("type", "");

  if (type == "hello") {
    if (msg.value("protocol", -1) != kProtocolVersion) {
      return encode_error(std::nullopt, "unsupported protocol version").dump();
    }
    if (msg.value("vocab_digest", "") != scorer.vocab_digest()) {
      return encode_error(std::nullopt,
                          "vocab digest mismatch: server has " + scorer.vocab_digest())
          .dump();
    }
    handshaken = true;
    return encode_hello(scorer.vocab_digest()).dump();
  }
  if (type == "score") {
    if (!handshaken) return encode_error(id, "handshake required").dump();
    try {
      const ScorerRequest request = decode_score(msg);
      std::vector<ScorerResponse> resp = scorer.score(std::span(&request, 1));
      return encode_result(resp.front()).dump();
    } catch (const std::exception& e) {
      return encode_error(id, e.what()).dump();
    }
  }
  return encode_error(id, "unknown message type '" + type + "'").dump();
}

void serve(Scorer& scorer, LineChannel& channel) {
  bool handshaken = false;
  for (;;) {
    std::optional<std::string> line = channel.read_line(std::chrono::hours(24 * 365));
    if (!line) return;
    if (trim(*line).empty()) continue;
    channel.write_line(handle_message(scorer, *line, handshaken));
  }
}

TcpServer::TcpServer(const std::string& host, std::uint16_t port) {
  ignore_sigpipe();
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw ScorerError(errno_text("socket"));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ScorerError("listen address must be an IPv4 literal: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 8) != 0) {
    const std::string why = errno_text("bind/listen");
    ::close(listen_fd_);
    throw ScorerError(why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::run(Scorer& scorer, std::size_t max_connections) {
  for (std::size_t served = 0; max_connections == 0 || served < max_connections; ++served) {
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(errno_text("accept"));
    }
    FdChannel channel(fd, fd, true);
    try {
      serve(scorer, channel);
    } catch (const ScorerError&) {
      // Peer went away mid-write; keep accepting.
    }
  }
}

ReplayCacheScorer::ReplayCacheScorer(Scorer& inner, std::string path)
    : inner_(inner), path_(std::move(path)) {
  std::ifstream in(path_);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      ScorerResponse r = decode_result(json{{"id", ""}, {"log_probs", j.at("log_probs")}});
      cache_[j.at("key").get<std::string>()] = std::move(r.log_probs);
    } catch (const std::exception& e) {
      throw DataError("corrupt replay cache " + path_ + ": " + e.what(), n);
    }
  }
}

std::string ReplayCacheScorer::key(const ScorerRequest& r) const {
  ordered_json j;
  j["vocab_digest"] = inner_.vocab_digest();
  j["pieces"] = r.pieces;
  j["mask_positions"] = r.mask_positions;
  j["targets"] = r.targets;
  return sha256_hex(j.dump());
}

std::vector<ScorerResponse> ReplayCacheScorer::score(std::span<const ScorerRequest> requests) {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<ScorerResponse> out(requests.size());
  std::vector<ScorerRequest> missing;
  std::vector<std::size_t> missing_idx;
  std::vector<std::string> keys(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    keys[i] = key(requests[i]);
    auto it = cache_.find(keys[i]);
    if (it != cache_.end()) {
      out[i] = ScorerResponse{requests[i].id, it->second};
      ++hits_;
    } else {
      missing.push_back(requests[i]);
      missing_idx.push_back(i);
    }
  }
  if (missing.empty()) return out;
  std::vector<ScorerResponse> fresh = inner_.score(missing);
  std::ofstream append(path_, std::ios::app);
  for (std::size_t m = 0; m < missing.size(); ++m) {
    const std::size_t i = missing_idx[m];
    ordered_json rec;
    rec["key"] = keys[i];
    rec["log_probs"] = encode_log_probs(fresh[m].log_probs);
    append << rec.dump() << '\n';
    cache_[keys[i]] = fresh[m].log_probs;
    out[i] = std::move(fresh[m]);
    ++misses_;
  }
  return out;
}

}  // namespace wsckit
