#include "structsql/external_scorer.h"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <mutex>

#include <nlohmann/json.hpp>

#include "structsql/error.h"

namespace structsql {
namespace {

using Clock = std::chrono::steady_clock;

class Channel {
 public:
  Channel(int read_fd, int write_fd, pid_t child) : read_fd_(read_fd), write_fd_(write_fd), child_(child) {}
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  ~Channel() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (child_ > 0) {
      ::kill(child_, SIGTERM);
      ::waitpid(child_, nullptr, 0);
    }
  }

  void write_line(const std::string& line, Clock::time_point deadline) {
    std::string data = line + "\n";
    std::size_t sent = 0;
    while (sent < data.size()) {
      wait_ready(write_fd_, POLLOUT, deadline);
      ssize_t n = child_ > 0 ? ::write(write_fd_, data.data() + sent, data.size() - sent)
                             : ::send(write_fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw TransportError(std::string("write failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(Clock::time_point deadline) {
    for (;;) {
      if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      wait_ready(read_fd_, POLLIN, deadline);
      char chunk[4096];
      ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw TransportError(std::string("read failed: ") + std::strerror(errno));
      }
      if (n == 0) throw TransportError("scorer closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  static void wait_ready(int fd, short events, Clock::time_point deadline) {
    for (;;) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      if (left <= 0) throw TimeoutError("scorer did not answer in time");
      pollfd p{fd, events, 0};
      int r = ::poll(&p, 1, static_cast<int>(left));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (r == 0) throw TimeoutError("scorer did not answer in time");
      if (p.revents & (events | POLLHUP)) return;
      if (p.revents & (POLLERR | POLLNVAL)) throw TransportError("scorer connection failed");
    }
  }

  int read_fd_;
  int write_fd_;
  pid_t child_;
  std::string buffer_;
};

std::unique_ptr<Channel> open_tcp(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size())
    throw ConfigError("tcp endpoint must be tcp:HOST:PORT, got tcp:" + address);
  std::string host = address.substr(0, colon);
  std::string port = address.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw TransportError("cannot resolve " + address + ": " + ::gai_strerror(rc));
  int fd = -1;
  std::string last_error = "no address";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot connect to " + address + ": " + last_error);
  return std::make_unique<Channel>(fd, fd, -1);
}

std::unique_ptr<Channel> open_exec(const std::string& command) {
  if (command.empty()) throw ConfigError("exec endpoint needs a command");
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) throw TransportError("pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError("pipe failed");
  }
  // A dead child would otherwise kill us with SIGPIPE on the next write.
  ::signal(SIGPIPE, SIG_IGN);
  pid_t pid = ::fork();
  if (pid < 0) throw TransportError("fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  return std::make_unique<Channel>(from_child[0], to_child[1], pid);
}

nlohmann::json parse_record(const std::string& line) {
  auto doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ProtocolViolation("scorer sent a non-object record: " + line);
  return doc;
}

const nlohmann::json& field(const nlohmann::json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw ProtocolViolation(std::string("scorer record lacks field '") + name + "'");
  return *it;
}

void expect_type(const nlohmann::json& doc, const char* type) {
  const auto& t = field(doc, "type");
  if (!t.is_string() || t.get<std::string>() != type)
    throw ProtocolViolation(std::string("expected record type '") + type + "', got " + t.dump());
}

class RemoteScorer final : public ExternalScorer {
 public:
  RemoteScorer(std::unique_ptr<Channel> channel, std::chrono::milliseconds timeout)
      : channel_(std::move(channel)), timeout_(timeout) {
    auto deadline = Clock::now() + timeout_;
    channel_->write_line(R"({"type":"hello"})", deadline);
    auto doc = parse_record(channel_->read_line(deadline));
    expect_type(doc, "vocab");
    const auto& size = field(doc, "size");
    const auto& eos = field(doc, "eos_id");
    const auto& tag = field(doc, "tokenizer_tag");
    if (!size.is_number_unsigned() || !eos.is_number_unsigned() || !tag.is_string())
      throw ProtocolViolation("malformed vocab record: " + doc.dump());
    vocab_.size = size.get<std::size_t>();
    vocab_.eos_id = eos.get<TokenId>();
    vocab_.tokenizer_tag = tag.get<std::string>();
    if (vocab_.eos_id >= vocab_.size) throw ProtocolViolation("eos_id outside the vocabulary");
  }

  std::size_t vocab_size() const override { return vocab_.size; }
  TokenId eos_id() const override { return vocab_.eos_id; }
  const RemoteVocab& remote_vocab() const override { return vocab_; }

  std::vector<double> score(const ScoringRequest& request) override {
    nlohmann::json req = {
        {"type", "score"},
        {"example_id", request.example_id},
        {"prefix", std::vector<TokenId>(request.prefix.begin(), request.prefix.end())},
        {"candidates", std::vector<TokenId>(request.candidates.begin(), request.candidates.end())},
    };
    std::lock_guard lock(mutex_);
    auto deadline = Clock::now() + timeout_;
    channel_->write_line(req.dump(), deadline);
    auto doc = parse_record(channel_->read_line(deadline));
    expect_type(doc, "scores");
    const auto& id = field(doc, "example_id");
    if (!id.is_string() || id.get<std::string>() != request.example_id)
      throw ProtocolViolation("scores record answers a different example: " + id.dump());
    const auto& scores = field(doc, "scores");
    if (!scores.is_array() || scores.size() != request.candidates.size())
      throw ProtocolViolation("expected " + std::to_string(request.candidates.size()) + " scores, got " +
                              (scores.is_array() ? std::to_string(scores.size()) : scores.dump()));
    std::vector<double> out;
    out.reserve(scores.size());
    for (const auto& s : scores) {
      if (!s.is_number()) throw ProtocolViolation("non-numeric score " + s.dump());
      double v = s.get<double>();
      if (!std::isfinite(v)) throw ProtocolViolation("non-finite score");
      out.push_back(v);
    }
    return out;
  }

 private:
  std::unique_ptr<Channel> channel_;
  std::chrono::milliseconds timeout_;
  RemoteVocab vocab_;
  std::mutex mutex_;
};

}  // namespace

std::unique_ptr<ExternalScorer> external_scorer_connect(const std::string& endpoint, std::chrono::milliseconds timeout) {
  std::unique_ptr<Channel> channel;
  if (endpoint.rfind("tcp:", 0) == 0) {
    channel = open_tcp(endpoint.substr(4));
  } else if (endpoint.rfind("exec:", 0) == 0) {
    channel = open_exec(endpoint.substr(5));
  } else {
    throw ConfigError("unknown scorer endpoint '" + endpoint + "' (expected tcp:HOST:PORT or exec:COMMAND)");
  }
  return std::make_unique<RemoteScorer>(std::move(channel), timeout);
}

}  // namespace structsql
