#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <httplib.h>

#include "ltlfbeam/errors.hpp"
#include "ltlfbeam/scorer.hpp"

extern "C" char** environ;

namespace ltlfbeam {

namespace {

nlohmann::json parse_reply(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("bridge sent malformed JSON: ") + e.what());
  }
}

class HttpTransport : public Transport {
 public:
  HttpTransport(const std::string& url, std::chrono::milliseconds timeout) : client_(url) {
    if (!client_.is_valid()) throw InvalidInputError("invalid bridge URL '" + url + "'");
    client_.set_connection_timeout(timeout);
    client_.set_read_timeout(timeout);
    client_.set_write_timeout(timeout);
  }

  nlohmann::json score(const nlohmann::json& request) override {
    return check(client_.Post("/score", request.dump(), "application/json"), "/score");
  }

  nlohmann::json vocab(std::int64_t) override { return check(client_.Get("/vocab"), "/vocab"); }

 private:
  static nlohmann::json check(const httplib::Result& res, const char* path) {
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
        throw ScorerTimeoutError(std::string("bridge timed out on ") + path);
      }
      throw ScorerError(std::string("bridge request to ") + path + " failed: " + httplib::to_string(err));
    }
    if (res->status != 200) throw ProtocolError(std::string(path) + " returned HTTP " + std::to_string(res->status));
    return parse_reply(res->body);
  }

  httplib::Client client_;
};

class StdioTransport : public Transport {
 public:
  StdioTransport(const std::string& command, std::chrono::milliseconds timeout) : timeout_(timeout) {
    // a dead bridge must surface as an error, not kill the client
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw ScorerError(std::string("pipe: ") + std::strerror(errno));
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ScorerError(std::string("pipe: ") + std::strerror(errno));
    }
    // posix_spawn resets every signal in the child before exec, so the
    // child never runs with this process's handlers installed
    posix_spawn_file_actions_t actions;
    posix_spawnattr_t attr;
    ::posix_spawn_file_actions_init(&actions);
    ::posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    ::posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
    ::posix_spawnattr_init(&attr);
    sigset_t all;
    sigset_t none;
    ::sigfillset(&all);
    ::sigemptyset(&none);
    ::posix_spawnattr_setsigdefault(&attr, &all);
    ::posix_spawnattr_setsigmask(&attr, &none);
    ::posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGDEF | POSIX_SPAWN_SETSIGMASK);
    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, const_cast<char* const*>(argv), environ);
    ::posix_spawn_file_actions_destroy(&actions);
    ::posix_spawnattr_destroy(&attr);
    if (rc != 0) {
      pid_ = -1;
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw ScorerError(std::string("cannot start bridge: ") + std::strerror(rc));
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
  }

  ~StdioTransport() override {
    ::close(in_);
    ::close(out_);
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  nlohmann::json score(const nlohmann::json& request) override { return roundtrip(request.dump()); }

  nlohmann::json vocab(std::int64_t id) override {
    nlohmann::json req;
    req["id"] = id;
    req["method"] = "vocab";
    return roundtrip(req.dump());
  }

 private:
  nlohmann::json roundtrip(std::string line) {
    if (broken_) throw ScorerError("bridge stream is out of sync after an earlier failure");
    line.push_back('\n');
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = ::write(in_, line.data() + sent, line.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        broken_ = true;
        throw ScorerError(std::string("bridge write failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
    return parse_reply(read_line());
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        broken_ = true;
        throw ScorerTimeoutError("bridge did not answer within " + std::to_string(timeout_.count()) + " ms");
      }
      pollfd p{out_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) {
        broken_ = true;
        throw ScorerError(std::string("poll: ") + std::strerror(errno));
      }
      if (r == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(out_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        broken_ = true;
        throw ProtocolError("bridge closed its output stream");
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::string buffer_;
  bool broken_ = false;
};

}  // namespace

std::unique_ptr<Transport> http_transport(const std::string& url, std::chrono::milliseconds timeout) {
  return std::make_unique<HttpTransport>(url, timeout);
}

std::unique_ptr<Transport> stdio_transport(const std::string& command, std::chrono::milliseconds timeout) {
  return std::make_unique<StdioTransport>(command, timeout);
}

}  // namespace ltlfbeam
