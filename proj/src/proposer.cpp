#include "hew/proposer.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

namespace hew {

using json = nlohmann::json;

ProposerConfig ProposerConfig::from_env(ProposerConfig base) {
  if (const char* cmd = std::getenv("HEW_PROPOSER_CMD")) base.command = cmd;
  if (const char* ms = std::getenv("HEW_PROPOSER_TIMEOUT_MS")) {
    char* end = nullptr;
    long v = std::strtol(ms, &end, 10);
    if (end && *end == '\0' && v > 0) base.timeout_ms = static_cast<int>(v);
  }
  return base;
}

std::string proposal_request_json(const ProposalRequest& req) {
  json jp = json::array();
  for (const auto& p : req.parents)
    jp.push_back({{"template", p.template_text},
                  {"score", p.score ? json(*p.score) : json(nullptr)},
                  {"diagnostics", p.diagnostics}});
  json j{{"parents", jp},
         {"task", req.task_id},
         {"feature_catalog", req.catalog_name},
         {"feature_catalog_version", req.catalog_version}};
  return j.dump();
}

namespace {

struct Subprocess {
  pid_t pid = -1;
  int in = -1;  // child stdin (write side)
  int out = -1; // child stdout (read side)

  ~Subprocess() {
    if (in >= 0) close(in);
    if (out >= 0) close(out);
    if (pid > 0) {
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
    }
  }
};

void spawn(Subprocess& sp, const std::string& command) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw Error(ErrorCode::ProposerProtocolError, "pipe failed");
  pid_t pid = fork();
  if (pid < 0)
    throw Error(ErrorCode::ProposerProtocolError, "fork failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  sp.pid = pid;
  sp.in = in_pipe[1];
  sp.out = out_pipe[0];
}

} // namespace

PolicyTemplate external_propose(const ProposerConfig& cfg,
                                const ProposalRequest& req) {
  if (cfg.command.empty())
    throw Error(ErrorCode::ProposerProtocolError, "no proposer configured");

  // A proposer may exit without reading its stdin; surface that as EPIPE on
  // write instead of a fatal SIGPIPE.
  static const bool sigpipe_ignored = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;

  Subprocess sp;
  spawn(sp, cfg.command);

  std::string request = proposal_request_json(req) + "\n";
  size_t written = 0;
  while (written < request.size()) {
    ssize_t n = write(sp.in, request.data() + written, request.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE) break; // proposer chose not to read its stdin
      throw Error(ErrorCode::ProposerProtocolError,
                  std::string("write: ") + std::strerror(errno));
    }
    written += static_cast<size_t>(n);
  }
  close(sp.in);
  sp.in = -1;

  // Read one response line within the deadline.
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(cfg.timeout_ms);
  std::string line;
  char buf[4096];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - std::chrono::steady_clock::now())
                    .count();
    if (left <= 0)
      throw Error(ErrorCode::ProposerTimeout, cfg.command);
    pollfd pfd{sp.out, POLLIN, 0};
    int pr = poll(&pfd, 1, static_cast<int>(left));
    if (pr < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::ProposerProtocolError,
                  std::string("poll: ") + std::strerror(errno));
    }
    if (pr == 0)
      throw Error(ErrorCode::ProposerTimeout, cfg.command);
    ssize_t n = read(sp.out, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::ProposerProtocolError,
                  std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) break; // EOF
    line.append(buf, static_cast<size_t>(n));
    if (line.find('\n') != std::string::npos) break;
  }
  size_t nl = line.find('\n');
  if (nl != std::string::npos) line.resize(nl);
  if (line.empty())
    throw Error(ErrorCode::ProposerProtocolError, "empty response");

  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProposerProtocolError,
                std::string("response JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("template") || !j["template"].is_string())
    throw Error(ErrorCode::ProposerProtocolError, "response lacks template");
  return parse_template(j["template"].get<std::string>());
}

} // namespace hew
