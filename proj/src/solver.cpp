#include "hive/smt.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace hive {

const char* verdict_name(SolverVerdict::Result r) {
  switch (r) {
    case SolverVerdict::Sat: return "sat";
    case SolverVerdict::Unsat: return "unsat";
    case SolverVerdict::Unknown: return "unknown";
  }
  return "?";
}

std::string default_solver_command() {
  if (const char* env = std::getenv("HIVE_SOLVER"); env && *env) return env;
  return "z3 -in";
}

namespace {

// Minimal s-expression reader for get-value output.
struct SReader {
  const std::string& s;
  size_t i = 0;

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  // Returns one atom or a parenthesized list as raw text.
  std::string next() {
    skip();
    if (i >= s.size()) return "";
    size_t start = i;
    if (s[i] == '(') {
      int depth = 0;
      for (; i < s.size(); ++i) {
        if (s[i] == '|') {
          i = s.find('|', i + 1);
          if (i == std::string::npos) throw Error("solver output: unterminated quoted symbol");
          continue;
        }
        if (s[i] == '(') ++depth;
        if (s[i] == ')' && --depth == 0) {
          ++i;
          break;
        }
      }
      return s.substr(start, i - start);
    }
    if (s[i] == '|') {
      size_t end = s.find('|', i + 1);
      if (end == std::string::npos) throw Error("solver output: unterminated quoted symbol");
      i = end + 1;
      return s.substr(start, i - start);
    }
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')') ++i;
    return s.substr(start, i - start);
  }
};

std::vector<std::string> list_items(const std::string& list) {
  if (list.size() < 2 || list.front() != '(') throw Error(fmt::format("solver output: expected a list, got '{}'", list));
  std::string inner = list.substr(1, list.size() - 2);
  SReader r{inner};
  std::vector<std::string> items;
  for (std::string tok = r.next(); !tok.empty(); tok = r.next()) items.push_back(tok);
  return items;
}

BitVec parse_value(const std::string& v) {
  if (starts_with(v, "#b")) return BitVec::from_binary(v.substr(2));
  if (starts_with(v, "#x")) return BitVec::from_hex(v.substr(2), static_cast<uint32_t>(4 * (v.size() - 2)));
  if (starts_with(v, "(_")) {
    auto items = list_items(v);  // _ bvN W
    if (items.size() == 3 && starts_with(items[1], "bv")) {
      uint32_t w = static_cast<uint32_t>(std::stoul(items[2]));
      // Decimal of arbitrary size: accumulate in BitVec arithmetic.
      BitVec acc(w), ten(w, 10);
      for (char c : items[1].substr(2)) acc = acc * ten + BitVec(w, static_cast<uint64_t>(c - '0'));
      return acc;
    }
  }
  throw Error(fmt::format("solver output: cannot parse value '{}'", v));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '|' && s.back() == '|') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

SolverVerdict parse_solver_output(const std::string& out) {
  SolverVerdict v;
  SReader r{out};
  std::string first = r.next();
  if (first == "sat") {
    v.result = SolverVerdict::Sat;
  } else if (first == "unsat") {
    v.result = SolverVerdict::Unsat;
    return v;
  } else if (first == "unknown") {
    v.reason = "solver returned unknown";
    return v;
  } else {
    v.reason = first.empty() ? "no solver output" : fmt::format("unexpected solver output: {}", first.substr(0, 200));
    return v;
  }
  std::string values = r.next();
  if (values.empty() || starts_with(values, "(error")) return v;
  for (auto& pair : list_items(values)) {
    auto kv = list_items(pair);
    if (kv.size() != 2) throw Error(fmt::format("solver output: malformed get-value entry '{}'", pair));
    v.model[unquote(kv[0])] = parse_value(kv[1]);
  }
  return v;
}

SolverVerdict run_solver(const std::string& script, const SolverConfig& cfg) {
  std::string cmd = cfg.command.empty() ? default_solver_command() : cfg.command;
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw Error(fmt::format("pipe: {}", std::strerror(errno)));
  Stopwatch sw;
  pid_t pid = fork();
  if (pid < 0) throw Error(fmt::format("fork: {}", std::strerror(errno)));
  if (pid == 0) {
    setpgid(0, 0);
    dup2(in_pipe[0], 0);
    dup2(out_pipe[1], 1);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, 2);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    std::string full = "exec " + cmd;
    execl("/bin/sh", "sh", "-c", full.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  std::signal(SIGPIPE, SIG_IGN);

  std::string out;
  size_t written = 0;
  int wfd = in_pipe[1], rfd = out_pipe[0];
  bool timed_out = false;
  while (rfd >= 0) {
    double left = cfg.budget_seconds - sw.seconds();
    if (left <= 0) {
      timed_out = true;
      break;
    }
    pollfd fds[2];
    int nfds = 0;
    fds[nfds++] = {rfd, POLLIN, 0};
    if (wfd >= 0) fds[nfds++] = {wfd, POLLOUT, 0};
    int rc = poll(fds, nfds, static_cast<int>(std::min(left * 1000.0, 1000.0)) + 1);
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;
    if (wfd >= 0 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t n = write(wfd, script.data() + written, script.size() - written);
      if (n > 0) written += static_cast<size_t>(n);
      if (n < 0 && errno != EAGAIN) written = script.size();
      if (written >= script.size()) {
        close(wfd);
        wfd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      ssize_t n = read(rfd, buf, sizeof buf);
      if (n > 0) {
        out.append(buf, static_cast<size_t>(n));
      } else if (n == 0 || errno != EAGAIN) {
        close(rfd);
        rfd = -1;
      }
    }
  }
  if (wfd >= 0) close(wfd);
  if (rfd >= 0) close(rfd);
  if (timed_out) kill(-pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);

  SolverVerdict v;
  if (timed_out) {
    v.reason = fmt::format("timeout after {:.0f} s", cfg.budget_seconds);
  } else if (WIFEXITED(status) && WEXITSTATUS(status) == 127 && out.empty()) {
    throw Error(fmt::format("cannot start solver '{}'", cmd));
  } else {
    v = parse_solver_output(out);
  }
  v.seconds = sw.seconds();
  return v;
}

SolverVerdict check(const std::vector<Term>& assumptions, Term goal, const SolverConfig& cfg, std::string* script_out) {
  // Constant goals and contradictory assumptions need no solver.
  bool assumptions_false = std::any_of(assumptions.begin(), assumptions.end(),
                                       [](Term a) { return a->is_const() && !a->value.bit(0); });
  std::string script = to_smtlib(assumptions, goal);
  if (script_out) *script_out = script;
  if ((goal->is_const() && !goal->value.bit(0)) || assumptions_false) {
    SolverVerdict v;
    v.result = SolverVerdict::Unsat;
    return v;
  }
  return run_solver(script, cfg);
}

}  // namespace hive
