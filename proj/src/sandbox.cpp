#include "coinmath/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "coinmath/util.hpp"

namespace coinmath::sandbox {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::runtime_error: return "runtime_error";
    case Status::timeout: return "timeout";
    case Status::resource_exceeded: return "resource_exceeded";
    case Status::protocol_error: return "protocol_error";
  }
  return "?";
}

Status parse_status(std::string_view s) {
  if (s == "ok") return Status::ok;
  if (s == "runtime_error") return Status::runtime_error;
  if (s == "timeout") return Status::timeout;
  if (s == "resource_exceeded") return Status::resource_exceeded;
  if (s == "protocol_error") return Status::protocol_error;
  throw std::runtime_error("unknown execution status: " + std::string(s));
}

ordered_json to_json(const ExecutionResult& r) {
  ordered_json j;
  j["status"] = to_string(r.status);
  j["answer_text"] = r.answer_text ? json(*r.answer_text) : json(nullptr);
  j["stdout"] = r.stdout_text;
  j["duration_ms"] = r.duration_ms;
  j["completed"] = r.completed;
  return j;
}

ExecutionResult result_from_json(const json& j) {
  ExecutionResult r;
  r.status = parse_status(j.at("status").get<std::string>());
  if (auto it = j.find("answer_text"); it != j.end() && !it->is_null()) r.answer_text = it->get<std::string>();
  r.stdout_text = j.value("stdout", "");
  r.duration_ms = j.value("duration_ms", std::int64_t{0});
  r.completed = j.value("completed", r.status == Status::ok);
  return r;
}

// ---------------------------------------------------------------------------

StubExecutor::StubExecutor() {
  fallback_.status = Status::runtime_error;
  fallback_.stdout_text = "stub executor: no entry for this code";
}

void StubExecutor::add(std::string code, ExecutionResult result) {
  std::lock_guard lock(mutex_);
  table_.insert_or_assign(std::move(code), std::move(result));
}

void StubExecutor::add_ok(std::string code, std::string answer) {
  ExecutionResult r;
  r.status = Status::ok;
  r.stdout_text = answer + "\n";
  r.answer_text = std::move(answer);
  r.completed = true;
  add(std::move(code), std::move(r));
}

std::size_t StubExecutor::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

void StubExecutor::load(const std::filesystem::path& path) {
  std::size_t line_no = 0;
  for (const auto& line : split_lines(read_file(path))) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      add(j.at("code").get<std::string>(), result_from_json(j));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

ExecutionResult StubExecutor::run(const ExecutionRequest& request) {
  std::lock_guard lock(mutex_);
  ++calls_;
  auto it = table_.find(request.code);
  return it == table_.end() ? fallback_ : it->second;
}

// ---------------------------------------------------------------------------
// Protocol

std::string encode_request(const ExecutionRequest& request, const std::string& scratch_dir,
                           std::size_t stdout_tail_bytes) {
  ordered_json j;
  j["code"] = request.code;
  j["timeout_ms"] = request.timeout_ms;
  j["memory_limit_bytes"] = request.memory_limit_bytes;
  j["restricted"] = request.restricted;
  j["scratch_dir"] = scratch_dir;
  j["stdout_tail_bytes"] = stdout_tail_bytes;
  return j.dump() + "\n";
}

ExecutionResult decode_reply(std::string_view line) {
  json j = json::parse(line);
  if (!j.is_object()) throw std::runtime_error("reply is not an object");
  ExecutionResult r;
  r.status = parse_status(j.at("status").get<std::string>());
  if (auto it = j.find("answer_text"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw std::runtime_error("answer_text must be a string or null");
    r.answer_text = it->get<std::string>();
  }
  r.stdout_text = j.value("stdout_tail", "");
  if (auto it = j.find("duration_ms"); it != j.end() && it->is_number())
    r.duration_ms = static_cast<std::int64_t>(it->get<double>());
  r.completed = r.status == Status::ok;
  return r;
}

// ---------------------------------------------------------------------------
// Subprocess executor

namespace {

std::atomic<std::size_t> g_spawn_count{0};

void ignore_sigpipe_once() {
  static std::once_flag once;
  std::call_once(once, [] {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &sa, nullptr);
  });
}

std::string resolve_executable(const std::string& name) {
  if (name.find('/') != std::string::npos) return name;
  const char* path = std::getenv("PATH");
  std::string dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
  std::size_t start = 0;
  while (start <= dirs.size()) {
    std::size_t colon = dirs.find(':', start);
    std::string dir = dirs.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    if (!dir.empty()) {
      std::string candidate = dir + "/" + name;
      if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    }
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  return name;
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& root) {
    auto base = root.empty() ? std::filesystem::temp_directory_path() : root;
    std::filesystem::create_directories(base);
    std::string tmpl = (base / "coinmath-exec-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr)
      throw std::runtime_error(std::string("mkdtemp failed: ") + std::strerror(errno));
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

void make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw std::runtime_error(std::string("pipe failed: ") + std::strerror(errno));
  read_end = Fd(fds[0]);
  write_end = Fd(fds[1]);
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

std::string tail(const std::string& s, std::size_t n) {
  return s.size() <= n ? s : s.substr(s.size() - n);
}

ExecutionResult failure(Status status, std::string message, std::int64_t duration_ms) {
  ExecutionResult r;
  r.status = status;
  r.stdout_text = std::move(message);
  r.duration_ms = duration_ms;
  return r;
}

}  // namespace

std::size_t subprocess_spawn_count() { return g_spawn_count.load(); }

SubprocessExecutor::SubprocessExecutor(SubprocessConfig config) : config_(std::move(config)) {
  if (config_.driver_command.empty()) throw UsageError("sandbox driver command is empty");
  if (config_.grace_ms < 0) throw UsageError("sandbox grace must be non-negative");
  ignore_sigpipe_once();
}

ExecutionResult SubprocessExecutor::run(const ExecutionRequest& request) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start).count();
  };

  std::optional<ScratchDir> scratch;
  Fd in_r, in_w, out_r, out_w, err_r, err_w;
  try {
    scratch.emplace(config_.scratch_root);
    make_pipe(in_r, in_w);
    make_pipe(out_r, out_w);
    make_pipe(err_r, err_w);
  } catch (const std::exception& e) {
    return failure(Status::protocol_error, std::string("spawn failure: ") + e.what(), elapsed_ms());
  }

  const std::string request_line =
      encode_request(request, scratch->path().string(), config_.stdout_tail_bytes);

  // Everything the child touches is prepared before fork.
  std::string exe = resolve_executable(config_.driver_command[0]);
  std::vector<char*> argv;
  for (const auto& a : config_.driver_command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  std::vector<std::string> env_strings = {
      "PATH=/usr/local/bin:/usr/bin:/bin", "LANG=C.UTF-8", "PYTHONIOENCODING=utf-8",
      "PYTHONDONTWRITEBYTECODE=1",         "PYTHONHASHSEED=0",
      "HOME=" + scratch->path().string(),  "TMPDIR=" + scratch->path().string()};
  std::vector<char*> envp;
  for (auto& e : env_strings) envp.push_back(e.data());
  envp.push_back(nullptr);
  const std::string scratch_path = scratch->path().string();
  const rlim_t cpu_seconds =
      static_cast<rlim_t>((request.timeout_ms + config_.grace_ms) / 1000 + 2);

  pid_t pid = ::fork();
  if (pid < 0) {
    return failure(Status::protocol_error, std::string("spawn failure: fork: ") + std::strerror(errno),
                   elapsed_ms());
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_r.get(), STDIN_FILENO);
    ::dup2(out_w.get(), STDOUT_FILENO);
    ::dup2(err_w.get(), STDERR_FILENO);
    if (::chdir(scratch_path.c_str()) != 0) ::_exit(126);
    struct rlimit core {0, 0};
    ::setrlimit(RLIMIT_CORE, &core);
    struct rlimit cpu {cpu_seconds, cpu_seconds};
    ::setrlimit(RLIMIT_CPU, &cpu);
    ::execve(exe.c_str(), argv.data(), envp.data());
    ::_exit(127);
  }
  g_spawn_count.fetch_add(1);
  ::setpgid(pid, pid);
  in_r.reset();
  out_w.reset();
  err_w.reset();
  set_nonblocking(in_w.get());
  set_nonblocking(out_r.get());
  set_nonblocking(err_r.get());

  const auto deadline = start + std::chrono::milliseconds(request.timeout_ms + config_.grace_ms / 2);
  std::size_t written = 0;
  std::string out_buf, err_buf;
  bool out_eof = false, err_eof = false, timed_out = false, oversized = false;
  std::optional<std::string> reply_line;

  while (!reply_line) {
    auto now = clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    if (out_eof && err_eof) break;
    pollfd fds[3];
    nfds_t n = 0;
    int in_idx = -1, out_idx = -1, err_idx = -1;
    if (in_w.get() >= 0) {
      fds[n] = {in_w.get(), POLLOUT, 0};
      in_idx = static_cast<int>(n++);
    }
    if (!out_eof) {
      fds[n] = {out_r.get(), POLLIN, 0};
      out_idx = static_cast<int>(n++);
    }
    if (!err_eof) {
      fds[n] = {err_r.get(), POLLIN, 0};
      err_idx = static_cast<int>(n++);
    }
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1);
    int rc = ::poll(fds, n, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (in_idx >= 0 && fds[in_idx].revents != 0) {
      if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
        in_w.reset();
      } else {
        ssize_t w = ::write(in_w.get(), request_line.data() + written, request_line.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        else if (w < 0 && errno != EAGAIN && errno != EINTR) in_w.reset();
        if (written == request_line.size()) in_w.reset();
      }
    }
    char buf[4096];
    if (out_idx >= 0 && fds[out_idx].revents != 0) {
      ssize_t r = ::read(out_r.get(), buf, sizeof buf);
      if (r > 0) {
        out_buf.append(buf, static_cast<std::size_t>(r));
        auto nl = out_buf.find('\n');
        if (nl != std::string::npos) reply_line = out_buf.substr(0, nl);
        else if (out_buf.size() > config_.max_reply_bytes) {
          oversized = true;
          break;
        }
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        out_eof = true;
      }
    }
    if (err_idx >= 0 && fds[err_idx].revents != 0) {
      ssize_t r = ::read(err_r.get(), buf, sizeof buf);
      if (r > 0) {
        err_buf.append(buf, static_cast<std::size_t>(r));
        if (err_buf.size() > 4 * config_.stdout_tail_bytes) err_buf = tail(err_buf, config_.stdout_tail_bytes);
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        err_eof = true;
      }
    }
  }

  // The driver answers exactly once; whatever is still running goes now.
  ::kill(-pid, SIGKILL);
  int wstatus = 0;
  while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
  }
  const auto duration = elapsed_ms();
  const std::string err_tail = tail(err_buf, config_.stdout_tail_bytes);

  if (timed_out) return failure(Status::timeout, err_tail, duration);
  if (oversized) return failure(Status::protocol_error, "driver reply exceeds size limit", duration);
  if (!reply_line) {
    std::string why = "driver exited without a reply";
    if (WIFEXITED(wstatus)) why += " (exit " + std::to_string(WEXITSTATUS(wstatus)) + ")";
    else if (WIFSIGNALED(wstatus)) why += " (signal " + std::to_string(WTERMSIG(wstatus)) + ")";
    if (!err_tail.empty()) why += ": " + err_tail;
    return failure(Status::protocol_error, why, duration);
  }
  try {
    ExecutionResult r = decode_reply(*reply_line);
    r.duration_ms = duration;
    return r;
  } catch (const std::exception& e) {
    return failure(Status::protocol_error, std::string("malformed driver reply: ") + e.what(), duration);
  }
}

// ---------------------------------------------------------------------------

ExecutionResult execute(const ExecutionRequest& request, Executor& executor) {
  if (request.code.empty()) throw UsageError("execute: empty code");
  if (request.timeout_ms <= 0) throw UsageError("execute: timeout must be positive");
  ExecutionResult r;
  try {
    r = executor.run(request);
  } catch (const std::exception& e) {
    return failure(Status::protocol_error, std::string("executor failure: ") + e.what(), 0);
  }
  if (r.status == Status::ok) {
    r.completed = true;
    if (!r.answer_text || trim(*r.answer_text).empty()) {
      // Finished, but nothing to grade.
      r.status = Status::runtime_error;
      r.answer_text.reset();
    }
  } else {
    r.answer_text.reset();
  }
  return r;
}

std::vector<ExecutionResult> execute_all(const std::vector<ExecutionRequest>& requests,
                                         Executor& executor, std::size_t width) {
  std::vector<ExecutionResult> results(requests.size());
  parallel_for(requests.size(), width, [&](std::size_t i) { results[i] = execute(requests[i], executor); });
  return results;
}

double valid_code_rate(std::span<const ExecutionResult> results, ValidityRule rule) {
  if (results.empty()) throw UsageError("valid_code_rate: empty result list");
  std::size_t valid = std::count_if(results.begin(), results.end(), [rule](const ExecutionResult& r) {
    return rule == ValidityRule::completed_with_answer ? r.status == Status::ok : r.completed;
  });
  return static_cast<double>(valid) / static_cast<double>(results.size());
}

}  // namespace coinmath::sandbox
