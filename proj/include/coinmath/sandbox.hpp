#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace coinmath::sandbox {

enum class Status { ok, runtime_error, timeout, resource_exceeded, protocol_error };

inline constexpr std::int64_t kDefaultTimeoutMs = 10'000;
inline constexpr std::int64_t kDefaultMemoryLimit = 512LL * 1024 * 1024;
inline constexpr std::int64_t kDefaultGraceMs = 500;

struct ExecutionRequest {
  std::string code;
  std::int64_t timeout_ms = kDefaultTimeoutMs;
  std::int64_t memory_limit_bytes = kDefaultMemoryLimit;
  bool restricted = true;
};

struct ExecutionResult {
  Status status = Status::protocol_error;
  std::optional<std::string> answer_text;
  std::string stdout_text;  // tail of stdout (and stderr on errors)
  std::int64_t duration_ms = 0;
  // Ran to completion. True for every ok result, and also for programs that
  // finished without leaving a capturable answer (those are not ok).
  bool completed = false;

  friend bool operator==(const ExecutionResult&, const ExecutionResult&) = default;
};

std::string to_string(Status s);
Status parse_status(std::string_view s);

nlohmann::ordered_json to_json(const ExecutionResult& r);
ExecutionResult result_from_json(const nlohmann::json& j);

class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecutionResult run(const ExecutionRequest& request) = 0;
  virtual std::string name() const = 0;
};

// In-memory table from exact code text to a canned result. Unknown code yields
// the fallback (runtime_error by default).
class StubExecutor final : public Executor {
 public:
  StubExecutor();
  void add(std::string code, ExecutionResult result);
  void add_ok(std::string code, std::string answer);
  void set_fallback(ExecutionResult result) { fallback_ = std::move(result); }
  std::size_t size() const { return table_.size(); }
  std::size_t calls() const;

  // Adds JSONL records: {"code", "status", "answer_text", "stdout", "duration_ms"}.
  void load(const std::filesystem::path& path);

  ExecutionResult run(const ExecutionRequest& request) override;
  std::string name() const override { return "stub"; }

 private:
  std::map<std::string, ExecutionResult, std::less<>> table_;
  ExecutionResult fallback_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

struct SubprocessConfig {
  // argv of the driver, e.g. {"python3", "/opt/coinmath/driver.py"}.
  std::vector<std::string> driver_command;
  std::int64_t grace_ms = kDefaultGraceMs;
  // Parent for per-execution scratch directories (system temp when empty).
  std::filesystem::path scratch_root;
  std::size_t stdout_tail_bytes = 4096;
  std::size_t max_reply_bytes = 1 << 20;
};

// Runs each request in a fresh driver process speaking the one-line protocol
// documented in docs/protocol.md. The process group is killed and reaped on
// every path; the scratch directory is removed afterwards.
class SubprocessExecutor final : public Executor {
 public:
  explicit SubprocessExecutor(SubprocessConfig config);
  ExecutionResult run(const ExecutionRequest& request) override;
  std::string name() const override { return "subprocess"; }
  const SubprocessConfig& config() const { return config_; }

 private:
  SubprocessConfig config_;
};

// Number of driver processes spawned by any SubprocessExecutor so far.
std::size_t subprocess_spawn_count();

// Wire format, one JSON object per line.
std::string encode_request(const ExecutionRequest& request, const std::string& scratch_dir,
                           std::size_t stdout_tail_bytes);
// Throws std::runtime_error on a malformed reply.
ExecutionResult decode_reply(std::string_view line);

// Validates the request, runs it, and enforces the result invariants
// (ok implies a captured answer). Executor exceptions become protocol_error.
ExecutionResult execute(const ExecutionRequest& request, Executor& executor);

// Results come back in request order.
std::vector<ExecutionResult> execute_all(const std::vector<ExecutionRequest>& requests,
                                         Executor& executor, std::size_t width);

enum class ValidityRule {
  completed_with_answer,  // status ok
  completed,              // ran to completion, answer or not
};

// Fraction of valid executions. Throws UsageError on an empty list.
double valid_code_rate(std::span<const ExecutionResult> results,
                       ValidityRule rule = ValidityRule::completed_with_answer);

}  // namespace coinmath::sandbox
