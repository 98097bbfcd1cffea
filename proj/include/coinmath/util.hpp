#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coinmath {

inline constexpr const char* kToolVersion = "0.3.0";

// Error hierarchy. Each family maps to one CLI exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 2; }
};
struct UsageError : Error {
  using Error::Error;
  int exit_code() const override { return 1; }
};
struct DataError : Error {
  using Error::Error;
  int exit_code() const override { return 2; }
};
struct ProviderError : Error {
  using Error::Error;
  int exit_code() const override { return 3; }
};
struct SandboxError : Error {
  using Error::Error;
  int exit_code() const override { return 4; }
};

std::string sha256_hex(std::string_view bytes);

std::string trim(std::string_view s);
std::string rtrim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
void replace_all(std::string& s, std::string_view from, std::string_view to);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never observe a
// half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

enum class LogLevel { debug, info, warn, error };
using LogSink = std::function<void(LogLevel, std::string_view)>;
void set_log_sink(LogSink sink);
void log(LogLevel level, std::string_view message);
inline void log_info(std::string_view m) { log(LogLevel::info, m); }
inline void log_warn(std::string_view m) { log(LogLevel::warn, m); }

// Cooperative cancellation (Ctrl-C). Pools stop scheduling new work once set.
void request_cancellation();
bool cancellation_requested();
void reset_cancellation();

// Runs fn(i) for i in [0, count) on at most `width` threads. Exceptions from
// workers are rethrown (first one wins) after all workers have joined.
// Returns the number of indices actually run (less than count if cancelled).
std::size_t parallel_for(std::size_t count, std::size_t width,
                         const std::function<void(std::size_t)>& fn);

}  // namespace coinmath
