#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coinmath/grader.hpp"
#include "coinmath/mixer.hpp"
#include "coinmath/sandbox.hpp"
#include "coinmath/style.hpp"
#include "json.hpp"

namespace coinmath::config {

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();

struct ToolConfig {
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the API key. The key itself is
  // never stored in a config file.
  std::string credential_env = "OPENAI_API_KEY";
  std::filesystem::path cache_dir = ".coinmath-cache";
  std::vector<std::string> driver_command;
  std::int64_t timeout_ms = sandbox::kDefaultTimeoutMs;
  std::int64_t memory_limit_bytes = sandbox::kDefaultMemoryLimit;
  std::int64_t grace_ms = sandbox::kDefaultGraceMs;
  style::Thresholds thresholds{};
  double rel_tol = grader::kDefaultRelTol;
  std::size_t client_width = 4;
  std::size_t sandbox_width = 4;
  int max_retries = 3;
  std::filesystem::path template_dir;
  std::filesystem::path exemplar_path;
  std::uint64_t seed = mixer::kDefaultSeed;

  // Defaults, then the JSON file (if any), then environment overrides:
  // COINMATH_ENDPOINT, COINMATH_MODEL, COINMATH_CACHE_DIR, COINMATH_DRIVER
  // (space-separated argv), COINMATH_SEED, COINMATH_TEMPLATE_DIR.
  static ToolConfig load(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env());
  static ToolConfig from_json(const nlohmann::json& j);

  // Throws UsageError on out-of-range values or unresolvable paths.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  // Hash of the canonical JSON form.
  std::string hash() const;
};

}  // namespace coinmath::config
