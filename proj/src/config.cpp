#include "coinmath/config.hpp"

#include <cstdlib>
#include <sstream>

#include "coinmath/harness.hpp"
#include "coinmath/transform.hpp"
#include "coinmath/util.hpp"

namespace coinmath::config {

using nlohmann::json;
using nlohmann::ordered_json;

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
}

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

ToolConfig defaults() {
  ToolConfig c;
  c.template_dir = transform::TemplateSet::default_dir();
  c.exemplar_path = harness::ExemplarSet::default_path();
  return c;
}

}  // namespace

ToolConfig ToolConfig::from_json(const json& j) {
  static const std::vector<std::string> kForbidden = {"api_key", "apikey", "token", "secret", "password"};
  for (const auto& k : kForbidden)
    if (j.contains(k)) throw UsageError("config files must not contain credentials ('" + k + "'); use credential_env");
  ToolConfig c = defaults();
  try {
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.credential_env = j.value("credential_env", c.credential_env);
    if (j.contains("cache_dir")) c.cache_dir = j["cache_dir"].get<std::string>();
    if (j.contains("driver_command")) c.driver_command = j["driver_command"].get<std::vector<std::string>>();
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.memory_limit_bytes = j.value("memory_limit_bytes", c.memory_limit_bytes);
    c.grace_ms = j.value("grace_ms", c.grace_ms);
    c.thresholds.t_low = j.value("t_low", c.thresholds.t_low);
    c.thresholds.t_high = j.value("t_high", c.thresholds.t_high);
    c.thresholds.t_name = j.value("t_name", c.thresholds.t_name);
    c.rel_tol = j.value("rel_tol", c.rel_tol);
    c.client_width = j.value("client_width", c.client_width);
    c.sandbox_width = j.value("sandbox_width", c.sandbox_width);
    c.max_retries = j.value("max_retries", c.max_retries);
    if (j.contains("template_dir")) c.template_dir = j["template_dir"].get<std::string>();
    if (j.contains("exemplar_path")) c.exemplar_path = j["exemplar_path"].get<std::string>();
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid config value: ") + e.what());
  }
  return c;
}

ToolConfig ToolConfig::load(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  ToolConfig c = defaults();
  if (file) {
    if (!std::filesystem::exists(*file)) throw UsageError("config file not found: " + file->string());
    json j;
    try {
      j = json::parse(read_file(*file));
    } catch (const json::exception& e) {
      throw UsageError(file->string() + ": " + e.what());
    }
    if (!j.is_object()) throw UsageError(file->string() + ": config must be a JSON object");
    c = from_json(j);
    // Relative paths in a config file resolve against the file's directory.
    const auto base = file->parent_path();
    auto rebase = [&](std::filesystem::path& p) {
      if (!p.empty() && p.is_relative()) p = base / p;
    };
    if (j.contains("cache_dir")) rebase(c.cache_dir);
    if (j.contains("template_dir")) rebase(c.template_dir);
    if (j.contains("exemplar_path")) rebase(c.exemplar_path);
  }
  if (auto v = env("COINMATH_ENDPOINT")) c.endpoint = *v;
  if (auto v = env("COINMATH_MODEL")) c.model = *v;
  if (auto v = env("COINMATH_CACHE_DIR")) c.cache_dir = *v;
  if (auto v = env("COINMATH_DRIVER")) c.driver_command = split_words(*v);
  if (auto v = env("COINMATH_TEMPLATE_DIR")) c.template_dir = *v;
  if (auto v = env("COINMATH_SEED")) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError("COINMATH_SEED is not an unsigned integer: " + *v);
    }
  }
  return c;
}

void ToolConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError(std::string(name) + " must be within [0,1]");
  };
  unit(thresholds.t_low, "t_low");
  unit(thresholds.t_high, "t_high");
  unit(thresholds.t_name, "t_name");
  if (thresholds.t_low > thresholds.t_high) throw UsageError("t_low must not exceed t_high");
  if (!(rel_tol > 0.0)) throw UsageError("rel_tol must be positive");
  if (timeout_ms <= 0) throw UsageError("timeout_ms must be positive");
  if (memory_limit_bytes <= 0) throw UsageError("memory_limit_bytes must be positive");
  if (grace_ms < 0) throw UsageError("grace_ms must be non-negative");
  if (client_width == 0 || sandbox_width == 0) throw UsageError("concurrency widths must be at least 1");
  if (max_retries < 1) throw UsageError("max_retries must be at least 1");
  if (credential_env.empty()) throw UsageError("credential_env must name an environment variable");
  if (!std::filesystem::is_directory(template_dir))
    throw UsageError("template_dir does not exist: " + template_dir.string());
  if (!exemplar_path.empty() && !std::filesystem::exists(exemplar_path))
    throw UsageError("exemplar_path does not exist: " + exemplar_path.string());
  if (std::filesystem::exists(cache_dir) && !std::filesystem::is_directory(cache_dir))
    throw UsageError("cache_dir is not a directory: " + cache_dir.string());
}

ordered_json ToolConfig::to_json() const {
  ordered_json j;
  j["endpoint"] = endpoint;
  j["model"] = model;
  j["credential_env"] = credential_env;
  j["cache_dir"] = cache_dir.generic_string();
  j["driver_command"] = driver_command;
  j["timeout_ms"] = timeout_ms;
  j["memory_limit_bytes"] = memory_limit_bytes;
  j["grace_ms"] = grace_ms;
  j["t_low"] = thresholds.t_low;
  j["t_high"] = thresholds.t_high;
  j["t_name"] = thresholds.t_name;
  j["rel_tol"] = rel_tol;
  j["client_width"] = client_width;
  j["sandbox_width"] = sandbox_width;
  j["max_retries"] = max_retries;
  j["template_dir"] = template_dir.generic_string();
  j["exemplar_path"] = exemplar_path.generic_string();
  j["seed"] = seed;
  return j;
}

std::string ToolConfig::hash() const { return sha256_hex(to_json().dump()); }

}  // namespace coinmath::config
