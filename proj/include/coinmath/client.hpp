#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "json.hpp"

namespace coinmath::client {

struct DecodingParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 1024;
  // Distinguishes resamples of an unchanged prompt (retries) in cache keys.
  int sample_index = 0;

  friend bool operator==(const DecodingParams&, const DecodingParams&) = default;
};

struct ModelIdentity {
  std::string provider;
  std::string model;
  std::string to_string() const { return provider + "/" + model; }
};

struct CompletionRequest {
  std::string prompt;
  DecodingParams params;
  std::string template_version;
};

nlohmann::ordered_json to_json(const DecodingParams& p);

// Implementations must be safe to call concurrently.
class ModelClient {
 public:
  virtual ~ModelClient() = default;
  // Throws ProviderError on failure.
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual ModelIdentity identity() const = 0;
};

// Scripted responses for tests and dry runs.
class StubClient final : public ModelClient {
 public:
  using Script = std::function<std::string(const CompletionRequest&)>;
  StubClient(Script script, ModelIdentity id = {"stub", "scripted"});
  std::string complete(const CompletionRequest& request) override;
  ModelIdentity identity() const override { return id_; }
  std::size_t calls() const { return calls_.load(); }

 private:
  Script script_;
  ModelIdentity id_;
  std::atomic<std::size_t> calls_{0};
};

// Serves recorded responses keyed by prompt hash (and sample index).
// JSONL records: {"prompt_sha256", "sample_index"?, "response"} or
// {"prompt", "response"}. A miss is a ProviderError.
class ReplayClient final : public ModelClient {
 public:
  explicit ReplayClient(ModelIdentity id = {"replay", "recorded"});
  static ReplayClient load(const std::filesystem::path& path, ModelIdentity id = {"replay", "recorded"});
  void add(const std::string& prompt, std::string response, int sample_index = 0);
  std::string complete(const CompletionRequest& request) override;
  ModelIdentity identity() const override { return id_; }
  std::size_t size() const { return table_.size(); }

 private:
  static std::string key(const std::string& prompt_hash, int sample_index);
  std::map<std::string, std::string> table_;
  ModelIdentity id_;
};

// Key covering everything that can change a response.
std::string cache_key(const CompletionRequest& request, const ModelIdentity& identity);

// One file per key under `dir`: {"key", "request", "response"}.
// Concurrent readers, serialized writers. Corrupt entries read as misses.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& response, const nlohmann::ordered_json& meta);
  std::filesystem::path path_for(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

class CachingClient final : public ModelClient {
 public:
  CachingClient(ModelClient& inner, ResponseCache& cache) : inner_(inner), cache_(cache) {}
  std::string complete(const CompletionRequest& request) override;
  ModelIdentity identity() const override { return inner_.identity(); }
  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  ModelClient& inner_;
  ResponseCache& cache_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

struct HttpClientConfig {
  // Base URL of an OpenAI-compatible server, e.g. "https://api.openai.com".
  std::string endpoint;
  std::string model;
  std::string api_key;  // read from the environment by the caller
  std::string path = "/v1/chat/completions";
  int max_in_flight = 4;
  // Minimum spacing between request starts.
  std::chrono::milliseconds min_interval{0};
  std::chrono::seconds timeout{120};
  // Transport failures, 429 and 5xx are retried with doubling backoff
  // (Retry-After wins when the server sends it).
  int max_attempts = 3;
  std::chrono::milliseconds backoff{500};
};

// Chat-completions client over HTTP(S) with an in-flight cap, request pacing
// and bounded retries.
class HttpClient final : public ModelClient {
 public:
  explicit HttpClient(HttpClientConfig config);
  std::string complete(const CompletionRequest& request) override;
  ModelIdentity identity() const override { return {"openai-compatible", config_.model}; }

  // Request body and response parsing, exposed for tests.
  static nlohmann::ordered_json request_body(const std::string& model, const CompletionRequest& request);
  static std::string parse_response(const std::string& body);

 private:
  void acquire();
  void release();

  HttpClientConfig config_;
  std::mutex mutex_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  std::chrono::steady_clock::time_point next_start_{};
};

}  // namespace coinmath::client
