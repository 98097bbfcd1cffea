#include "coinmath/client.hpp"

#include <thread>

#include "coinmath/util.hpp"
#include "httplib.h"

namespace coinmath::client {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const DecodingParams& p) {
  ordered_json j;
  j["temperature"] = p.temperature;
  j["top_p"] = p.top_p;
  j["max_tokens"] = p.max_tokens;
  j["sample_index"] = p.sample_index;
  return j;
}

StubClient::StubClient(Script script, ModelIdentity id) : script_(std::move(script)), id_(std::move(id)) {}

std::string StubClient::complete(const CompletionRequest& request) {
  calls_.fetch_add(1);
  return script_(request);
}

// ---------------------------------------------------------------------------

ReplayClient::ReplayClient(ModelIdentity id) : id_(std::move(id)) {}

std::string ReplayClient::key(const std::string& prompt_hash, int sample_index) {
  return prompt_hash + "#" + std::to_string(sample_index);
}

void ReplayClient::add(const std::string& prompt, std::string response, int sample_index) {
  table_[key(sha256_hex(prompt), sample_index)] = std::move(response);
}

ReplayClient ReplayClient::load(const std::filesystem::path& path, ModelIdentity id) {
  ReplayClient client(std::move(id));
  std::size_t line_no = 0;
  for (const auto& line : split_lines(read_file(path))) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      int idx = j.value("sample_index", 0);
      std::string hash = j.contains("prompt_sha256") ? j.at("prompt_sha256").get<std::string>()
                                                     : sha256_hex(j.at("prompt").get<std::string>());
      client.table_[key(hash, idx)] = j.at("response").get<std::string>();
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return client;
}

std::string ReplayClient::complete(const CompletionRequest& request) {
  auto hash = sha256_hex(request.prompt);
  auto it = table_.find(key(hash, request.params.sample_index));
  // Retries of a recorded prompt fall back to the first recorded sample.
  if (it == table_.end() && request.params.sample_index != 0) it = table_.find(key(hash, 0));
  if (it == table_.end()) throw ProviderError("replay: no recorded response for prompt " + hash.substr(0, 12));
  return it->second;
}

// ---------------------------------------------------------------------------

std::string cache_key(const CompletionRequest& request, const ModelIdentity& identity) {
  ordered_json j;
  j["v"] = 1;
  j["provider"] = identity.provider;
  j["model"] = identity.model;
  j["template_version"] = request.template_version;
  j["decoding"] = to_json(request.params);
  j["prompt"] = request.prompt;
  return sha256_hex(j.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / (key + ".json");
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    json j = json::parse(read_file(path));
    if (j.at("key").get<std::string>() != key) throw std::runtime_error("key mismatch");
    return j.at("response").get<std::string>();
  } catch (const std::exception& e) {
    log_warn("cache entry " + path.string() + " is corrupt (" + e.what() + "); treating as miss");
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const std::string& response, const ordered_json& meta) {
  ordered_json j;
  j["key"] = key;
  j["request"] = meta;
  j["response"] = response;
  std::unique_lock lock(mutex_);
  write_file_atomic(path_for(key), j.dump(2) + "\n");
}

std::string CachingClient::complete(const CompletionRequest& request) {
  const auto id = inner_.identity();
  const auto key = cache_key(request, id);
  if (auto hit = cache_.lookup(key)) {
    hits_.fetch_add(1);
    return *hit;
  }
  misses_.fetch_add(1);
  std::string response = inner_.complete(request);
  ordered_json meta;
  meta["provider"] = id.provider;
  meta["model"] = id.model;
  meta["template_version"] = request.template_version;
  meta["decoding"] = to_json(request.params);
  meta["prompt_sha256"] = sha256_hex(request.prompt);
  meta["prompt"] = request.prompt;
  cache_.store(key, response, meta);
  return response;
}

// ---------------------------------------------------------------------------

HttpClient::HttpClient(HttpClientConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw UsageError("http client: endpoint not configured");
  if (config_.model.empty()) throw UsageError("http client: model not configured");
  if (config_.max_in_flight < 1) config_.max_in_flight = 1;
}

ordered_json HttpClient::request_body(const std::string& model, const CompletionRequest& request) {
  ordered_json body;
  body["model"] = model;
  body["messages"] = ordered_json::array({ordered_json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.params.temperature;
  body["top_p"] = request.params.top_p;
  body["max_tokens"] = request.params.max_tokens;
  return body;
}

std::string HttpClient::parse_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProviderError(std::string("provider returned invalid JSON: ") + e.what());
  }
  if (j.contains("error")) throw ProviderError("provider error: " + j["error"].dump());
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected provider response shape: ") + e.what());
  }
}

void HttpClient::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
  ++in_flight_;
  auto now = std::chrono::steady_clock::now();
  auto start = std::max(now, next_start_);
  next_start_ = start + config_.min_interval;
  lock.unlock();
  if (start > now) std::this_thread::sleep_until(start);
}

void HttpClient::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  cv_.notify_one();
}

std::string HttpClient::complete(const CompletionRequest& request) {
  acquire();
  struct Release {
    HttpClient* self;
    ~Release() { self->release(); }
  } guard{this};

  httplib::Client http(config_.endpoint);
  http.set_connection_timeout(config_.timeout);
  http.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  const std::string body = request_body(config_.model, request).dump();

  auto delay = config_.backoff;
  for (int attempt = 1;; ++attempt) {
    auto res = http.Post(config_.path, headers, body, "application/json");
    std::string failure;
    bool retryable = false;
    if (!res) {
      failure = "http request failed: " + httplib::to_string(res.error());
      retryable = true;
    } else if (res->status == 200) {
      return parse_response(res->body);
    } else {
      failure = "provider returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500);
      retryable = res->status == 429 || res->status >= 500;
      if (retryable && res->has_header("Retry-After")) {
        try {
          delay = std::chrono::seconds(std::stoi(res->get_header_value("Retry-After")));
        } catch (const std::exception&) {
        }
      }
    }
    if (!retryable || attempt >= config_.max_attempts || cancellation_requested()) throw ProviderError(failure);
    log_warn(failure + "; retrying");
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace coinmath::client
