#include <atomic>
#include <thread>

#include "coinmath/client.hpp"
#include "coinmath/util.hpp"
#include "doctest.h"
#include "httplib.h"

using namespace coinmath;
using namespace coinmath::client;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(d);
  return d;
}

CompletionRequest req(std::string prompt, int sample = 0, std::string tv = "t@1") {
  CompletionRequest r;
  r.prompt = std::move(prompt);
  r.params.sample_index = sample;
  r.template_version = std::move(tv);
  return r;
}

}  // namespace

TEST_SUITE("client") {
  TEST_CASE("cache key covers everything that changes a response") {
    ModelIdentity m{"p", "m"};
    auto base = cache_key(req("hello"), m);
    CHECK(base == cache_key(req("hello"), m));
    CHECK(base != cache_key(req("hello!"), m));
    CHECK(base != cache_key(req("hello", 1), m));
    CHECK(base != cache_key(req("hello", 0, "t@2"), m));
    CHECK(base != cache_key(req("hello"), ModelIdentity{"p", "m2"}));
    auto hot = req("hello");
    hot.params.temperature = 0.7;
    CHECK(base != cache_key(hot, m));
  }

  TEST_CASE("caching client serves repeats from disk") {
    auto dir = fresh_dir("coinmath_cache_test");
    ResponseCache cache(dir);
    StubClient stub([](const CompletionRequest& r) { return "echo:" + r.prompt; });
    CachingClient c(stub, cache);
    CHECK(c.complete(req("a")) == "echo:a");
    CHECK(c.complete(req("a")) == "echo:a");
    CHECK(c.complete(req("a", 1)) == "echo:a");
    CHECK(stub.calls() == 2);
    CHECK(c.hits() == 1);
    CHECK(c.misses() == 2);

    // A second cache over the same directory sees the entries.
    ResponseCache again(dir);
    StubClient never([](const CompletionRequest&) -> std::string { throw ProviderError("should not be called"); });
    CachingClient c2(never, again);
    CHECK(c2.complete(req("a")) == "echo:a");
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("corrupt cache entries are misses with a warning") {
    auto dir = fresh_dir("coinmath_cache_corrupt");
    ResponseCache cache(dir);
    const auto key = cache_key(req("x"), {"stub", "scripted"});
    write_file_atomic(cache.path_for(key), "{ not json");
    std::vector<std::string> warnings;
    set_log_sink([&](LogLevel l, std::string_view m) {
      if (l == LogLevel::warn) warnings.emplace_back(m);
    });
    StubClient stub([](const CompletionRequest&) { return std::string("fresh"); });
    CachingClient c(stub, cache);
    CHECK(c.complete(req("x")) == "fresh");
    set_log_sink(nullptr);
    CHECK(warnings.size() == 1);
    CHECK(cache.lookup(key) == "fresh");
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("concurrent cache use") {
    auto dir = fresh_dir("coinmath_cache_concurrent");
    ResponseCache cache(dir);
    StubClient stub([](const CompletionRequest& r) { return r.prompt + "!"; });
    CachingClient c(stub, cache);
    parallel_for(64, 8, [&](std::size_t i) { CHECK(c.complete(req("p" + std::to_string(i % 16))) ==
                                                   "p" + std::to_string(i % 16) + "!"); });
    CHECK(c.hits() + c.misses() == 64);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("replay client") {
    ReplayClient r;
    r.add("q", "first");
    r.add("q", "second", 1);
    CHECK(r.complete(req("q")) == "first");
    CHECK(r.complete(req("q", 1)) == "second");
    CHECK(r.complete(req("q", 2)) == "first");
    CHECK_THROWS_AS(r.complete(req("other")), ProviderError);

    auto path = std::filesystem::temp_directory_path() / "coinmath_replay.jsonl";
    write_file_atomic(path, R"j({"prompt":"q","response":"r1"})j" "\n" R"({"prompt_sha256":")" + sha256_hex("z") +
                                R"(","response":"r2"})" "\n");
    auto loaded = ReplayClient::load(path);
    CHECK(loaded.complete(req("q")) == "r1");
    CHECK(loaded.complete(req("z")) == "r2");
    write_file_atomic(path, "{bad\n");
    CHECK_THROWS_AS(ReplayClient::load(path), DataError);
    std::filesystem::remove(path);
  }

  TEST_CASE("http request body and response parsing") {
    auto body = HttpClient::request_body("m1", req("hi"));
    CHECK(body["model"] == "m1");
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(body["messages"][0]["content"] == "hi");
    CHECK(body["temperature"] == 0.0);
    CHECK(HttpClient::parse_response(R"({"choices":[{"message":{"content":"ok"}}]})") == "ok");
    CHECK_THROWS_AS(HttpClient::parse_response("<html>"), ProviderError);
    CHECK_THROWS_AS(HttpClient::parse_response(R"({"error":{"message":"quota"}})"), ProviderError);
    CHECK_THROWS_AS(HttpClient::parse_response(R"({"choices":[]})"), ProviderError);
  }

  TEST_CASE("http client against a local server, with retry on 429") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& rq, httplib::Response& rs) {
      int n = ++hits;
      seen_auth = rq.get_header_value("Authorization");
      if (n == 1) {
        rs.status = 429;
        rs.set_content("slow down", "text/plain");
        return;
      }
      auto j = nlohmann::json::parse(rq.body);
      nlohmann::json out;
      out["choices"] = nlohmann::json::array({{{"message", {{"content", "re:" + j["messages"][0]["content"].get<std::string>()}}}}});
      rs.set_content(out.dump(), "application/json");
    });
    server.Post("/broken", [](const httplib::Request&, httplib::Response& rs) { rs.status = 400; });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpClientConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
    cfg.model = "local";
    cfg.api_key = "k";
    cfg.backoff = std::chrono::milliseconds(10);
    HttpClient client(cfg);
    CHECK(client.complete(req("ping")) == "re:ping");
    CHECK(hits.load() == 2);
    CHECK(seen_auth == "Bearer k");

    cfg.path = "/broken";
    HttpClient broken(cfg);
    CHECK_THROWS_AS(broken.complete(req("x")), ProviderError);

    server.stop();
    t.join();
  }
}
