#include <atomic>
#include <set>

#include "coinmath/util.hpp"
#include "doctest.h"

using namespace coinmath;

TEST_SUITE("util") {
  TEST_CASE("sha256 of known inputs") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("string helpers") {
    CHECK(trim("  a b \n") == "a b");
    CHECK(rtrim("  x  ") == "  x");
    CHECK(to_lower("MiXeD") == "mixed");
    auto lines = split_lines("a\r\nb\n\nc");
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "a");
    CHECK(lines[2].empty());
    CHECK(starts_with_ci("The Answer", "the"));
    std::string s = "aXbXc";
    replace_all(s, "X", "--");
    CHECK(s == "a--b--c");
  }

  TEST_CASE("atomic write then read") {
    auto dir = std::filesystem::temp_directory_path() / "coinmath_util_test";
    std::filesystem::remove_all(dir);
    write_file_atomic(dir / "sub" / "f.txt", "hello");
    CHECK(read_file(dir / "sub" / "f.txt") == "hello");
    CHECK_THROWS_AS(read_file(dir / "missing"), DataError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("error families map to exit codes") {
    CHECK(UsageError("x").exit_code() == 1);
    CHECK(DataError("x").exit_code() == 2);
    CHECK(ProviderError("x").exit_code() == 3);
    CHECK(SandboxError("x").exit_code() == 4);
  }

  TEST_CASE("parallel_for runs every index once") {
    std::vector<std::atomic<int>> hits(200);
    CHECK(parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; }) == 200);
    for (auto& h : hits) CHECK(h.load() == 1);
  }

  TEST_CASE("parallel_for rethrows the first worker error") {
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 5) throw DataError("boom");
                                 }),
                    DataError);
  }

  TEST_CASE("cancellation stops scheduling") {
    reset_cancellation();
    std::atomic<int> ran{0};
    auto n = parallel_for(1000, 1, [&](std::size_t i) {
      ++ran;
      if (i == 9) request_cancellation();
    });
    reset_cancellation();
    CHECK(n == 10);
    CHECK(ran.load() == 10);
  }

  TEST_CASE("log sink receives messages") {
    std::vector<std::string> got;
    set_log_sink([&](LogLevel, std::string_view m) { got.emplace_back(m); });
    log_warn("w1");
    log_info("i1");
    set_log_sink(nullptr);
    CHECK(got == std::vector<std::string>{"w1", "i1"});
  }
}
