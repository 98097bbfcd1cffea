#include <filesystem>
#include <sstream>

#include "coinmath/cli.hpp"
#include "coinmath/harness.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coinmath;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

config::EnvLookup no_env() {
  return [](const char*) -> std::optional<std::string> { return std::nullopt; };
}

Result run(std::vector<std::string> args, const config::EnvLookup& env = no_env()) {
  args.insert(args.begin(), "coinmath");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err, env);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("coinmath_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write_samples(const std::string& path, const std::string& prefix, int n, corpus::Source source) {
  std::vector<corpus::InstructionSample> v;
  for (int i = 0; i < n; ++i) {
    auto s = testsupport::code_sample(prefix + std::to_string(i), prefix + " q" + std::to_string(i),
                                      "x = " + std::to_string(i) + "\nprint(x)", std::to_string(i));
    s.source = source;
    v.push_back(s);
  }
  corpus::write_instruction_dataset(path, v);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("grade prints a json verdict") {
    auto r = run({"grade", "1/2", "0.5"});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["equivalent"] == true);
    r = run({"grade", "--extract", "cot", "So the total is 12. The answer is 12.", "12"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["equivalent"] == true);
    r = run({"grade", "3", "4"});
    CHECK(nlohmann::json::parse(r.out)["equivalent"] == false);
  }

  TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"grade", "1"}).code == 1);
    CHECK(run({"grade", "--extract", "weird", "1", "1"}).code == 1);
    CHECK(run({"audit", "/nonexistent/file.jsonl"}).code == 1);
    CHECK(run({"mix", "--recipe", "nonsense"}).code == 1);
    auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out == std::string(kToolVersion) + "\n");
  }

  TEST_CASE("config files holding credentials are rejected") {
    TempDir t("cfg");
    write_file_atomic(t / "c.json", R"({"model":"m","api_key":"sk-123"})");
    auto r = run({"--config", t / "c.json", "grade", "1", "1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("credential") != std::string::npos);
  }

  TEST_CASE("mix writes corpus, manifest, training config and provenance") {
    TempDir t("mix");
    write_samples(t / "mc.jsonl", "mc", 26, corpus::Source::math_code);
    write_samples(t / "gc.jsonl", "gc", 21, corpus::Source::general_code);
    auto args = std::vector<std::string>{"mix",    "--recipe", "MC+GC", "--data", "math_code=" + (t / "mc.jsonl"),
                                         "--data", "general_code=" + (t / "gc.jsonl"), "--out", t / "a"};
    auto r = run(args);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("47 samples") != std::string::npos);
    args.back() = t / "b";
    REQUIRE(run(args).code == 0);
    CHECK(read_file(t / "a/corpus.jsonl") == read_file(t / "b/corpus.jsonl"));
    auto prov = nlohmann::json::parse(read_file(t / "a/provenance.json"));
    CHECK(prov["subcommand"] == "mix");
    CHECK(prov["inputs"].size() == 2);
    CHECK(prov["outputs"].size() == 3);
    CHECK(prov["outputs"][0]["sha256"] == sha256_hex(read_file(t / "a/corpus.jsonl")));
    auto tc = nlohmann::json::parse(read_file(t / "a/training_config.json"));
    CHECK(tc["finetuning"]["lora_rank"] == 64);
  }

  TEST_CASE("dry-run writes nothing") {
    TempDir t("dry");
    auto r = run({"--dry-run", "mix", "--recipe", "coinmath", "--out", t / "o"});
    CHECK(r.code == 0);
    CHECK(r.out.find("style_variants") != std::string::npos);
    CHECK_FALSE(fs::exists(t / "o"));
  }

  TEST_CASE("bad data exits 2") {
    TempDir t("bad");
    write_file_atomic(t / "bad.jsonl", "not json\n");
    CHECK(run({"mix", "--recipe", "mc", "--data", "math_code=" + (t / "bad.jsonl"), "--out", t / "o"}).code == 2);
    CHECK(run({"mix", "--recipe", "mc", "--data", "math_code=" + (t / "missing.jsonl"), "--out", t / "o"}).code == 2);
  }

  TEST_CASE("audit summarizes a corpus") {
    TempDir t("audit");
    write_samples(t / "mc.jsonl", "mc", 5, corpus::Source::math_code);
    auto r = run({"audit", t / "mc.jsonl", "--out", t / "o"});
    REQUIRE(r.code == 0);
    auto h = nlohmann::json::parse(read_file(t / "o/histogram.json"));
    CHECK(h["audited"] == 5);
    CHECK(h["histogram"]["comment_usage:no_comment"] == 5);
    CHECK(split_lines(read_file(t / "o/audit.jsonl")).size() >= 5);
  }

  TEST_CASE("model commands without a model or credential fail cleanly") {
    TempDir t("nomodel");
    write_samples(t / "mc.jsonl", "mc", 2, corpus::Source::math_code);
    auto r = run({"transform", t / "mc.jsonl", "--target", "naming:obscure", "--out", t / "o"});
    CHECK(r.code == 1);
    auto env = [](const char* k) -> std::optional<std::string> {
      if (std::string(k) == "COINMATH_ENDPOINT") return "http://127.0.0.1:9";
      if (std::string(k) == "COINMATH_MODEL") return "m";
      return std::nullopt;
    };
    CHECK(run({"transform", t / "mc.jsonl", "--target", "naming:obscure", "--out", t / "o"}, env).code == 3);
  }

  TEST_CASE("eval end to end over recorded responses") {
    TempDir t("eval");
    testsupport::ScriptedEval s;
    s.add(corpus::DatasetTag::gsm, "g0", 5, testsupport::PotOutcome::correct, false);
    s.add(corpus::DatasetTag::gsm, "g1", 6, testsupport::PotOutcome::no_code, true);
    s.add(corpus::DatasetTag::gsm, "g2", 7, testsupport::PotOutcome::wrong, true);
    auto items = s.datasets()[0].items;
    corpus::write_eval_dataset(t / "gsm.jsonl", items);

    harness::EvalConfig ec;
    std::string replay, exec;
    for (const auto& i : items)
      for (auto path : {harness::Path::pot, harness::Path::cot}) {
        client::CompletionRequest req;
        req.prompt = harness::build_eval_prompt(i, path, ec);
        replay += nlohmann::json{{"prompt", req.prompt}, {"response", s.respond(req)}}.dump() + "\n";
      }
    for (const char* v : {"5", "1007"})
      exec += nlohmann::json{{"code", std::string("print(") + v + ")"}, {"status", "ok"}, {"answer_text", v},
                             {"stdout", std::string(v) + "\n"}, {"duration_ms", 1}}
                  .dump() +
              "\n";
    write_file_atomic(t / "replay.jsonl", replay);
    write_file_atomic(t / "exec.jsonl", exec);

    auto r = run({"eval", "--mode", "hybrid", "--dataset", "gsm=" + (t / "gsm.jsonl"), "--replay",
                  t / "replay.jsonl", "--stub-exec", t / "exec.jsonl", "--label", "M", "--out", t / "o"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    auto rep = nlohmann::json::parse(read_file(t / "o/report.json"));
    CHECK(rep["datasets"][0]["correct"] == 2);
    CHECK(rep["datasets"][0]["valid_code_rate"] == doctest::Approx(1.0));
    CHECK(split_lines(read_file(t / "o/traces.jsonl")).size() == 3);
    CHECK(read_file(t / "o/report.md").find("| M | - | Hybrid | - | - | 66.7 | - | 66.7 |") != std::string::npos);
    CHECK(fs::exists(t / "o/provenance.json"));
  }

  TEST_CASE("report renders rows from a spec file") {
    TempDir t("report");
    write_file_atomic(t / "rows.json", R"([
      {"model":"Base","prompt":"PoT","scores":[71.4,81.3,73.0,39.1]},
      {"model":"Ours","prompt":"PoT","scores":[77.0,83.1,76.4,40.3],"baseline":0}])");
    auto r = run({"report", "--rows", t / "rows.json", "--out", t / "o"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("69.2 (+3.0)") != std::string::npos);
    CHECK(fs::exists(t / "o/final_table.csv"));
    write_file_atomic(t / "empty.json", "[]");
    CHECK(run({"report", "--rows", t / "empty.json", "--out", t / "o2"}).code == 1);
  }
}
