#include <filesystem>

#include "coinmath/harness.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coinmath;
using namespace coinmath::harness;
using corpus::DatasetTag;
using testsupport::PotOutcome;
using testsupport::ScriptedEval;

namespace {

const ExemplarSet& exemplars() {
  static const ExemplarSet e = ExemplarSet::load(ExemplarSet::default_path());
  return e;
}

corpus::EvalItem item(std::string id, std::string q, std::string gold, DatasetTag tag = DatasetTag::gsm) {
  corpus::EvalItem i;
  i.id = std::move(id);
  i.question = std::move(q);
  i.gold_answer = std::move(gold);
  i.dataset = tag;
  return i;
}

EvalConfig config(Mode m) {
  EvalConfig c;
  c.mode = m;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("zero-shot prompts are a single instruction block") {
    auto i = item("g1", "Tom has 3 apples and buys 4. How many now?", "7");
    auto pot = build_eval_prompt(i, Path::pot, config(Mode::pot));
    CHECK(pot ==
          "Below is an instruction that describes a task. Write a response that appropriately completes the "
          "request.\n\n### Instruction:\nTom has 3 apples and buys 4. How many now? Let's write a program.\n\n"
          "### Response:");
    auto cot = build_eval_prompt(i, Path::cot, config(Mode::cot));
    CHECK(cot.find("Let's think step by step.\n\n### Response:") != std::string::npos);
  }

  TEST_CASE("four-shot prompts prepend the dataset's exemplars in order") {
    auto c = config(Mode::pot);
    c.shots = 4;
    c.exemplars = exemplars();
    for (auto tag : corpus::all_dataset_tags()) {
      auto p = build_eval_prompt(item("x", "Final question?", "1", tag), Path::pot, c);
      std::size_t blocks = 0;
      for (auto at = p.find("### Instruction:"); at != std::string::npos; at = p.find("### Instruction:", at + 1))
        ++blocks;
      CHECK(blocks == 5);
      const auto& ex = exemplars().pot.at(tag);
      CHECK(p.find(trim(ex[0].question)) < p.find(trim(ex[3].question)));
      CHECK(p.ends_with("Final question? Let's write a program.\n\n### Response:"));
    }
    c.shots = 9;
    CHECK_THROWS_AS(build_eval_prompt(item("x", "Q?", "1"), Path::pot, c), UsageError);
  }

  TEST_CASE("bundled exemplars audit to their declared styles") {
    auto c = config(Mode::pot);
    c.shots = 4;
    c.exemplars = exemplars();
    c.strict_style = true;
    c.expected_style = {style::CommentUsage::concise, style::Naming::descriptive, style::Generality::hardcoded};
    CHECK_NOTHROW(check_exemplar_style(c));
    c.expected_style = {style::Naming::obscure};
    CHECK_THROWS_AS(check_exemplar_style(c), UsageError);
    CHECK_THROWS_AS(build_eval_prompt(item("x", "Q?", "1"), Path::pot, c), UsageError);
  }

  TEST_CASE("hybrid: valid program wins without a CoT call") {
    ScriptedEval s;
    s.add(DatasetTag::gsm, "a", 12, PotOutcome::correct, false);
    auto client = s.client();
    auto t = evaluate_item(s.items()[0].item, config(Mode::hybrid), client, s.executor, grader::Grader());
    CHECK(t.correct);
    CHECK(t.path == Path::pot);
    CHECK(client.calls() == 1);
    CHECK_FALSE(t.cot_output.has_value());
  }

  TEST_CASE("hybrid: a wrong but valid program is final") {
    ScriptedEval s;
    s.add(DatasetTag::gsm, "a", 12, PotOutcome::wrong, true);
    auto client = s.client();
    auto t = evaluate_item(s.items()[0].item, config(Mode::hybrid), client, s.executor, grader::Grader());
    CHECK_FALSE(t.correct);
    CHECK(t.path == Path::pot);
    CHECK(client.calls() == 1);
  }

  TEST_CASE("hybrid: missing or failing code falls back to CoT") {
    for (auto outcome : {PotOutcome::no_code, PotOutcome::crash}) {
      ScriptedEval s;
      s.add(DatasetTag::gsm, "a", 12, outcome, true);
      auto client = s.client();
      auto t = evaluate_item(s.items()[0].item, config(Mode::hybrid), client, s.executor, grader::Grader());
      CHECK(t.correct);
      CHECK(t.path == Path::cot);
      CHECK(t.candidate == "12");
      CHECK(client.calls() == 2);
      CHECK(t.code.has_value() == (outcome == PotOutcome::crash));
    }
  }

  TEST_CASE("client failures mark the item errored and incorrect") {
    client::StubClient down([](const client::CompletionRequest&) -> std::string { throw ProviderError("503"); });
    sandbox::StubExecutor ex;
    auto t = evaluate_item(item("a", "Q?", "1"), config(Mode::hybrid), down, ex, grader::Grader());
    CHECK(t.errored);
    CHECK_FALSE(t.correct);
    CHECK(down.calls() == 1);
  }

  TEST_CASE("per-dataset accuracy and unweighted average") {
    ScriptedEval s;
    const std::array<int, 4> correct{7, 8, 6, 5};
    for (std::size_t d = 0; d < 4; ++d) {
      auto tag = corpus::all_dataset_tags()[d];
      for (int i = 0; i < 10; ++i)
        s.add(tag, corpus::to_string(tag) + "-" + std::to_string(i), 100 + i,
              i < correct[d] ? PotOutcome::correct : PotOutcome::wrong, false);
    }
    auto client = s.client();
    auto r = run_eval(config(Mode::hybrid), s.datasets(), client, s.executor, grader::Grader());
    REQUIRE(r.datasets.size() == 4);
    CHECK(r.datasets[0].accuracy == doctest::Approx(0.7));
    CHECK(r.datasets[1].accuracy == doctest::Approx(0.8));
    CHECK(r.datasets[2].accuracy == doctest::Approx(0.6));
    CHECK(r.datasets[3].accuracy == doctest::Approx(0.5));
    CHECK(r.average_accuracy == doctest::Approx(0.65));
    CHECK(r.average_valid_code_rate == doctest::Approx(1.0));
    CHECK_FALSE(r.partial);
  }

  TEST_CASE("hybrid equals CoT when PoT never yields a valid program") {
    ScriptedEval s;
    for (int i = 0; i < 20; ++i)
      s.add(DatasetTag::svamp, "s" + std::to_string(i), i, i % 2 ? PotOutcome::no_code : PotOutcome::crash,
            i % 3 != 0);
    auto c1 = s.client();
    auto c2 = s.client();
    auto hybrid = run_eval(config(Mode::hybrid), s.datasets(), c1, s.executor, grader::Grader());
    auto cot = run_eval(config(Mode::cot), s.datasets(), c2, s.executor, grader::Grader());
    CHECK(hybrid.average_accuracy == doctest::Approx(cot.average_accuracy));
    CHECK(hybrid.datasets[0].valid_code_rate == doctest::Approx(0.0));
    CHECK_FALSE(cot.datasets[0].valid_code_rate.has_value());
    CHECK_FALSE(cot.average_valid_code_rate.has_value());
  }

  TEST_CASE("valid code rate counts only emitted programs") {
    ScriptedEval s;
    s.add(DatasetTag::math, "m0", 1, PotOutcome::correct, false);
    s.add(DatasetTag::math, "m1", 2, PotOutcome::wrong, false);
    s.add(DatasetTag::math, "m2", 3, PotOutcome::crash, false);
    s.add(DatasetTag::math, "m3", 4, PotOutcome::no_code, false);
    auto client = s.client();
    auto r = run_eval(config(Mode::pot), s.datasets(), client, s.executor, grader::Grader());
    CHECK(r.datasets[0].code_emitted == 3);
    CHECK(*r.datasets[0].valid_code_rate == doctest::Approx(2.0 / 3.0));
    CHECK(r.datasets[0].accuracy == doctest::Approx(0.25));
  }

  TEST_CASE("reruns over the same responses are identical") {
    ScriptedEval s;
    for (int i = 0; i < 12; ++i)
      s.add(DatasetTag::gsm, "g" + std::to_string(i), i * 3, static_cast<PotOutcome>(i % 4), i % 2 == 0);
    auto c = config(Mode::hybrid);
    c.width = 4;
    auto c1 = s.client();
    auto c2 = s.client();
    auto a = run_eval(c, s.datasets(), c1, s.executor, grader::Grader());
    auto b = run_eval(c, s.datasets(), c2, s.executor, grader::Grader());
    CHECK(traces_jsonl(a) == traces_jsonl(b));
    CHECK(to_json(a, true).dump() == to_json(b, true).dump());
    for (std::size_t i = 1; i < a.datasets[0].traces.size(); ++i)
      CHECK(a.datasets[0].traces[i - 1].item_id < a.datasets[0].traces[i].item_id);
  }

  TEST_CASE("input errors") {
    ScriptedEval s;
    auto client = s.client();
    CHECK_THROWS_AS(run_eval(config(Mode::pot), {}, client, s.executor, grader::Grader()), DataError);
    corpus::EvalDataset empty;
    empty.manifest.name = "empty";
    CHECK_THROWS_AS(run_eval(config(Mode::pot), {empty}, client, s.executor, grader::Grader()), DataError);
    s.add(DatasetTag::gsm, "a", 1, PotOutcome::correct, true);
    auto c = config(Mode::cot);
    c.shots = 4;
    CHECK_THROWS_AS(run_eval(c, s.datasets(), client, s.executor, grader::Grader()), UsageError);
    CHECK_THROWS_AS(parse_mode("beam"), UsageError);
    CHECK_THROWS_AS(ExemplarSet::load("/nonexistent.json"), Error);
  }
}
