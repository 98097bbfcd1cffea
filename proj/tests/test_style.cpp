#include <fstream>

#include "coinmath/style.hpp"
#include "coinmath/util.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace coinmath;
using namespace coinmath::style;

namespace {

struct Labeled {
  std::string id;
  std::string code;
  StyleProfile label;
};

std::vector<Labeled> load_labeled() {
  std::vector<Labeled> out;
  for (const auto& line : split_lines(read_file(std::string(COINMATH_FIXTURES) + "/style_labeled.jsonl"))) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    out.push_back({j["id"], j["code"],
                   {parse_comment_usage(j["comment_usage"].get<std::string>()),
                    parse_naming(j["naming"].get<std::string>()),
                    parse_generality(j["generality"].get<std::string>())}});
  }
  return out;
}

}  // namespace

TEST_SUITE("style") {
  TEST_CASE("comment ratio intervals are half-open") {
    Thresholds t;
    CHECK(classify_comment_usage(0.0, t) == CommentUsage::no_comment);
    CHECK(classify_comment_usage(t.t_low, t) == CommentUsage::concise);
    CHECK(classify_comment_usage(t.t_high, t) == CommentUsage::detailed);
    CHECK(classify_comment_usage(1.0, t) == CommentUsage::detailed);
    CHECK(classify_naming(t.t_name, t) == Naming::descriptive);
    CHECK(classify_naming(t.t_name - 0.01, t) == Naming::obscure);
  }

  TEST_CASE("audit examples") {
    auto bare = audit("a = 3\nb = 4\nprint(a * b)\n");
    CHECK(bare.profile.comment_usage == CommentUsage::no_comment);
    CHECK(bare.profile.naming == Naming::obscure);
    CHECK(bare.profile.generality == Generality::hardcoded);
    CHECK_FALSE(bare.parse_degraded);

    auto general = audit("def area(width, height):\n    return width * height\n\nprint(area(3, 4))\n");
    CHECK(general.profile.generality == Generality::generalized);
    CHECK(general.has_parameterized_function);

    CHECK_THROWS_AS(audit(""), UsageError);
  }

  TEST_CASE("function defined but never called with arguments is hardcoded") {
    CHECK(detect_generality("def solve():\n    return 4\n\nprint(solve())\n") == Generality::hardcoded);
    CHECK(detect_generality("def f(x):\n    return f(x - 1) if x else 0\n") == Generality::hardcoded);
  }

  TEST_CASE("malformed code degrades instead of failing") {
    auto r = audit("def broken(x):\nreturn x\n# note\n");
    CHECK(r.parse_degraded);
    CHECK(r.nonblank_lines == 3);
    CHECK_FALSE(is_parseable("if x:\nprint(1)\n"));
    CHECK(is_parseable("if x:\n    print(1)\n"));
  }

  TEST_CASE("inline comments weigh half") {
    auto r = audit("x = 1  # one\ny = 2\nprint(x + y)\n");
    CHECK(r.comment_lines == doctest::Approx(0.5));
    CHECK(r.nonblank_lines == 3);
    CHECK(r.comment_line_ratio == doctest::Approx(0.5 / 3));
  }

  TEST_CASE("hash inside a string is not a comment") {
    auto r = audit("tag = '#1'\nprint(tag)\n");
    CHECK(r.comment_lines == 0.0);
    CHECK(strip_comments("s = '# x'  # real\n") == "s = '# x'\n");
  }

  TEST_CASE("identifier descriptiveness") {
    CHECK(identifier_descriptiveness("total_apples") == doctest::Approx(1.0));
    CHECK(identifier_descriptiveness("pricePerItem") == doctest::Approx(1.0));
    CHECK(identifier_descriptiveness("x1") == doctest::Approx(0.0));
    CHECK(identifier_descriptiveness("tmp") < 1.0);
    auto s = score_naming("for i in range(3):\n    print(i)\n");
    CHECK(s.identifiers.empty());
    CHECK(s.score == doctest::Approx(1.0));
  }

  TEST_CASE("style target parsing") {
    auto t = StyleTarget::parse("comment_usage:concise");
    CHECK(t == StyleTarget(CommentUsage::concise));
    CHECK(StyleTarget::parse("naming:obscure").to_string() == "naming:obscure");
    CHECK(StyleTarget::parse("comment_usage:no").value_name() == "no_comment");
    CHECK_THROWS_AS(StyleTarget::parse("naming:concise"), UsageError);
    CHECK_THROWS_AS(StyleTarget::parse("colour:red"), UsageError);
    StyleProfile p{CommentUsage::concise, Naming::obscure, Generality::hardcoded};
    CHECK(t.matches(p));
    CHECK_FALSE(StyleTarget(Naming::descriptive).matches(p));
  }

  TEST_CASE("labeled fixture agreement per axis") {
    auto samples = load_labeled();
    REQUIRE(samples.size() == 30);
    int comment = 0, naming = 0, generality = 0;
    for (const auto& s : samples) {
      auto r = audit(s.code);
      INFO(s.id << " ratio=" << r.comment_line_ratio << " name=" << r.identifier_score);
      CHECK_FALSE(r.parse_degraded);
      comment += r.profile.comment_usage == s.label.comment_usage;
      naming += r.profile.naming == s.label.naming;
      generality += r.profile.generality == s.label.generality;
    }
    CHECK(comment >= 27);
    CHECK(naming >= 27);
    CHECK(generality >= 27);
  }

  TEST_CASE("property: comment stripping leaves naming and generality unchanged") {
    for (const auto& s : load_labeled()) {
      auto before = audit(s.code);
      auto stripped = strip_comments(s.code);
      auto after = audit(stripped);
      INFO(s.id);
      CHECK(after.profile.naming == before.profile.naming);
      CHECK(after.profile.generality == before.profile.generality);
      CHECK(after.identifier_score == doctest::Approx(before.identifier_score));
      for (const auto& e : after.evidence) CHECK(e.measurement != "comment");
      for (const auto& e : after.evidence) CHECK(e.measurement != "inline_comment");
      CHECK(after.comment_lines <= before.comment_lines);
    }
  }

  TEST_CASE("property: raising thresholds never raises the comment class") {
    auto samples = load_labeled();
    for (double lo = 0.0; lo <= 0.3; lo += 0.05) {
      for (double hi = 0.3; hi <= 0.6; hi += 0.1) {
        Thresholds a{lo, hi, 0.6}, b{lo + 0.05, hi + 0.05, 0.6};
        for (const auto& s : samples) {
          auto ca = audit(s.code, a).profile.comment_usage;
          auto cb = audit(s.code, b).profile.comment_usage;
          CHECK(static_cast<int>(cb) <= static_cast<int>(ca));
        }
      }
    }
  }

  TEST_CASE("property: raising t_name never turns obscure into descriptive") {
    for (const auto& s : load_labeled()) {
      auto lo = audit(s.code, {0.05, 0.34, 0.4}).profile.naming;
      auto hi = audit(s.code, {0.05, 0.34, 0.8}).profile.naming;
      if (lo == Naming::obscure) CHECK(hi == Naming::obscure);
    }
  }

  TEST_CASE("audit is deterministic") {
    for (const auto& s : load_labeled())
      CHECK(to_json(audit(s.code)).dump() == to_json(audit(s.code)).dump());
  }
}
