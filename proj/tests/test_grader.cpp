#include <random>

#include "coinmath/grader.hpp"
#include "doctest.h"

using namespace coinmath::grader;

namespace {
Rational R(std::int64_t p, std::int64_t q = 1) { return Rational(p, q); }
}  // namespace

TEST_SUITE("grader") {
  TEST_CASE("rational invariants") {
    auto r = R(6, -8);
    CHECK(r.num() == -3);
    CHECK(r.den() == 4);
    CHECK_THROWS(R(1, 0));
    CHECK_FALSE(Rational::make(static_cast<__int128>(INT64_MAX) * 4, 1).has_value());
  }

  TEST_CASE("extract_answer cot") {
    CHECK(extract_answer("...So the answer is 72.", ExtractMode::cot) == "72");
    CHECK_FALSE(extract_answer("I cannot solve this.", ExtractMode::cot).has_value());
    CHECK(extract_answer("We get 3 then 4 then 11", ExtractMode::cot) == "11");
    CHECK(extract_answer("#### 1,250", ExtractMode::cot) == "1,250");
    auto boxed = extract_answer("Thus $\\boxed{\\frac{3}{4}}$.", ExtractMode::cot);
    REQUIRE(boxed);
    CHECK(normalize(*boxed) == CanonicalAnswer::of_rational(R(3, 4)));
  }

  TEST_CASE("extract_answer pot passthrough") {
    CHECK(extract_answer("3.5", ExtractMode::pot_execution) == "3.5");
    CHECK_FALSE(extract_answer("   ", ExtractMode::pot_execution).has_value());
  }

  TEST_CASE("normalize examples") {
    CHECK(normalize("$2,100") == CanonicalAnswer::of_rational(R(2100)));
    CHECK(normalize("\\frac{3}{4}") == CanonicalAnswer::of_rational(R(3, 4)));
    auto pct = normalize("33.33%");
    CHECK(pct.is_numeric());
    CHECK(pct.numeric_value() == doctest::Approx(0.3333).epsilon(1e-12));
    CHECK(normalize("-7") == CanonicalAnswer::of_rational(R(-7)));
    CHECK(normalize("5/10") == CanonicalAnswer::of_rational(R(1, 2)));
    CHECK(normalize("\\sqrt{49}") == CanonicalAnswer::of_rational(R(7)));
    CHECK(normalize("\\sqrt{2}").kind == AnswerKind::text);
    CHECK(normalize("12 apples") == CanonicalAnswer::of_rational(R(12)));
    CHECK(normalize("x = 5") == CanonicalAnswer::of_rational(R(5)));
    CHECK(normalize("5cm") == CanonicalAnswer::of_rational(R(5)));
    CHECK(normalize("(1, 2)").kind == AnswerKind::text);
  }

  TEST_CASE("equivalent examples") {
    CHECK(equivalent(normalize("1/2"), normalize("0.5")));
    CHECK(equivalent(normalize("1/3"), normalize("0.33333333"), 1e-4));
    CHECK_FALSE(equivalent(normalize("72"), normalize("71")));
    CHECK_FALSE(equivalent(normalize("72"), normalize("seventy-two")));
    CHECK(equivalent(normalize("Yes"), normalize("yes")));
    CHECK_FALSE(equivalent(normalize("1/3"), normalize("0.3333"), 1e-6));
  }

  TEST_CASE("grader class uses its tolerance") {
    Grader strict(1e-9), loose(1e-2);
    CHECK_FALSE(strict.grade("3.14", "3.14159"));
    CHECK(loose.grade("3.14", "3.14159"));
  }

  TEST_CASE("property: normalize is total and idempotent on render") {
    std::mt19937 rng(7);
    const std::vector<std::string> pieces = {"1", "2.5", "-3", "1/4", "\\frac{2}{6}", "50%", "$1,000", "abc",
                                             "", " ", "\\sqrt{16}", "1e3", "0.125", "x=4", "3 dogs", "{}"};
    for (int k = 0; k < 500; ++k) {
      std::string s = pieces[rng() % pieces.size()];
      if (rng() % 3 == 0) s += pieces[rng() % pieces.size()];
      auto a = normalize(s);
      auto b = normalize(a.render());
      INFO("input: " << s << " render: " << a.render());
      CHECK(a == b);
    }
  }

  TEST_CASE("property: equivalent is reflexive and symmetric") {
    std::mt19937 rng(11);
    auto gen = [&]() -> std::string {
      switch (rng() % 4) {
        case 0: return std::to_string(static_cast<int>(rng() % 200) - 100);
        case 1: return std::to_string(rng() % 50 + 1) + "/" + std::to_string(rng() % 50 + 1);
        case 2: return std::to_string(rng() % 1000) + "." + std::to_string(rng() % 1000);
        default: return std::to_string(rng() % 100) + "%";
      }
    };
    for (int k = 0; k < 1000; ++k) {
      auto a = normalize(gen()), b = normalize(gen());
      CHECK(equivalent(a, a));
      CHECK(equivalent(a, b) == equivalent(b, a));
    }
  }

  TEST_CASE("property: exact rational equality is transitive") {
    std::mt19937 rng(5);
    for (int k = 0; k < 300; ++k) {
      int p = static_cast<int>(rng() % 20) + 1, q = static_cast<int>(rng() % 20) + 1;
      int m1 = static_cast<int>(rng() % 5) + 1, m2 = static_cast<int>(rng() % 5) + 1;
      auto a = normalize(std::to_string(p) + "/" + std::to_string(q));
      auto b = normalize(std::to_string(p * m1) + "/" + std::to_string(q * m1));
      auto c = normalize("\\frac{" + std::to_string(p * m2) + "}{" + std::to_string(q * m2) + "}");
      CHECK(equivalent(a, b));
      CHECK(equivalent(b, c));
      CHECK(equivalent(a, c));
    }
  }
}
