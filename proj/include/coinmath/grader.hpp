#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coinmath::grader {

// Exact rational p/q kept in lowest terms with q > 0.
class Rational {
 public:
  Rational() = default;
  // Throws std::domain_error when den == 0.
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // Returns nullopt on int64 overflow.
  static std::optional<Rational> make(__int128 num, __int128 den);
  std::optional<Rational> mul(const Rational& o) const;
  std::optional<Rational> div(const Rational& o) const;
  Rational negated() const;

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

enum class AnswerKind { rational, decimal, text };

struct CanonicalAnswer {
  AnswerKind kind = AnswerKind::text;
  std::optional<Rational> rational_value;
  std::optional<double> decimal_value;
  std::optional<std::string> text_value;

  static CanonicalAnswer of_rational(Rational r);
  static CanonicalAnswer of_decimal(double d);
  static CanonicalAnswer of_text(std::string t);

  bool is_numeric() const { return kind != AnswerKind::text; }
  double numeric_value() const;
  // Renders a string that normalize() maps back to this exact value.
  std::string render() const;

  friend bool operator==(const CanonicalAnswer&, const CanonicalAnswer&) = default;
};

enum class ExtractMode { cot, pot_execution };

inline constexpr double kDefaultRelTol = 1e-4;

std::vector<std::string> default_answer_markers();

// Pulls a candidate answer string out of raw model output. nullopt means
// "nothing found", which the harness treats as a failed path.
std::optional<std::string> extract_answer(std::string_view raw, ExtractMode mode,
                                          const std::vector<std::string>& markers =
                                              default_answer_markers());

// Total: every input maps to some CanonicalAnswer (text as the fallback).
CanonicalAnswer normalize(std::string_view s);

// Exact equality for rational pairs; tolerance |x-y| <= rel_tol*max(1,|x|,|y|)
// when a decimal is involved; whitespace-insensitive equality for text pairs.
bool equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b,
                double rel_tol = kDefaultRelTol);

class Grader {
 public:
  explicit Grader(double rel_tol = kDefaultRelTol,
                  std::vector<std::string> markers = default_answer_markers());

  double rel_tol() const { return rel_tol_; }
  const std::vector<std::string>& markers() const { return markers_; }

  std::optional<std::string> extract(std::string_view raw, ExtractMode mode) const {
    return extract_answer(raw, mode, markers_);
  }
  bool grade(std::string_view candidate, std::string_view gold) const {
    return equivalent(normalize(candidate), normalize(gold), rel_tol_);
  }

 private:
  double rel_tol_;
  std::vector<std::string> markers_;
};

}  // namespace coinmath::grader
