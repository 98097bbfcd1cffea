#include "coinmath/grader.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <regex>
#include <stdexcept>

#include "coinmath/util.hpp"

namespace coinmath::grader {

namespace {

using i128 = __int128;

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr i128 kI64Max = static_cast<i128>(INT64_MAX);

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  auto r = make(num, den);
  if (!r) throw std::overflow_error("rational overflow");
  *this = *r;
}

std::optional<Rational> Rational::make(i128 num, i128 den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (abs128(num) > kI64Max || den > kI64Max) return std::nullopt;
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

std::optional<Rational> Rational::mul(const Rational& o) const {
  return make(static_cast<i128>(num_) * o.num_, static_cast<i128>(den_) * o.den_);
}

std::optional<Rational> Rational::div(const Rational& o) const {
  if (o.num_ == 0) return std::nullopt;
  return make(static_cast<i128>(num_) * o.den_, static_cast<i128>(den_) * o.num_);
}

Rational Rational::negated() const {
  Rational r = *this;
  r.num_ = -r.num_;
  return r;
}

CanonicalAnswer CanonicalAnswer::of_rational(Rational r) {
  CanonicalAnswer a;
  a.kind = AnswerKind::rational;
  a.rational_value = r;
  return a;
}

CanonicalAnswer CanonicalAnswer::of_decimal(double d) {
  CanonicalAnswer a;
  a.kind = AnswerKind::decimal;
  a.decimal_value = d;
  return a;
}

CanonicalAnswer CanonicalAnswer::of_text(std::string t) {
  CanonicalAnswer a;
  a.kind = AnswerKind::text;
  a.text_value = std::move(t);
  return a;
}

double CanonicalAnswer::numeric_value() const {
  switch (kind) {
    case AnswerKind::rational: return rational_value->to_double();
    case AnswerKind::decimal: return *decimal_value;
    case AnswerKind::text: break;
  }
  return std::nan("");
}

std::string CanonicalAnswer::render() const {
  switch (kind) {
    case AnswerKind::rational: {
      std::string s = std::to_string(rational_value->num());
      if (rational_value->den() != 1) s += "/" + std::to_string(rational_value->den());
      return s;
    }
    case AnswerKind::decimal: {
      std::array<char, 512> buf{};
      auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *decimal_value,
                               std::chars_format::fixed);
      std::string s(buf.data(), res.ptr);
      // Keep the decimal point so the value re-normalizes as a decimal.
      if (s.find('.') == std::string::npos) s += ".0";
      return s;
    }
    case AnswerKind::text: return *text_value;
  }
  return {};
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

struct Number {
  std::optional<Rational> exact;
  double approx = 0.0;
  bool decimal = false;
};

Number from_exact(Rational r, bool decimal) {
  return Number{r, r.to_double(), decimal};
}

// Replaces `\cmd{X}` with `X` for balanced braces.
bool unwrap_command(std::string& s, std::string_view cmd) {
  bool changed = false;
  std::string needle = std::string(cmd) + "{";
  std::size_t pos = 0;
  while ((pos = s.find(needle, pos)) != std::string::npos) {
    std::size_t open = pos + needle.size() - 1;
    int depth = 0;
    std::size_t close = std::string::npos;
    for (std::size_t i = open; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      else if (s[i] == '}' && --depth == 0) {
        close = i;
        break;
      }
    }
    if (close == std::string::npos) {
      pos += needle.size();
      continue;
    }
    std::string inner = s.substr(open + 1, close - open - 1);
    s.replace(pos, close - pos + 1, inner);
    changed = true;
  }
  return changed;
}

bool strip_wrapping(std::string& s, std::string_view open, std::string_view close) {
  if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
    s = trim(std::string_view(s).substr(open.size(), s.size() - open.size() - close.size()));
    return true;
  }
  return false;
}

std::string clean_once(std::string s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 22> kReplacements{{
      {"\xe2\x88\x92", "-"},  // unicode minus
      {"\\left", ""},
      {"\\right", ""},
      {"\\!", ""},
      {"\\,", ""},
      {"\\;", ""},
      {"\\:", ""},
      {"\\ ", " "},
      {"~", " "},
      {"\\dfrac", "\\frac"},
      {"\\tfrac", "\\frac"},
      {"\\$", "$"},
      {"\\%", "%"},
      {"{,}", ","},
      {"^{\\circ}", ""},
      {"^\\circ", ""},
      {"\xc2\xb0", ""},     // degree sign
      {"\xe2\x82\xac", ""}, // euro
      {"\xc2\xa3", ""},     // pound
      {"\xc2\xa5", ""},     // yen
      {"\xe2\x82\xb9", ""}, // rupee
      {"$", ""},
  }};
  for (const auto& [from, to] : kReplacements) replace_all(s, from, to);
  for (std::string_view cmd : {"\\boxed", "\\text", "\\textbf", "\\mathrm", "\\mbox", "\\fbox"})
    unwrap_command(s, cmd);
  s = trim(s);
  strip_wrapping(s, "\\(", "\\)");
  strip_wrapping(s, "\\[", "\\]");
  while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == ';' ||
                        s.back() == '!' || s.back() == '?')) {
    s.pop_back();
    s = trim(s);
  }
  return s;
}

std::string clean(std::string_view raw) {
  std::string s = to_lower(raw);
  for (int i = 0; i < 8; ++i) {
    std::string next = clean_once(s);
    if (next == s) break;
    s = std::move(next);
  }
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Drops whitespace unless it separates two digits ("3 4" must stay invalid).
std::string compress_spaces(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      std::size_t j = i;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      bool digit_before = !out.empty() && is_digit(out.back());
      bool digit_after = j < s.size() && is_digit(s[j]);
      if (digit_before && digit_after) out.push_back(' ');
      i = j - 1;
      continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

// Unsigned decimal literal: digits with optional strict thousands grouping,
// optional fraction, optional exponent.
std::optional<Number> parse_plain_unsigned(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  std::string int_digits;
  bool grouped = false;
  std::size_t group_len = 0;
  while (i < s.size() && (is_digit(s[i]) || s[i] == ',')) {
    if (s[i] == ',') {
      if (int_digits.empty() || (grouped && group_len != 3) || (!grouped && group_len > 3))
        return std::nullopt;
      grouped = true;
      group_len = 0;
    } else {
      int_digits.push_back(s[i]);
      ++group_len;
    }
    ++i;
  }
  if (grouped && group_len != 3) return std::nullopt;
  std::string frac_digits;
  bool has_point = false;
  if (i < s.size() && s[i] == '.') {
    has_point = true;
    ++i;
    while (i < s.size() && is_digit(s[i])) frac_digits.push_back(s[i++]);
  }
  if (int_digits.empty() && frac_digits.empty()) return std::nullopt;
  int exponent = 0;
  bool has_exp = false;
  if (i < s.size() && (s[i] == 'e')) {
    has_exp = true;
    ++i;
    int sign = 1;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) sign = s[i++] == '-' ? -1 : 1;
    std::size_t start = i;
    while (i < s.size() && is_digit(s[i])) exponent = exponent * 10 + (s[i++] - '0');
    if (i == start || exponent > 400) return std::nullopt;
    exponent *= sign;
  }
  if (i != s.size()) return std::nullopt;

  std::string digits = int_digits + frac_digits;
  std::string literal = (int_digits.empty() ? "0" : int_digits) + "." +
                        (frac_digits.empty() ? "0" : frac_digits) + "e" +
                        std::to_string(exponent);
  Number n;
  n.decimal = has_point || has_exp;
  n.approx = std::strtod(literal.c_str(), nullptr);
  int scale = static_cast<int>(frac_digits.size()) - exponent;
  auto first = digits.find_first_not_of('0');
  std::string_view significant =
      first == std::string::npos ? std::string_view("0") : std::string_view(digits).substr(first);
  if (significant.size() <= 18 && scale >= -18 && scale <= 36) {
    i128 mantissa = 0;
    for (char c : significant) mantissa = mantissa * 10 + (c - '0');
    i128 den = 1;
    for (int k = 0; k < scale; ++k) den *= 10;
    for (int k = 0; k < -scale; ++k) mantissa *= 10;
    if (auto r = Rational::make(mantissa, den)) {
      n.exact = r;
      // num/den is correctly rounded only while both fit a double mantissa.
      if (std::abs(r->num()) < (std::int64_t{1} << 53) && r->den() < (std::int64_t{1} << 53))
        n.approx = r->to_double();
    }
  }
  if (!n.exact) n.decimal = true;
  return n;
}

Number negate(Number n) {
  if (n.exact) n.exact = n.exact->negated();
  n.approx = -n.approx;
  return n;
}

std::optional<Number> divide(const Number& a, const Number& b) {
  if (b.approx == 0.0 && (!b.exact || b.exact->num() == 0)) return std::nullopt;
  Number out;
  out.decimal = a.decimal || b.decimal;
  if (a.exact && b.exact) {
    if (auto q = a.exact->div(*b.exact)) {
      out.exact = q;
      out.approx = q->to_double();
      return out;
    }
  }
  out.decimal = true;
  out.approx = a.approx / b.approx;
  return out;
}

std::optional<Number> parse_number(std::string_view s);

// Extracts the `{...}` group (or a single char) at s[pos].
std::optional<std::string_view> take_group(std::string_view s, std::size_t& pos) {
  if (pos >= s.size()) return std::nullopt;
  if (s[pos] != '{') return s.substr(pos++, 1);
  int depth = 0;
  for (std::size_t i = pos; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    else if (s[i] == '}' && --depth == 0) {
      auto inner = s.substr(pos + 1, i - pos - 1);
      pos = i + 1;
      return inner;
    }
  }
  return std::nullopt;
}

std::optional<Number> parse_sqrt(std::string_view arg) {
  auto inner = parse_number(arg);
  if (!inner || !inner->exact || inner->decimal) return std::nullopt;
  const Rational& r = *inner->exact;
  if (r.num() < 0) return std::nullopt;
  auto isqrt = [](std::int64_t v) -> std::optional<std::int64_t> {
    auto root = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
    for (std::int64_t c = std::max<std::int64_t>(0, root - 2); c <= root + 2; ++c)
      if (static_cast<i128>(c) * c == v) return c;
    return std::nullopt;
  };
  auto n = isqrt(r.num());
  auto d = isqrt(r.den());
  if (!n || !d) return std::nullopt;
  return from_exact(Rational(*n, *d), false);
}

std::optional<Number> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  while (s.size() >= 2 && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
  while (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);

  if (s.back() == '%') {
    auto inner = parse_number(s.substr(0, s.size() - 1));
    if (!inner) return std::nullopt;
    return divide(*inner, from_exact(Rational(100), false));
  }
  if (s.front() == '-' || s.front() == '+') {
    auto inner = parse_number(s.substr(1));
    if (!inner) return std::nullopt;
    return s.front() == '-' ? negate(*inner) : *inner;
  }
  if (s.starts_with("\\frac")) {
    std::size_t pos = 5;
    auto num = take_group(s, pos);
    auto den = num ? take_group(s, pos) : std::nullopt;
    if (!den || pos != s.size()) return std::nullopt;
    auto a = parse_number(*num);
    auto b = parse_number(*den);
    if (!a || !b) return std::nullopt;
    return divide(*a, *b);
  }
  if (s.starts_with("\\sqrt")) {
    std::size_t pos = 5;
    std::string_view rest = s.substr(pos);
    if (!rest.empty() && rest.front() != '{') return parse_sqrt(rest);
    auto arg = take_group(s, pos);
    if (!arg || pos != s.size()) return std::nullopt;
    return parse_sqrt(*arg);
  }
  if (s.starts_with("sqrt(") && s.back() == ')') return parse_sqrt(s.substr(5, s.size() - 6));

  auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    auto a = parse_number(s.substr(0, slash));
    auto b = parse_number(s.substr(slash + 1));
    if (!a || !b) return std::nullopt;
    return divide(*a, *b);
  }
  return parse_plain_unsigned(s);
}

CanonicalAnswer to_answer(const Number& n) {
  if (!n.decimal && n.exact) return CanonicalAnswer::of_rational(*n.exact);
  return CanonicalAnswer::of_decimal(n.approx);
}

bool is_word(std::string_view t) {
  if (t.empty() || !std::isalpha(static_cast<unsigned char>(t.front()))) return false;
  return std::all_of(t.begin(), t.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '\'' || c == '-';
  });
}

const std::vector<std::string_view>& unit_suffixes() {
  static const std::vector<std::string_view> kUnits = {
      "cm", "mm", "km", "kg", "mg", "ml", "m", "g", "l", "s", "h", "hr", "hrs",
      "min", "mins", "mph", "ft", "in", "lb", "lbs", "oz", "sec", "secs", "kmh"};
  return kUnits;
}

std::optional<Number> parse_token(std::string_view t) {
  if (auto n = parse_number(compress_spaces(t))) return n;
  for (auto unit : unit_suffixes()) {
    if (t.size() > unit.size() && t.ends_with(unit)) {
      auto head = t.substr(0, t.size() - unit.size());
      if (!head.empty() && (is_digit(head.back()) || head.back() == '.'))
        if (auto n = parse_number(head)) return n;
    }
  }
  return std::nullopt;
}

std::string strip_token_punct(std::string_view t) {
  std::size_t b = 0, e = t.size();
  auto punct = [](char c) { return c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?'; };
  while (b < e && punct(t[b])) ++b;
  while (e > b && punct(t[e - 1])) --e;
  return std::string(t.substr(b, e - b));
}

std::optional<Number> parse_with_surroundings(const std::string& s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) tokens.push_back(strip_token_punct(std::string_view(s).substr(start, i - start)));
  }
  std::optional<Number> found;
  for (const auto& t : tokens) {
    if (t.empty() || t == "=" || is_word(t)) continue;
    auto n = parse_token(t);
    if (!n || found) return std::nullopt;
    found = n;
  }
  return found;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::string text_key(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

}  // namespace

CanonicalAnswer normalize(std::string_view input) {
  std::string s = clean(input);
  if (auto n = parse_number(compress_spaces(s))) return to_answer(*n);

  // "x = 5" style: a single binding with a plain name on the left.
  auto eq = s.find('=');
  if (eq != std::string::npos && s.find('=', eq + 1) == std::string::npos) {
    std::string lhs = trim(std::string_view(s).substr(0, eq));
    std::string rhs = trim(std::string_view(s).substr(eq + 1));
    static const std::regex kName(R"([a-z_][a-z0-9_]*)");
    if (!rhs.empty() && std::regex_match(lhs, kName)) {
      if (auto n = parse_number(compress_spaces(rhs))) return to_answer(*n);
    }
  }
  if (auto n = parse_with_surroundings(s)) return to_answer(*n);
  return CanonicalAnswer::of_text(collapse_whitespace(s));
}

bool equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b, double rel_tol) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (a.kind == AnswerKind::rational && b.kind == AnswerKind::rational)
    return *a.rational_value == *b.rational_value;
  if (a.is_numeric() && b.is_numeric()) {
    double x = a.numeric_value();
    double y = b.numeric_value();
    if (x == y) return true;
    double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
    return std::fabs(x - y) <= rel_tol * scale;
  }
  if (a.kind == AnswerKind::text && b.kind == AnswerKind::text)
    return text_key(*a.text_value) == text_key(*b.text_value);
  return false;
}

// ---------------------------------------------------------------------------
// Extraction

std::vector<std::string> default_answer_markers() {
  return {"the answer is", "answer is", "final answer:", "answer:", "####", "\\boxed{"};
}

namespace {

std::optional<std::string> last_number(std::string_view raw) {
  static const std::regex kNumber(R"((^|[^A-Za-z0-9_.])(-?\d[\d,]*(?:\.\d+)?(?:/\d+)?))");
  std::optional<std::string> last;
  std::string text(raw);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kNumber);
       it != std::sregex_iterator(); ++it) {
    std::string m = (*it)[2].str();
    while (!m.empty() && m.back() == ',') m.pop_back();
    last = m;
  }
  return last;
}

std::optional<std::string> marker_tail(std::string_view raw, std::string_view marker,
                                       std::size_t pos) {
  std::size_t start = pos + marker.size();
  if (marker.ends_with("{")) {
    int depth = 1;
    for (std::size_t i = start; i < raw.size(); ++i) {
      if (raw[i] == '{') ++depth;
      else if (raw[i] == '}' && --depth == 0) return trim(raw.substr(start, i - start));
    }
    return std::nullopt;
  }
  std::size_t end = raw.find('\n', start);
  std::string_view tail = raw.substr(start, end == std::string_view::npos ? raw.npos : end - start);
  // Cut at a sentence-ending period ("72. Next" / "72.").
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (tail[i] == '.' && (i + 1 == tail.size() || std::isspace(static_cast<unsigned char>(tail[i + 1])))) {
      tail = tail.substr(0, i);
      break;
    }
  }
  std::string t = trim(tail);
  while (!t.empty() && (t.front() == ':' || t.front() == '=')) t = trim(std::string_view(t).substr(1));
  if (t.empty()) return std::nullopt;
  return t;
}

}  // namespace

std::optional<std::string> extract_answer(std::string_view raw, ExtractMode mode,
                                          const std::vector<std::string>& markers) {
  if (mode == ExtractMode::pot_execution) {
    std::string t = trim(raw);
    if (t.empty()) return std::nullopt;
    return t;
  }
  std::string lower = to_lower(raw);
  std::size_t best_pos = std::string::npos;
  std::string_view best_marker;
  for (const auto& m : markers) {
    std::string lm = to_lower(m);
    std::size_t p = lower.rfind(lm);
    if (p == std::string::npos) continue;
    // Prefer the latest marker; on ties prefer the longer (more specific) one.
    if (best_pos == std::string::npos || p > best_pos ||
        (p == best_pos && m.size() > best_marker.size())) {
      best_pos = p;
      best_marker = m;
    }
  }
  if (best_pos != std::string::npos) {
    if (auto t = marker_tail(raw, best_marker, best_pos)) return t;
  }
  return last_number(raw);
}

Grader::Grader(double rel_tol, std::vector<std::string> markers)
    : rel_tol_(rel_tol), markers_(std::move(markers)) {
  if (!(rel_tol_ > 0.0)) throw std::invalid_argument("rel_tol must be positive");
}

}  // namespace coinmath::grader
