#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace coinmath::style {

enum class CommentUsage { no_comment, concise, detailed };
enum class Naming { descriptive, obscure };
enum class Generality { hardcoded, generalized };

struct StyleProfile {
  CommentUsage comment_usage = CommentUsage::no_comment;
  Naming naming = Naming::descriptive;
  Generality generality = Generality::hardcoded;

  friend bool operator==(const StyleProfile&, const StyleProfile&) = default;
};

enum class Axis { comment_usage, naming, generality };

// One (axis, value) point, e.g. comment_usage=concise. The value is stored as
// its enum's underlying index and is validated against the axis.
class StyleTarget {
 public:
  StyleTarget(CommentUsage v) : axis_(Axis::comment_usage), value_(static_cast<int>(v)) {}
  StyleTarget(Naming v) : axis_(Axis::naming), value_(static_cast<int>(v)) {}
  StyleTarget(Generality v) : axis_(Axis::generality), value_(static_cast<int>(v)) {}

  // Parses "axis:value" ("comment_usage:concise", "naming:obscure", ...).
  // Throws UsageError on an unknown axis or a value outside the axis' enum.
  static StyleTarget parse(std::string_view text);

  Axis axis() const { return axis_; }
  int value_index() const { return value_; }
  std::string axis_name() const;
  std::string value_name() const;
  std::string to_string() const { return axis_name() + ":" + value_name(); }
  // True when the profile has this target's value on this target's axis.
  bool matches(const StyleProfile& profile) const;

  friend bool operator==(const StyleTarget&, const StyleTarget&) = default;

 private:
  StyleTarget(Axis a, int v) : axis_(a), value_(v) {}
  Axis axis_;
  int value_;
};

// Calibrated against tests/fixtures/style_labeled.jsonl and then frozen.
struct Thresholds {
  double t_low = 0.05;   // below: no comment
  double t_high = 0.34;  // at or above: detailed
  double t_name = 0.6;   // at or above: descriptive
};

struct Evidence {
  std::string measurement;  // comment | inline_comment | docstring | identifier
  std::string detail;
  int line = 0;
  double value = 0.0;
};

struct AuditReport {
  double comment_line_ratio = 0.0;
  double identifier_score = 1.0;
  bool has_parameterized_function = false;
  StyleProfile profile;
  std::vector<Evidence> evidence;
  bool parse_degraded = false;
  int nonblank_lines = 0;
  double comment_lines = 0.0;
};

struct ScoredIdentifier {
  std::string name;
  int line = 0;
  double score = 0.0;
};

struct NamingScore {
  double score = 1.0;
  std::vector<ScoredIdentifier> identifiers;
  bool parse_degraded = false;
};

// Throws UsageError on empty code. Never fails on malformed code: falls back
// to line-based metrics and sets parse_degraded.
AuditReport audit(std::string_view code, const Thresholds& thresholds = {});

// Half-open intervals: [0,t_low) no_comment, [t_low,t_high) concise, [t_high,1] detailed.
CommentUsage classify_comment_usage(double ratio, const Thresholds& thresholds = {});
Naming classify_naming(double score, const Thresholds& thresholds = {});

NamingScore score_naming(std::string_view code);
double identifier_descriptiveness(std::string_view identifier);

Generality detect_generality(std::string_view code);

// Removes `#` comments (string contents untouched). Lines that held only a
// comment become blank.
std::string strip_comments(std::string_view code);

// True when the code holds at least one statement that is neither a comment
// nor a bare string literal.
bool has_statement(std::string_view code);

// True when the code lexes cleanly as the Python subset the audit understands.
bool is_parseable(std::string_view code);

std::string to_string(CommentUsage v);
std::string to_string(Naming v);
std::string to_string(Generality v);
CommentUsage parse_comment_usage(std::string_view s);
Naming parse_naming(std::string_view s);
Generality parse_generality(std::string_view s);

nlohmann::ordered_json to_json(const StyleProfile& p);
StyleProfile profile_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const AuditReport& r);

}  // namespace coinmath::style
