#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "coinmath/harness.hpp"

namespace coinmath::report {

enum class Layout {
  style_table,   // Model | IT Data | per-dataset | Avg
  domain_table,  // style_table plus signed deltas and average valid code rate
  final_table,   // Model | Base | Prompt | per-dataset | Avg, with signed deltas
};

std::string to_string(Layout l);
Layout parse_layout(std::string_view s);

// One table row. Scores are percentages in dataset order
// arithmetic, svamp, gsm, math; absent cells render as "-".
struct Row {
  std::string model;
  std::string base;
  std::string prompt;
  std::string label;
  std::array<std::optional<double>, 4> scores{};
  // Mean of the four scores when all are present, unless given explicitly.
  std::optional<double> average;
  std::optional<double> valid_code_rate;  // percent
  // Index of the row this one is compared against.
  std::optional<std::size_t> baseline;
};

// Percent scores from an evaluation report; prompt is the capitalized mode.
Row row_from_report(const harness::EvalReport& report, std::string model, std::string base = "-",
                    std::string label = {});

struct Rendered {
  std::string markdown;
  std::string csv;
};

// Value rounded to tenths, as printed ("69.2").
std::string format_score(double percent);
// Signed difference of the two values after rounding each to tenths ("+3.0").
std::string format_delta(double value, double baseline);

// Throws UsageError when there are no rows, a baseline index is out of range
// or self-referential, or a row lacks what the layout needs.
Rendered emit_report(const std::vector<Row>& rows, Layout layout);

}  // namespace coinmath::report
