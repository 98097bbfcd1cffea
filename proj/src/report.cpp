#include "coinmath/report.hpp"

#include <cmath>
#include <cstdlib>

#include "coinmath/util.hpp"

namespace coinmath::report {

namespace {

constexpr std::array<const char*, 4> kDatasetColumns = {"Arithmetic", "SVAMP", "GSM", "MATH"};

long long tenths(double percent) { return std::llround(percent * 10.0); }

std::string tenths_text(long long t) {
  const long long a = std::llabs(t);
  return std::to_string(a / 10) + "." + std::to_string(a % 10);
}

std::optional<double> row_average(const Row& r) {
  if (r.average) return r.average;
  double sum = 0.0;
  for (const auto& s : r.scores) {
    if (!s) return std::nullopt;
    sum += *s;
  }
  return sum / static_cast<double>(r.scores.size());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Cell {
  std::string value;
  std::string delta;  // empty when no baseline
};

}  // namespace

std::string to_string(Layout l) {
  switch (l) {
    case Layout::style_table: return "style_table";
    case Layout::domain_table: return "domain_table";
    case Layout::final_table: return "final_table";
  }
  return "?";
}

Layout parse_layout(std::string_view s) {
  const std::string v = to_lower(trim(s));
  if (v == "style_table" || v == "style") return Layout::style_table;
  if (v == "domain_table" || v == "domain") return Layout::domain_table;
  if (v == "final_table" || v == "final") return Layout::final_table;
  throw UsageError("unknown report layout '" + std::string(s) + "' (style_table, domain_table, final_table)");
}

std::string format_score(double percent) {
  const long long t = tenths(percent);
  return (t < 0 ? "-" : "") + tenths_text(t);
}

std::string format_delta(double value, double baseline) {
  const long long d = tenths(value) - tenths(baseline);
  return (d < 0 ? "-" : "+") + tenths_text(d);
}

Row row_from_report(const harness::EvalReport& report, std::string model, std::string base, std::string label) {
  Row row;
  row.model = std::move(model);
  row.base = std::move(base);
  row.label = std::move(label);
  std::string mode = report.config.value("mode", std::string{});
  row.prompt = mode == "pot" ? "PoT" : mode == "cot" ? "CoT" : mode == "hybrid" ? "Hybrid" : mode;
  const auto& tags = corpus::all_dataset_tags();
  for (const auto& d : report.datasets)
    for (std::size_t c = 0; c < tags.size(); ++c)
      if (tags[c] == d.dataset) row.scores[c] = d.accuracy * 100.0;
  row.average = report.average_accuracy * 100.0;
  if (report.average_valid_code_rate) row.valid_code_rate = *report.average_valid_code_rate * 100.0;
  return row;
}

Rendered emit_report(const std::vector<Row>& rows, Layout layout) {
  if (rows.empty()) throw UsageError("report has no rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const std::string where = "report row " + std::to_string(i);
    if (r.baseline && (*r.baseline >= rows.size() || *r.baseline == i))
      throw UsageError(where + ": invalid baseline index");
    bool any = false;
    for (const auto& s : r.scores) any = any || s.has_value();
    if (!any) throw UsageError(where + ": no dataset scores");
    if (r.model.empty()) throw UsageError(where + ": missing model name");
    if (layout == Layout::final_table && r.prompt.empty()) throw UsageError(where + ": final_table needs a prompt");
    if (layout != Layout::final_table && r.label.empty())
      throw UsageError(where + ": " + to_string(layout) + " needs an IT data label");
  }

  const bool with_deltas = layout != Layout::style_table;
  std::vector<std::string> head = {"Model"};
  if (layout == Layout::final_table) {
    head.push_back("Base");
    head.push_back("Prompt");
  } else {
    head.push_back("IT Data");
  }
  const std::size_t fixed = head.size();
  for (const char* c : kDatasetColumns) head.push_back(c);
  head.push_back("Avg");
  if (layout == Layout::domain_table) head.push_back("Valid Code Rate");

  std::vector<std::vector<std::string>> text_rows;
  std::vector<std::vector<Cell>> cell_rows;
  for (const Row& r : rows) {
    std::vector<std::string> lead = {r.model};
    if (layout == Layout::final_table) {
      lead.push_back(r.base.empty() ? "-" : r.base);
      lead.push_back(r.prompt);
    } else {
      lead.push_back(r.label);
    }
    const Row* base = r.baseline ? &rows[*r.baseline] : nullptr;
    std::vector<std::optional<double>> values(r.scores.begin(), r.scores.end());
    std::vector<std::optional<double>> base_values;
    values.push_back(row_average(r));
    if (base) {
      base_values.assign(base->scores.begin(), base->scores.end());
      base_values.push_back(row_average(*base));
    }
    if (layout == Layout::domain_table) {
      values.push_back(r.valid_code_rate);
      if (base) base_values.push_back(base->valid_code_rate);
    }
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < values.size(); ++c) {
      Cell cell;
      cell.value = values[c] ? format_score(*values[c]) : "-";
      if (with_deltas && base && values[c] && base_values[c]) cell.delta = format_delta(*values[c], *base_values[c]);
      cells.push_back(std::move(cell));
    }
    text_rows.push_back(std::move(lead));
    cell_rows.push_back(std::move(cells));
  }

  Rendered out;
  // Markdown
  auto md_line = [](const std::vector<std::string>& cols) {
    std::string s = "|";
    for (const auto& c : cols) s += " " + c + " |";
    return s + "\n";
  };
  out.markdown += md_line(head);
  {
    std::vector<std::string> sep;
    for (std::size_t c = 0; c < head.size(); ++c) sep.push_back(c < fixed ? "---" : "---:");
    out.markdown += md_line(sep);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> cols = text_rows[i];
    for (const auto& cell : cell_rows[i])
      cols.push_back(cell.delta.empty() ? cell.value : cell.value + " (" + cell.delta + ")");
    out.markdown += md_line(cols);
  }

  // CSV: deltas in their own columns.
  std::vector<std::string> csv_head(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(fixed));
  for (std::size_t c = fixed; c < head.size(); ++c) {
    csv_head.push_back(head[c]);
    if (with_deltas) csv_head.push_back(head[c] + " Delta");
  }
  auto csv_line = [](const std::vector<std::string>& cols) {
    std::string s;
    for (std::size_t c = 0; c < cols.size(); ++c) s += (c ? "," : "") + csv_field(cols[c]);
    return s + "\n";
  };
  out.csv += csv_line(csv_head);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> cols = text_rows[i];
    for (const auto& cell : cell_rows[i]) {
      cols.push_back(cell.value);
      if (with_deltas) cols.push_back(cell.delta);
    }
    out.csv += csv_line(cols);
  }
  return out;
}

}  // namespace coinmath::report
