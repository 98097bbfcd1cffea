#include "coinmath/corpus.hpp"

#include <set>
#include <sstream>
#include <unordered_set>

#include "coinmath/grader.hpp"

namespace coinmath::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(RationaleKind k) { return k == RationaleKind::text ? "text" : "code"; }

std::string to_string(Source s) {
  switch (s) {
    case Source::math_code: return "math_code";
    case Source::math_text: return "math_text";
    case Source::general_code: return "general_code";
    case Source::synthesized: return "synthesized";
  }
  return "?";
}

std::string to_string(DatasetTag d) {
  switch (d) {
    case DatasetTag::arithmetic: return "arithmetic";
    case DatasetTag::svamp: return "svamp";
    case DatasetTag::gsm: return "gsm";
    case DatasetTag::math: return "math";
  }
  return "?";
}

std::string to_string(AnswerKind k) {
  switch (k) {
    case AnswerKind::integer: return "integer";
    case AnswerKind::decimal: return "decimal";
    case AnswerKind::expression: return "expression";
  }
  return "?";
}

std::string to_string(DatasetKind k) { return k == DatasetKind::instruction ? "instruction" : "evaluation"; }

RationaleKind parse_rationale_kind(std::string_view s) {
  if (s == "text") return RationaleKind::text;
  if (s == "code") return RationaleKind::code;
  throw DataError("unknown rationale_kind: " + std::string(s));
}

Source parse_source(std::string_view s) {
  if (s == "math_code") return Source::math_code;
  if (s == "math_text") return Source::math_text;
  if (s == "general_code") return Source::general_code;
  if (s == "synthesized") return Source::synthesized;
  throw DataError("unknown source: " + std::string(s));
}

DatasetTag parse_dataset_tag(std::string_view s) {
  if (s == "arithmetic") return DatasetTag::arithmetic;
  if (s == "svamp") return DatasetTag::svamp;
  if (s == "gsm") return DatasetTag::gsm;
  if (s == "math") return DatasetTag::math;
  throw DataError("unknown evaluation dataset: " + std::string(s));
}

AnswerKind parse_answer_kind(std::string_view s) {
  if (s == "integer") return AnswerKind::integer;
  if (s == "decimal") return AnswerKind::decimal;
  if (s == "expression") return AnswerKind::expression;
  throw DataError("unknown answer_kind: " + std::string(s));
}

const std::vector<DatasetTag>& all_dataset_tags() {
  static const std::vector<DatasetTag> kAll = {DatasetTag::arithmetic, DatasetTag::svamp,
                                               DatasetTag::gsm, DatasetTag::math};
  return kAll;
}

// ---------------------------------------------------------------------------

std::string serialize(const InstructionSample& s) {
  ordered_json j;
  j["id"] = s.id;
  j["question"] = s.question;
  j["rationale"] = s.rationale;
  j["rationale_kind"] = to_string(s.rationale_kind);
  j["answer"] = s.answer;
  j["source"] = to_string(s.source);
  if (s.parent_id) j["parent_id"] = *s.parent_id;
  if (s.target) j["target"] = s.target->to_string();
  if (s.verified) j["verified"] = *s.verified;
  if (s.style) j["style"] = style::to_json(*s.style);
  return j.dump();
}

std::string serialize(const EvalItem& item) {
  ordered_json j;
  j["id"] = item.id;
  j["question"] = item.question;
  j["gold_answer"] = item.gold_answer;
  j["dataset"] = to_string(item.dataset);
  j["answer_kind"] = to_string(item.answer_kind);
  return j.dump();
}

namespace {

std::string required_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw DataError(std::string("missing field '") + field + "'");
  if (!it->is_string()) throw DataError(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

// Answers occasionally arrive as JSON numbers; keep their literal spelling.
std::string answer_field(const json& j, const char* field) {
  auto it = j.find(field);
  if (it != j.end() && it->is_number()) return it->dump();
  return required_string(j, field);
}

std::string id_of(const json& j) {
  auto it = j.find("id");
  if (it != j.end() && it->is_string()) return it->get<std::string>();
  if (it != j.end() && it->is_number()) return it->dump();
  return {};
}

template <typename Record, typename Parse>
std::vector<Record> parse_lines(std::string_view text, Parse&& parse_one,
                                std::vector<RecordError>& errors) {
  std::vector<Record> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      errors.push_back({line_no, {}, std::string("malformed record: ") + e.what()});
      continue;
    }
    if (!j.is_object()) {
      errors.push_back({line_no, {}, "malformed record: not an object"});
      continue;
    }
    std::string id = id_of(j);
    try {
      auto rec = parse_one(j, line_no);
      if (!rec) continue;
      if (!seen.insert(rec->id).second) {
        errors.push_back({line_no, id, "duplicate id"});
        continue;
      }
      out.push_back(std::move(*rec));
    } catch (const std::exception& e) {
      errors.push_back({line_no, id, e.what()});
    }
  }
  return out;
}

[[noreturn]] void throw_errors(const std::string& name, std::vector<RecordError> errors) {
  std::ostringstream msg;
  msg << name << ": " << errors.size() << " invalid record(s)";
  std::size_t shown = 0;
  for (const auto& e : errors) {
    if (shown++ == 5) {
      msg << "; ...";
      break;
    }
    msg << "; line " << e.line;
    if (!e.id.empty()) msg << " (id " << e.id << ")";
    msg << ": " << e.message;
  }
  throw RecordValidationError(msg.str(), std::move(errors));
}

}  // namespace

InstructionSample instruction_from_json(const json& j) {
  InstructionSample s;
  s.id = id_of(j);
  if (s.id.empty()) throw DataError("missing field 'id'");
  s.question = required_string(j, "question");
  s.rationale = required_string(j, "rationale");
  s.rationale_kind = parse_rationale_kind(required_string(j, "rationale_kind"));
  s.answer = answer_field(j, "answer");
  s.source = parse_source(required_string(j, "source"));
  if (auto it = j.find("parent_id"); it != j.end() && !it->is_null()) s.parent_id = it->get<std::string>();
  if (auto it = j.find("target"); it != j.end() && !it->is_null())
    s.target = style::StyleTarget::parse(it->get<std::string>());
  if (auto it = j.find("verified"); it != j.end() && !it->is_null()) s.verified = it->get<bool>();
  if (auto it = j.find("style"); it != j.end() && !it->is_null()) s.style = style::profile_from_json(*it);
  return s;
}

EvalItem eval_item_from_json(const json& j) {
  EvalItem item;
  item.id = id_of(j);
  if (item.id.empty()) throw DataError("missing field 'id'");
  item.question = required_string(j, "question");
  item.gold_answer = answer_field(j, "gold_answer");
  item.dataset = parse_dataset_tag(required_string(j, "dataset"));
  item.answer_kind = parse_answer_kind(required_string(j, "answer_kind"));
  return item;
}

std::string serialize_all(const std::vector<InstructionSample>& samples) {
  std::string out;
  for (const auto& s : samples) out += serialize(s) + "\n";
  return out;
}

std::string serialize_all(const std::vector<EvalItem>& items) {
  std::string out;
  for (const auto& i : items) out += serialize(i) + "\n";
  return out;
}

std::string checksum(const std::vector<InstructionSample>& samples) {
  return sha256_hex(serialize_all(samples));
}

std::string checksum(const std::vector<EvalItem>& items) { return sha256_hex(serialize_all(items)); }

std::vector<std::string> validate(const InstructionSample& s) {
  std::vector<std::string> problems;
  if (trim(s.id).empty()) problems.push_back("empty id");
  if (trim(s.question).empty()) problems.push_back("empty question");
  if (trim(s.rationale).empty()) {
    problems.push_back("empty rationale");
  } else if (s.rationale_kind == RationaleKind::code && !style::has_statement(s.rationale)) {
    problems.push_back("code rationale has no statement outside comments");
  }
  if (s.source == Source::synthesized && (!s.parent_id || s.parent_id->empty()))
    problems.push_back("synthesized sample without parent_id");
  return problems;
}

std::vector<std::string> validate(const EvalItem& item) {
  std::vector<std::string> problems;
  if (trim(item.id).empty()) problems.push_back("empty id");
  if (trim(item.question).empty()) problems.push_back("empty question");
  auto gold = grader::normalize(item.gold_answer);
  switch (item.answer_kind) {
    case AnswerKind::integer:
      if (gold.kind != grader::AnswerKind::rational || gold.rational_value->den() != 1)
        problems.push_back("gold answer '" + item.gold_answer + "' is not an integer");
      break;
    case AnswerKind::decimal:
      if (!gold.is_numeric()) problems.push_back("gold answer '" + item.gold_answer + "' is not numeric");
      break;
    case AnswerKind::expression:
      if (trim(item.gold_answer).empty()) problems.push_back("empty gold answer");
      break;
  }
  return problems;
}

DatasetManifest make_manifest(std::string name, const std::vector<InstructionSample>& samples,
                              std::string source_path) {
  return DatasetManifest{std::move(name), DatasetKind::instruction, samples.size(), checksum(samples),
                         std::move(source_path)};
}

InstructionDataset parse_instruction_dataset(std::string_view text, std::string name,
                                             std::optional<RationaleKind> expected_kind) {
  std::vector<RecordError> errors;
  auto samples = parse_lines<InstructionSample>(
      text,
      [&](const json& j, std::size_t line) -> std::optional<InstructionSample> {
        InstructionSample s = instruction_from_json(j);
        auto problems = validate(s);
        if (expected_kind && s.rationale_kind != *expected_kind)
          problems.push_back("kind mismatch: expected " + to_string(*expected_kind) + ", got " +
                             to_string(s.rationale_kind));
        for (auto& p : problems) errors.push_back({line, s.id, p});
        if (!problems.empty()) return std::nullopt;
        return s;
      },
      errors);
  if (!errors.empty()) throw_errors(name, std::move(errors));
  InstructionDataset ds;
  ds.manifest = make_manifest(name, samples);
  ds.samples = std::move(samples);
  return ds;
}

InstructionDataset load_instruction_dataset(const std::filesystem::path& path,
                                            std::optional<RationaleKind> expected_kind) {
  if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
  auto ds = parse_instruction_dataset(read_file(path), path.stem().string(), expected_kind);
  ds.manifest.source_path = path.string();
  return ds;
}

EvalDataset parse_eval_dataset(std::string_view text, DatasetTag tag, std::string name) {
  std::vector<RecordError> errors;
  bool first = true;
  auto items = parse_lines<EvalItem>(
      text,
      [&](const json& j, std::size_t line) -> std::optional<EvalItem> {
        bool is_first = first;
        first = false;
        if (auto h = j.find("header"); h != j.end()) {
          if (!is_first) throw DataError("header record must be the first line");
          std::string declared = h->at("dataset").get<std::string>();
          if (parse_dataset_tag(declared) != tag)
            throw DataError("file header declares dataset '" + declared + "' but loader tag is '" +
                            to_string(tag) + "'");
          return std::nullopt;
        }
        EvalItem item = eval_item_from_json(j);
        auto problems = validate(item);
        if (item.dataset != tag)
          problems.push_back("dataset tag '" + to_string(item.dataset) + "' does not match '" +
                             to_string(tag) + "'");
        for (auto& p : problems) errors.push_back({line, item.id, p});
        if (!problems.empty()) return std::nullopt;
        return item;
      },
      errors);
  if (!errors.empty()) throw_errors(name, std::move(errors));
  EvalDataset ds;
  ds.manifest = DatasetManifest{std::move(name), DatasetKind::evaluation, items.size(), checksum(items), {}};
  ds.items = std::move(items);
  return ds;
}

EvalDataset load_eval_dataset(const std::filesystem::path& path, DatasetTag tag) {
  if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
  auto ds = parse_eval_dataset(read_file(path), tag, path.stem().string());
  ds.manifest.source_path = path.string();
  return ds;
}

void write_instruction_dataset(const std::filesystem::path& path,
                               const std::vector<InstructionSample>& samples) {
  write_file_atomic(path, serialize_all(samples));
}

void write_eval_dataset(const std::filesystem::path& path, const std::vector<EvalItem>& items) {
  write_file_atomic(path, serialize_all(items));
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path) {
  auto p = dataset_path;
  p += ".manifest.json";
  return p;
}

ordered_json to_json(const DatasetManifest& m) {
  ordered_json j;
  j["name"] = m.name;
  j["kind"] = to_string(m.kind);
  j["sample_count"] = m.sample_count;
  j["checksum"] = m.checksum;
  j["source_path"] = m.source_path;
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind != "instruction" && kind != "evaluation") throw DataError("unknown manifest kind: " + kind);
  m.kind = kind == "instruction" ? DatasetKind::instruction : DatasetKind::evaluation;
  m.sample_count = j.at("sample_count").get<std::size_t>();
  m.checksum = j.at("checksum").get<std::string>();
  m.source_path = j.value("source_path", "");
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  write_file_atomic(path, to_json(m).dump(2) + "\n");
}

std::string normalize_for_dedup(std::string_view text) {
  std::vector<std::string> lines;
  for (const auto& l : split_lines(text)) lines.push_back(rtrim(l));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  std::string out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (i > first) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string dedup_key(const InstructionSample& s) {
  return sha256_hex(normalize_for_dedup(s.question) + '\x1f' + normalize_for_dedup(s.rationale));
}

std::vector<InstructionSample> dedup(const std::vector<InstructionSample>& samples) {
  std::vector<InstructionSample> out;
  std::unordered_set<std::string> seen;
  for (const auto& s : samples)
    if (seen.insert(dedup_key(s)).second) out.push_back(s);
  return out;
}

}  // namespace coinmath::corpus
