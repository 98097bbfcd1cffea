#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coinmath/style.hpp"
#include "coinmath/util.hpp"
#include "json.hpp"

namespace coinmath::corpus {

enum class RationaleKind { text, code };
enum class Source { math_code, math_text, general_code, synthesized };
enum class DatasetTag { arithmetic, svamp, gsm, math };
enum class AnswerKind { integer, decimal, expression };
enum class DatasetKind { instruction, evaluation };

struct InstructionSample {
  std::string id;
  std::string question;
  std::string rationale;
  RationaleKind rationale_kind = RationaleKind::code;
  std::string answer;
  Source source = Source::math_code;
  // Set on synthesized samples.
  std::optional<std::string> parent_id;
  std::optional<style::StyleTarget> target;
  std::optional<bool> verified;
  std::optional<style::StyleProfile> style;
};

struct EvalItem {
  std::string id;
  std::string question;
  std::string gold_answer;
  DatasetTag dataset = DatasetTag::gsm;
  AnswerKind answer_kind = AnswerKind::integer;
};

struct DatasetManifest {
  std::string name;
  DatasetKind kind = DatasetKind::instruction;
  std::size_t sample_count = 0;
  std::string checksum;
  std::string source_path;
};

struct InstructionDataset {
  std::vector<InstructionSample> samples;
  DatasetManifest manifest;
};

struct EvalDataset {
  std::vector<EvalItem> items;
  DatasetManifest manifest;
};

struct RecordError {
  std::size_t line = 0;
  std::string id;
  std::string message;
};

// Thrown when one or more records fail validation. Carries every failure.
struct RecordValidationError : DataError {
  RecordValidationError(const std::string& what, std::vector<RecordError> errs)
      : DataError(what), errors(std::move(errs)) {}
  std::vector<RecordError> errors;
};

std::string to_string(RationaleKind k);
std::string to_string(Source s);
std::string to_string(DatasetTag d);
std::string to_string(AnswerKind k);
std::string to_string(DatasetKind k);
RationaleKind parse_rationale_kind(std::string_view s);
Source parse_source(std::string_view s);
DatasetTag parse_dataset_tag(std::string_view s);
AnswerKind parse_answer_kind(std::string_view s);

const std::vector<DatasetTag>& all_dataset_tags();

// Canonical single-line JSON (fixed field order, absent optionals omitted).
std::string serialize(const InstructionSample& s);
std::string serialize(const EvalItem& item);
InstructionSample instruction_from_json(const nlohmann::json& j);
EvalItem eval_item_from_json(const nlohmann::json& j);

// Newline-joined canonical records, each line terminated by '\n'.
std::string serialize_all(const std::vector<InstructionSample>& samples);
std::string serialize_all(const std::vector<EvalItem>& items);

// Hash over the canonical record bytes.
std::string checksum(const std::vector<InstructionSample>& samples);
std::string checksum(const std::vector<EvalItem>& items);

// Returns the list of invariant violations for one record (empty when valid).
std::vector<std::string> validate(const InstructionSample& s);
std::vector<std::string> validate(const EvalItem& item);

InstructionDataset parse_instruction_dataset(std::string_view text, std::string name,
                                             std::optional<RationaleKind> expected_kind = std::nullopt);
InstructionDataset load_instruction_dataset(const std::filesystem::path& path,
                                            std::optional<RationaleKind> expected_kind = std::nullopt);

// An optional first line {"header": {"dataset": "<tag>"}} is checked against the tag.
EvalDataset parse_eval_dataset(std::string_view text, DatasetTag tag, std::string name);
EvalDataset load_eval_dataset(const std::filesystem::path& path, DatasetTag tag);

DatasetManifest make_manifest(std::string name, const std::vector<InstructionSample>& samples,
                              std::string source_path = {});

void write_instruction_dataset(const std::filesystem::path& path,
                               const std::vector<InstructionSample>& samples);
void write_eval_dataset(const std::filesystem::path& path, const std::vector<EvalItem>& items);

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path);
nlohmann::ordered_json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);

// Whitespace normalization used for the duplicate key: trailing whitespace
// per line and leading/trailing blank lines are dropped.
std::string normalize_for_dedup(std::string_view text);
std::string dedup_key(const InstructionSample& s);

// Keeps the first occurrence of each normalized (question, rationale) pair.
std::vector<InstructionSample> dedup(const std::vector<InstructionSample>& samples);

}  // namespace coinmath::corpus
