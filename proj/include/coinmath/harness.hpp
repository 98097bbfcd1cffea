#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coinmath/client.hpp"
#include "coinmath/corpus.hpp"
#include "coinmath/grader.hpp"
#include "coinmath/sandbox.hpp"
#include "coinmath/style.hpp"
#include "json.hpp"

namespace coinmath::harness {

enum class Mode { pot, cot, hybrid };
// Which prompting path produced the verdict.
enum class Path { pot, cot };

std::string to_string(Mode m);
std::string to_string(Path p);
Mode parse_mode(std::string_view s);

inline constexpr std::string_view kPotInstruction = "Let's write a program.";
inline constexpr std::string_view kCotInstruction = "Let's think step by step.";
inline constexpr int kDefaultShots = 4;

struct Exemplar {
  std::string question;
  std::string response;  // a program for PoT, worked text for CoT
};

// Fixed in-context exemplars per dataset and path, used in file order.
struct ExemplarSet {
  std::string name;
  std::map<corpus::DatasetTag, std::vector<Exemplar>> pot;
  std::map<corpus::DatasetTag, std::vector<Exemplar>> cot;

  // {"name", "pot": {"gsm": [{"question", "response"}, ...]}, "cot": {...}}
  static ExemplarSet load(const std::filesystem::path& path);
  static std::filesystem::path default_path();
};

struct EvalConfig {
  Mode mode = Mode::hybrid;
  int shots = 0;
  std::optional<ExemplarSet> exemplars;
  client::DecodingParams decoding{};
  std::size_t width = 1;
  std::int64_t timeout_ms = sandbox::kDefaultTimeoutMs;
  std::int64_t memory_limit_bytes = sandbox::kDefaultMemoryLimit;
  // When set, every PoT exemplar must audit to each of these targets.
  std::vector<style::StyleTarget> expected_style;
  bool strict_style = false;
  style::Thresholds thresholds{};
};

nlohmann::ordered_json to_json(const EvalConfig& c);

// Throws UsageError on a missing or too-small exemplar set, and on an
// exemplar style mismatch in strict mode.
std::string build_eval_prompt(const corpus::EvalItem& item, Path path, const EvalConfig& config);

// Checks the PoT exemplars for every dataset against config.expected_style.
void check_exemplar_style(const EvalConfig& config);

struct ItemTrace {
  std::string item_id;
  corpus::DatasetTag dataset = corpus::DatasetTag::gsm;
  std::string gold_answer;
  Path path = Path::pot;
  std::optional<std::string> pot_prompt_sha256;
  std::optional<std::string> pot_output;
  std::optional<std::string> code;  // present iff PoT emitted a code block
  std::optional<sandbox::ExecutionResult> execution;
  std::optional<std::string> cot_prompt_sha256;
  std::optional<std::string> cot_output;
  std::optional<std::string> candidate;
  bool correct = false;
  bool errored = false;  // client failure; counted incorrect
  std::string error;
};

nlohmann::ordered_json to_json(const ItemTrace& t);

ItemTrace evaluate_item(const corpus::EvalItem& item, const EvalConfig& config, client::ModelClient& client,
                        sandbox::Executor& executor, const grader::Grader& grader);

struct DatasetResult {
  corpus::DatasetTag dataset = corpus::DatasetTag::gsm;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t errored = 0;
  std::size_t code_emitted = 0;
  double accuracy = 0.0;
  // Absent when no item emitted code (pure CoT).
  std::optional<double> valid_code_rate;
  std::vector<ItemTrace> traces;  // sorted by item id
};

struct EvalReport {
  client::ModelIdentity model;
  nlohmann::ordered_json config;
  std::vector<DatasetResult> datasets;  // input order
  double average_accuracy = 0.0;
  std::optional<double> average_valid_code_rate;
  bool partial = false;  // cancelled before every item ran
};

nlohmann::ordered_json to_json(const EvalReport& r, bool include_traces = false);
std::string traces_jsonl(const EvalReport& r);

// Throws DataError when no dataset is given or any dataset is empty.
EvalReport run_eval(const EvalConfig& config, const std::vector<corpus::EvalDataset>& datasets,
                    client::ModelClient& client, sandbox::Executor& executor, const grader::Grader& grader);

}  // namespace coinmath::harness
