#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coinmath/client.hpp"
#include "coinmath/corpus.hpp"
#include "coinmath/grader.hpp"
#include "coinmath/sandbox.hpp"
#include "coinmath/style.hpp"

namespace coinmath::transform {

using style::StyleTarget;

struct PromptTemplate {
  std::string file_name;
  std::string text;
  // "<file>@<content hash prefix>"; part of every cache key.
  std::string version;
};

// Rewrite instructions, one editable text file per (axis, value) with
// {question} and {rationale} placeholders.
class TemplateSet {
 public:
  static TemplateSet load(const std::filesystem::path& dir);
  static std::filesystem::path default_dir();
  static std::string file_name_for(const StyleTarget& target);

  // Throws UsageError when no template exists for the target.
  const PromptTemplate& for_target(const StyleTarget& target) const;
  std::size_t size() const { return templates_.size(); }

 private:
  std::map<std::string, PromptTemplate> templates_;
};

struct Prompt {
  std::string text;
  std::string template_version;
};

// Throws UsageError for text-kind samples or a missing template.
Prompt build_prompt(const StyleTarget& target, const corpus::InstructionSample& sample,
                    const TemplateSet& templates);

// Fenced block when present, else the longest contiguous parseable suffix
// (trailing prose dropped first).
std::optional<std::string> extract_code(std::string_view response);

struct TransformOptions {
  int max_retries = 3;
  client::DecodingParams decoding{};  // temperature 0
  std::int64_t timeout_ms = sandbox::kDefaultTimeoutMs;
  std::int64_t memory_limit_bytes = sandbox::kDefaultMemoryLimit;
};

struct TransformRecord {
  std::string parent_id;
  StyleTarget target = style::CommentUsage::concise;
  std::string prompt_used;
  std::string template_version;
  std::string raw_response;
  std::string extracted_code;
  bool verified = false;
  int attempts = 0;
  std::optional<sandbox::ExecutionResult> execution;
  std::string failure;  // last failure reason when unverified
};

nlohmann::ordered_json to_json(const TransformRecord& r);

// Rewrites the sample's rationale toward `target`, executes the rewrite and
// grades its answer against sample.answer. Retries on missing code, failed
// execution, or a non-equivalent answer. Throws ProviderError only when every
// attempt failed at the client.
TransformRecord transform(const corpus::InstructionSample& sample, const StyleTarget& target,
                          client::ModelClient& client, sandbox::Executor& executor,
                          const grader::Grader& grader, const TemplateSet& templates,
                          const TransformOptions& options = {});

// concise comments, descriptive naming, hardcoded solution
const std::array<StyleTarget, 3>& ensemble_targets();

struct EnsembleResult {
  std::vector<corpus::InstructionSample> variants;  // verified only
  std::vector<TransformRecord> records;             // every attempt outcome
  std::vector<std::string> exclusions;
  std::vector<std::string> style_drift;
  bool partial = false;
};

corpus::InstructionSample make_variant(const corpus::InstructionSample& parent, const TransformRecord& record);

EnsembleResult ensemble(const corpus::InstructionSample& sample, client::ModelClient& client,
                        sandbox::Executor& executor, const grader::Grader& grader,
                        const TemplateSet& templates, const TransformOptions& options = {});

struct CorpusEnsemble {
  std::vector<corpus::InstructionSample> variants;
  std::vector<TransformRecord> records;
  std::size_t parents = 0;
  std::size_t excluded = 0;
  std::size_t drifted = 0;
  std::size_t partial_parents = 0;
};

// Runs ensemble() over a corpus on a bounded pool; output keeps input order.
CorpusEnsemble ensemble_corpus(const std::vector<corpus::InstructionSample>& samples,
                               client::ModelClient& client, sandbox::Executor& executor,
                               const grader::Grader& grader, const TemplateSet& templates,
                               const TransformOptions& options, std::size_t width);

}  // namespace coinmath::transform
