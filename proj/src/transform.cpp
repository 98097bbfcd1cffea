#include "coinmath/transform.hpp"

#include <cctype>
#include <mutex>
#include <set>

#include "coinmath/util.hpp"

namespace coinmath::transform {

using corpus::InstructionSample;
using nlohmann::ordered_json;

std::filesystem::path TemplateSet::default_dir() {
  return std::filesystem::path(COINMATH_DATA_DIR) / "templates";
}

std::string TemplateSet::file_name_for(const StyleTarget& target) {
  return target.axis_name() + "_" + target.value_name() + ".txt";
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw UsageError("template directory not found: " + dir.string());
  TemplateSet set;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    PromptTemplate t;
    t.file_name = entry.path().filename().string();
    t.text = read_file(entry.path());
    t.version = t.file_name + "@" + sha256_hex(t.text).substr(0, 12);
    set.templates_.emplace(t.file_name, std::move(t));
  }
  return set;
}

const PromptTemplate& TemplateSet::for_target(const StyleTarget& target) const {
  auto it = templates_.find(file_name_for(target));
  if (it == templates_.end()) throw UsageError("no prompt template for target " + target.to_string());
  return it->second;
}

Prompt build_prompt(const StyleTarget& target, const InstructionSample& sample, const TemplateSet& templates) {
  if (sample.rationale_kind != corpus::RationaleKind::code)
    throw UsageError("build_prompt: sample " + sample.id + " is not a code rationale");
  const auto& tmpl = templates.for_target(target);
  std::string text = tmpl.text;
  replace_all(text, "{question}", sample.question);
  replace_all(text, "{rationale}", sample.rationale);
  return {std::move(text), tmpl.version};
}

// ---------------------------------------------------------------------------

namespace {

std::optional<std::string> fenced_block(std::string_view response) {
  std::optional<std::string> fallback;
  std::size_t pos = 0;
  while ((pos = response.find("```", pos)) != std::string_view::npos) {
    std::size_t info_end = response.find('\n', pos + 3);
    if (info_end == std::string_view::npos) break;
    std::string info = to_lower(trim(response.substr(pos + 3, info_end - pos - 3)));
    std::size_t close = response.find("```", info_end + 1);
    if (close == std::string_view::npos) close = response.size();
    std::string body(response.substr(info_end + 1, close - info_end - 1));
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    if (info.empty() || info == "python" || info == "py" || info == "python3") {
      if (!trim(body).empty()) return body;
    } else if (!fallback && !trim(body).empty()) {
      fallback = body;
    }
    if (close >= response.size()) break;
    pos = close + 3;
  }
  return fallback;
}

// Two bare words in a row ("The area") never occur in Python outside strings
// and comments unless one of them is a keyword.
bool prose_like(std::string_view line) {
  static const std::set<std::string, std::less<>> kKeywords = {
      "False", "None",   "True",  "and",      "as",     "assert", "async", "await",  "break",
      "class", "continue", "def",  "del",      "elif",   "else",   "except", "finally", "for",
      "from",  "global", "if",    "import",   "in",     "is",     "lambda", "nonlocal", "not",
      "or",    "pass",   "raise", "return",   "try",    "while",  "with",  "yield",  "print",
      "match", "case"};
  std::string code;
  char quote = 0;
  for (char c : line) {
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '#') break;
    if (c == '\'' || c == '"') {
      quote = c;
      code += ' ';
      continue;
    }
    code += c;
  }
  std::string prev;
  std::size_t i = 0;
  while (i < code.size()) {
    if (std::isspace(static_cast<unsigned char>(code[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool word = std::isalpha(static_cast<unsigned char>(code[i])) || code[i] == '_';
    if (word) {
      while (j < code.size() && (std::isalnum(static_cast<unsigned char>(code[j])) || code[j] == '_')) ++j;
      std::string tok = code.substr(i, j - i);
      if (!prev.empty() && !kKeywords.count(prev) && !kKeywords.count(tok)) return true;
      prev = std::move(tok);
    } else {
      j = i + 1;
      prev.clear();
    }
    i = j;
  }
  return false;
}

bool code_like(const std::string& line) {
  static const std::vector<std::string_view> kLeading = {
      "import ", "from ", "def ", "return", "for ", "while ", "if ", "elif ", "else", "print",
      "class ", "try", "except", "finally", "with ", "pass", "break", "continue", "@", "assert "};
  std::string t = trim(line);
  if (t.empty() || t.starts_with("#")) return true;
  if (prose_like(t)) return false;
  if (!line.empty() && (line[0] == ' ' || line[0] == '\t')) return true;
  for (auto k : kLeading)
    if (t.starts_with(k)) return true;
  return t.find('=') != std::string::npos || t.find('(') != std::string::npos ||
         t.find('[') != std::string::npos;
}

std::string join(const std::vector<std::string>& lines, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    out += lines[i];
    if (i + 1 < end) out += '\n';
  }
  return out;
}

}  // namespace

std::optional<std::string> extract_code(std::string_view response) {
  if (auto fenced = fenced_block(response)) return fenced;
  auto lines = split_lines(response);
  std::size_t end = lines.size();
  while (end > 0 && !code_like(lines[end - 1])) --end;
  for (std::size_t start = 0; start < end; ++start) {
    bool all_code = true;
    for (std::size_t i = start; i < end && all_code; ++i) all_code = code_like(lines[i]);
    if (!all_code) continue;
    std::string candidate = trim(join(lines, start, end));
    if (candidate.empty()) return std::nullopt;
    if (style::is_parseable(candidate) && style::has_statement(candidate)) return candidate;
  }
  return std::nullopt;
}

ordered_json to_json(const TransformRecord& r) {
  ordered_json j;
  j["parent_id"] = r.parent_id;
  j["target"] = r.target.to_string();
  j["template_version"] = r.template_version;
  j["prompt_used"] = r.prompt_used;
  j["raw_response"] = r.raw_response;
  j["extracted_code"] = r.extracted_code;
  j["verified"] = r.verified;
  j["attempts"] = r.attempts;
  j["execution"] = r.execution ? sandbox::to_json(*r.execution) : ordered_json(nullptr);
  j["failure"] = r.failure;
  return j;
}

TransformRecord transform(const InstructionSample& sample, const StyleTarget& target,
                          client::ModelClient& client, sandbox::Executor& executor,
                          const grader::Grader& grader, const TemplateSet& templates,
                          const TransformOptions& options) {
  if (options.max_retries < 1) throw UsageError("max_retries must be at least 1");
  const Prompt prompt = build_prompt(target, sample, templates);
  TransformRecord rec;
  rec.parent_id = sample.id;
  rec.target = target;
  rec.prompt_used = prompt.text;
  rec.template_version = prompt.template_version;

  int client_failures = 0;
  std::optional<ProviderError> last_client_error;
  for (int attempt = 1; attempt <= options.max_retries; ++attempt) {
    rec.attempts = attempt;
    client::CompletionRequest req{prompt.text, options.decoding, prompt.template_version};
    req.params.sample_index = attempt - 1;
    try {
      rec.raw_response = client.complete(req);
    } catch (const ProviderError& e) {
      ++client_failures;
      last_client_error = e;
      rec.failure = std::string("client error: ") + e.what();
      continue;
    }
    auto code = extract_code(rec.raw_response);
    if (!code) {
      rec.extracted_code.clear();
      rec.execution.reset();
      rec.failure = "no code block in response";
      continue;
    }
    rec.extracted_code = *code;
    sandbox::ExecutionRequest exec_req;
    exec_req.code = *code;
    exec_req.timeout_ms = options.timeout_ms;
    exec_req.memory_limit_bytes = options.memory_limit_bytes;
    rec.execution = sandbox::execute(exec_req, executor);
    if (rec.execution->status != sandbox::Status::ok) {
      rec.failure = "execution " + sandbox::to_string(rec.execution->status);
      continue;
    }
    if (!grader.grade(*rec.execution->answer_text, sample.answer)) {
      rec.failure = "answer mismatch: got '" + *rec.execution->answer_text + "', expected '" + sample.answer + "'";
      continue;
    }
    rec.verified = true;
    rec.failure.clear();
    return rec;
  }
  if (client_failures == options.max_retries) throw *last_client_error;
  return rec;
}

const std::array<StyleTarget, 3>& ensemble_targets() {
  static const std::array<StyleTarget, 3> kTargets = {
      StyleTarget(style::CommentUsage::concise), StyleTarget(style::Naming::descriptive),
      StyleTarget(style::Generality::hardcoded)};
  return kTargets;
}

InstructionSample make_variant(const InstructionSample& parent, const TransformRecord& record) {
  InstructionSample v;
  v.id = parent.id + "::" + record.target.value_name();
  v.question = parent.question;
  v.rationale = record.extracted_code;
  v.rationale_kind = corpus::RationaleKind::code;
  v.answer = parent.answer;
  v.source = corpus::Source::synthesized;
  v.parent_id = parent.id;
  v.target = record.target;
  v.verified = record.verified;
  v.style = style::audit(record.extracted_code).profile;
  return v;
}

EnsembleResult ensemble(const InstructionSample& sample, client::ModelClient& client,
                        sandbox::Executor& executor, const grader::Grader& grader,
                        const TemplateSet& templates, const TransformOptions& options) {
  if (sample.rationale_kind != corpus::RationaleKind::code)
    throw UsageError("ensemble: sample " + sample.id + " is not a code rationale");
  EnsembleResult out;
  for (const auto& target : ensemble_targets()) {
    TransformRecord rec;
    try {
      rec = transform(sample, target, client, executor, grader, templates, options);
    } catch (const ProviderError& e) {
      rec.parent_id = sample.id;
      rec.target = target;
      rec.attempts = options.max_retries;
      rec.failure = std::string("client error: ") + e.what();
    }
    if (!rec.verified) {
      std::string msg = sample.id + " " + target.to_string() + " excluded: " + rec.failure;
      log_warn(msg);
      out.exclusions.push_back(std::move(msg));
      out.partial = true;
    } else {
      auto variant = make_variant(sample, rec);
      if (!target.matches(*variant.style)) {
        std::string msg = sample.id + " " + target.to_string() + " style drift: audit says " +
                          style::to_json(*variant.style).dump();
        log_info(msg);
        out.style_drift.push_back(std::move(msg));
      }
      out.variants.push_back(std::move(variant));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

CorpusEnsemble ensemble_corpus(const std::vector<InstructionSample>& samples, client::ModelClient& client,
                               sandbox::Executor& executor, const grader::Grader& grader,
                               const TemplateSet& templates, const TransformOptions& options,
                               std::size_t width) {
  std::vector<std::optional<EnsembleResult>> results(samples.size());
  parallel_for(samples.size(), width, [&](std::size_t i) {
    results[i] = ensemble(samples[i], client, executor, grader, templates, options);
  });
  CorpusEnsemble out;
  for (auto& r : results) {
    if (!r) continue;
    ++out.parents;
    out.excluded += r->exclusions.size();
    out.drifted += r->style_drift.size();
    if (r->partial) ++out.partial_parents;
    for (auto& v : r->variants) out.variants.push_back(std::move(v));
    for (auto& rec : r->records) out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace coinmath::transform
