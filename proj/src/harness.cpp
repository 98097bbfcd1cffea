#include "coinmath/harness.hpp"

#include <algorithm>
#include <atomic>

#include "coinmath/transform.hpp"
#include "coinmath/util.hpp"

namespace coinmath::harness {

using corpus::DatasetTag;
using corpus::EvalItem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::pot: return "pot";
    case Mode::cot: return "cot";
    case Mode::hybrid: return "hybrid";
  }
  return "?";
}

std::string to_string(Path p) { return p == Path::pot ? "pot" : "cot"; }

Mode parse_mode(std::string_view s) {
  const std::string v = to_lower(trim(s));
  if (v == "pot") return Mode::pot;
  if (v == "cot") return Mode::cot;
  if (v == "hybrid") return Mode::hybrid;
  throw UsageError("unknown evaluation mode '" + std::string(s) + "' (pot, cot, hybrid)");
}

// ---------------------------------------------------------------------------

ExemplarSet ExemplarSet::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  ExemplarSet set;
  set.name = j.value("name", path.stem().string());
  auto read_side = [&](const char* key, std::map<DatasetTag, std::vector<Exemplar>>& out) {
    if (!j.contains(key)) return;
    for (const auto& [tag, list] : j[key].items()) {
      auto& bucket = out[corpus::parse_dataset_tag(tag)];
      for (const auto& e : list) {
        Exemplar ex{e.at("question").get<std::string>(), e.at("response").get<std::string>()};
        if (trim(ex.question).empty() || trim(ex.response).empty())
          throw DataError(path.string() + ": empty exemplar under " + key + "/" + tag);
        bucket.push_back(std::move(ex));
      }
    }
  };
  try {
    read_side("pot", set.pot);
    read_side("cot", set.cot);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return set;
}

std::filesystem::path ExemplarSet::default_path() {
  return std::filesystem::path(COINMATH_DATA_DIR) / "exemplars" / "default.json";
}

ordered_json to_json(const EvalConfig& c) {
  ordered_json j;
  j["mode"] = to_string(c.mode);
  j["shots"] = c.shots;
  j["exemplar_set"] = c.exemplars ? ordered_json(c.exemplars->name) : ordered_json(nullptr);
  j["decoding"] = client::to_json(c.decoding);
  j["width"] = c.width;
  j["timeout_ms"] = c.timeout_ms;
  j["memory_limit_bytes"] = c.memory_limit_bytes;
  ordered_json style = ordered_json::array();
  for (const auto& t : c.expected_style) style.push_back(t.to_string());
  j["expected_style"] = style;
  j["strict_style"] = c.strict_style;
  return j;
}

namespace {

std::string alpaca_block(std::string_view question, std::string_view instruction) {
  std::string out =
      "Below is an instruction that describes a task. Write a response that appropriately completes the request.\n\n"
      "### Instruction:\n";
  out += trim(question);
  out += ' ';
  out += instruction;
  out += "\n\n### Response:";
  return out;
}

const std::vector<Exemplar>& exemplars_for(const EvalConfig& config, DatasetTag tag, Path path) {
  if (!config.exemplars) throw UsageError("few-shot evaluation requires an exemplar set");
  const auto& side = path == Path::pot ? config.exemplars->pot : config.exemplars->cot;
  auto it = side.find(tag);
  const std::size_t have = it == side.end() ? 0 : it->second.size();
  if (have < static_cast<std::size_t>(config.shots))
    throw UsageError("exemplar set '" + config.exemplars->name + "' has " + std::to_string(have) + " " +
                     to_string(path) + " exemplars for " + corpus::to_string(tag) + ", need " +
                     std::to_string(config.shots));
  return it->second;
}

}  // namespace

void check_exemplar_style(const EvalConfig& config) {
  if (config.expected_style.empty() || !config.exemplars) return;
  for (const auto& [tag, list] : config.exemplars->pot) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto code = transform::extract_code(list[i].response);
      if (!code) throw UsageError("PoT exemplar " + config.exemplars->name + "/" + corpus::to_string(tag) + "[" +
                                  std::to_string(i) + "] contains no program");
      const auto report = style::audit(*code, config.thresholds);
      for (const auto& target : config.expected_style) {
        if (!target.matches(report.profile))
          throw UsageError("exemplar style mismatch: " + config.exemplars->name + "/" + corpus::to_string(tag) +
                           "[" + std::to_string(i) + "] audits as " + style::to_json(report.profile).dump() +
                           ", expected " + target.to_string());
      }
    }
  }
}

std::string build_eval_prompt(const EvalItem& item, Path path, const EvalConfig& config) {
  if (config.shots < 0) throw UsageError("shots must be non-negative");
  const std::string_view instruction = path == Path::pot ? kPotInstruction : kCotInstruction;
  std::string prompt;
  if (config.shots > 0) {
    if (config.strict_style && path == Path::pot) check_exemplar_style(config);
    const auto& list = exemplars_for(config, item.dataset, path);
    for (int i = 0; i < config.shots; ++i) {
      prompt += alpaca_block(list[i].question, instruction);
      prompt += '\n';
      prompt += trim(list[i].response);
      prompt += "\n\n";
    }
  }
  prompt += alpaca_block(item.question, instruction);
  return prompt;
}

// ---------------------------------------------------------------------------

ordered_json to_json(const ItemTrace& t) {
  auto opt = [](const std::optional<std::string>& s) { return s ? ordered_json(*s) : ordered_json(nullptr); };
  ordered_json j;
  j["id"] = t.item_id;
  j["dataset"] = corpus::to_string(t.dataset);
  j["gold_answer"] = t.gold_answer;
  j["path"] = to_string(t.path);
  j["correct"] = t.correct;
  j["errored"] = t.errored;
  j["error"] = t.error;
  j["candidate"] = opt(t.candidate);
  j["pot_prompt_sha256"] = opt(t.pot_prompt_sha256);
  j["pot_output"] = opt(t.pot_output);
  j["code"] = opt(t.code);
  j["execution"] = t.execution ? sandbox::to_json(*t.execution) : ordered_json(nullptr);
  j["cot_prompt_sha256"] = opt(t.cot_prompt_sha256);
  j["cot_output"] = opt(t.cot_output);
  return j;
}

namespace {

client::CompletionRequest request_for(std::string prompt, const EvalConfig& config) {
  return {std::move(prompt), config.decoding, "eval-" + to_string(config.mode)};
}

// Returns true when the PoT path produced a captured answer.
bool run_pot(const EvalItem& item, const EvalConfig& config, client::ModelClient& client,
             sandbox::Executor& executor, const grader::Grader& grader, ItemTrace& t) {
  t.path = Path::pot;
  std::string prompt = build_eval_prompt(item, Path::pot, config);
  t.pot_prompt_sha256 = sha256_hex(prompt);
  t.pot_output = client.complete(request_for(std::move(prompt), config));
  t.code = transform::extract_code(*t.pot_output);
  if (!t.code) return false;
  sandbox::ExecutionRequest req;
  req.code = *t.code;
  req.timeout_ms = config.timeout_ms;
  req.memory_limit_bytes = config.memory_limit_bytes;
  t.execution = sandbox::execute(req, executor);
  if (t.execution->status != sandbox::Status::ok) return false;
  t.candidate = grader.extract(*t.execution->answer_text, grader::ExtractMode::pot_execution);
  if (!t.candidate) return false;
  t.correct = grader.grade(*t.candidate, item.gold_answer);
  return true;
}

void run_cot(const EvalItem& item, const EvalConfig& config, client::ModelClient& client,
             const grader::Grader& grader, ItemTrace& t) {
  t.path = Path::cot;
  std::string prompt = build_eval_prompt(item, Path::cot, config);
  t.cot_prompt_sha256 = sha256_hex(prompt);
  t.cot_output = client.complete(request_for(std::move(prompt), config));
  t.candidate = grader.extract(*t.cot_output, grader::ExtractMode::cot);
  t.correct = t.candidate && grader.grade(*t.candidate, item.gold_answer);
}

}  // namespace

ItemTrace evaluate_item(const EvalItem& item, const EvalConfig& config, client::ModelClient& client,
                        sandbox::Executor& executor, const grader::Grader& grader) {
  ItemTrace t;
  t.item_id = item.id;
  t.dataset = item.dataset;
  t.gold_answer = item.gold_answer;
  try {
    switch (config.mode) {
      case Mode::pot:
        run_pot(item, config, client, executor, grader, t);
        break;
      case Mode::cot:
        run_cot(item, config, client, grader, t);
        break;
      case Mode::hybrid:
        if (!run_pot(item, config, client, executor, grader, t)) {
          t.candidate.reset();
          t.correct = false;
          run_cot(item, config, client, grader, t);
        }
        break;
    }
  } catch (const ProviderError& e) {
    t.errored = true;
    t.correct = false;
    t.error = e.what();
  }
  return t;
}

// ---------------------------------------------------------------------------

EvalReport run_eval(const EvalConfig& config, const std::vector<corpus::EvalDataset>& datasets,
                    client::ModelClient& client, sandbox::Executor& executor, const grader::Grader& grader) {
  if (datasets.empty()) throw DataError("no evaluation datasets given");
  for (const auto& d : datasets)
    if (d.items.empty()) throw DataError("evaluation dataset '" + d.manifest.name + "' is empty");
  if (config.shots > 0 && !config.exemplars)
    throw UsageError("few-shot evaluation requires an exemplar set");
  if (config.strict_style && config.shots > 0) check_exemplar_style(config);

  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t d = 0; d < datasets.size(); ++d)
    for (std::size_t i = 0; i < datasets[d].items.size(); ++i) work.emplace_back(d, i);

  std::vector<std::optional<ItemTrace>> traces(work.size());
  const std::size_t ran = parallel_for(work.size(), std::max<std::size_t>(1, config.width), [&](std::size_t k) {
    const auto& item = datasets[work[k].first].items[work[k].second];
    traces[k] = evaluate_item(item, config, client, executor, grader);
  });

  EvalReport report;
  report.model = client.identity();
  report.config = to_json(config);
  report.partial = ran < work.size();

  for (std::size_t d = 0; d < datasets.size(); ++d) {
    DatasetResult r;
    r.dataset = datasets[d].items.front().dataset;
    report.datasets.push_back(std::move(r));
  }
  for (std::size_t k = 0; k < work.size(); ++k) {
    if (!traces[k]) continue;
    report.datasets[work[k].first].traces.push_back(std::move(*traces[k]));
  }

  double acc_sum = 0.0, vcr_sum = 0.0;
  std::size_t vcr_n = 0;
  for (auto& r : report.datasets) {
    std::stable_sort(r.traces.begin(), r.traces.end(),
                     [](const ItemTrace& a, const ItemTrace& b) { return a.item_id < b.item_id; });
    std::vector<sandbox::ExecutionResult> executions;
    for (const auto& t : r.traces) {
      ++r.total;
      if (t.correct) ++r.correct;
      if (t.errored) ++r.errored;
      if (t.code && t.execution) executions.push_back(*t.execution);
    }
    r.code_emitted = executions.size();
    r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
    if (!executions.empty()) {
      r.valid_code_rate = sandbox::valid_code_rate(executions);
      vcr_sum += *r.valid_code_rate;
      ++vcr_n;
    }
    acc_sum += r.accuracy;
  }
  report.average_accuracy = acc_sum / static_cast<double>(report.datasets.size());
  if (vcr_n) report.average_valid_code_rate = vcr_sum / static_cast<double>(vcr_n);
  return report;
}

ordered_json to_json(const EvalReport& r, bool include_traces) {
  ordered_json j;
  j["model"] = r.model.to_string();
  j["config"] = r.config;
  j["partial"] = r.partial;
  ordered_json per = ordered_json::array();
  for (const auto& d : r.datasets) {
    ordered_json dj;
    dj["dataset"] = corpus::to_string(d.dataset);
    dj["total"] = d.total;
    dj["correct"] = d.correct;
    dj["errored"] = d.errored;
    dj["code_emitted"] = d.code_emitted;
    dj["accuracy"] = d.accuracy;
    dj["valid_code_rate"] = d.valid_code_rate ? ordered_json(*d.valid_code_rate) : ordered_json(nullptr);
    if (include_traces) {
      ordered_json tj = ordered_json::array();
      for (const auto& t : d.traces) tj.push_back(to_json(t));
      dj["traces"] = std::move(tj);
    }
    per.push_back(std::move(dj));
  }
  j["datasets"] = std::move(per);
  j["average_accuracy"] = r.average_accuracy;
  j["average_valid_code_rate"] =
      r.average_valid_code_rate ? ordered_json(*r.average_valid_code_rate) : ordered_json(nullptr);
  return j;
}

std::string traces_jsonl(const EvalReport& r) {
  std::string out;
  for (const auto& d : r.datasets)
    for (const auto& t : d.traces) out += to_json(t).dump() + "\n";
  return out;
}

}  // namespace coinmath::harness
