#pragma once

#include <map>
#include <string>
#include <vector>

#include "coinmath/client.hpp"
#include "coinmath/corpus.hpp"
#include "coinmath/harness.hpp"
#include "coinmath/sandbox.hpp"
#include "coinmath/transform.hpp"
#include "coinmath/util.hpp"
#include "json.hpp"

namespace testsupport {

inline coinmath::corpus::InstructionSample code_sample(std::string id, std::string question, std::string code,
                                                       std::string answer) {
  coinmath::corpus::InstructionSample s;
  s.id = std::move(id);
  s.question = std::move(question);
  s.rationale = std::move(code);
  s.answer = std::move(answer);
  return s;
}

// Echoes the program embedded in the rewrite prompt back unchanged.
inline std::string identity_response(const coinmath::client::CompletionRequest& r) {
  auto code = coinmath::transform::extract_code(r.prompt);
  return "```python\n" + code.value_or("") + "\n```\n";
}

inline constexpr const char* kCorruption = "\nprint(-987654321)";

// Echoes the program with an extra final print that changes the answer.
inline std::string corrupting_response(const coinmath::client::CompletionRequest& r) {
  auto code = coinmath::transform::extract_code(r.prompt);
  return "```python\n" + code.value_or("") + kCorruption + "\n```\n";
}

struct RecordedCase {
  coinmath::corpus::InstructionSample parent;
  coinmath::style::StyleTarget target = coinmath::style::CommentUsage::concise;
  std::string response;
  bool verified = false;
};

inline std::vector<RecordedCase> load_recorded(const std::string& path) {
  std::vector<RecordedCase> out;
  for (const auto& line : coinmath::split_lines(coinmath::read_file(path))) {
    if (coinmath::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    RecordedCase c;
    c.parent = coinmath::corpus::instruction_from_json(j["parent"]);
    c.target = coinmath::style::StyleTarget::parse(j["target"].get<std::string>());
    c.response = j["response"].get<std::string>();
    c.verified = j["verified"].get<bool>();
    out.push_back(std::move(c));
  }
  return out;
}

// Scripted evaluation: each item fixes how the PoT and CoT paths behave.
enum class PotOutcome { correct, wrong, no_code, crash };

struct ScriptedItem {
  coinmath::corpus::EvalItem item;
  PotOutcome pot = PotOutcome::correct;
  bool cot_correct = true;
};

inline std::string marker(const std::string& id) { return "[[" + id + "]]"; }

// Gold answers are integers; a wrong answer is offset far outside tolerance.
inline std::string wrong_of(const std::string& gold) { return std::to_string(std::stoll(gold) + 1000); }

class ScriptedEval {
 public:
  void add(coinmath::corpus::DatasetTag tag, const std::string& id, long long gold, PotOutcome pot,
           bool cot_correct) {
    ScriptedItem s;
    s.item.id = id;
    s.item.dataset = tag;
    s.item.gold_answer = std::to_string(gold);
    s.item.question = "Compute item " + marker(id) + ".";
    s.pot = pot;
    s.cot_correct = cot_correct;
    executor.add_ok("print(" + s.item.gold_answer + ")", s.item.gold_answer);
    executor.add_ok("print(" + wrong_of(s.item.gold_answer) + ")", wrong_of(s.item.gold_answer));
    executor.add("fail_" + std::to_string(items_.size()) + "()",
                 {coinmath::sandbox::Status::runtime_error, std::nullopt, "NameError", 1, true});
    by_marker_[marker(id)] = items_.size();
    items_.push_back(std::move(s));
  }

  const std::vector<ScriptedItem>& items() const { return items_; }

  std::vector<coinmath::corpus::EvalDataset> datasets() const {
    std::vector<coinmath::corpus::EvalDataset> out;
    for (auto tag : coinmath::corpus::all_dataset_tags()) {
      coinmath::corpus::EvalDataset d;
      d.manifest.name = coinmath::corpus::to_string(tag);
      for (const auto& s : items_)
        if (s.item.dataset == tag) d.items.push_back(s.item);
      if (!d.items.empty()) out.push_back(std::move(d));
    }
    return out;
  }

  // The last Alpaca block in the prompt is the item being asked.
  std::string respond(const coinmath::client::CompletionRequest& r) const {
    const auto at = r.prompt.rfind("### Instruction:");
    const auto open = r.prompt.find("[[", at);
    const auto close = r.prompt.find("]]", open);
    const auto idx = by_marker_.at(r.prompt.substr(open, close + 2 - open));
    const auto& s = items_[idx];
    const bool pot = r.prompt.find(coinmath::harness::kPotInstruction, at) != std::string::npos;
    if (pot) {
      switch (s.pot) {
        case PotOutcome::correct: return "```python\nprint(" + s.item.gold_answer + ")\n```";
        case PotOutcome::wrong: return "```python\nprint(" + wrong_of(s.item.gold_answer) + ")\n```";
        case PotOutcome::no_code: return "I am unable to express this as a program.";
        case PotOutcome::crash: return "```python\nfail_" + std::to_string(idx) + "()\n```";
      }
    }
    return "Working through it carefully. The answer is " +
           (s.cot_correct ? s.item.gold_answer : wrong_of(s.item.gold_answer)) + ".";
  }

  coinmath::client::StubClient client() const {
    return coinmath::client::StubClient([this](const coinmath::client::CompletionRequest& r) { return respond(r); });
  }

  coinmath::sandbox::StubExecutor executor;

 private:
  std::vector<ScriptedItem> items_;
  std::map<std::string, std::size_t> by_marker_;
};

// Expected hybrid verdict: PoT when its program ran and answered, else CoT.
inline bool expected_hybrid(const ScriptedItem& s) {
  switch (s.pot) {
    case PotOutcome::correct: return true;
    case PotOutcome::wrong: return false;
    default: return s.cot_correct;
  }
}

}  // namespace testsupport
