#include "coinmath/mixer.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "coinmath/util.hpp"

namespace coinmath::mixer {

using corpus::InstructionSample;
using nlohmann::json;
using nlohmann::ordered_json;

bool ComponentFilter::accepts(const InstructionSample& s) const {
  if (rationale_kind && s.rationale_kind != *rationale_kind) return false;
  if (target && (!s.target || !(*s.target == *target))) return false;
  if (verified_only && !s.verified.value_or(false)) return false;
  return true;
}

ordered_json to_json(const MixManifest& m) {
  ordered_json j;
  j["name"] = m.name;
  j["recipe_id"] = m.recipe_id ? ordered_json(*m.recipe_id) : ordered_json(nullptr);
  j["seed"] = m.seed;
  j["paired_ids"] = m.paired_ids;
  ordered_json comps = ordered_json::array();
  for (const auto& c : m.components) {
    ordered_json cj;
    cj["dataset"] = c.dataset;
    ordered_json f = ordered_json::object();
    if (c.filter.rationale_kind) f["rationale_kind"] = corpus::to_string(*c.filter.rationale_kind);
    if (c.filter.target) f["target"] = c.filter.target->to_string();
    if (c.filter.verified_only) f["verified_only"] = true;
    cj["filter"] = f;
    cj["take"] = c.take ? ordered_json(*c.take) : ordered_json("all");
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  j["resulting_count"] = m.resulting_count;
  j["checksum"] = m.checksum;
  j["finalized"] = m.finalized;
  return j;
}

MixManifest manifest_from_json(const json& j) {
  try {
    MixManifest m;
    m.name = j.at("name").get<std::string>();
    if (j.contains("recipe_id") && !j["recipe_id"].is_null()) m.recipe_id = j["recipe_id"].get<std::string>();
    m.seed = j.value("seed", kDefaultSeed);
    m.paired_ids = j.value("paired_ids", false);
    for (const auto& cj : j.at("components")) {
      Component c;
      c.dataset = cj.at("dataset").get<std::string>();
      if (cj.contains("filter")) {
        const auto& f = cj["filter"];
        if (f.contains("rationale_kind"))
          c.filter.rationale_kind = corpus::parse_rationale_kind(f["rationale_kind"].get<std::string>());
        if (f.contains("target")) c.filter.target = style::StyleTarget::parse(f["target"].get<std::string>());
        c.filter.verified_only = f.value("verified_only", false);
      }
      if (cj.contains("take") && !(cj["take"].is_string() && cj["take"] == "all"))
        c.take = cj["take"].get<std::size_t>();
      m.components.push_back(std::move(c));
    }
    m.resulting_count = j.value("resulting_count", std::size_t{0});
    m.checksum = j.value("checksum", std::string{});
    m.finalized = j.value("finalized", false);
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed mix manifest: ") + e.what());
  }
}

MixManifest load_manifest(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

void write_manifest(const std::filesystem::path& path, const MixManifest& m) {
  write_file_atomic(path, to_json(m).dump(2) + "\n");
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw UsageError("uniform_below: bound must be positive");
  // Reject the short top bucket so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_below(rng, i)]);
  return idx;
}

namespace {

std::set<std::string> id_set(const std::vector<InstructionSample>& v) {
  std::set<std::string> out;
  for (const auto& s : v) out.insert(s.id);
  return out;
}

}  // namespace

MixResult mix(const MixManifest& manifest, const DatasetMap& datasets) {
  if (manifest.components.empty()) throw DataError("mix manifest '" + manifest.name + "' has no components");
  std::vector<std::vector<InstructionSample>> selected;
  for (const auto& c : manifest.components) {
    auto it = datasets.find(c.dataset);
    if (it == datasets.end()) throw DataError("unknown dataset reference '" + c.dataset + "'");
    std::vector<InstructionSample> picked;
    for (const auto& s : it->second) {
      if (c.take && picked.size() >= *c.take) break;
      if (c.filter.accepts(s)) picked.push_back(s);
    }
    selected.push_back(std::move(picked));
  }

  if (manifest.paired_ids) {
    const auto first = id_set(selected.front());
    for (std::size_t i = 1; i < selected.size(); ++i)
      if (id_set(selected[i]) != first)
        throw DataError("paired components '" + manifest.components.front().dataset + "' and '" +
                        manifest.components[i].dataset + "' do not share the same question ids");
  }

  MixResult result;
  std::vector<InstructionSample> pooled;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    for (auto& s : selected[i]) {
      if (!seen.insert(corpus::dedup_key(s)).second) {
        ++result.duplicates_dropped;
        continue;
      }
      s.id = manifest.components[i].dataset + "/" + s.id;
      pooled.push_back(std::move(s));
    }
  }
  if (pooled.empty()) throw DataError("mix '" + manifest.name + "' produced no samples");

  const auto order = permutation(pooled.size(), manifest.seed);
  result.corpus.reserve(pooled.size());
  for (std::size_t i : order) result.corpus.push_back(std::move(pooled[i]));

  result.manifest = manifest;
  result.manifest.resulting_count = result.corpus.size();
  result.manifest.checksum = corpus::checksum(result.corpus);
  result.manifest.finalized = true;
  return result;
}

// ---------------------------------------------------------------------------

std::string normalize_recipe_name(std::string_view name) {
  std::string out = to_lower(trim(name));
  for (char& c : out)
    if (c == '+' || c == '-' || c == ' ') c = '_';
  return out;
}

namespace {

using style::CommentUsage;
using style::Generality;
using style::Naming;
using style::StyleTarget;

Component whole(std::string_view dataset, corpus::RationaleKind kind) {
  Component c;
  c.dataset = std::string(dataset);
  c.filter.rationale_kind = kind;
  return c;
}

Component variants(StyleTarget target) {
  Component c;
  c.dataset = std::string(kStyleVariants);
  c.filter.rationale_kind = corpus::RationaleKind::code;
  c.filter.target = target;
  c.filter.verified_only = true;
  return c;
}

struct RecipeDef {
  std::string name;
  std::vector<Component> components;
  bool paired_ids = false;
};

const std::vector<RecipeDef>& registry() {
  using corpus::RationaleKind;
  static const std::vector<RecipeDef> kRecipes = [] {
    const Component mt = whole(kMathText, RationaleKind::text);
    const Component mc = whole(kMathCode, RationaleKind::code);
    const Component gc = whole(kGeneralCode, RationaleKind::code);
    const Component concise = variants(CommentUsage::concise);
    const Component descriptive = variants(Naming::descriptive);
    const Component hardcoded = variants(Generality::hardcoded);
    std::vector<RecipeDef> r;
    r.push_back({"mt", {mt}});
    r.push_back({"mc", {mc}});
    r.push_back({"gc", {gc}});
    r.push_back({"mc_gc", {mc, gc}});
    r.push_back({"mt_mc", {mt, mc}, true});
    r.push_back({"concise", {concise}});
    r.push_back({"concise_descriptive", {concise, descriptive}});
    r.push_back({"coinmath", {concise, descriptive, hardcoded}});
    r.push_back({"coinmath_orig", {mc, concise, descriptive, hardcoded}});
    r.push_back({"no_obscure_general",
                 {variants(CommentUsage::no_comment), variants(Naming::obscure), variants(Generality::generalized)}});
    r.push_back({"all_styles",
                 {variants(CommentUsage::no_comment), concise, variants(CommentUsage::detailed), descriptive,
                  variants(Naming::obscure), hardcoded, variants(Generality::generalized)}});
    return r;
  }();
  return kRecipes;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> kAliases = {
      {"concise_descriptive_hardcoded", "coinmath"},
      {"no_comment_obscure_generalized", "no_obscure_general"},
      {"all", "all_styles"},
  };
  return kAliases;
}

}  // namespace

const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> out;
    for (const auto& r : registry()) out.push_back(r.name);
    return out;
  }();
  return kNames;
}

MixManifest recipe(std::string_view name, std::uint64_t seed) {
  std::string key = normalize_recipe_name(name);
  if (auto a = aliases().find(key); a != aliases().end()) key = a->second;
  for (const auto& r : registry()) {
    if (r.name != key) continue;
    MixManifest m;
    m.name = r.name;
    m.recipe_id = r.name;
    m.components = r.components;
    m.seed = seed;
    m.paired_ids = r.paired_ids;
    return m;
  }
  std::string known;
  for (const auto& n : recipe_names()) known += (known.empty() ? "" : ", ") + n;
  throw UsageError("unknown recipe '" + std::string(name) + "' (known: " + known + ")");
}

std::string export_training_config(const MixManifest& manifest, const std::filesystem::path& corpus_path) {
  if (!manifest.finalized) throw UsageError("manifest '" + manifest.name + "' is not finalized; run mix first");
  if (manifest.resulting_count == 0) throw DataError("manifest '" + manifest.name + "' has zero samples");
  ordered_json j;
  j["corpus_path"] = corpus_path.generic_string();
  j["corpus_checksum"] = manifest.checksum;
  j["sample_count"] = manifest.resulting_count;
  j["mix"] = manifest.name;
  j["recipe_id"] = manifest.recipe_id ? ordered_json(*manifest.recipe_id) : ordered_json(nullptr);
  j["seed"] = manifest.seed;
  j["finetuning"] = {{"method", "lora"}, {"lora_rank", kLoraRank}, {"total_batch_size", kTotalBatchSize}};
  return j.dump(2) + "\n";
}

}  // namespace coinmath::mixer
