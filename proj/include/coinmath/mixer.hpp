#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "coinmath/corpus.hpp"
#include "json.hpp"

namespace coinmath::mixer {

inline constexpr std::uint64_t kDefaultSeed = 20240801;
inline constexpr int kLoraRank = 64;
inline constexpr int kTotalBatchSize = 128;

// Dataset references a manifest may name.
inline constexpr std::string_view kMathText = "math_text";
inline constexpr std::string_view kMathCode = "math_code";
inline constexpr std::string_view kGeneralCode = "general_code";
inline constexpr std::string_view kStyleVariants = "style_variants";

struct ComponentFilter {
  std::optional<corpus::RationaleKind> rationale_kind;
  std::optional<style::StyleTarget> target;
  bool verified_only = false;

  bool accepts(const corpus::InstructionSample& s) const;
  friend bool operator==(const ComponentFilter&, const ComponentFilter&) = default;
};

struct Component {
  std::string dataset;
  ComponentFilter filter;
  std::optional<std::size_t> take;  // first N after filtering; all when absent

  friend bool operator==(const Component&, const Component&) = default;
};

struct MixManifest {
  std::string name;
  std::vector<Component> components;
  std::uint64_t seed = kDefaultSeed;
  std::size_t resulting_count = 0;
  std::optional<std::string> recipe_id;
  // Set by mix(): checksum of the emitted corpus.
  std::string checksum;
  bool finalized = false;
  // Component datasets whose question ids must coincide.
  bool paired_ids = false;
};

nlohmann::ordered_json to_json(const MixManifest& m);
MixManifest manifest_from_json(const nlohmann::json& j);
MixManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const MixManifest& m);

using DatasetMap = std::map<std::string, std::vector<corpus::InstructionSample>, std::less<>>;

struct MixResult {
  std::vector<corpus::InstructionSample> corpus;
  MixManifest manifest;  // finalized
  std::size_t duplicates_dropped = 0;
};

// Filter, take, concatenate in declaration order, prefix ids with the dataset
// reference, drop cross-component duplicates (first copy wins), then shuffle
// with the manifest seed. Throws DataError on an unknown reference, a failed
// pairing check, or an empty result.
MixResult mix(const MixManifest& manifest, const DatasetMap& datasets);

// Uniform in [0, bound) from raw 64-bit draws; identical on every platform.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

// Lowercased, '+' and '-' folded to '_'.
std::string normalize_recipe_name(std::string_view name);
const std::vector<std::string>& recipe_names();
// Throws UsageError for names outside the registry.
MixManifest recipe(std::string_view name, std::uint64_t seed = kDefaultSeed);

// Declarative tuning configuration for an external trainer. Throws UsageError
// for an unfinalized manifest and DataError for an empty one.
std::string export_training_config(const MixManifest& manifest, const std::filesystem::path& corpus_path);

}  // namespace coinmath::mixer
