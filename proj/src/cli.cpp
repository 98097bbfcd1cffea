#include "coinmath/cli.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "coinmath/client.hpp"
#include "coinmath/corpus.hpp"
#include "coinmath/grader.hpp"
#include "coinmath/harness.hpp"
#include "coinmath/mixer.hpp"
#include "coinmath/report.hpp"
#include "coinmath/sandbox.hpp"
#include "coinmath/style.hpp"
#include "coinmath/transform.hpp"
#include "coinmath/util.hpp"

namespace coinmath::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string config_file;
  bool dry_run = false;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  std::string input;
  std::string target;
  std::string replay;
  std::string stub_exec;
  bool no_cache = false;
  std::size_t limit = 0;

  std::string recipe;
  std::string manifest;
  std::vector<std::string> data;

  std::string mode = "hybrid";
  int shots = 0;
  std::vector<std::string> datasets;
  std::string exemplars;
  bool strict_style = false;
  std::vector<std::string> expected_style;
  std::string model_label;

  std::string candidate;
  std::string gold;
  std::string grade_mode = "raw";
  std::optional<double> rel_tol;

  std::string layout = "final_table";
  std::string rows;
};

struct Run {
  std::string subcommand;
  std::vector<std::string> argv;
  config::ToolConfig cfg;
  fs::path out_dir;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  ordered_json extra = ordered_json::object();
  bool partial = false;
};

std::string file_sha(const fs::path& p) { return sha256_hex(read_file(p)); }

void emit(Run& run, const fs::path& path, std::string_view bytes) {
  write_file_atomic(path, bytes);
  run.outputs.push_back(path);
}

void write_provenance(Run& run) {
  ordered_json j;
  j["tool"] = "coinmath";
  j["version"] = kToolVersion;
  j["subcommand"] = run.subcommand;
  j["argv"] = run.argv;
  j["config_hash"] = run.cfg.hash();
  j["config"] = run.cfg.to_json();
  j["seed"] = run.cfg.seed;
  ordered_json in = ordered_json::array();
  for (const auto& p : run.inputs) in.push_back({{"path", p.generic_string()}, {"sha256", file_sha(p)}});
  j["inputs"] = std::move(in);
  ordered_json outj = ordered_json::array();
  for (const auto& p : run.outputs) outj.push_back({{"path", p.generic_string()}, {"sha256", file_sha(p)}});
  j["outputs"] = std::move(outj);
  j["partial"] = run.partial;
  j["details"] = run.extra;
  write_file_atomic(run.out_dir / "provenance.json", j.dump(2) + "\n");
}

// ---- client and executor wiring ------------------------------------------

struct ClientStack {
  std::unique_ptr<client::ModelClient> inner;
  std::unique_ptr<client::ResponseCache> cache;
  std::unique_ptr<client::CachingClient> caching;
  client::ModelClient& get() { return caching ? static_cast<client::ModelClient&>(*caching) : *inner; }
};

ClientStack make_client(const Options& o, const config::ToolConfig& cfg, const config::EnvLookup& env, Run& run) {
  ClientStack s;
  if (!o.replay.empty()) {
    s.inner = std::make_unique<client::ReplayClient>(client::ReplayClient::load(o.replay));
    run.inputs.push_back(o.replay);
  } else {
    if (cfg.endpoint.empty() || cfg.model.empty())
      throw UsageError("no model configured: pass --replay FILE or set endpoint and model");
    auto key = env(cfg.credential_env.c_str());
    if (!key) throw ProviderError("credential variable " + cfg.credential_env + " is not set");
    client::HttpClientConfig hc;
    hc.endpoint = cfg.endpoint;
    hc.model = cfg.model;
    hc.api_key = *key;
    hc.max_in_flight = static_cast<int>(cfg.client_width);
    s.inner = std::make_unique<client::HttpClient>(hc);
  }
  // Recorded responses are already a cache.
  if (!o.no_cache && o.replay.empty()) {
    s.cache = std::make_unique<client::ResponseCache>(cfg.cache_dir);
    s.caching = std::make_unique<client::CachingClient>(*s.inner, *s.cache);
  }
  return s;
}

std::unique_ptr<sandbox::Executor> make_executor(const Options& o, const config::ToolConfig& cfg, Run& run) {
  if (!o.stub_exec.empty()) {
    auto stub = std::make_unique<sandbox::StubExecutor>();
    stub->load(o.stub_exec);
    run.inputs.push_back(o.stub_exec);
    return stub;
  }
  if (cfg.driver_command.empty())
    throw UsageError("no executor: pass --stub-exec FILE or configure driver_command");
  sandbox::SubprocessConfig sc;
  sc.driver_command = cfg.driver_command;
  sc.grace_ms = cfg.grace_ms;
  return std::make_unique<sandbox::SubprocessExecutor>(sc);
}

std::pair<std::string, std::string> split_binding(const std::string& s, const char* flag) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
    throw UsageError(std::string(flag) + " expects NAME=PATH, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

transform::TransformOptions transform_options(const config::ToolConfig& cfg) {
  transform::TransformOptions t;
  t.max_retries = cfg.max_retries;
  t.timeout_ms = cfg.timeout_ms;
  t.memory_limit_bytes = cfg.memory_limit_bytes;
  return t;
}

std::vector<corpus::InstructionSample> load_samples(const Options& o, Run& run) {
  auto ds = corpus::load_instruction_dataset(o.input);
  run.inputs.push_back(o.input);
  auto samples = std::move(ds.samples);
  if (o.limit && samples.size() > o.limit) samples.resize(o.limit);
  return samples;
}

std::string records_jsonl(const std::vector<transform::TransformRecord>& records) {
  std::string out;
  for (const auto& r : records) out += transform::to_json(r).dump() + "\n";
  return out;
}

// ---- subcommands ---------------------------------------------------------

void cmd_audit(const Options& o, Run& run, std::ostream& out) {
  run.inputs.push_back(o.input);
  if (fs::path(o.input).extension() == ".py") {
    auto report = style::audit(read_file(o.input), run.cfg.thresholds);
    out << style::to_json(report).dump(2) << "\n";
    if (!run.out_dir.empty()) emit(run, run.out_dir / "audit.json", style::to_json(report).dump(2) + "\n");
    return;
  }
  auto ds = corpus::load_instruction_dataset(o.input);
  std::map<std::string, std::size_t> histogram;
  for (const char* k : {"comment_usage:no_comment", "comment_usage:concise", "comment_usage:detailed",
                        "naming:descriptive", "naming:obscure", "generality:hardcoded", "generality:generalized"})
    histogram[k] = 0;
  std::size_t audited = 0, skipped = 0, degraded = 0;
  std::string lines;
  for (const auto& s : ds.samples) {
    if (s.rationale_kind != corpus::RationaleKind::code) {
      ++skipped;
      continue;
    }
    auto r = style::audit(s.rationale, run.cfg.thresholds);
    ++audited;
    if (r.parse_degraded) ++degraded;
    histogram["comment_usage:" + style::to_string(r.profile.comment_usage)]++;
    histogram["naming:" + style::to_string(r.profile.naming)]++;
    histogram["generality:" + style::to_string(r.profile.generality)]++;
    ordered_json j;
    j["id"] = s.id;
    j["audit"] = style::to_json(r);
    lines += j.dump() + "\n";
  }
  ordered_json h;
  h["dataset"] = ds.manifest.name;
  h["samples"] = ds.samples.size();
  h["audited"] = audited;
  h["skipped_text"] = skipped;
  h["parse_degraded"] = degraded;
  h["histogram"] = histogram;
  emit(run, run.out_dir / "audit.jsonl", lines);
  emit(run, run.out_dir / "histogram.json", h.dump(2) + "\n");
  out << h.dump(2) << "\n";
}

void cmd_transform(const Options& o, Run& run, std::ostream& out, const config::EnvLookup& env, bool ensemble) {
  auto samples = load_samples(o, run);
  std::optional<style::StyleTarget> target;
  if (!ensemble) target = style::StyleTarget::parse(o.target);
  auto templates = transform::TemplateSet::load(run.cfg.template_dir);
  if (o.dry_run) {
    std::size_t code = 0;
    for (const auto& s : samples) code += s.rationale_kind == corpus::RationaleKind::code;
    out << "plan: " << (ensemble ? "ensemble" : "transform " + target->to_string()) << " over " << code
        << " code samples (" << samples.size() - code << " text samples skipped), up to "
        << run.cfg.max_retries << " attempts each; no provider calls made\n";
    return;
  }
  auto client = make_client(o, run.cfg, env, run);
  auto executor = make_executor(o, run.cfg, run);
  grader::Grader grader(run.cfg.rel_tol);
  auto options = transform_options(run.cfg);

  std::vector<corpus::InstructionSample> code_samples;
  for (auto& s : samples)
    if (s.rationale_kind == corpus::RationaleKind::code) code_samples.push_back(std::move(s));

  if (ensemble) {
    auto result = transform::ensemble_corpus(code_samples, client.get(), *executor, grader, templates, options,
                                             run.cfg.client_width);
    run.partial = result.parents < code_samples.size();
    emit(run, run.out_dir / "variants.jsonl", corpus::serialize_all(result.variants));
    emit(run, run.out_dir / "records.jsonl", records_jsonl(result.records));
    run.extra["parents"] = result.parents;
    run.extra["variants"] = result.variants.size();
    run.extra["excluded"] = result.excluded;
    run.extra["style_drift"] = result.drifted;
    run.extra["partial_parents"] = result.partial_parents;
    out << "ensemble: " << result.variants.size() << " verified variants from " << result.parents
        << " parents, " << result.excluded << " excluded, " << result.drifted << " with style drift\n";
    return;
  }

  std::vector<std::optional<transform::TransformRecord>> records(code_samples.size());
  const std::size_t ran = parallel_for(code_samples.size(), run.cfg.client_width, [&](std::size_t i) {
    records[i] = transform::transform(code_samples[i], *target, client.get(), *executor, grader, templates, options);
  });
  run.partial = ran < code_samples.size();
  std::vector<corpus::InstructionSample> verified;
  std::vector<transform::TransformRecord> kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i]) continue;
    if (records[i]->verified) verified.push_back(transform::make_variant(code_samples[i], *records[i]));
    kept.push_back(std::move(*records[i]));
  }
  emit(run, run.out_dir / "transformed.jsonl", corpus::serialize_all(verified));
  emit(run, run.out_dir / "records.jsonl", records_jsonl(kept));
  run.extra["target"] = target->to_string();
  run.extra["verified"] = verified.size();
  run.extra["attempted"] = kept.size();
  out << "transform " << target->to_string() << ": " << verified.size() << "/" << kept.size() << " verified\n";
}

void cmd_mix(const Options& o, Run& run, std::ostream& out) {
  if (o.recipe.empty() == o.manifest.empty()) throw UsageError("mix needs exactly one of --recipe or --manifest");
  mixer::MixManifest manifest;
  if (!o.recipe.empty()) {
    manifest = mixer::recipe(o.recipe, run.cfg.seed);
  } else {
    manifest = mixer::load_manifest(o.manifest);
    run.inputs.push_back(o.manifest);
    if (o.seed) manifest.seed = *o.seed;
  }
  run.cfg.seed = manifest.seed;
  std::map<std::string, std::string> bindings;
  for (const auto& d : o.data) bindings.insert(split_binding(d, "--data"));
  if (o.dry_run) {
    out << mixer::to_json(manifest).dump(2) << "\n";
    for (const auto& c : manifest.components)
      out << "component " << c.dataset << " <- "
          << (bindings.count(c.dataset) ? bindings[c.dataset] : std::string("(unbound)")) << "\n";
    return;
  }
  mixer::DatasetMap datasets;
  for (const auto& [name, path] : bindings) {
    datasets[name] = corpus::load_instruction_dataset(path).samples;
    run.inputs.push_back(path);
  }
  auto result = mixer::mix(manifest, datasets);
  const fs::path corpus_path = run.out_dir / "corpus.jsonl";
  emit(run, corpus_path, corpus::serialize_all(result.corpus));
  emit(run, run.out_dir / "mix_manifest.json", mixer::to_json(result.manifest).dump(2) + "\n");
  emit(run, run.out_dir / "training_config.json", mixer::export_training_config(result.manifest, corpus_path));
  run.extra["resulting_count"] = result.manifest.resulting_count;
  run.extra["duplicates_dropped"] = result.duplicates_dropped;
  out << "mix " << result.manifest.name << ": " << result.manifest.resulting_count << " samples ("
      << result.duplicates_dropped << " duplicates dropped), checksum " << result.manifest.checksum << "\n";
}

void cmd_eval(const Options& o, Run& run, std::ostream& out, const config::EnvLookup& env) {
  harness::EvalConfig ec;
  ec.mode = harness::parse_mode(o.mode);
  ec.shots = o.shots;
  ec.width = run.cfg.client_width;
  ec.timeout_ms = run.cfg.timeout_ms;
  ec.memory_limit_bytes = run.cfg.memory_limit_bytes;
  ec.strict_style = o.strict_style;
  ec.thresholds = run.cfg.thresholds;
  for (const auto& t : o.expected_style) ec.expected_style.push_back(style::StyleTarget::parse(t));
  if (ec.shots > 0) {
    const fs::path p = o.exemplars.empty() ? run.cfg.exemplar_path : fs::path(o.exemplars);
    ec.exemplars = harness::ExemplarSet::load(p);
    run.inputs.push_back(p);
  }
  if (o.datasets.empty()) throw UsageError("eval needs at least one --dataset TAG=PATH");
  std::vector<corpus::EvalDataset> datasets;
  for (const auto& d : o.datasets) {
    auto [tag, path] = split_binding(d, "--dataset");
    datasets.push_back(corpus::load_eval_dataset(path, corpus::parse_dataset_tag(tag)));
    run.inputs.push_back(path);
  }
  if (o.dry_run) {
    if (ec.strict_style && ec.shots > 0) harness::check_exemplar_style(ec);
    std::size_t items = 0;
    for (const auto& d : datasets) items += d.items.size();
    out << "plan: " << harness::to_string(ec.mode) << " " << ec.shots << "-shot over " << datasets.size()
        << " datasets, " << items << " items; no provider calls made\n";
    return;
  }
  auto client = make_client(o, run.cfg, env, run);
  std::unique_ptr<sandbox::Executor> executor;
  sandbox::StubExecutor unused;
  if (ec.mode != harness::Mode::cot) executor = make_executor(o, run.cfg, run);
  grader::Grader grader(run.cfg.rel_tol);
  auto report = harness::run_eval(ec, datasets, client.get(), executor ? *executor : unused, grader);
  run.partial = report.partial;

  emit(run, run.out_dir / "report.json", harness::to_json(report).dump(2) + "\n");
  emit(run, run.out_dir / "traces.jsonl", harness::traces_jsonl(report));
  const std::string model = o.model_label.empty() ? report.model.to_string() : o.model_label;
  auto row = report::row_from_report(report, model);
  auto rendered = report::emit_report({row}, report::Layout::final_table);
  emit(run, run.out_dir / "report.md", rendered.markdown);
  emit(run, run.out_dir / "report.csv", rendered.csv);
  out << rendered.markdown;
  if (report.partial) out << "(partial: interrupted before every item ran)\n";
}

void cmd_grade(const Options& o, std::ostream& out) {
  grader::Grader grader(o.rel_tol.value_or(grader::kDefaultRelTol));
  std::optional<std::string> candidate = o.candidate;
  if (o.grade_mode == "cot") candidate = grader.extract(o.candidate, grader::ExtractMode::cot);
  else if (o.grade_mode != "raw") throw UsageError("--extract must be raw or cot");
  ordered_json j;
  j["candidate"] = candidate ? ordered_json(*candidate) : ordered_json(nullptr);
  j["gold"] = o.gold;
  if (candidate) j["candidate_normalized"] = grader::normalize(*candidate).render();
  j["gold_normalized"] = grader::normalize(o.gold).render();
  j["equivalent"] = candidate && grader.grade(*candidate, o.gold);
  out << j.dump(2) << "\n";
}

report::Row row_from_spec(const json& spec, Run& run) {
  report::Row row;
  if (spec.contains("report")) {
    const fs::path p = spec["report"].get<std::string>();
    run.inputs.push_back(p);
    json r = json::parse(read_file(p));
    harness::EvalReport er;
    er.config = r.at("config");
    er.model.provider = r.value("model", std::string{});
    for (const auto& d : r.at("datasets")) {
      harness::DatasetResult dr;
      dr.dataset = corpus::parse_dataset_tag(d.at("dataset").get<std::string>());
      dr.accuracy = d.at("accuracy").get<double>();
      er.datasets.push_back(std::move(dr));
    }
    er.average_accuracy = r.at("average_accuracy").get<double>();
    if (!r["average_valid_code_rate"].is_null()) er.average_valid_code_rate = r["average_valid_code_rate"].get<double>();
    row = report::row_from_report(er, r.value("model", std::string{}));
  } else {
    const auto& scores = spec.at("scores");
    if (!scores.is_array() || scores.size() != 4) throw DataError("row 'scores' must list 4 values");
    for (std::size_t c = 0; c < 4; ++c)
      if (!scores[c].is_null()) row.scores[c] = scores[c].get<double>();
    if (spec.contains("average")) row.average = spec["average"].get<double>();
    if (spec.contains("valid_code_rate")) row.valid_code_rate = spec["valid_code_rate"].get<double>();
  }
  row.model = spec.value("model", row.model);
  row.base = spec.value("base", row.base.empty() ? std::string("-") : row.base);
  row.prompt = spec.value("prompt", row.prompt);
  row.label = spec.value("label", row.label);
  if (spec.contains("baseline")) row.baseline = spec["baseline"].get<std::size_t>();
  return row;
}

void cmd_report(const Options& o, Run& run, std::ostream& out) {
  const auto layout = report::parse_layout(o.layout);
  run.inputs.push_back(o.rows);
  std::vector<report::Row> rows;
  try {
    json spec = json::parse(read_file(o.rows));
    if (!spec.is_array()) throw DataError(o.rows + ": expected a JSON array of rows");
    for (const auto& r : spec) rows.push_back(row_from_spec(r, run));
  } catch (const json::exception& e) {
    throw DataError(o.rows + ": " + e.what());
  }
  auto rendered = report::emit_report(rows, layout);
  emit(run, run.out_dir / (report::to_string(layout) + ".md"), rendered.markdown);
  emit(run, run.out_dir / (report::to_string(layout) + ".csv"), rendered.csv);
  out << rendered.markdown;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
             const config::EnvLookup& env) {
  Options o;
  CLI::App app{"Code-rationale style auditing, rewriting, mixing and evaluation"};
  app.name("coinmath");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.add_option("--config", o.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_flag("--dry-run", o.dry_run, "Print the plan without provider calls");

  auto out_opt = [&](CLI::App* sub, const char* def) {
    sub->add_option("--out", o.out_dir, std::string("Output directory (default ") + def + ")");
  };
  auto model_opts = [&](CLI::App* sub) {
    sub->add_option("--replay", o.replay, "Recorded responses (JSONL) instead of a live endpoint");
    sub->add_option("--stub-exec", o.stub_exec, "Canned execution table (JSONL) instead of the driver");
    sub->add_flag("--no-cache", o.no_cache, "Bypass the response cache");
  };

  auto* audit = app.add_subcommand("audit", "Style audit of a corpus (.jsonl) or one program (.py)");
  audit->add_option("input", o.input)->required()->check(CLI::ExistingFile);
  out_opt(audit, "audit_out");

  auto* xform = app.add_subcommand("transform", "Rewrite code rationales toward one style target");
  xform->add_option("input", o.input)->required()->check(CLI::ExistingFile);
  xform->add_option("--target", o.target, "axis:value, e.g. comment_usage:concise")->required();
  xform->add_option("--limit", o.limit, "Only the first N samples");
  model_opts(xform);
  out_opt(xform, "transform_out");

  auto* ens = app.add_subcommand("ensemble", "Concise, descriptive and hardcoded variants per sample");
  ens->add_option("input", o.input)->required()->check(CLI::ExistingFile);
  ens->add_option("--limit", o.limit, "Only the first N samples");
  model_opts(ens);
  out_opt(ens, "ensemble_out");

  auto* mix = app.add_subcommand("mix", "Assemble a training corpus from a recipe or manifest");
  mix->add_option("--recipe", o.recipe, "Registered recipe name");
  mix->add_option("--manifest", o.manifest, "Mix manifest (JSON)")->check(CLI::ExistingFile);
  mix->add_option("--data", o.data, "Dataset binding NAME=PATH (repeatable)");
  mix->add_option("--seed", o.seed, "Shuffle seed");
  out_opt(mix, "mix_out");

  auto* eval = app.add_subcommand("eval", "Evaluate a model under PoT, CoT or hybrid prompting");
  eval->add_option("--mode", o.mode, "pot, cot or hybrid")->capture_default_str();
  eval->add_option("--shots", o.shots, "In-context exemplars per prompt")->capture_default_str();
  eval->add_option("--dataset", o.datasets, "TAG=PATH with TAG in arithmetic, svamp, gsm, math (repeatable)");
  eval->add_option("--exemplars", o.exemplars, "Exemplar set (JSON)");
  eval->add_flag("--strict-style", o.strict_style, "Reject exemplars whose style differs from --expected-style");
  eval->add_option("--expected-style", o.expected_style, "axis:value the exemplars must match (repeatable)");
  eval->add_option("--label", o.model_label, "Model name for the report row");
  model_opts(eval);
  out_opt(eval, "eval_out");

  auto* grade = app.add_subcommand("grade", "Grade one candidate answer against a gold answer");
  grade->add_option("candidate", o.candidate)->required();
  grade->add_option("gold", o.gold)->required();
  grade->add_option("--extract", o.grade_mode, "raw or cot (extract from model output first)");
  grade->add_option("--rel-tol", o.rel_tol, "Relative tolerance");

  auto* rep = app.add_subcommand("report", "Render evaluation results as comparison tables");
  rep->add_option("--layout", o.layout, "style_table, domain_table or final_table")->capture_default_str();
  rep->add_option("--rows", o.rows, "JSON array of row specs")->required()->check(CLI::ExistingFile);
  out_opt(rep, "report_out");

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  Run run;
  run.argv = args;
  run.subcommand = app.get_subcommands().front()->get_name();
  try {
    run.cfg = config::ToolConfig::load(o.config_file.empty() ? std::nullopt
                                                              : std::optional<fs::path>(o.config_file),
                                       env);
    if (o.seed) run.cfg.seed = *o.seed;
    run.cfg.validate();
    if (!o.config_file.empty()) run.inputs.push_back(o.config_file);
    run.out_dir = o.out_dir.empty() ? fs::path(run.subcommand + "_out") : fs::path(o.out_dir);

    if (run.subcommand == "audit") cmd_audit(o, run, out);
    else if (run.subcommand == "transform") cmd_transform(o, run, out, env, false);
    else if (run.subcommand == "ensemble") cmd_transform(o, run, out, env, true);
    else if (run.subcommand == "mix") cmd_mix(o, run, out);
    else if (run.subcommand == "eval") cmd_eval(o, run, out, env);
    else if (run.subcommand == "grade") cmd_grade(o, out);
    else if (run.subcommand == "report") cmd_report(o, run, out);

    if (!o.dry_run && run.subcommand != "grade" && !run.outputs.empty()) write_provenance(run);
    if (run.partial || cancellation_requested()) {
      err << "interrupted: partial artifacts in " << run.out_dir.string() << " (provenance marks partial=true)\n";
      return kExitCancelled;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (auto* rv = dynamic_cast<const corpus::RecordValidationError*>(&e))
      for (const auto& r : rv->errors) err << "  line " << r.line << " [" << r.id << "]: " << r.message << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return DataError("").exit_code();
  }
}

}  // namespace coinmath::cli
