#include "triage/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "triage/cascade.hpp"
#include "triage/corpus.hpp"
#include "triage/evaluation.hpp"
#include "triage/fs_util.hpp"
#include "triage/outcomes.hpp"
#include "triage/sampler.hpp"
#include "triage/sectioner.hpp"

namespace triage {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// Used when no --config is given: two native baselines per tier.
constexpr std::string_view kDefaultConfig = R"({
  "tiers": {
    "t1": {"members": [{"backend_id": "baseline_a", "variant": "A_synoptic_first"},
                       {"backend_id": "baseline_b", "variant": "B_diagnosis_first"}]},
    "t2": {"members": [{"backend_id": "baseline_a", "variant": "A_synoptic_first"},
                       {"backend_id": "baseline_b", "variant": "B_diagnosis_first"}]}
  }
})";

struct Globals {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool strict = false;
};

class Session {
 public:
  Session(const Globals& g, std::ostream& out, std::ostream& err, const EnvLookup& env)
      : g_(g), out_(out), err_(err), env_(env) {}

  const RunConfig& config() {
    if (!config_) {
      config_ = g_.config.empty() ? parse_run_config(kDefaultConfig, fs::current_path(), env_)
                                  : load_run_config(g_.config, env_);
      if (!g_.out_dir.empty()) config_->out_dir = g_.out_dir;
    }
    return *config_;
  }

  fs::path out_dir() {
    if (!g_.out_dir.empty()) return g_.out_dir;
    if (!g_.config.empty()) return config().out_dir;
    return ".";
  }

  const SectionSynonymTable& sections() {
    if (!sections_) {
      const auto& c = config();
      if (c.synonyms_file) {
        SectionSynonymTable table = SectionSynonymTable::defaults();
        for (const auto& [key, name] : SectionSynonymTable::load(*c.synonyms_file).entries()) table.add(key, name);
        sections_ = std::move(table);
      }
    }
    return sections_ ? *sections_ : SectionSynonymTable::builtin();
  }

  LoadOptions load_options() const {
    LoadOptions o;
    o.strict = g_.strict;
    o.warn = [this](const std::string& msg) { err_ << "warning: " << msg << '\n'; };
    return o;
  }

  Corpus load(const fs::path& path) const {
    if (!fs::exists(path)) throw ValidationError(fmt::format("corpus file '{}' does not exist", path.string()));
    return load_corpus(path, load_options());
  }

  const Globals& globals() const { return g_; }
  std::ostream& out() { return out_; }

 private:
  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
  const EnvLookup& env_;
  std::optional<RunConfig> config_;
  std::optional<SectionSynonymTable> sections_;
};

Tier require_tier(const std::string& text) {
  const auto t = parse_tier(text);
  if (!t) throw ValidationError(fmt::format("unknown tier '{}' (expected t1 or t2)", text));
  return *t;
}

ordered_json counts_json(const ClassCounts& c) {
  ordered_json j;
  j[std::string(label_name(c.task, true))] = c.positive;
  j[std::string(label_name(c.task, false))] = c.negative;
  j["total"] = c.positive + c.negative;
  return j;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::int64_t n = 0;
  double cancer_frac = 0.21;
  double reportable_frac = 0.8;
  double signal = 1.0;
  std::string out;
};

void cmd_synth(Session& s, const SynthArgs& a) {
  SynthSpec spec;
  spec.n_reports = a.n;
  spec.cancer_fraction = a.cancer_frac;
  spec.reportable_fraction_within_cancer = a.reportable_frac;
  spec.vocabulary_signal_strength = a.signal;
  if (!s.globals().seed && a.n > 0) throw ValidationError("synth needs --seed");
  const Corpus corpus = synth_corpus(spec, s.globals().seed.value_or(0));
  const fs::path out = a.out.empty() ? s.out_dir() / "corpus.jsonl" : fs::path(a.out);
  write_corpus(corpus, out);

  const ClassCounts t1 = class_counts(corpus, Tier::kT1);
  const ClassCounts t2 = class_counts(corpus, Tier::kT2);
  s.out() << fmt::format("wrote {} records to {} (cancer={} non_cancer={} reportable={} non_reportable={})\n",
                         corpus.records.size(), out.string(), t1.positive, t1.negative, t2.positive, t2.negative);
}

// ---------------------------------------------------------------------------

struct BuildArgs {
  std::string tier;
  std::string corpus;
};

void cmd_build_dataset(Session& s, const BuildArgs& a) {
  const RunConfig& c = s.config();
  const Tier tier = require_tier(a.tier);
  fs::path corpus_path;
  if (!a.corpus.empty()) {
    corpus_path = a.corpus;
  } else if (c.corpus) {
    corpus_path = *c.corpus;
  } else {
    throw ValidationError("build-dataset needs --corpus or a 'corpus' entry in the config");
  }
  const Corpus corpus = s.load(corpus_path);

  const auto& us = tier == Tier::kT1 ? c.undersample_t1 : c.undersample_t2;
  const auto global_seed = s.globals().seed;
  const std::optional<std::uint64_t> split_seed = global_seed ? global_seed : c.split_seed;
  const std::optional<std::uint64_t> sample_seed = global_seed ? std::optional(*global_seed + 1) : us.seed;
  if (!split_seed || !sample_seed) {
    throw ValidationError("build-dataset needs --seed or split/undersample seeds in the config");
  }

  const SplitSpec split_spec{c.train_fraction, *split_seed, c.stratified};
  UndersamplePolicy policy = tier == Tier::kT1 ? UndersamplePolicy::t1_default(*sample_seed)
                                               : UndersamplePolicy::t2_default(*sample_seed);
  policy.ratio = us.ratio;

  const DatasetBuild b = build_dataset(corpus, tier, split_spec, policy);
  const fs::path dir = s.out_dir();
  const std::string t = std::string(to_string(tier));
  write_corpus(b.train, dir / (t + "_train.jsonl"));
  write_corpus(b.test, dir / (t + "_test.jsonl"));

  ordered_json m;
  m["tier"] = t;
  m["corpus"] = corpus_path.filename().string();
  m["split"] = {{"train_fraction", split_spec.train_fraction},
                {"stratified", split_spec.stratified},
                {"seed", split_spec.seed}};
  m["undersample"] = {{"kept_class", std::string(label_name(tier, policy.kept_positive))},
                      {"sampled_class", std::string(label_name(tier, !policy.kept_positive))},
                      {"ratio", policy.ratio},
                      {"seed", policy.seed},
                      {"replacement", false}};
  m["counts"] = {{"input", corpus.records.size()},
                 {"excluded", b.excluded},
                 {"eligible", counts_json(b.eligible)},
                 {"train_before", counts_json(b.train_before)},
                 {"train_after", counts_json(b.train_after)},
                 {"test", counts_json(b.test_counts)}};
  write_file_atomic(dir / (t + "_manifest.json"), m.dump(2) + "\n");

  s.out() << fmt::format("{}: train {} -> {} records ({}={} {}={}), test {} records\n", t,
                         b.train_before.positive + b.train_before.negative, b.train.records.size(),
                         label_name(tier, true), b.train_after.positive, label_name(tier, false),
                         b.train_after.negative, b.test.records.size());
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string tier;
  std::string variant;
  std::string train;
  std::string model_out;
};

void cmd_train_baseline(Session& s, const TrainArgs& a) {
  const RunConfig& c = s.config();
  const Tier tier = require_tier(a.tier);
  const auto variant = parse_variant(a.variant);
  if (!variant) throw ValidationError(fmt::format("unknown pipeline variant '{}'", a.variant));
  const MemberConfig& member = c.member(tier, *variant);
  if (member.descriptor.kind != BackendKind::kNativeBaseline) {
    throw ValidationError(fmt::format("backend '{}' is not a native baseline", member.descriptor.backend_id));
  }

  const fs::path train_path =
      a.train.empty() ? s.out_dir() / fmt::format("{}_train.jsonl", to_string(tier)) : fs::path(a.train);
  if (!fs::exists(train_path)) throw ValidationError(fmt::format("missing dataset file '{}'", train_path.string()));
  const Corpus train = s.load(train_path);

  const auto seed = s.globals().seed ? s.globals().seed : c.baseline_seed;
  if (!seed) throw ValidationError("train-baseline needs --seed or baseline.seed in the config");

  std::vector<TrainingExample> examples;
  for (const auto& rec : train.records) {
    const auto g = rec.gold(tier);
    if (!g) continue;
    examples.push_back({assemble_input(rec.report, member.pipeline, s.sections()), *g});
  }
  const BaselineModel model = train_baseline(examples, c.baseline, *seed);
  const fs::path model_path = a.model_out.empty() ? c.model_path(member) : fs::path(a.model_out);
  save_model(model, model_path);

  s.out() << fmt::format("{} {}: {} examples, final loss {:.6f}, seed {}, training accuracy {:.4f}, model {}\n",
                         to_string(tier), member.descriptor.backend_id, examples.size(),
                         model.meta.loss_history.empty() ? 0.0 : model.meta.loss_history.back(), *seed,
                         training_accuracy(model, examples, member.threshold), model_path.string());
}

// ---------------------------------------------------------------------------

struct TriageArgs {
  std::string corpus;
  std::string out;
  std::string gating = "predicted";
};

void cmd_triage(Session& s, const TriageArgs& a) {
  const RunConfig& c = s.config();
  const auto gating = parse_gating(a.gating);
  if (!gating) throw ValidationError(fmt::format("unknown gating mode '{}'", a.gating));
  fs::path corpus_path;
  if (!a.corpus.empty()) {
    corpus_path = a.corpus;
  } else if (c.corpus) {
    corpus_path = *c.corpus;
  } else {
    throw ValidationError("triage needs --corpus or a 'corpus' entry in the config");
  }
  const Corpus corpus = s.load(corpus_path);
  const fs::path out = a.out.empty() ? s.out_dir() / "outcomes.jsonl" : fs::path(a.out);

  std::vector<TriageOutcome> outcomes;
  if (!corpus.records.empty()) {
    const TierConfig t1 = make_tier_config(c, Tier::kT1);
    const TierConfig t2 = make_tier_config(c, Tier::kT2);
    CascadeOptions options;
    options.batch_size = c.batch_size;
    options.workers = c.workers;
    options.sections = &s.sections();
    if (*gating == T2Gating::kPredicted) {
      std::vector<PathologyReport> reports;
      reports.reserve(corpus.records.size());
      for (const auto& rec : corpus.records) reports.push_back(rec.report);
      outcomes = triage(reports, t1, t2, options);
    } else {
      outcomes = triage_gold_gated(corpus.records, t1, t2, options);
    }
  }
  write_file_atomic(out, serialize_outcomes(outcomes));

  std::map<FinalLabel, std::size_t> by_label;
  std::size_t with_t2 = 0;
  for (const auto& o : outcomes) {
    ++by_label[o.final_label];
    with_t2 += o.t2.has_value();
  }
  s.out() << fmt::format("triaged {} reports ({} gating): non_cancer={} cancer_non_reportable={} "
                         "cancer_reportable={}; t2 runs={}; wrote {}\n",
                         outcomes.size(), to_string(*gating), by_label[FinalLabel::kNonCancer],
                         by_label[FinalLabel::kCancerNonReportable], by_label[FinalLabel::kCancerReportable], with_t2,
                         out.string());
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string outcomes;
  std::string gold;
  std::string tier;
  std::string gating;
};

void cmd_evaluate(Session& s, const EvalArgs& a) {
  const Tier tier = require_tier(a.tier);
  const auto outcomes = load_outcomes(a.outcomes);
  const Corpus gold = s.load(a.gold);

  T2Gating gating = T2Gating::kPredicted;
  if (!a.gating.empty()) {
    const auto g = parse_gating(a.gating);
    if (!g) throw ValidationError(fmt::format("unknown gating mode '{}'", a.gating));
    gating = *g;
  } else if (!outcomes.empty()) {
    gating = outcomes.front().gating;
  }

  const EvalTable table = evaluate_outcomes(outcomes, gold, tier, gating);
  const std::string rendered = render_table(table);
  const fs::path dir = s.out_dir();
  const std::string t = std::string(to_string(tier));
  write_file_atomic(dir / (t + "_eval.json"), to_json(table).dump(2) + "\n");
  write_file_atomic(dir / (t + "_eval.txt"), rendered);
  s.out() << rendered;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Two-tier pathology report triage: corpus synthesis, dataset building, training, triage, evaluation",
               "triage"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for every random choice");
  app.add_flag("--strict", g.strict, "Reject unknown corpus fields");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic labelled corpus");
  c_synth->add_option("--n", synth.n, "Number of reports")->check(CLI::NonNegativeNumber);
  c_synth->add_option("--cancer-frac", synth.cancer_frac, "Fraction of cancer reports")->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--reportable-frac", synth.reportable_frac, "Fraction of cancers that are reportable")
      ->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--signal", synth.signal, "Vocabulary signal strength")->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--out", synth.out, "Output corpus (default <out-dir>/corpus.jsonl)");

  BuildArgs build;
  auto* c_build = app.add_subcommand("build-dataset", "Split and undersample a corpus for one tier");
  c_build->add_option("--tier", build.tier, "t1 or t2")->required();
  c_build->add_option("--corpus", build.corpus, "Labelled corpus (default from config)");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train-baseline", "Train the native baseline for one tier member");
  c_train->add_option("--tier", train.tier, "t1 or t2")->required();
  c_train->add_option("--variant", train.variant, "A_synoptic_first or B_diagnosis_first")->required();
  c_train->add_option("--train", train.train, "Training corpus (default <out-dir>/<tier>_train.jsonl)");
  c_train->add_option("--model-out", train.model_out, "Model file (default from config)");

  TriageArgs tri;
  auto* c_triage = app.add_subcommand("triage", "Run the two-tier cascade over a corpus");
  c_triage->add_option("--corpus", tri.corpus, "Input corpus (default from config)");
  c_triage->add_option("--out", tri.out, "Outcomes file (default <out-dir>/outcomes.jsonl)");
  c_triage->add_option("--t2-gating", tri.gating, "predicted or gold")->capture_default_str();

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score outcomes against a gold corpus");
  c_eval->add_option("--outcomes", ev.outcomes, "Outcomes file")->required();
  c_eval->add_option("--gold", ev.gold, "Gold corpus")->required();
  c_eval->add_option("--tier", ev.tier, "t1 or t2")->required();
  c_eval->add_option("--gating", ev.gating, "predicted or gold (default: as recorded in outcomes)");

  for (auto* sub : {c_synth, c_build, c_train, c_triage, c_eval}) sub->fallthrough();

  std::vector<const char*> argv{"triage"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; anything else is a usage error.
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kValidation);
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  Session session(g, out, err, env);
  try {
    if (c_synth->parsed()) cmd_synth(session, synth);
    if (c_build->parsed()) cmd_build_dataset(session, build);
    if (c_train->parsed()) cmd_train_baseline(session, train);
    if (c_triage->parsed()) cmd_triage(session, tri);
    if (c_eval->parsed()) cmd_evaluate(session, ev);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kRuntime);
  }
  return 0;
}

}  // namespace triage
