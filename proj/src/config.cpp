#include "triage/config.hpp"

#include <cstdlib>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "triage/fs_util.hpp"

namespace triage {
namespace {

using json = nlohmann::json;

[[noreturn]] void bad(std::string_view where, std::string_view what) {
  throw ValidationError(fmt::format("config: {}: {}", where, what));
}

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) bad(where, fmt::format("unknown key '{}'", key));
  }
}

template <typename T>
std::optional<T> opt(const json& obj, const char* key, std::string_view where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    bad(where, fmt::format("'{}' has the wrong type", key));
  }
}

std::optional<std::uint64_t> opt_seed(const json& obj, std::string_view where) {
  const auto it = obj.find("seed");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0) bad(where, "'seed' must be a non-negative integer");
  return it->get<std::uint64_t>();
}

MemberConfig parse_member(const json& m, Tier task, std::string_view where) {
  check_keys(m, where,
             {"backend_id", "variant", "kind", "model", "endpoint", "threshold", "token_budget", "section_priority"});
  MemberConfig mc;
  mc.descriptor.task = task;
  mc.descriptor.backend_id = opt<std::string>(m, "backend_id", where).value_or("");
  if (mc.descriptor.backend_id.empty()) bad(where, "'backend_id' is required");

  const auto variant = parse_variant(opt<std::string>(m, "variant", where).value_or(""));
  if (!variant) bad(where, "'variant' must be A_synoptic_first or B_diagnosis_first");
  mc.descriptor.variant = *variant;
  mc.pipeline.variant = *variant;

  const auto kind = parse_backend_kind(opt<std::string>(m, "kind", where).value_or("native_baseline"));
  if (!kind) bad(where, "'kind' must be native_baseline or remote");
  mc.descriptor.kind = *kind;

  mc.threshold = opt<double>(m, "threshold", where).value_or(kDefaultThreshold);
  if (!(mc.threshold > 0.0 && mc.threshold < 1.0)) bad(where, "'threshold' must lie in (0, 1)");
  const auto budget = opt<std::int64_t>(m, "token_budget", where).value_or(kDefaultTokenBudget);
  if (budget <= 0) bad(where, "'token_budget' must be positive");
  mc.pipeline.token_budget = static_cast<std::size_t>(budget);
  mc.pipeline.section_priority = opt<std::vector<std::string>>(m, "section_priority", where).value_or(std::vector<std::string>{});
  for (const auto& name : mc.pipeline.section_priority) {
    if (!is_valid_section_name(name)) bad(where, fmt::format("invalid section name '{}'", name));
  }

  if (mc.descriptor.kind == BackendKind::kNativeBaseline) {
    mc.model = opt<std::string>(m, "model", where)
                   .value_or(fmt::format("{}_{}.model", to_string(task), mc.descriptor.backend_id));
  }
  mc.endpoint = opt<std::string>(m, "endpoint", where);
  return mc;
}

TierSettings parse_tier(const json& t, Tier task, const EnvLookup& env) {
  const std::string where = fmt::format("tiers.{}", to_string(task));
  check_keys(t, where, {"members", "remote"});
  TierSettings ts;
  ts.task = task;

  const auto members = t.find("members");
  if (members == t.end() || !members->is_array() || members->size() != 2) {
    bad(where, "'members' must list exactly two backends");
  }
  for (std::size_t i = 0; i < 2; ++i) {
    ts.members[i] = parse_member((*members)[i], task, fmt::format("{}.members[{}]", where, i));
  }
  if (ts.members[0].pipeline.variant == ts.members[1].pipeline.variant) {
    bad(where, "members must use distinct pipeline variants");
  }
  if (ts.members[0].descriptor.backend_id == ts.members[1].descriptor.backend_id) {
    bad(where, "backend ids must be unique within a tier");
  }

  if (const auto r = t.find("remote"); r != t.end()) {
    const std::string rw = where + ".remote";
    check_keys(*r, rw, {"endpoint", "timeout_ms", "retries", "batch_size", "concurrency"});
    ts.remote_endpoint = opt<std::string>(*r, "endpoint", rw);
    const auto timeout = opt<std::int64_t>(*r, "timeout_ms", rw).value_or(5000);
    const auto retries = opt<std::int64_t>(*r, "retries", rw).value_or(2);
    const auto batch = opt<std::int64_t>(*r, "batch_size", rw).value_or(32);
    const auto conc = opt<std::int64_t>(*r, "concurrency", rw).value_or(1);
    if (timeout <= 0 || retries < 0 || batch <= 0 || conc <= 0) bad(rw, "values must be positive");
    ts.remote.timeout = std::chrono::milliseconds(timeout);
    ts.remote.max_retries = static_cast<int>(retries);
    ts.remote.batch_size = static_cast<std::size_t>(batch);
    ts.remote.max_concurrency = static_cast<std::size_t>(conc);
  }
  const std::string env_name = task == Tier::kT1 ? "TRIAGE_REMOTE_ENDPOINT_T1" : "TRIAGE_REMOTE_ENDPOINT_T2";
  if (auto e = env(env_name.c_str()); e && !e->empty()) ts.remote_endpoint = std::move(e);
  return ts;
}

UndersampleSettings parse_undersample(const json& obj, std::string_view where, double default_ratio) {
  check_keys(obj, where, {"ratio", "seed"});
  UndersampleSettings s;
  s.ratio = opt<double>(obj, "ratio", where).value_or(default_ratio);
  if (!(s.ratio > 0.0)) bad(where, "'ratio' must be positive");
  s.seed = opt_seed(obj, where);
  return s;
}

}  // namespace

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v) return std::nullopt;
  return std::string(v);
}

const MemberConfig& RunConfig::member(Tier t, PipelineVariant variant) const {
  for (const auto& m : tier(t).members) {
    if (m.pipeline.variant == variant) return m;
  }
  throw ValidationError(fmt::format("no {} member uses pipeline {}", to_string(t), to_string(variant)));
}

std::filesystem::path RunConfig::model_path(const MemberConfig& m) const {
  return m.model.is_absolute() ? m.model : out_dir / m.model;
}

std::string RunConfig::endpoint_for(const TierSettings& tier, const MemberConfig& m) const {
  if (m.endpoint) return *m.endpoint;
  if (tier.remote_endpoint) return *tier.remote_endpoint;
  throw ValidationError(fmt::format("remote backend '{}' has no endpoint (set tiers.{}.remote.endpoint or {})",
                                    m.descriptor.backend_id, to_string(tier.task),
                                    tier.task == Tier::kT1 ? "TRIAGE_REMOTE_ENDPOINT_T1" : "TRIAGE_REMOTE_ENDPOINT_T2"));
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir, const EnvLookup& env) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("config: not valid JSON: {}", e.what()));
  }
  check_keys(doc, "<root>",
             {"out_dir", "corpus", "synonyms_file", "split", "undersample", "baseline", "cascade", "tiers"});

  RunConfig c;
  c.base_dir = base_dir;
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
  };
  c.out_dir = resolve(opt<std::string>(doc, "out_dir", "<root>").value_or("."));
  if (auto p = opt<std::string>(doc, "corpus", "<root>")) c.corpus = resolve(*p);
  if (auto p = opt<std::string>(doc, "synonyms_file", "<root>")) c.synonyms_file = resolve(*p);

  if (const auto s = doc.find("split"); s != doc.end()) {
    check_keys(*s, "split", {"train_fraction", "stratified", "seed"});
    c.train_fraction = opt<double>(*s, "train_fraction", "split").value_or(0.8);
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) bad("split", "'train_fraction' must lie in (0, 1)");
    c.stratified = opt<bool>(*s, "stratified", "split").value_or(true);
    c.split_seed = opt_seed(*s, "split");
  }
  if (const auto u = doc.find("undersample"); u != doc.end()) {
    check_keys(*u, "undersample", {"t1", "t2"});
    if (u->contains("t1")) c.undersample_t1 = parse_undersample((*u)["t1"], "undersample.t1", 0.8);
    if (u->contains("t2")) c.undersample_t2 = parse_undersample((*u)["t2"], "undersample.t2", 1.2);
  }
  if (const auto b = doc.find("baseline"); b != doc.end()) {
    check_keys(*b, "baseline", {"epochs", "learning_rate", "feature_dim", "l2", "seed"});
    c.baseline.epochs = opt<int>(*b, "epochs", "baseline").value_or(c.baseline.epochs);
    c.baseline.learning_rate = opt<double>(*b, "learning_rate", "baseline").value_or(c.baseline.learning_rate);
    c.baseline.feature_dim = opt<std::size_t>(*b, "feature_dim", "baseline").value_or(c.baseline.feature_dim);
    c.baseline.l2 = opt<double>(*b, "l2", "baseline").value_or(c.baseline.l2);
    c.baseline_seed = opt_seed(*b, "baseline");
    if (c.baseline.epochs <= 0 || !(c.baseline.learning_rate > 0.0) || !(c.baseline.l2 >= 0.0)) {
      bad("baseline", "epochs and learning_rate must be positive, l2 non-negative");
    }
  }
  if (const auto k = doc.find("cascade"); k != doc.end()) {
    check_keys(*k, "cascade", {"batch_size", "workers"});
    c.batch_size = opt<std::size_t>(*k, "batch_size", "cascade").value_or(c.batch_size);
    c.workers = opt<std::size_t>(*k, "workers", "cascade").value_or(c.workers);
    if (c.batch_size == 0 || c.workers == 0) bad("cascade", "batch_size and workers must be positive");
  }

  const auto tiers = doc.find("tiers");
  if (tiers == doc.end()) bad("<root>", "'tiers' is required");
  check_keys(*tiers, "tiers", {"t1", "t2"});
  if (!tiers->contains("t1") || !tiers->contains("t2")) bad("tiers", "both t1 and t2 must be configured");
  c.t1 = parse_tier((*tiers)["t1"], Tier::kT1, env);
  c.t2 = parse_tier((*tiers)["t2"], Tier::kT2, env);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const EnvLookup& env) {
  if (!std::filesystem::exists(path)) throw ValidationError(fmt::format("config file '{}' does not exist", path.string()));
  return parse_run_config(read_file(path), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(),
                          env);
}

TierConfig make_tier_config(const RunConfig& config, Tier tier) {
  const TierSettings& settings = config.tier(tier);
  TierConfig tc;
  tc.task = tier;
  for (std::size_t i = 0; i < 2; ++i) {
    const MemberConfig& m = settings.members[i];
    tc.members[i].pipeline = m.pipeline;
    tc.members[i].threshold = m.threshold;
    if (m.descriptor.kind == BackendKind::kNativeBaseline) {
      const auto path = config.model_path(m);
      if (!std::filesystem::exists(path)) {
        throw ValidationError(
            fmt::format("model file '{}' for backend '{}' does not exist", path.string(), m.descriptor.backend_id));
      }
      auto model = std::make_shared<const BaselineModel>(load_model(path));
      tc.members[i].backend = std::make_shared<BaselineBackend>(m.descriptor, std::move(model));
    } else {
      tc.members[i].backend =
          std::make_shared<RemoteBackend>(m.descriptor, config.endpoint_for(settings, m), settings.remote);
    }
  }
  tc.validate();
  return tc;
}

}  // namespace triage
