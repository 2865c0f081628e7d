// Acceptance suite: one pass/fail line per criterion.
//
//   acceptance            run every criterion
//   acceptance --only 3   run one criterion

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "../support/fixtures.hpp"
#include "../support/generators.hpp"
#include "../support/mock_server.hpp"
#include "../support/oracles.hpp"
#include "triage/baseline.hpp"
#include "triage/cascade.hpp"
#include "triage/cli.hpp"
#include "triage/fs_util.hpp"
#include "triage/metrics.hpp"
#include "triage/remote.hpp"
#include "triage/sampler.hpp"
#include "triage/sectioner.hpp"

using namespace triage;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kC1MaxSeconds = 5.0;
constexpr double kC3MaxSeconds = 10.0;
constexpr double kC4Tolerance = 1e-12;
constexpr double kC5RelativeError = 1e-5;
constexpr double kC6MinRecall = 0.98;
constexpr double kC6MaxSeconds = 120.0;

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void fail(std::string why) {
    pass = false;
    details.push_back(std::move(why));
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args, EnvLookup env = [](const char*) { return std::optional<std::string>(); }) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err, env);
  return {code, out.str(), err.str()};
}

// ---------------------------------------------------------------------------
// 1. OR-ensemble misses are exactly the intersection of member misses.

Outcome c1_fn_subset() {
  Outcome o;
  const auto start = Clock::now();
  // Published miss counts: T1 GatorTron 48, BCCRTron 54, ensemble 24; T2 54, 46, 33.
  for (const auto [a, b, ens] : {std::array{48, 54, 24}, std::array{54, 46, 33}}) {
    if (ens > std::min(a, b)) o.fail(fmt::format("published anchor {} > min({}, {})", ens, a, b));
  }
  Rng rng(1001);
  constexpr int kTrials = 1000;
  constexpr std::size_t kN = 500;
  std::size_t strict_gains = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto gold = testing::random_bools(rng, kN, rng.uniform());
    const auto pa = testing::random_bools(rng, kN, rng.uniform());
    const auto pb = testing::random_bools(rng, kN, rng.uniform());
    std::vector<bool> ens(kN);
    std::set<std::size_t> miss_a, miss_b, miss_ens;
    for (std::size_t i = 0; i < kN; ++i) {
      const std::vector<Decision> ds = {decide(ClassifierScore(pa[i] ? 0.9 : 0.1), 0.5, Tier::kT1, "a"),
                                        decide(ClassifierScore(pb[i] ? 0.9 : 0.1), 0.5, Tier::kT1, "b")};
      ens[i] = or_combine(ds);
      if (gold[i] && !pa[i]) miss_a.insert(i);
      if (gold[i] && !pb[i]) miss_b.insert(i);
      if (gold[i] && !ens[i]) miss_ens.insert(i);
    }
    const auto ra = eval_report(pa, gold, Tier::kT1);
    const auto rb = eval_report(pb, gold, Tier::kT1);
    const auto re = eval_report(ens, gold, Tier::kT1);
    std::set<std::size_t> both;
    for (auto i : miss_a) {
      if (miss_b.count(i)) both.insert(i);
    }
    if (re.missed_positive > std::min(ra.missed_positive, rb.missed_positive)) {
      o.fail(fmt::format("trial {}: ensemble missed {} > min({}, {})", trial, re.missed_positive, ra.missed_positive,
                         rb.missed_positive));
    }
    if (miss_ens != both || re.missed_positive != both.size()) {
      o.fail(fmt::format("trial {}: ensemble miss set differs from the intersection", trial));
    }
    strict_gains += re.missed_positive < std::min(ra.missed_positive, rb.missed_positive);
  }
  const double secs = seconds_since(start);
  if (secs >= kC1MaxSeconds) o.fail(fmt::format("took {:.2f} s (limit {} s)", secs, kC1MaxSeconds));
  o.summary = fmt::format("OR-ensemble FN subset: {} trials x n={}, {} with a strict reduction ({:.2f} s)", kTrials,
                          kN, strict_gains, secs);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Published F1 values follow from the published precision/recall pairs.

struct PublishedRow {
  const char* name;
  int recall;     // hundredths
  int precision;  // hundredths
  const char* f1;
};

constexpr PublishedRow kPublished[] = {
    {"T1 GatorTron (non cancer)", 97, 100, "0.98"},   {"T1 GatorTron (cancer)", 99, 89, "0.94"},
    {"T1 BCCRTron (non cancer)", 97, 100, "0.99"},    {"T1 BCCRTron (cancer)", 99, 91, "0.95"},
    {"T1 Combined (non cancer)", 96, 100, "0.98"},    {"T1 Combined (cancer)", 99, 88, "0.93"},
    {"T2 GatorTron (non reportable)", 99, 94, "0.96"}, {"T2 GatorTron (reportable)", 98, 100, "0.99"},
    {"T2 BCCRTron (non reportable)", 99, 95, "0.97"},  {"T2 BCCRTron (reportable)", 99, 100, "0.99"},
    {"T2 Combined (non reportable)", 98, 96, "0.97"},  {"T2 Combined (reportable)", 99, 99, "0.99"},
};

Outcome c2_table_f1() {
  Outcome o;
  int matched = 0;
  for (const auto& row : kPublished) {
    // Counts with precision exactly a/100 and recall exactly b/100.
    const std::size_t a = row.precision, b = row.recall;
    ConfusionMatrix cm{a * b, b * (100 - a), 0, a * (100 - b)};
    const ClassMetrics m = class_metrics(cm);
    const std::string ours = format_metric(m.f1);
    const std::string oracle = fmt::format("{:.2f}", testing::f1_hundredths(row.precision, row.recall) / 100.0);
    if (format_metric(m.precision) != fmt::format("{:.2f}", a / 100.0) ||
        format_metric(m.recall) != fmt::format("{:.2f}", b / 100.0)) {
      o.fail(fmt::format("{}: fixture does not realize p={} r={}", row.name, a, b));
    }
    if (ours != oracle) o.fail(fmt::format("{}: library {} disagrees with integer oracle {}", row.name, ours, oracle));
    if (ours == row.f1) {
      ++matched;
      continue;
    }
    // The published value may still be reachable from unrounded inputs.
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; j <= 100; ++j) {
        const double p = std::min(1.0, (row.precision - 0.5 + i / 100.0) / 100.0);
        const double r = std::min(1.0, (row.recall - 0.5 + j / 100.0) / 100.0);
        const double f = f1_from(p, r);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
      }
    }
    o.fail(fmt::format("{}: p={:.2f} r={:.2f} gives F1 {} (exact {:.5f}); published {}. Unrounded p, r within "
                       "the rounding intervals span F1 [{:.4f}, {:.4f}]",
                       row.name, a / 100.0, b / 100.0, ours, *m.f1, row.f1, lo, hi));
  }
  o.summary = fmt::format("table F1 arithmetic: {}/12 published rows reproduced exactly", matched);
  return o;
}

// ---------------------------------------------------------------------------
// 3. Undersampling exactness and byte-identical manifests.

Outcome c3_undersampling() {
  Outcome o;
  const auto start = Clock::now();
  testing::TempDir dir;
  const std::string t1_corpus = (dir / "t1_corpus.jsonl").string();
  const std::string t2_corpus = (dir / "t2_corpus.jsonl").string();
  auto must = [&](const CliRun& r, const char* what) {
    if (r.code != 0) o.fail(fmt::format("{} exited {}: {}", what, r.code, r.err));
    return r.code == 0;
  };
  if (!must(cli({"--seed", "7", "synth", "--n", "10400", "--cancer-frac", "0.21", "--out", t1_corpus}), "synth t1") ||
      !must(cli({"--seed", "8", "synth", "--n", "2200", "--cancer-frac", "1", "--reportable-frac", "0.8", "--out",
                 t2_corpus}),
            "synth t2")) {
    return o;
  }

  std::string manifests[2][3];
  for (int rep = 0; rep < 3; ++rep) {
    const std::string out = (dir / ("run" + std::to_string(rep))).string();
    must(cli({"--out-dir", out, "--seed", "42", "build-dataset", "--tier", "t1", "--corpus", t1_corpus}), "t1 build");
    must(cli({"--out-dir", out, "--seed", "42", "build-dataset", "--tier", "t2", "--corpus", t2_corpus}), "t2 build");
    if (!o.pass) return o;
    manifests[0][rep] = read_file(fs::path(out) / "t1_manifest.json");
    manifests[1][rep] = read_file(fs::path(out) / "t2_manifest.json");
  }
  for (int t = 0; t < 2; ++t) {
    if (manifests[t][1] != manifests[t][0] || manifests[t][2] != manifests[t][0]) {
      o.fail(fmt::format("t{} manifests differ across reruns", t + 1));
    }
  }

  const auto m1 = nlohmann::json::parse(manifests[0][0]);
  const auto m2 = nlohmann::json::parse(manifests[1][0]);
  const std::size_t cancer_train = m1["counts"]["train_after"]["cancer"];
  const std::size_t non_cancer_kept = m1["counts"]["train_after"]["non_cancer"];
  const std::size_t eligible_cancer = m1["counts"]["eligible"]["cancer"];
  const std::size_t non_rep_train = m2["counts"]["train_after"]["non_reportable"];
  const std::size_t rep_kept = m2["counts"]["train_after"]["reportable"];
  const std::size_t eligible_non_rep = m2["counts"]["eligible"]["non_reportable"];

  // Independent arithmetic: integer floor of 8/10 and 12/10.
  if (eligible_cancer != 2184) o.fail(fmt::format("expected 2184 cancers in the corpus, got {}", eligible_cancer));
  if (cancer_train != 1747) o.fail(fmt::format("expected round(0.8 * 2184) = 1747 train cancers, got {}", cancer_train));
  if (non_cancer_kept != cancer_train * 8 / 10) {
    o.fail(fmt::format("non_cancer kept {} != floor(0.8 * {})", non_cancer_kept, cancer_train));
  }
  if (m1["counts"]["train_before"]["cancer"] != cancer_train) o.fail("T1 undersampling dropped cancers");
  if (eligible_non_rep != 440) o.fail(fmt::format("expected 440 non-reportables, got {}", eligible_non_rep));
  if (rep_kept != non_rep_train * 12 / 10) {
    o.fail(fmt::format("reportable kept {} != floor(1.2 * {})", rep_kept, non_rep_train));
  }
  if (m2["counts"]["train_before"]["non_reportable"] != non_rep_train) o.fail("T2 undersampling dropped non-reportables");

  const double secs = seconds_since(start);
  if (secs >= kC3MaxSeconds) o.fail(fmt::format("took {:.2f} s (limit {} s)", secs, kC3MaxSeconds));
  o.summary = fmt::format("undersampling: T1 {} cancer -> {} non_cancer, T2 {} non_reportable -> {} reportable, "
                          "3 identical reruns ({:.2f} s)",
                          cancer_train, non_cancer_kept, non_rep_train, rep_kept, secs);
  return o;
}

// ---------------------------------------------------------------------------
// 4. Metrics agree with a brute-force recomputation.

Outcome c4_metric_oracle() {
  Outcome o;
  Rng rng(4004);
  double worst = 0.0;
  auto cmp = [&](const std::optional<double>& ours, const std::optional<double>& ref, const std::string& what) {
    if (ours.has_value() != ref.has_value()) {
      o.fail(what + ": definedness differs");
      return;
    }
    if (!ours) return;
    const double diff = std::abs(*ours - *ref);
    worst = std::max(worst, diff);
    if (diff > kC4Tolerance) o.fail(fmt::format("{}: {} vs {}", what, *ours, *ref));
  };
  for (int trial = 0; trial < 200; ++trial) {
    const Tier tier = trial % 2 ? Tier::kT2 : Tier::kT1;
    // Some trials are degenerate on purpose.
    const double p_gold = trial % 50 == 0 ? 0.0 : rng.uniform();
    const double p_pred = trial % 40 == 1 ? 1.0 : rng.uniform();
    const auto gold = testing::random_bools(rng, 1000, p_gold);
    const auto pred = testing::random_bools(rng, 1000, p_pred);
    const EvalReport r = eval_report(pred, gold, tier);

    std::vector<std::string> g, p;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      g.emplace_back(label_name(tier, gold[i]));
      p.emplace_back(label_name(tier, pred[i]));
    }
    const std::string pos(label_name(tier, true)), neg(label_name(tier, false));
    const auto ref = testing::oracle_metrics(p, g, {pos, neg}, pos);
    const std::string tag = fmt::format("trial {}", trial);
    for (const auto& [cls, ours] : {std::pair{pos, &r.positive_class}, std::pair{neg, &r.negative_class}}) {
      const auto& oc = ref.per_class.at(cls);
      cmp(ours->recall, oc.recall, tag + " " + cls + " recall");
      cmp(ours->precision, oc.precision, tag + " " + cls + " precision");
      cmp(ours->specificity, oc.specificity, tag + " " + cls + " specificity");
      cmp(ours->f1, oc.f1, tag + " " + cls + " f1");
      cmp(ours->accuracy, ref.accuracy, tag + " " + cls + " accuracy");
    }
    cmp(r.micro_f1, ref.micro_f1, tag + " micro f1");
    cmp(r.macro_f1, ref.macro_f1, tag + " macro f1");
    if (r.missed_positive != ref.missed_positive) o.fail(tag + ": missed count differs");
    if (!r.micro_f1 || *r.micro_f1 != *r.positive_class.accuracy) o.fail(tag + ": micro F1 != accuracy");
  }
  o.summary = fmt::format("metric oracle: 200 vectors x n=1000, max deviation {:.1e}", worst);
  return o;
}

// ---------------------------------------------------------------------------
// 5. Analytic gradient against central differences.

Outcome c5_gradient() {
  Outcome o;
  const std::vector<std::string> texts = {
      "invasive ductal carcinoma grade 2", "benign fibrous tissue",      "metastatic carcinoma in lymph node",
      "no evidence of malignancy",         "chronic inflammation",        "adenocarcinoma margins involved",
      "normal skin",                       "recurrent sarcoma",           "reactive changes only",
      "high grade dysplasia"};
  std::vector<TrainingExample> data;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    data.push_back({NormalizedInput{texts[i], count_tokens(texts[i]), false, {}}, i % 2 == 0});
  }
  BaselineModel m = BaselineModel::zeros(1 << 12);
  Rng rng(5005);
  for (auto& w : m.weights) w = 2.0 * rng.uniform() - 1.0;
  m.bias = -0.2;
  const double l2 = 0.05;
  const Gradient g = objective_gradient(m, data, l2);

  std::vector<std::size_t> coords;
  for (const auto& ex : data) {
    const auto f = hash_features(ex.input.text, m.feature_dim);
    coords.push_back(f.index[rng.below(f.index.size())]);
    coords.push_back(f.index[rng.below(f.index.size())]);
  }
  for (int k = 0; k < 10; ++k) coords.push_back(rng.below(m.feature_dim));

  const double h = 1e-5;
  double worst = 0.0;
  auto check = [&](double analytic, const std::function<void(BaselineModel&, double)>& nudge, std::string what) {
    BaselineModel plus = m, minus = m;
    nudge(plus, h);
    nudge(minus, -h);
    const double fd = (objective(plus, data, l2) - objective(minus, data, l2)) / (2 * h);
    const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-300});
    worst = std::max(worst, rel);
    if (rel > kC5RelativeError) o.fail(fmt::format("{}: analytic {} vs numeric {} (rel {:.2e})", what, analytic, fd, rel));
  };
  for (auto j : coords) {
    check(g.weights[j], [j](BaselineModel& x, double d) { x.weights[j] += d; }, fmt::format("w[{}]", j));
  }
  check(g.bias, [](BaselineModel& x, double d) { x.bias += d; }, "bias");
  o.summary = fmt::format("gradient check: {} coordinates + bias on 10 examples, max relative error {:.1e}",
                          coords.size(), worst);
  return o;
}

// ---------------------------------------------------------------------------
// 6 and 7. Desk-scale end-to-end run and its audit trail.

struct EndToEnd {
  bool ran = false;
  std::string error;
  double seconds = 0.0;
  double t1_recall = 0.0;
  double t2_recall = 0.0;
  std::size_t outcomes = 0;
  std::size_t t2_after_negative = 0;
  std::size_t t2_runs = 0;
};

const EndToEnd& end_to_end() {
  static EndToEnd e = [] {
    EndToEnd r;
    const auto start = Clock::now();
    testing::TempDir dir;
    const std::string out = dir.path().string();
    const std::string corpus = (dir / "corpus.jsonl").string();
    auto step = [&](std::vector<std::string> args) {
      if (!r.error.empty()) return;
      const CliRun c = cli(std::move(args));
      if (c.code != 0) r.error = fmt::format("exit {}: {}", c.code, c.err);
    };
    step({"--seed", "2024", "synth", "--n", "5000", "--signal", "1.0", "--out", corpus});
    for (const char* t : {"t1", "t2"}) step({"--out-dir", out, "--seed", "17", "build-dataset", "--tier", t, "--corpus", corpus});
    for (const char* t : {"t1", "t2"}) {
      for (const char* v : {"A_synoptic_first", "B_diagnosis_first"}) {
        step({"--out-dir", out, "--seed", "23", "train-baseline", "--tier", t, "--variant", v});
      }
    }
    const std::string t1_test = (dir / "t1_test.jsonl").string();
    const std::string t2_test = (dir / "t2_test.jsonl").string();
    const std::string t1_out = (dir / "t1_outcomes.jsonl").string();
    const std::string t2_out = (dir / "t2_outcomes.jsonl").string();
    step({"--out-dir", out, "triage", "--corpus", t1_test, "--out", t1_out});
    step({"--out-dir", out, "triage", "--corpus", t2_test, "--t2-gating", "gold", "--out", t2_out});
    step({"--out-dir", out, "evaluate", "--outcomes", t1_out, "--gold", t1_test, "--tier", "t1"});
    step({"--out-dir", out, "evaluate", "--outcomes", t2_out, "--gold", t2_test, "--tier", "t2", "--gating", "gold"});
    r.seconds = seconds_since(start);
    if (!r.error.empty()) return r;

    auto combined_recall = [&](const char* file, const char* cls) {
      const auto j = nlohmann::json::parse(read_file(dir / file));
      return j["models"].back()["classes"][cls]["recall"].get<double>();
    };
    r.t1_recall = combined_recall("t1_eval.json", "cancer");
    r.t2_recall = combined_recall("t2_eval.json", "reportable");

    // Audit the predicted-gating outcomes with a plain JSON reader.
    std::istringstream lines(read_file(t1_out));
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      ++r.outcomes;
      const bool has_t2 = j.contains("t2") && !j["t2"].is_null();
      r.t2_runs += has_t2;
      if (has_t2 && j["t1"]["combined"] != "cancer") ++r.t2_after_negative;
    }
    r.ran = true;
    return r;
  }();
  return e;
}

Outcome c6_end_to_end() {
  Outcome o;
  const EndToEnd& e = end_to_end();
  if (!e.ran) {
    o.fail(e.error);
    o.summary = "end-to-end run did not complete";
    return o;
  }
  if (e.t1_recall < kC6MinRecall) o.fail(fmt::format("T1 ensemble recall {:.4f} < {}", e.t1_recall, kC6MinRecall));
  if (e.t2_recall < kC6MinRecall) o.fail(fmt::format("T2 ensemble recall {:.4f} < {}", e.t2_recall, kC6MinRecall));
  if (e.seconds >= kC6MaxSeconds) o.fail(fmt::format("took {:.1f} s (limit {} s)", e.seconds, kC6MaxSeconds));
  o.summary = fmt::format("end-to-end n=5000: T1 ensemble recall {:.4f}, T2 ensemble recall {:.4f} ({:.1f} s)",
                          e.t1_recall, e.t2_recall, e.seconds);
  return o;
}

Outcome c7_gating() {
  Outcome o;
  const EndToEnd& e = end_to_end();
  if (!e.ran) {
    o.fail(e.error);
    o.summary = "end-to-end run did not complete";
    return o;
  }
  if (e.t2_after_negative != 0) o.fail(fmt::format("{} outcomes ran T2 after a negative T1", e.t2_after_negative));
  if (e.outcomes == 0 || e.t2_runs == 0) o.fail("audit scanned no T2 results");
  o.summary = fmt::format("gating soundness: {} outcomes, {} T2 runs, {} after a negative T1", e.outcomes, e.t2_runs,
                          e.t2_after_negative);
  return o;
}

// ---------------------------------------------------------------------------
// 8. Remote wire conformance.

Outcome c8_remote() {
  Outcome o;
  using testing::MockServer;

  // Golden body.
  {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"scores\":[0.25,0.75]}", "application/json");
    });
    const std::vector<std::string> texts = {"final diagnosis invasive carcinoma", "caf\xc3\xa9 \"a\\b\""};
    const auto scores = remote_score(server.endpoint(), Tier::kT1, texts);
    const std::string golden =
        "{\"task\":\"t1\",\"texts\":[\"final diagnosis invasive carcinoma\",\"caf\xc3\xa9 \\\"a\\\\b\\\"\"]}";
    const auto seen = server.seen();
    if (seen.size() != 1) {
      o.fail(fmt::format("expected one request, saw {}", seen.size()));
    } else {
      if (seen[0].body != golden) o.fail("request body differs from the golden body: " + seen[0].body);
      if (seen[0].path != "/v1/classify") o.fail("wrong path " + seen[0].path);
      if (seen[0].client_header != "reportable-triage/1") o.fail("missing x-client header");
    }
    if (scores.size() != 2 || scores[1].probability() != 0.75) o.fail("scores not decoded in order");
  }

  // Error kinds.
  auto kind_for = [&](std::string body) -> std::optional<RemoteErrorKind> {
    MockServer server([body](const httplib::Request&, httplib::Response& res) {
      res.set_content(body, "application/json");
    });
    try {
      remote_score(server.endpoint(), Tier::kT2, std::vector<std::string>{"a", "b"});
    } catch (const RemoteError& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  if (kind_for("{\"scores\":[0.5]}") != RemoteErrorKind::kCountMismatch) o.fail("count mismatch not detected");
  if (kind_for("{\"scores\":[0.5,1.5]}") != RemoteErrorKind::kScoreRange) o.fail("out-of-range score not detected");

  // Injected timeout through the CLI: 3-text batch, 2 retries, exit code 2.
  {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      res.set_content("{\"scores\":[0.5,0.5,0.5]}", "application/json");
    });
    testing::TempDir dir;
    std::string corpus;
    for (int i = 1; i <= 3; ++i) {
      corpus += fmt::format("{{\"report_id\":\"R{}\",\"diagnosis_year\":2023,\"raw_text\":\"DIAGNOSIS:\\ntext {}\\n\"}}\n",
                            i, i);
    }
    write_file_atomic(dir / "c.jsonl", corpus);
    write_file_atomic(dir / "cfg.json", R"({"tiers": {
      "t1": {"members": [{"backend_id": "svc_a", "variant": "A_synoptic_first", "kind": "remote"},
                         {"backend_id": "svc_b", "variant": "B_diagnosis_first", "kind": "remote"}],
             "remote": {"timeout_ms": 150, "retries": 2}},
      "t2": {"members": [{"backend_id": "svc_a", "variant": "A_synoptic_first", "kind": "remote"},
                         {"backend_id": "svc_b", "variant": "B_diagnosis_first", "kind": "remote"}],
             "remote": {"timeout_ms": 150, "retries": 2}}}})");
    const std::string endpoint = server.endpoint();
    const CliRun r = cli({"--config", (dir / "cfg.json").string(), "triage", "--corpus", (dir / "c.jsonl").string()},
                         [&](const char* name) -> std::optional<std::string> {
                           if (std::string(name).starts_with("TRIAGE_REMOTE_ENDPOINT_")) return endpoint;
                           return std::nullopt;
                         });
    const auto seen = server.seen();
    if (r.code != 2) o.fail(fmt::format("triage exited {} (want 2): {}", r.code, r.err));
    if (r.err.find("timeout") == std::string::npos) o.fail("error text does not mention the timeout: " + r.err);
    if (seen.size() != 3) o.fail(fmt::format("expected 1 + 2 retries = 3 attempts, saw {}", seen.size()));
    for (const auto& s : seen) {
      if (nlohmann::json::parse(s.body)["texts"].size() != 3) o.fail("retry did not resend the 3-text batch");
    }
  }
  o.summary = "remote wire contract: golden body, count_mismatch, score_range, timeout retries -> exit 2";
  return o;
}

// ---------------------------------------------------------------------------
// 9. Sectioner lossless partition.

const std::vector<std::string>& curated_fixtures() {
  static const std::vector<std::string> docs = {
      "clinical note text\nSYNOPTIC REPORT:\nTumour size: 2 cm\nDIAGNOSIS:\nbenign",
      "",
      "no headers at all",
      "DIAGNOSIS:",
      "DIAGNOSIS:\n",
      "\n\n\nFINAL DIAGNOSIS:\n\n\n",
      "FINAL DIAGNOSIS: invasive carcinoma\nCOMMENT: see note\n",
      "SPECIMEN(S) RECEIVED:\nA. left breast\nB. right breast\nGROSS DESCRIPTION:\nTwo cores.\n",
      "CLINICAL HISTORY:\r\nLump.\r\nDIAGNOSIS:\r\nFibroadenoma.\r\n",
      "  SYNOPTIC DATA:  \nMargins: clear\nTumour size: 1.2 cm\nHistologic grade: 2\n",
      "Diagnosis: lowercase header stays text\nDIAGNOSIS:\nreal header\n",
      "ADDENDUM:\nUnknown header becomes other\nCANCER CHECKLIST:\nitems\n",
      "DIAGNOSIS:\nfirst\nDIAGNOSIS:\nsecond\nDIAGNOSIS:\nthird",
      "Time 12:30: noted\nRatio 3:2\nhttp://example.org/path\n",
      "R\xc3\x89SUM\xc3\x89:\nnon-ASCII header label\n",
      "DIAGNOSIS:\ncaf\xc3\xa9 \xe2\x80\x94 \xff\xfe broken bytes\n",
      "A VERY LONG LINE IN CAPITALS THAT EXCEEDS THE HEADER LENGTH LIMIT:\ntext\n",
      "PATHOLOGIC DIAGNOSIS:\ttabbed\n\tMICROSCOPIC DESCRIPTION:\nindented header\n",
      "MARGINS & NODES, LEFT/RIGHT - A:\nfree label characters\n",
      "::\n:\nDIAGNOSIS\nno colon above\n",
  };
  return docs;
}

Outcome c9_sectioner() {
  Outcome o;
  const auto& table = SectionSynonymTable::builtin();
  std::size_t sections = 0;
  auto check = [&](const std::string& doc, const std::string& tag) {
    const auto parsed = parse_sections(doc, table);
    sections += parsed.size();
    if (reassemble(parsed) != doc) {
      o.fail(tag + ": reassembly differs from the input");
      return;
    }
    if (parse_sections(reassemble(parsed), table) != parsed) o.fail(tag + ": re-parse differs");
    for (const auto& s : parsed) {
      const auto alone = parse_sections(s.header + s.text, table);
      if (alone.size() != 1 || alone[0] != s) o.fail(tag + ": section '" + s.name + "' does not re-parse to itself");
    }
  };
  Rng rng(9009);
  for (int i = 0; i < 1000; ++i) check(testing::fuzz_document(rng), fmt::format("fuzz {}", i));
  const auto& fixtures = curated_fixtures();
  for (std::size_t i = 0; i < fixtures.size(); ++i) check(fixtures[i], fmt::format("fixture {}", i));
  if (fixtures.size() != 20) o.fail("expected 20 curated fixtures");
  o.summary = fmt::format("sectioner partition: 1000 fuzzed + {} curated documents, {} sections, lossless and "
                          "idempotent",
                          fixtures.size(), sections);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria = {c1_fn_subset, c2_table_f1, c3_undersampling,
                                                          c4_metric_oracle, c5_gradient, c6_end_to_end,
                                                          c7_gating, c8_remote, c9_sectioner};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome r;
    try {
      r = criteria[i]();
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
      if (r.summary.empty()) r.summary = "aborted";
    }
    std::cout << fmt::format("[{}] C{} {}\n", r.pass ? "PASS" : "FAIL", i + 1, r.summary);
    constexpr std::size_t kMaxDetails = 10;
    for (std::size_t k = 0; k < r.details.size() && k < kMaxDetails; ++k) std::cout << "       " << r.details[k] << '\n';
    if (r.details.size() > kMaxDetails) std::cout << fmt::format("       ... {} more\n", r.details.size() - kMaxDetails);
    failures += !r.pass;
  }
  std::cout.flush();
  return failures == 0 ? 0 : 1;
}
