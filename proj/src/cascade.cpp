#include "triage/cascade.hpp"

#include <algorithm>
#include <future>
#include <set>

#include <fmt/format.h>

namespace triage {
namespace {

std::vector<EnsembleResult> run_batch(std::span<const PathologyReport> reports, const TierConfig& config,
                                      const SectionSynonymTable& table) {
  std::vector<EnsembleResult> results(reports.size());
  for (auto& r : results) {
    r.task = config.task;
    r.member_decisions.reserve(config.members.size());
  }

  for (const auto& member : config.members) {
    std::vector<NormalizedInput> inputs;
    inputs.reserve(reports.size());
    for (const auto& report : reports) inputs.push_back(assemble_input(report, member.pipeline, table));

    const auto& id = member.backend->descriptor().backend_id;
    const auto scores = member.backend->score_batch(inputs);
    if (scores.size() != inputs.size()) {
      throw Error(fmt::format("backend '{}' returned {} scores for {} inputs", id, scores.size(), inputs.size()));
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
      results[i].member_decisions.push_back(decide(scores[i], member.threshold, config.task, id));
    }
  }
  for (auto& r : results) r.combined_positive = or_combine(r.member_decisions);
  return results;
}

}  // namespace

void TierConfig::validate() const {
  std::set<std::string> ids;
  for (const auto& m : members) {
    if (!m.backend) throw ValidationError(fmt::format("{} member has no backend", to_string(task)));
    const auto& d = m.backend->descriptor();
    if (d.task != task) {
      throw ValidationError(fmt::format("backend '{}' serves {} but is configured for {}", d.backend_id,
                                        to_string(d.task), to_string(task)));
    }
    if (!ids.insert(d.backend_id).second) {
      throw ValidationError(fmt::format("duplicate backend id '{}' in {}", d.backend_id, to_string(task)));
    }
    if (!(m.threshold > 0.0 && m.threshold < 1.0)) {
      throw ValidationError(fmt::format("backend '{}' threshold must lie in (0, 1)", d.backend_id));
    }
    if (m.pipeline.token_budget == 0) {
      throw ValidationError(fmt::format("backend '{}' token budget must be positive", d.backend_id));
    }
  }
  if (members[0].pipeline.variant == members[1].pipeline.variant) {
    throw ValidationError(fmt::format("{} members must use distinct pipeline variants", to_string(task)));
  }
}

bool or_combine(std::span<const Decision> decisions) {
  if (decisions.empty()) throw ValidationError("or_combine needs at least one decision");
  const Tier task = decisions.front().task;
  bool positive = false;
  for (const auto& d : decisions) {
    if (d.task != task) throw ValidationError("or_combine received decisions for different tiers");
    positive = positive || d.positive;
  }
  return positive;
}

std::string_view to_string(FinalLabel label) {
  switch (label) {
    case FinalLabel::kNonCancer:
      return "non_cancer";
    case FinalLabel::kCancerNonReportable:
      return "cancer_non_reportable";
    case FinalLabel::kCancerReportable:
      return "cancer_reportable";
  }
  return "unknown";
}

std::optional<FinalLabel> parse_final_label(std::string_view text) {
  for (auto l : {FinalLabel::kNonCancer, FinalLabel::kCancerNonReportable, FinalLabel::kCancerReportable}) {
    if (text == to_string(l)) return l;
  }
  return std::nullopt;
}

std::string_view to_string(T2Gating gating) { return gating == T2Gating::kPredicted ? "predicted" : "gold"; }

std::optional<T2Gating> parse_gating(std::string_view text) {
  if (text == "predicted") return T2Gating::kPredicted;
  if (text == "gold") return T2Gating::kGold;
  return std::nullopt;
}

FinalLabel final_label_of(const EnsembleResult& t1, const std::optional<EnsembleResult>& t2) {
  if (!t1.combined_positive) return FinalLabel::kNonCancer;
  return t2 && t2->combined_positive ? FinalLabel::kCancerReportable : FinalLabel::kCancerNonReportable;
}

std::vector<EnsembleResult> run_tier(std::span<const PathologyReport> reports, const TierConfig& config,
                                     const CascadeOptions& options) {
  config.validate();
  if (reports.empty()) return {};
  const SectionSynonymTable& table = options.sections ? *options.sections : SectionSynonymTable::builtin();
  const std::size_t batch = std::max<std::size_t>(options.batch_size, 1);
  const std::size_t workers = std::max<std::size_t>(options.workers, 1);
  const std::size_t n_batches = (reports.size() + batch - 1) / batch;

  auto process = [&](std::size_t b) {
    const std::size_t begin = b * batch;
    const std::size_t end = std::min(begin + batch, reports.size());
    try {
      return run_batch(reports.subspan(begin, end - begin), config, table);
    } catch (const Error& e) {
      throw TierError(fmt::format("{} failed on reports [{} .. {}]: {}", to_string(config.task),
                                  reports[begin].report_id, reports[end - 1].report_id, e.what()),
                      e.exit_code());
    }
  };

  std::vector<EnsembleResult> results;
  results.reserve(reports.size());
  for (std::size_t first = 0; first < n_batches; first += workers) {
    const std::size_t last = std::min(first + workers, n_batches);
    std::vector<std::future<std::vector<EnsembleResult>>> window;
    for (std::size_t b = first; b < last; ++b) {
      window.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, process, b));
    }
    for (auto& f : window) {
      auto part = f.get();
      std::move(part.begin(), part.end(), std::back_inserter(results));
    }
  }
  return results;
}

namespace {

std::vector<TriageOutcome> assemble_outcomes(std::span<const PathologyReport> reports,
                                             std::vector<EnsembleResult> t1_results,
                                             std::span<const std::size_t> t2_indices,
                                             std::vector<EnsembleResult> t2_results, T2Gating gating) {
  std::vector<TriageOutcome> outcomes(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    outcomes[i].report_id = reports[i].report_id;
    outcomes[i].t1 = std::move(t1_results[i]);
    outcomes[i].gating = gating;
  }
  for (std::size_t k = 0; k < t2_indices.size(); ++k) outcomes[t2_indices[k]].t2 = std::move(t2_results[k]);
  for (auto& o : outcomes) o.final_label = final_label_of(o.t1, o.t2);
  return outcomes;
}

std::vector<TriageOutcome> run_cascade(std::span<const PathologyReport> reports, const TierConfig& t1,
                                       const TierConfig& t2, const CascadeOptions& options, T2Gating gating,
                                       const std::vector<bool>& gold_cancer) {
  if (t1.task != Tier::kT1 || t2.task != Tier::kT2) throw ValidationError("tier configs are swapped or mislabeled");
  t1.validate();
  t2.validate();

  auto t1_results = run_tier(reports, t1, options);

  std::vector<std::size_t> t2_indices;
  std::vector<PathologyReport> t2_reports;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const bool selected = gating == T2Gating::kPredicted ? t1_results[i].combined_positive : gold_cancer[i];
    if (selected) {
      t2_indices.push_back(i);
      t2_reports.push_back(reports[i]);
    }
  }
  auto t2_results = run_tier(t2_reports, t2, options);
  return assemble_outcomes(reports, std::move(t1_results), t2_indices, std::move(t2_results), gating);
}

}  // namespace

std::vector<TriageOutcome> triage(std::span<const PathologyReport> reports, const TierConfig& t1,
                                  const TierConfig& t2, const CascadeOptions& options) {
  return run_cascade(reports, t1, t2, options, T2Gating::kPredicted, {});
}

std::vector<TriageOutcome> triage_gold_gated(std::span<const LabeledReport> records, const TierConfig& t1,
                                             const TierConfig& t2, const CascadeOptions& options) {
  std::vector<PathologyReport> reports;
  std::vector<bool> gold_cancer;
  reports.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.t1_label) {
      throw ValidationError(fmt::format("report '{}' has no gold T1 label for gold-gated T2", rec.report.report_id));
    }
    reports.push_back(rec.report);
    gold_cancer.push_back(*rec.t1_label == T1Label::kCancer);
  }
  return run_cascade(reports, t1, t2, options, T2Gating::kGold, gold_cancer);
}

}  // namespace triage
