#include "triage/evaluation.hpp"

#include <unordered_map>

#include <fmt/format.h>

namespace triage {
namespace {

std::string list_ids(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > shown) out += fmt::format(" (+{} more)", ids.size() - shown);
  return out;
}

const EnsembleResult* tier_result(const TriageOutcome& o, Tier tier) {
  if (tier == Tier::kT1) return &o.t1;
  return o.t2 ? &*o.t2 : nullptr;
}

}  // namespace

EvalTable evaluate_outcomes(std::span<const TriageOutcome> outcomes, const Corpus& gold, Tier tier, T2Gating gating) {
  std::unordered_map<std::string_view, std::size_t> by_id;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!by_id.emplace(outcomes[i].report_id, i).second) {
      throw ValidationError(fmt::format("duplicate outcome for report '{}'", outcomes[i].report_id));
    }
  }
  std::vector<std::string> missing_outcome;
  std::unordered_map<std::string_view, bool> in_gold;
  for (const auto& rec : gold.records) {
    in_gold.emplace(rec.report.report_id, true);
    if (!by_id.contains(rec.report.report_id)) missing_outcome.push_back(rec.report.report_id);
  }
  std::vector<std::string> missing_gold;
  for (const auto& o : outcomes) {
    if (!in_gold.contains(o.report_id)) missing_gold.push_back(o.report_id);
  }
  if (!missing_outcome.empty() || !missing_gold.empty()) {
    std::string msg = "outcomes and gold corpus do not join";
    if (!missing_outcome.empty()) msg += "; no outcome for: " + list_ids(missing_outcome);
    if (!missing_gold.empty()) msg += "; no gold record for: " + list_ids(missing_gold);
    throw ValidationError(msg);
  }

  std::vector<std::string> names;
  std::vector<std::vector<bool>> member_preds;
  std::vector<bool> combined;
  std::vector<bool> golds;
  std::vector<std::string> lacking_t2;

  for (const auto& rec : gold.records) {
    const auto g = rec.gold(tier);
    if (!g) {
      if (tier == Tier::kT1) throw ValidationError(fmt::format("gold record '{}' has no t1_label", rec.report.report_id));
      continue;
    }
    const TriageOutcome& o = outcomes[by_id.at(rec.report.report_id)];
    const EnsembleResult* r = tier_result(o, tier);
    if (!r && gating == T2Gating::kGold) {
      lacking_t2.push_back(o.report_id);
      continue;
    }
    if (r) {
      if (names.empty()) {
        for (const auto& d : r->member_decisions) names.push_back(d.backend_id);
        member_preds.resize(names.size());
        // Records seen before the first T2 result were screened out by T1.
        for (auto& p : member_preds) p.assign(golds.size(), false);
      }
      if (r->member_decisions.size() != names.size()) {
        throw ValidationError(fmt::format("report '{}' has a different member set", o.report_id));
      }
      for (std::size_t m = 0; m < names.size(); ++m) {
        if (r->member_decisions[m].backend_id != names[m]) {
          throw ValidationError(fmt::format("report '{}' lists members in a different order", o.report_id));
        }
        member_preds[m].push_back(r->member_decisions[m].positive);
      }
      combined.push_back(r->combined_positive);
    } else {
      for (auto& p : member_preds) p.push_back(false);
      combined.push_back(false);
    }
    golds.push_back(*g);
  }

  if (!lacking_t2.empty()) {
    throw ValidationError("gold-gated T2 evaluation needs a T2 result for every gold-labelled report; missing for: " +
                          list_ids(lacking_t2) + " (rerun triage with --t2-gating gold)");
  }
  if (golds.empty()) throw ValidationError(fmt::format("no records carry a gold {} label", to_string(tier)));
  if (names.empty()) throw ValidationError(fmt::format("no outcome carries a {} result", to_string(tier)));

  EvalTable table;
  table.task = tier;
  table.gating = tier == Tier::kT2 ? std::string(to_string(gating)) : std::string();
  for (std::size_t m = 0; m < names.size(); ++m) {
    table.models.push_back({names[m], eval_report(member_preds[m], golds, tier)});
  }
  table.models.push_back({std::string(kCombinedRowName), eval_report(combined, golds, tier)});
  return table;
}

}  // namespace triage
