#pragma once

#include <span>
#include <vector>

#include "triage/cascade.hpp"
#include "triage/corpus.hpp"
#include "triage/metrics.hpp"

namespace triage {

inline constexpr std::string_view kCombinedRowName = "Combined";

// Joins outcomes with gold records on report_id and evaluates each member
// and the OR-ensemble for one tier.
//
// T1 evaluates every record. T2 evaluates records that carry a gold T2 label:
// with kGold gating each must have a T2 result; with kPredicted gating a
// report the T1 ensemble screened out counts as a negative T2 prediction.
//
// Throws ValidationError listing report_ids that fail to join.
EvalTable evaluate_outcomes(std::span<const TriageOutcome> outcomes, const Corpus& gold, Tier tier, T2Gating gating);

}  // namespace triage
