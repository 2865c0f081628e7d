#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "triage/cascade.hpp"

namespace triage {

// Triage output, one JSON object per line:
//   {"report_id":..., "final":..., "gating":"predicted"|"gold",
//    "t1":{"combined":..., "labels":[...], "scores":[...], "backend_ids":[...],
//          "thresholds":[...]},
//    "t2":{ same shape }}        <- only when T2 ran for the report
std::string serialize_outcome(const TriageOutcome& outcome);
std::string serialize_outcomes(const std::vector<TriageOutcome>& outcomes);

// Parses and checks each record's internal consistency (combined label is
// the OR of members, final matches the tier results). Throws ValidationError.
std::vector<TriageOutcome> parse_outcomes(std::string_view content, std::string_view source_name = "<memory>");
std::vector<TriageOutcome> load_outcomes(const std::filesystem::path& path);

}  // namespace triage
