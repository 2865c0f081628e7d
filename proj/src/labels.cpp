#include "triage/labels.hpp"

namespace triage {

std::string_view to_string(Tier tier) { return tier == Tier::kT1 ? "t1" : "t2"; }

std::string_view to_string(T1Label label) {
  return label == T1Label::kCancer ? "cancer" : "non_cancer";
}

std::string_view to_string(T2Label label) {
  return label == T2Label::kReportable ? "reportable" : "non_reportable";
}

std::optional<Tier> parse_tier(std::string_view text) {
  if (text == "t1") return Tier::kT1;
  if (text == "t2") return Tier::kT2;
  return std::nullopt;
}

std::optional<T1Label> parse_t1_label(std::string_view text) {
  if (text == "cancer") return T1Label::kCancer;
  if (text == "non_cancer") return T1Label::kNonCancer;
  return std::nullopt;
}

std::optional<T2Label> parse_t2_label(std::string_view text) {
  if (text == "reportable") return T2Label::kReportable;
  if (text == "non_reportable") return T2Label::kNonReportable;
  return std::nullopt;
}

std::string_view label_name(Tier tier, bool positive) {
  if (tier == Tier::kT1) return positive ? "cancer" : "non_cancer";
  return positive ? "reportable" : "non_reportable";
}

std::string_view display_name(Tier tier, bool positive) {
  if (tier == Tier::kT1) return positive ? "cancer" : "non cancer";
  return positive ? "reportable" : "non reportable";
}

std::optional<bool> parse_label_polarity(Tier tier, std::string_view text) {
  if (text == label_name(tier, true)) return true;
  if (text == label_name(tier, false)) return false;
  return std::nullopt;
}

}  // namespace triage
