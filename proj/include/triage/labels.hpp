#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace triage {

// Classification tier. T1 separates cancer from non-cancer reports; T2 runs
// on cancer reports and separates reportable from non-reportable ones.
enum class Tier { kT1, kT2 };

enum class T1Label { kCancer, kNonCancer };
enum class T2Label { kReportable, kNonReportable };

std::string_view to_string(Tier tier);
std::string_view to_string(T1Label label);
std::string_view to_string(T2Label label);

std::optional<Tier> parse_tier(std::string_view text);
std::optional<T1Label> parse_t1_label(std::string_view text);
std::optional<T2Label> parse_t2_label(std::string_view text);

// Wire name of the tier's positive or negative class ("cancer", "non_cancer",
// "reportable", "non_reportable").
std::string_view label_name(Tier tier, bool positive);

// Table-style display name ("cancer", "non cancer", ...).
std::string_view display_name(Tier tier, bool positive);

// Parses a wire label for the given tier; nullopt when it belongs to neither
// class of that tier.
std::optional<bool> parse_label_polarity(Tier tier, std::string_view text);

constexpr bool is_positive(T1Label label) { return label == T1Label::kCancer; }
constexpr bool is_positive(T2Label label) { return label == T2Label::kReportable; }

}  // namespace triage
