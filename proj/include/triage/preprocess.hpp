#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/sectioner.hpp"

namespace triage {

// Input pipeline variant. A puts the synoptic section first, B the diagnosis
// section; the two views feed the two members of each tier's ensemble.
enum class PipelineVariant { kASynopticFirst, kBDiagnosisFirst };

std::string_view to_string(PipelineVariant variant);
std::optional<PipelineVariant> parse_variant(std::string_view text);

inline constexpr std::size_t kDefaultTokenBudget = 512;

struct PipelineConfig {
  PipelineVariant variant = PipelineVariant::kASynopticFirst;
  std::size_t token_budget = kDefaultTokenBudget;
  // Sections taken first, in this order; all other sections follow in
  // document order. Empty means the variant's default.
  std::vector<std::string> section_priority;

  std::vector<std::string> effective_priority() const;
};

std::vector<std::string> default_priority(PipelineVariant variant);

struct NormalizedInput {
  std::string text;
  std::size_t approx_token_count = 0;
  bool truncated = false;
  std::vector<std::string> sections_used;

  bool operator==(const NormalizedInput&) const = default;
};

// Lowercases, turns every Unicode punctuation character (general category P*)
// into a space, collapses whitespace runs and trims. Digits and symbols are
// kept. Invalid UTF-8 bytes become U+FFFD.
std::string normalize_text(std::string_view text);

// Number of space-separated tokens in already-normalized text.
std::size_t count_tokens(std::string_view normalized);

// Builds the text a backend scores: sections in priority order, each
// normalized, cut to the token budget on whole tokens. When no section
// yields a token, falls back to the normalized raw text. Throws
// ValidationError("empty report") for a report with no sections and no text,
// and for a zero token budget.
NormalizedInput assemble_input(const PathologyReport& report, const PipelineConfig& config,
                               const SectionSynonymTable& table = SectionSynonymTable::builtin());

NormalizedInput assemble_input(const PathologyReport& report, PipelineVariant variant,
                               std::size_t token_budget = kDefaultTokenBudget);

}  // namespace triage
