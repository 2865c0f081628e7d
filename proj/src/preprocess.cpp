#include "triage/preprocess.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "triage/error.hpp"

namespace triage {
namespace {

bool is_punctuation(UChar32 c) { return (U_GET_GC_MASK(c) & U_GC_P_MASK) != 0; }

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  std::int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

// Appends up to `room` tokens of normalized text to `out`; returns the number
// appended and sets `overflow` when tokens were left over.
std::size_t append_tokens(std::string& out, std::string_view normalized, std::size_t room, bool& overflow) {
  std::size_t taken = 0;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    const std::size_t end = std::min(normalized.find(' ', pos), normalized.size());
    if (taken == room) {
      overflow = true;
      break;
    }
    if (!out.empty()) out.push_back(' ');
    out.append(normalized.substr(pos, end - pos));
    ++taken;
    pos = end + 1;
  }
  return taken;
}

}  // namespace

std::string_view to_string(PipelineVariant variant) {
  return variant == PipelineVariant::kASynopticFirst ? "A_synoptic_first" : "B_diagnosis_first";
}

std::optional<PipelineVariant> parse_variant(std::string_view text) {
  if (text == "A_synoptic_first" || text == "A") return PipelineVariant::kASynopticFirst;
  if (text == "B_diagnosis_first" || text == "B") return PipelineVariant::kBDiagnosisFirst;
  return std::nullopt;
}

std::vector<std::string> default_priority(PipelineVariant variant) {
  if (variant == PipelineVariant::kASynopticFirst) return {"synoptic", "diagnosis", "specimen"};
  return {"diagnosis", "synoptic", "specimen"};
}

std::vector<std::string> PipelineConfig::effective_priority() const {
  return section_priority.empty() ? default_priority(variant) : section_priority;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    if (u_isUWhiteSpace(c) || is_punctuation(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    append_utf8(out, u_tolower(c));
  }
  return out;
}

std::size_t count_tokens(std::string_view normalized) {
  if (normalized.empty()) return 0;
  std::size_t n = 1;
  for (char c : normalized) n += c == ' ';
  return n;
}

NormalizedInput assemble_input(const PathologyReport& report, const PipelineConfig& config,
                               const SectionSynonymTable& table) {
  if (config.token_budget == 0) throw ValidationError("token budget must be positive");
  const std::vector<Section> sections = sections_of(report, table);
  if (sections.empty() && report.raw_text.empty()) throw ValidationError("empty report");

  // Priority sections take their first occurrence; everything else, including
  // later duplicates, follows in document order.
  std::vector<std::size_t> order;
  std::vector<bool> used(sections.size(), false);
  for (const auto& name : config.effective_priority()) {
    for (std::size_t i = 0; i < sections.size(); ++i) {
      if (!used[i] && sections[i].name == name) {
        order.push_back(i);
        used[i] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (!used[i]) order.push_back(i);
  }

  NormalizedInput input;
  std::size_t room = config.token_budget;
  for (std::size_t idx : order) {
    const std::string normalized = normalize_text(sections[idx].text);
    if (normalized.empty()) continue;
    if (room == 0) {
      input.truncated = true;
      break;
    }
    const std::size_t taken = append_tokens(input.text, normalized, room, input.truncated);
    room -= taken;
    input.sections_used.push_back(sections[idx].name);
    if (input.truncated) break;
  }

  if (input.sections_used.empty()) {
    const std::string normalized = normalize_text(report.raw_text);
    append_tokens(input.text, normalized, config.token_budget, input.truncated);
  }
  input.approx_token_count = count_tokens(input.text);
  return input;
}

NormalizedInput assemble_input(const PathologyReport& report, PipelineVariant variant, std::size_t token_budget) {
  PipelineConfig config;
  config.variant = variant;
  config.token_budget = token_budget;
  return assemble_input(report, config);
}

}  // namespace triage
