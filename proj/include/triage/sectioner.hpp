#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/corpus.hpp"

namespace triage {

// Maps raw header labels to normalized section names. Keys are stored in
// lookup form (see header_key), so matching is case- and punctuation-blind.
class SectionSynonymTable {
 public:
  // Table with the built-in header variants.
  static SectionSynonymTable defaults();
  // Shared immutable instance of defaults().
  static const SectionSynonymTable& builtin();

  // Parses "raw header = normalized name" lines. '#' starts a comment.
  static SectionSynonymTable parse(std::string_view config, std::string_view source_name = "<memory>");
  static SectionSynonymTable load(const std::filesystem::path& path);

  // Throws ValidationError for an invalid normalized name or an empty key.
  void add(std::string_view raw_header, std::string_view name);

  std::optional<std::string> lookup(std::string_view raw_header) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Lowercase, strip punctuation, collapse whitespace: "SPECIMEN(S) RECEIVED"
// becomes "specimens received".
std::string header_key(std::string_view raw_header);

struct HeaderRule {
  std::size_t max_label_chars = 48;
  double min_uppercase_ratio = 0.8;
};

// Splits raw text into sections. A header is a line whose trimmed content
// starts with a label of allowed characters followed by a colon, with the
// label's letters mostly uppercase. Text before the first header becomes
// "preamble"; unknown headers become "other". Never fails.
std::vector<Section> parse_sections(std::string_view raw_text, const SectionSynonymTable& table,
                                    const HeaderRule& rule = {});

// Concatenates header + text of every section.
std::string reassemble(const std::vector<Section>& sections);

// First section with the given name, in document order.
std::optional<Section> get_section(const PathologyReport& report, std::string_view name);

// Returns the report's sections, parsing raw_text when none are stored.
std::vector<Section> sections_of(const PathologyReport& report, const SectionSynonymTable& table);

}  // namespace triage
