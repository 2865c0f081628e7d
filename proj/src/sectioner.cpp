#include "triage/sectioner.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "triage/error.hpp"

namespace triage {
namespace {

constexpr bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
constexpr bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
constexpr bool is_hspace(char c) { return c == ' ' || c == '\t'; }

// Characters allowed in a header label. Parentheses are accepted so that
// headers such as "SPECIMEN(S) RECEIVED:" qualify.
constexpr bool is_label_char(char c) {
  return is_ascii_letter(c) || is_ascii_digit(c) || c == ' ' || c == '&' || c == ',' || c == '/' ||
         c == '-' || c == '(' || c == ')';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_hspace(s.front()) || s.front() == '\r' || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (is_hspace(s.back()) || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

struct HeaderMatch {
  std::string_view label;
  std::size_t header_len;
};

std::optional<HeaderMatch> match_header(std::string_view line, const HeaderRule& rule) {
  std::size_t start = 0;
  while (start < line.size() && is_hspace(line[start])) ++start;
  const std::size_t colon = line.find(':', start);
  if (colon == std::string_view::npos) return std::nullopt;

  const std::string_view label = line.substr(start, colon - start);
  if (label.empty() || label.size() > rule.max_label_chars) return std::nullopt;

  std::size_t letters = 0;
  std::size_t upper = 0;
  for (char c : label) {
    if (!is_label_char(c)) return std::nullopt;
    if (is_ascii_letter(c)) {
      ++letters;
      if (c >= 'A' && c <= 'Z') ++upper;
    }
  }
  if (letters == 0) return std::nullopt;
  if (static_cast<double>(upper) < rule.min_uppercase_ratio * static_cast<double>(letters)) return std::nullopt;

  // The header span swallows trailing blanks, and the line break too when
  // nothing else follows the colon.
  std::size_t end = colon + 1;
  while (end < line.size() && is_hspace(line[end])) ++end;
  const std::string_view rest = line.substr(end);
  if (rest.empty() || rest == "\n" || rest == "\r\n") end = line.size();
  return HeaderMatch{label, end};
}

}  // namespace

std::string header_key(std::string_view raw_header) {
  std::string out;
  bool pending_space = false;
  for (char c : raw_header) {
    const auto u = static_cast<unsigned char>(c);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (u < 0x80 && !is_ascii_letter(c) && !is_ascii_digit(c)) continue;
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

SectionSynonymTable SectionSynonymTable::defaults() {
  SectionSynonymTable table;
  static constexpr std::pair<const char*, const char*> kEntries[] = {
      {"synoptic", "synoptic"},
      {"synoptic report", "synoptic"},
      {"synoptic data", "synoptic"},
      {"synoptic summary", "synoptic"},
      {"cancer checklist", "synoptic"},
      {"diagnosis", "diagnosis"},
      {"final diagnosis", "diagnosis"},
      {"pathologic diagnosis", "diagnosis"},
      {"pathological diagnosis", "diagnosis"},
      {"final pathologic diagnosis", "diagnosis"},
      {"specimen", "specimen"},
      {"specimens", "specimen"},
      {"specimen(s) received", "specimen"},
      {"specimen received", "specimen"},
      {"gross description", "specimen"},
      {"clinical history", "clinical"},
      {"clinical information", "clinical"},
      {"microscopic description", "microscopic"},
      {"comment", "comment"},
      {"comments", "comment"},
  };
  for (const auto& [raw, name] : kEntries) table.add(raw, name);
  return table;
}

const SectionSynonymTable& SectionSynonymTable::builtin() {
  static const SectionSynonymTable table = defaults();
  return table;
}

void SectionSynonymTable::add(std::string_view raw_header, std::string_view name) {
  if (!is_valid_section_name(name)) {
    throw ValidationError(fmt::format("invalid section name '{}' for header '{}'", name, raw_header));
  }
  std::string key = header_key(raw_header);
  if (key.empty()) throw ValidationError(fmt::format("empty header key for section '{}'", name));
  entries_[std::move(key)] = std::string(name);
}

std::optional<std::string> SectionSynonymTable::lookup(std::string_view raw_header) const {
  const auto it = entries_.find(header_key(raw_header));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

SectionSynonymTable SectionSynonymTable::parse(std::string_view config, std::string_view source_name) {
  SectionSynonymTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= config.size()) {
    const std::size_t nl = config.find('\n', pos);
    std::string_view line = config.substr(pos, nl == std::string_view::npos ? config.npos : nl - pos);
    pos = nl == std::string_view::npos ? config.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.rfind('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(fmt::format("{}:{}: expected 'raw header = section name'", source_name, line_no));
    }
    try {
      table.add(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", source_name, line_no, e.what()));
    }
  }
  return table;
}

SectionSynonymTable SectionSynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open synonym table '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::vector<Section> parse_sections(std::string_view raw_text, const SectionSynonymTable& table,
                                    const HeaderRule& rule) {
  std::vector<Section> sections;
  std::size_t pos = 0;
  while (pos < raw_text.size()) {
    const std::size_t nl = raw_text.find('\n', pos);
    const std::size_t line_end = nl == std::string_view::npos ? raw_text.size() : nl + 1;
    const std::string_view line = raw_text.substr(pos, line_end - pos);
    pos = line_end;

    if (const auto header = match_header(line, rule)) {
      Section section;
      section.name = table.lookup(header->label).value_or("other");
      section.header = std::string(line.substr(0, header->header_len));
      section.text = std::string(line.substr(header->header_len));
      sections.push_back(std::move(section));
      continue;
    }
    if (sections.empty()) sections.push_back(Section{"preamble", "", ""});
    sections.back().text.append(line);
  }
  return sections;
}

std::string reassemble(const std::vector<Section>& sections) {
  std::string out;
  for (const auto& s : sections) {
    out += s.header;
    out += s.text;
  }
  return out;
}

std::optional<Section> get_section(const PathologyReport& report, std::string_view name) {
  for (const auto& s : report.sections) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

std::vector<Section> sections_of(const PathologyReport& report, const SectionSynonymTable& table) {
  if (!report.sections.empty()) return report.sections;
  return parse_sections(report.raw_text, table);
}

}  // namespace triage
