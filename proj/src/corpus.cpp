#include "triage/corpus.hpp"

#include <iostream>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "triage/error.hpp"
#include "triage/fs_util.hpp"

namespace triage {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

class RecordReader {
 public:
  RecordReader(std::string_view source, std::size_t line_no) : source_(source), line_no_(line_no) {}

  [[noreturn]] void fail(std::string_view field, std::string_view what) const {
    throw ValidationError(fmt::format("{}:{}: field '{}': {}", source_, line_no_, field, what));
  }

  const json& require(const json& obj, const char* field) const {
    const auto it = obj.find(field);
    if (it == obj.end()) fail(field, "missing required field");
    return *it;
  }

  std::string string_field(const json& value, std::string_view field) const {
    if (!value.is_string()) fail(field, "expected a string");
    return value.get<std::string>();
  }

 private:
  std::string_view source_;
  std::size_t line_no_;
};

constexpr std::string_view kRecordFields[] = {"report_id", "raw_text",  "diagnosis_year", "source_site",
                                              "sections",  "t1_label", "t2_label"};
constexpr std::string_view kSectionFields[] = {"name", "text", "header"};

template <std::size_t N>
bool known(std::string_view key, const std::string_view (&fields)[N]) {
  for (auto f : fields) {
    if (f == key) return true;
  }
  return false;
}

LabeledReport parse_record(const json& obj, const RecordReader& r, const LoadOptions& options,
                           const std::function<void(const std::string&)>& warn, std::string_view source,
                           std::size_t line_no) {
  if (!obj.is_object()) r.fail("<record>", "expected a JSON object");

  for (const auto& [key, _] : obj.items()) {
    if (known(key, kRecordFields)) continue;
    if (options.strict) r.fail(key, "unknown field");
    warn(fmt::format("{}:{}: ignoring unknown field '{}'", source, line_no, key));
  }

  LabeledReport rec;
  rec.report.report_id = r.string_field(r.require(obj, "report_id"), "report_id");
  if (rec.report.report_id.empty()) r.fail("report_id", "must be non-empty");

  const json& year = r.require(obj, "diagnosis_year");
  if (!year.is_number_integer()) r.fail("diagnosis_year", "expected an integer");
  rec.report.diagnosis_year = year.get<int>();

  rec.report.raw_text = r.string_field(r.require(obj, "raw_text"), "raw_text");

  if (const auto it = obj.find("source_site"); it != obj.end() && !it->is_null()) {
    rec.report.source_site = r.string_field(*it, "source_site");
  }

  if (const auto it = obj.find("sections"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) r.fail("sections", "expected an array");
    for (const auto& s : *it) {
      if (!s.is_object()) r.fail("sections", "expected objects with name and text");
      for (const auto& [key, _] : s.items()) {
        if (known(key, kSectionFields)) continue;
        if (options.strict) r.fail("sections." + key, "unknown field");
        warn(fmt::format("{}:{}: ignoring unknown section field '{}'", source, line_no, key));
      }
      Section section;
      section.name = r.string_field(r.require(s, "name"), "sections.name");
      if (!is_valid_section_name(section.name)) {
        r.fail("sections.name", fmt::format("'{}' is not a normalized section name", section.name));
      }
      section.text = r.string_field(r.require(s, "text"), "sections.text");
      if (const auto h = s.find("header"); h != s.end()) section.header = r.string_field(*h, "sections.header");
      rec.report.sections.push_back(std::move(section));
    }
  }

  if (const auto it = obj.find("t1_label"); it != obj.end() && !it->is_null()) {
    const auto label = parse_t1_label(r.string_field(*it, "t1_label"));
    if (!label) r.fail("t1_label", "expected \"cancer\" or \"non_cancer\"");
    rec.t1_label = *label;
  }
  if (const auto it = obj.find("t2_label"); it != obj.end() && !it->is_null()) {
    const auto label = parse_t2_label(r.string_field(*it, "t2_label"));
    if (!label) r.fail("t2_label", "expected \"reportable\" or \"non_reportable\"");
    rec.t2_label = *label;
  }
  if (rec.t2_label && rec.t1_label != T1Label::kCancer) {
    r.fail("t2_label", "a T2 label requires t1_label = \"cancer\"");
  }
  return rec;
}

}  // namespace

bool is_valid_section_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return false;
    if (c >= 'A' && c <= 'Z') return false;
  }
  return true;
}

std::optional<bool> LabeledReport::gold(Tier tier) const {
  if (tier == Tier::kT1) {
    if (!t1_label) return std::nullopt;
    return is_positive(*t1_label);
  }
  if (!t2_label) return std::nullopt;
  return is_positive(*t2_label);
}

void validate(const Corpus& corpus) {
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& rec = corpus.records[i];
    const auto& id = rec.report.report_id;
    if (id.empty()) throw ValidationError(fmt::format("record {}: empty report_id", i + 1));
    if (const auto [it, inserted] = seen.emplace(id, i); !inserted) {
      throw ValidationError(fmt::format("duplicate report_id '{}' at records {} and {}", id, it->second + 1, i + 1));
    }
    if (rec.t2_label && rec.t1_label != T1Label::kCancer) {
      throw ValidationError(fmt::format("report '{}': a T2 label requires t1_label = cancer", id));
    }
    for (const auto& s : rec.report.sections) {
      if (!is_valid_section_name(s.name)) {
        throw ValidationError(fmt::format("report '{}': invalid section name '{}'", id, s.name));
      }
    }
  }
}

Corpus parse_corpus(std::string_view content, const LoadOptions& options, std::string_view source_name) {
  const auto warn = options.warn ? options.warn : [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };

  Corpus corpus;
  corpus.provenance["source"] = std::string(source_name);
  std::unordered_map<std::string, std::size_t> line_of_id;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? content.npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(fmt::format("{}:{}: malformed record: {}", source_name, line_no, e.what()));
    }
    RecordReader reader(source_name, line_no);
    LabeledReport rec = parse_record(obj, reader, options, warn, source_name, line_no);

    const auto [it, inserted] = line_of_id.emplace(rec.report.report_id, line_no);
    if (!inserted) {
      throw ValidationError(fmt::format("{}: duplicate report_id '{}' on lines {} and {}", source_name,
                                        rec.report.report_id, it->second, line_no));
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  if (!std::filesystem::exists(path)) throw IoError(fmt::format("corpus file '{}' does not exist", path.string()));
  return parse_corpus(read_file(path), options, path.string());
}

std::string serialize_record(const LabeledReport& rec) {
  ordered_json obj;
  obj["report_id"] = rec.report.report_id;
  obj["diagnosis_year"] = rec.report.diagnosis_year;
  if (rec.report.source_site) obj["source_site"] = *rec.report.source_site;
  obj["raw_text"] = rec.report.raw_text;
  if (!rec.report.sections.empty()) {
    ordered_json sections = ordered_json::array();
    for (const auto& s : rec.report.sections) {
      ordered_json entry;
      entry["name"] = s.name;
      entry["text"] = s.text;
      if (!s.header.empty()) entry["header"] = s.header;
      sections.push_back(std::move(entry));
    }
    obj["sections"] = std::move(sections);
  }
  if (rec.t1_label) obj["t1_label"] = to_string(*rec.t1_label);
  if (rec.t2_label) obj["t2_label"] = to_string(*rec.t2_label);
  try {
    return obj.dump();
  } catch (const json::type_error& e) {
    throw ValidationError(fmt::format("report '{}': cannot serialize: {}", rec.report.report_id, e.what()));
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& rec : corpus.records) {
    out += serialize_record(rec);
    out += '\n';
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  validate(corpus);
  write_file_atomic(path, serialize_corpus(corpus));
}

}  // namespace triage
