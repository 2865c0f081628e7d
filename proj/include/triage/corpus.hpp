#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/labels.hpp"

namespace triage {

// One named section of a report. `header` is the exact header span as it
// appeared in the raw text (empty for the preamble), so that header + text of
// every section, concatenated in order, reproduces the report.
struct Section {
  std::string name;
  std::string text;
  std::string header;

  bool operator==(const Section&) const = default;
};

// True for a normalized section name: non-empty, lowercase, no whitespace.
bool is_valid_section_name(std::string_view name);

struct PathologyReport {
  std::string report_id;
  int diagnosis_year = 0;
  std::optional<std::string> source_site;
  std::vector<Section> sections;
  std::string raw_text;

  bool operator==(const PathologyReport&) const = default;
};

// Gold labels attached to a report. A T2 label is only meaningful for a
// cancer-positive report; validate() enforces that.
struct LabeledReport {
  PathologyReport report;
  std::optional<T1Label> t1_label;
  std::optional<T2Label> t2_label;

  bool operator==(const LabeledReport&) const = default;

  // Gold polarity for a tier, nullopt when the record carries no such label.
  std::optional<bool> gold(Tier tier) const;
};

struct Corpus {
  std::vector<LabeledReport> records;
  std::map<std::string, std::string> provenance;
};

// Throws ValidationError if any record violates the label-consistency rule,
// has an empty report_id or an invalid section name, or if report_ids repeat.
void validate(const Corpus& corpus);

struct LoadOptions {
  // Reject unknown fields instead of warning about them.
  bool strict = false;
  // Receives non-fatal diagnostics; defaults to stderr when empty.
  std::function<void(const std::string&)> warn;
};

// Reads a line-delimited JSON corpus. Blank lines are skipped; line numbers in
// error messages are 1-based physical lines.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});
Corpus parse_corpus(std::string_view content, const LoadOptions& options = {},
                    std::string_view source_name = "<memory>");

// Serializes one record per line. write_corpus replaces the target atomically.
std::string serialize_corpus(const Corpus& corpus);
std::string serialize_record(const LabeledReport& record);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct SynthSpec {
  std::int64_t n_reports = 0;
  double cancer_fraction = 0.21;
  double reportable_fraction_within_cancer = 0.8;
  // 0 gives class-agnostic text, 1 gives every signal slot a class phrase.
  double vocabulary_signal_strength = 1.0;
};

// Deterministic synthetic corpus. Class counts are fixed by rounding
// (round(n * cancer_fraction) cancers, round(cancers * reportable_fraction)
// reportables) and then assigned to positions by a seeded shuffle.
Corpus synth_corpus(const SynthSpec& spec, std::uint64_t seed);

}  // namespace triage
