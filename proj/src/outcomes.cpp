#include "triage/outcomes.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "triage/fs_util.hpp"

namespace triage {
namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json tier_json(const EnsembleResult& r) {
  ordered_json j;
  j["combined"] = r.combined_label();
  j["labels"] = ordered_json::array();
  j["scores"] = ordered_json::array();
  j["backend_ids"] = ordered_json::array();
  j["thresholds"] = ordered_json::array();
  for (const auto& d : r.member_decisions) {
    j["labels"].push_back(d.label());
    j["scores"].push_back(d.score.probability());
    j["backend_ids"].push_back(d.backend_id);
    j["thresholds"].push_back(d.threshold);
  }
  return j;
}

EnsembleResult parse_tier(const json& j, Tier task, const std::string& where) {
  auto fail = [&](std::string_view what) { throw ValidationError(fmt::format("{}: {}", where, what)); };
  if (!j.is_object()) fail("expected an object");
  for (const char* key : {"combined", "labels", "scores", "backend_ids", "thresholds"}) {
    if (!j.contains(key)) fail(fmt::format("missing '{}'", key));
  }
  const auto& labels = j["labels"];
  const auto& scores = j["scores"];
  const auto& ids = j["backend_ids"];
  const auto& thresholds = j["thresholds"];
  if (!labels.is_array() || labels.empty() || labels.size() != scores.size() || labels.size() != ids.size() ||
      labels.size() != thresholds.size()) {
    fail("labels, scores, backend_ids and thresholds must be equal-length non-empty arrays");
  }

  EnsembleResult r;
  r.task = task;
  try {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto polarity = parse_label_polarity(task, labels[i].get<std::string>());
      if (!polarity) fail(fmt::format("label '{}' is not a {} label", labels[i].get<std::string>(), to_string(task)));
      Decision d = decide(ClassifierScore(scores[i].get<double>()), thresholds[i].get<double>(), task,
                          ids[i].get<std::string>());
      if (d.positive != *polarity) fail(fmt::format("label of '{}' disagrees with its score", d.backend_id));
      r.member_decisions.push_back(std::move(d));
    }
    r.combined_positive = or_combine(r.member_decisions);
    if (j["combined"].get<std::string>() != r.combined_label()) fail("combined label is not the OR of members");
  } catch (const json::exception& e) {
    fail(fmt::format("wrong field type: {}", e.what()));
  } catch (const ValidationError& e) {
    if (std::string_view(e.what()).starts_with(where)) throw;
    fail(e.what());
  }
  return r;
}

}  // namespace

std::string serialize_outcome(const TriageOutcome& o) {
  ordered_json j;
  j["report_id"] = o.report_id;
  j["final"] = to_string(o.final_label);
  j["gating"] = to_string(o.gating);
  j["t1"] = tier_json(o.t1);
  if (o.t2) j["t2"] = tier_json(*o.t2);
  return j.dump();
}

std::string serialize_outcomes(const std::vector<TriageOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    out += serialize_outcome(o);
    out += '\n';
  }
  return out;
}

std::vector<TriageOutcome> parse_outcomes(std::string_view content, std::string_view source_name) {
  std::vector<TriageOutcome> outcomes;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? content.npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const std::string where = fmt::format("{}:{}", source_name, line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(fmt::format("{}: malformed outcome: {}", where, e.what()));
    }
    if (!j.is_object() || !j.contains("report_id") || !j["report_id"].is_string() || !j.contains("final") ||
        !j["final"].is_string() || !j.contains("t1")) {
      throw ValidationError(fmt::format("{}: outcome needs report_id, final and t1", where));
    }

    TriageOutcome o;
    o.report_id = j["report_id"].get<std::string>();
    const auto gating = parse_gating(j.value("gating", std::string("predicted")));
    if (!gating) throw ValidationError(fmt::format("{}: unknown gating mode", where));
    o.gating = *gating;
    o.t1 = parse_tier(j["t1"], Tier::kT1, where + " t1");
    if (j.contains("t2") && !j["t2"].is_null()) o.t2 = parse_tier(j["t2"], Tier::kT2, where + " t2");

    const auto final_label = parse_final_label(j["final"].get<std::string>());
    if (!final_label) throw ValidationError(fmt::format("{}: unknown final label", where));
    o.final_label = *final_label;
    if (o.final_label != final_label_of(o.t1, o.t2)) {
      throw ValidationError(fmt::format("{}: final label is inconsistent with the tier results", where));
    }
    if (o.gating == T2Gating::kPredicted && o.t2.has_value() != o.t1.combined_positive) {
      throw ValidationError(fmt::format("{}: T2 result present without a positive T1 (or missing after one)", where));
    }
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

std::vector<TriageOutcome> load_outcomes(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError(fmt::format("outcomes file '{}' does not exist", path.string()));
  return parse_outcomes(read_file(path), path.string());
}

}  // namespace triage
