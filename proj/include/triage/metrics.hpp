#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "triage/labels.hpp"

namespace triage {

// Counts oriented to one declared positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  // Same decisions seen with the other class as positive.
  ConfusionMatrix flipped() const { return {tn, fn, tp, fp}; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// preds/golds hold label polarity (true = the tier's positive class).
// `positive` picks which polarity the matrix treats as positive. Throws
// ValidationError on length mismatch or empty input.
ConfusionMatrix confusion(const std::vector<bool>& preds, const std::vector<bool>& golds, bool positive = true);

// nullopt marks an undefined metric (zero denominator).
struct ClassMetrics {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> specificity;
  std::optional<double> f1;
  std::optional<double> accuracy;

  bool operator==(const ClassMetrics&) const = default;
};

// Harmonic mean; 0 when both are 0.
double f1_from(double precision, double recall);

ClassMetrics class_metrics(const ConfusionMatrix& cm);

struct EvalReport {
  Tier task = Tier::kT1;
  ConfusionMatrix confusion;  // oriented to the tier's positive class
  ClassMetrics positive_class;
  ClassMetrics negative_class;
  // F1 over pooled per-class counts; equals accuracy for two classes.
  std::optional<double> micro_f1;
  // Mean of the two per-class F1 values; undefined if either is.
  std::optional<double> macro_f1;
  std::size_t missed_positive = 0;
  std::size_t n_evaluated = 0;
};

EvalReport eval_report(const std::vector<bool>& preds, const std::vector<bool>& golds, Tier task);

// Round half away from zero to `digits` decimals (metrics are non-negative,
// so this is round-half-up).
double round_half_up(double value, int digits = 2);

// "0.93", or "—" for an undefined metric.
std::string format_metric(const std::optional<double>& value);

struct ModelRow {
  std::string name;
  EvalReport report;
};

// One evaluated model per row pair, in presentation order (members first,
// then the combined ensemble).
struct EvalTable {
  Tier task = Tier::kT1;
  std::string gating;
  std::vector<ModelRow> models;
};

// Rows "name (class)" with Recall / Precision / F1 score columns, the
// negative class first for each model, then a missed-positive summary line.
std::string render_table(const EvalTable& table);

nlohmann::ordered_json to_json(const EvalTable& table);

}  // namespace triage
