#include "triage/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "triage/error.hpp"

namespace triage {
namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  return n;
}

std::string pad_left(std::string_view s, std::size_t width) {
  const std::size_t w = display_width(s);
  return std::string(width > w ? width - w : 0, ' ') + std::string(s);
}

std::string pad_right(std::string_view s, std::size_t width) {
  const std::size_t w = display_width(s);
  return std::string(s) + std::string(width > w ? width - w : 0, ' ');
}

nlohmann::ordered_json metric_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json class_json(const ClassMetrics& m) {
  nlohmann::ordered_json j;
  j["recall"] = metric_json(m.recall);
  j["precision"] = metric_json(m.precision);
  j["specificity"] = metric_json(m.specificity);
  j["f1"] = metric_json(m.f1);
  j["accuracy"] = metric_json(m.accuracy);
  return j;
}

}  // namespace

ConfusionMatrix confusion(const std::vector<bool>& preds, const std::vector<bool>& golds, bool positive) {
  if (preds.size() != golds.size()) {
    throw ValidationError(fmt::format("{} predictions for {} gold labels", preds.size(), golds.size()));
  }
  if (preds.empty()) throw ValidationError("confusion matrix of zero records");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == positive;
    const bool g = golds[i] == positive;
    if (p && g) {
      ++cm.tp;
    } else if (p) {
      ++cm.fp;
    } else if (g) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

double f1_from(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
  ClassMetrics m;
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp);
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  if (m.precision && m.recall) m.f1 = f1_from(*m.precision, *m.recall);
  return m;
}

EvalReport eval_report(const std::vector<bool>& preds, const std::vector<bool>& golds, Tier task) {
  EvalReport r;
  r.task = task;
  r.confusion = confusion(preds, golds, true);
  r.positive_class = class_metrics(r.confusion);
  r.negative_class = class_metrics(r.confusion.flipped());
  r.n_evaluated = r.confusion.total();
  r.missed_positive = r.confusion.fn;

  // Pool both one-vs-rest matrices; for two classes every error is one false
  // positive and one false negative.
  const ConfusionMatrix neg = r.confusion.flipped();
  const std::size_t tp = r.confusion.tp + neg.tp;
  const std::size_t fp = r.confusion.fp + neg.fp;
  const std::size_t fn = r.confusion.fn + neg.fn;
  r.micro_f1 = ratio(2 * tp, 2 * tp + fp + fn);
  if (r.positive_class.f1 && r.negative_class.f1) r.macro_f1 = (*r.positive_class.f1 + *r.negative_class.f1) / 2.0;
  return r;
}

double round_half_up(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  // The nudge absorbs representation error such as 0.945 being stored as
  // 0.94499999999999995.
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

std::string format_metric(const std::optional<double>& value) {
  if (!value) return "—";
  return fmt::format("{:.2f}", round_half_up(*value, 2));
}

std::string render_table(const EvalTable& table) {
  struct Row {
    std::string label;
    const ClassMetrics* m;
  };
  std::vector<Row> rows;
  for (const auto& model : table.models) {
    rows.push_back({fmt::format("{} ({})", model.name, display_name(table.task, false)), &model.report.negative_class});
    rows.push_back({fmt::format("{} ({})", model.name, display_name(table.task, true)), &model.report.positive_class});
  }
  std::size_t name_width = display_width("Model (class)");
  for (const auto& r : rows) name_width = std::max(name_width, display_width(r.label));

  std::string out = pad_right("Model (class)", name_width) + "  " + pad_left("Recall", 6) + "  " +
                    pad_left("Precision", 9) + "  " + pad_left("F1 score", 8) + "\n";
  for (const auto& r : rows) {
    out += pad_right(r.label, name_width) + "  " + pad_left(format_metric(r.m->recall), 6) + "  " +
           pad_left(format_metric(r.m->precision), 9) + "  " + pad_left(format_metric(r.m->f1), 8) + "\n";
  }

  out += fmt::format("Missed {}:", display_name(table.task, true));
  for (std::size_t i = 0; i < table.models.size(); ++i) {
    out += fmt::format("{} {}={}", i == 0 ? "" : ",", table.models[i].name, table.models[i].report.missed_positive);
  }
  out += "\n";
  for (const auto& model : table.models) {
    out += fmt::format("{}: n={} micro F1={} macro F1={}\n", model.name, model.report.n_evaluated,
                       format_metric(model.report.micro_f1), format_metric(model.report.macro_f1));
  }
  return out;
}

nlohmann::ordered_json to_json(const EvalTable& table) {
  nlohmann::ordered_json j;
  j["task"] = to_string(table.task);
  if (!table.gating.empty()) j["gating"] = table.gating;
  j["models"] = nlohmann::ordered_json::array();
  for (const auto& model : table.models) {
    const auto& r = model.report;
    nlohmann::ordered_json m;
    m["name"] = model.name;
    m["n_evaluated"] = r.n_evaluated;
    m["missed_positive"] = r.missed_positive;
    m["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
    m["classes"][std::string(label_name(table.task, false))] = class_json(r.negative_class);
    m["classes"][std::string(label_name(table.task, true))] = class_json(r.positive_class);
    m["micro_f1"] = metric_json(r.micro_f1);
    m["macro_f1"] = metric_json(r.macro_f1);
    j["models"].push_back(std::move(m));
  }
  return j;
}

}  // namespace triage
