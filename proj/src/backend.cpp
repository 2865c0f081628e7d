#include "triage/backend.hpp"

#include <cmath>

#include <fmt/format.h>

namespace triage {

ClassifierScore::ClassifierScore(double probability) : probability_(probability) {
  if (std::isnan(probability) || probability < 0.0 || probability > 1.0) {
    throw ValidationError(fmt::format("score {} is outside [0, 1]", probability));
  }
}

Decision decide(ClassifierScore score, double threshold, Tier task, std::string backend_id) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError(fmt::format("threshold must lie in (0, 1), got {}", threshold));
  }
  Decision d;
  d.task = task;
  d.positive = score.probability() >= threshold;
  d.score = score;
  d.threshold = threshold;
  d.backend_id = std::move(backend_id);
  return d;
}

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::kNativeBaseline ? "native_baseline" : "remote";
}

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
  if (text == "native_baseline") return BackendKind::kNativeBaseline;
  if (text == "remote") return BackendKind::kRemote;
  return std::nullopt;
}

}  // namespace triage
