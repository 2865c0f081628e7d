#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triage/error.hpp"
#include "triage/labels.hpp"
#include "triage/preprocess.hpp"

namespace triage {

// Positive-class probability. Construction rejects NaN and values outside
// [0, 1].
class ClassifierScore {
 public:
  explicit ClassifierScore(double probability);
  double probability() const { return probability_; }
  bool operator==(const ClassifierScore&) const = default;

 private:
  double probability_;
};

// Hard label for one member of a tier, with what produced it.
struct Decision {
  Tier task = Tier::kT1;
  bool positive = false;
  ClassifierScore score{0.0};
  double threshold = 0.5;
  std::string backend_id;

  std::string_view label() const { return label_name(task, positive); }
};

inline constexpr double kDefaultThreshold = 0.5;

// Positive iff probability >= threshold; ties resolve positive. Throws
// ValidationError unless 0 < threshold < 1.
Decision decide(ClassifierScore score, double threshold, Tier task, std::string backend_id = {});

enum class BackendKind { kNativeBaseline, kRemote };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view text);

struct BackendDescriptor {
  std::string backend_id;
  Tier task = Tier::kT1;
  PipelineVariant variant = PipelineVariant::kASynopticFirst;
  BackendKind kind = BackendKind::kNativeBaseline;
};

// Any batch scorer for one tier task. Implementations are immutable once
// constructed and may be shared across threads.
class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;

  virtual const BackendDescriptor& descriptor() const = 0;

  // One score per input, in input order. Throws ValidationError for an empty
  // batch; remote implementations throw RemoteError.
  virtual std::vector<ClassifierScore> score_batch(std::span<const NormalizedInput> inputs) const = 0;
};

}  // namespace triage
