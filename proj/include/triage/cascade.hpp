#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triage/backend.hpp"
#include "triage/corpus.hpp"
#include "triage/preprocess.hpp"
#include "triage/sectioner.hpp"

namespace triage {

struct TierMember {
  std::shared_ptr<const ClassifierBackend> backend;
  PipelineConfig pipeline;
  double threshold = kDefaultThreshold;
};

// Two members per tier, one per pipeline variant.
struct TierConfig {
  Tier task = Tier::kT1;
  std::array<TierMember, 2> members;

  // Throws ValidationError: missing backend, backend task mismatch, equal
  // variants, duplicate backend ids, threshold outside (0, 1).
  void validate() const;
};

struct EnsembleResult {
  Tier task = Tier::kT1;
  std::vector<Decision> member_decisions;
  bool combined_positive = false;

  static constexpr std::string_view combined_by = "or";
  std::string_view combined_label() const { return label_name(task, combined_positive); }
};

// Positive iff any decision is positive. Throws ValidationError for an empty
// list or mixed tasks.
bool or_combine(std::span<const Decision> decisions);

enum class FinalLabel { kNonCancer, kCancerNonReportable, kCancerReportable };

std::string_view to_string(FinalLabel label);
std::optional<FinalLabel> parse_final_label(std::string_view text);

// Which reports receive a T2 pass. kPredicted is the production flow (T1
// ensemble positives); kGold runs T2 on gold cancer-positive reports, the set
// T2 metrics are normally reported on.
enum class T2Gating { kPredicted, kGold };

std::string_view to_string(T2Gating gating);
std::optional<T2Gating> parse_gating(std::string_view text);

// With kPredicted gating, t2 is present iff t1 is positive. With kGold
// gating, t2 is present iff the gold T1 label is cancer. In both modes final
// is non_cancer iff t1 is negative, and cancer_reportable iff t1 and t2 are
// both positive.
struct TriageOutcome {
  std::string report_id;
  EnsembleResult t1;
  std::optional<EnsembleResult> t2;
  FinalLabel final_label = FinalLabel::kNonCancer;
  T2Gating gating = T2Gating::kPredicted;
};

struct CascadeOptions {
  // Reports per scoring call.
  std::size_t batch_size = 64;
  // Concurrent batches; output is identical for any value.
  std::size_t workers = 1;
  const SectionSynonymTable* sections = nullptr;
};

// Raised when a member fails on a batch. No partial results are returned.
class TierError : public Error {
 public:
  TierError(const std::string& message, ExitCode code) : Error(message), code_(code) {}
  ExitCode exit_code() const override { return code_; }

 private:
  ExitCode code_;
};

std::vector<EnsembleResult> run_tier(std::span<const PathologyReport> reports, const TierConfig& config,
                                     const CascadeOptions& options = {});

std::vector<TriageOutcome> triage(std::span<const PathologyReport> reports, const TierConfig& t1,
                                  const TierConfig& t2, const CascadeOptions& options = {});

// T2 runs on every record whose gold T1 label is cancer, regardless of the
// T1 prediction.
std::vector<TriageOutcome> triage_gold_gated(std::span<const LabeledReport> records, const TierConfig& t1,
                                             const TierConfig& t2, const CascadeOptions& options = {});

FinalLabel final_label_of(const EnsembleResult& t1, const std::optional<EnsembleResult>& t2);

}  // namespace triage
