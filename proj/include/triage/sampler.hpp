#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "triage/corpus.hpp"

namespace triage {

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;
};

// Ratio rule for majority-class downsampling: every kept-class record stays,
// and floor(ratio * N(kept)) sampled-class records are drawn without
// replacement (capped at what is available).
struct UndersamplePolicy {
  Tier task = Tier::kT1;
  // Polarity of the class kept in full; the other class is sampled.
  bool kept_positive = true;
  double ratio = 1.0;
  std::uint64_t seed = 0;

  // N(non_cancer) = 0.8 * N(cancer).
  static UndersamplePolicy t1_default(std::uint64_t seed) { return {Tier::kT1, true, 0.8, seed}; }
  // N(reportable) = 1.2 * N(non_reportable).
  static UndersamplePolicy t2_default(std::uint64_t seed) { return {Tier::kT2, false, 1.2, seed}; }
};

struct ClassCounts {
  Tier task = Tier::kT1;
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t unlabeled = 0;

  std::size_t total() const { return positive + negative + unlabeled; }
  std::size_t of(bool positive_class) const { return positive_class ? positive : negative; }
  bool operator==(const ClassCounts&) const = default;
};

ClassCounts class_counts(const Corpus& corpus, Tier task);

// floor(ratio * kept_count), robust to products that land a hair below an
// integer in binary floating point.
std::size_t undersample_target(double ratio, std::size_t kept_count);

// Disjoint, exhaustive partition; both halves keep original record order.
// Stratified splits put round(train_fraction * N(class)) of each class in
// train. Throws ValidationError for a record without the task's label.
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec, Tier task);

Corpus undersample(const Corpus& train, const UndersamplePolicy& policy);

// Records carrying a label for the task (all records for T1; T2 keeps only
// those with a T2 label).
Corpus eligible_for(const Corpus& corpus, Tier task);

struct DatasetBuild {
  Corpus train;
  Corpus test;
  ClassCounts eligible;
  ClassCounts train_before;
  ClassCounts train_after;
  ClassCounts test_counts;
  std::size_t excluded = 0;
};

// Split first, then undersample the training half; the test half keeps its
// natural class distribution.
DatasetBuild build_dataset(const Corpus& corpus, Tier task, const SplitSpec& split_spec,
                           const UndersamplePolicy& policy);

}  // namespace triage
