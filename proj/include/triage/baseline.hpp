#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triage/backend.hpp"

namespace triage {

// Sorted, de-duplicated sparse vector with unit L2 norm.
struct SparseFeatures {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  bool operator==(const SparseFeatures&) const = default;
};

// 64-bit FNV-1a. Platform independent, unlike std::hash.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Unigram and bigram counts of the space-separated tokens, hashed into
// `feature_dim` buckets (a power of two) and scaled to unit length.
SparseFeatures hash_features(std::string_view normalized_text, std::size_t feature_dim);

inline constexpr std::size_t kDefaultFeatureDim = std::size_t{1} << 18;

struct BaselineHyper {
  int epochs = 5;
  double learning_rate = 0.5;
  std::size_t feature_dim = kDefaultFeatureDim;
  double l2 = 1e-6;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double learning_rate = 0.0;
  double l2 = 0.0;
  // Full regularized objective after each epoch.
  std::vector<double> loss_history;

  bool operator==(const TrainingMeta&) const = default;
};

// Logistic regression over hashed n-gram features.
struct BaselineModel {
  std::size_t feature_dim = 0;
  std::vector<double> weights;
  double bias = 0.0;
  TrainingMeta meta;

  // Model with all-zero weights; every prediction is 0.5.
  static BaselineModel zeros(std::size_t feature_dim);

  double margin(const SparseFeatures& x) const;
  double predict(const SparseFeatures& x) const;
  double predict(const NormalizedInput& input) const;

  bool operator==(const BaselineModel&) const = default;
};

struct TrainingExample {
  NormalizedInput input;
  bool positive = false;
};

// Mean logistic loss plus (l2 / 2) * ||w||^2; the bias is not regularized.
double objective(const BaselineModel& model, std::span<const TrainingExample> data, double l2);

struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};

// Exact gradient of objective() with respect to weights and bias.
Gradient objective_gradient(const BaselineModel& model, std::span<const TrainingExample> data, double l2);

// Plain SGD on objective(), one pass per epoch over a seeded permutation.
// Deterministic for fixed inputs, hyperparameters and seed. Throws
// ValidationError("degenerate training set") when only one class is present.
BaselineModel train_baseline(std::span<const TrainingExample> train, const BaselineHyper& hyper, std::uint64_t seed);

// Fraction of examples whose thresholded prediction matches the label.
double training_accuracy(const BaselineModel& model, std::span<const TrainingExample> data,
                         double threshold = kDefaultThreshold);

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Little-endian binary: magic "TRBM", format_version, feature_dim, seed,
// training metadata, bias, then feature_dim weights.
std::string encode_model(const BaselineModel& model);
BaselineModel decode_model(std::string_view bytes);
void save_model(const BaselineModel& model, const std::filesystem::path& path);
BaselineModel load_model(const std::filesystem::path& path);

class BaselineBackend final : public ClassifierBackend {
 public:
  BaselineBackend(BackendDescriptor descriptor, std::shared_ptr<const BaselineModel> model);

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<ClassifierScore> score_batch(std::span<const NormalizedInput> inputs) const override;

  const BaselineModel& model() const { return *model_; }

 private:
  BackendDescriptor descriptor_;
  std::shared_ptr<const BaselineModel> model_;
};

}  // namespace triage
