#include "triage/baseline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include <fmt/format.h>

#include "triage/fs_util.hpp"
#include "triage/rng.hpp"

namespace triage {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_feature_dim(std::size_t dim) {
  if (dim < 2 || !std::has_single_bit(dim) || dim > (std::size_t{1} << 31)) {
    throw ValidationError(fmt::format("feature_dim must be a power of two in [2, 2^31], got {}", dim));
  }
}

void check_dims(const BaselineModel& model) {
  if (model.weights.size() != model.feature_dim) {
    throw ValidationError(fmt::format("model has {} weights for feature_dim {}", model.weights.size(),
                                      model.feature_dim));
  }
}

std::vector<SparseFeatures> featurize(const BaselineModel& model, std::span<const TrainingExample> data) {
  std::vector<SparseFeatures> xs;
  xs.reserve(data.size());
  for (const auto& ex : data) xs.push_back(hash_features(ex.input.text, model.feature_dim));
  return xs;
}

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ValidationError("model file is truncated");
  }
  std::uint64_t get(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t{static_cast<unsigned char>(in_[pos_ + i])} << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

constexpr std::string_view kMagic = "TRBM";

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

SparseFeatures hash_features(std::string_view text, std::size_t feature_dim) {
  check_feature_dim(feature_dim);
  const std::uint64_t mask = feature_dim - 1;
  std::vector<std::uint32_t> raw;

  std::string_view prev;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(' ', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view tok = text.substr(pos, end - pos);
    pos = end + 1;
    if (tok.empty()) continue;

    raw.push_back(static_cast<std::uint32_t>(fnv1a64(tok, fnv1a64("u:")) & mask));
    if (!prev.empty()) {
      const std::uint64_t h = fnv1a64(tok, fnv1a64(" ", fnv1a64(prev, fnv1a64("b:"))));
      raw.push_back(static_cast<std::uint32_t>(h & mask));
    }
    prev = tok;
  }

  std::sort(raw.begin(), raw.end());
  SparseFeatures x;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    while (j < raw.size() && raw[j] == raw[i]) ++j;
    x.index.push_back(raw[i]);
    x.value.push_back(static_cast<double>(j - i));
    i = j;
  }
  const double norm = std::sqrt(std::inner_product(x.value.begin(), x.value.end(), x.value.begin(), 0.0));
  if (norm > 0) {
    for (auto& v : x.value) v /= norm;
  }
  return x;
}

BaselineModel BaselineModel::zeros(std::size_t feature_dim) {
  check_feature_dim(feature_dim);
  BaselineModel m;
  m.feature_dim = feature_dim;
  m.weights.assign(feature_dim, 0.0);
  return m;
}

double BaselineModel::margin(const SparseFeatures& x) const {
  double z = bias;
  for (std::size_t k = 0; k < x.index.size(); ++k) z += weights[x.index[k]] * x.value[k];
  return z;
}

double BaselineModel::predict(const SparseFeatures& x) const { return sigmoid(margin(x)); }

double BaselineModel::predict(const NormalizedInput& input) const {
  return predict(hash_features(input.text, feature_dim));
}

double objective(const BaselineModel& model, std::span<const TrainingExample> data, double l2) {
  check_dims(model);
  if (data.empty()) throw ValidationError("objective of an empty data set");
  const auto xs = featurize(model, data);
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = model.margin(xs[i]);
    loss += softplus(z) - (data[i].positive ? z : 0.0);
  }
  double sq = 0.0;
  for (double w : model.weights) sq += w * w;
  return loss / static_cast<double>(data.size()) + 0.5 * l2 * sq;
}

Gradient objective_gradient(const BaselineModel& model, std::span<const TrainingExample> data, double l2) {
  check_dims(model);
  if (data.empty()) throw ValidationError("gradient of an empty data set");
  const auto xs = featurize(model, data);
  const double inv_n = 1.0 / static_cast<double>(data.size());

  Gradient g;
  g.weights.resize(model.feature_dim);
  for (std::size_t j = 0; j < model.feature_dim; ++j) g.weights[j] = l2 * model.weights[j];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double residual = (sigmoid(model.margin(xs[i])) - (data[i].positive ? 1.0 : 0.0)) * inv_n;
    for (std::size_t k = 0; k < xs[i].index.size(); ++k) g.weights[xs[i].index[k]] += residual * xs[i].value[k];
    g.bias += residual;
  }
  return g;
}

BaselineModel train_baseline(std::span<const TrainingExample> train, const BaselineHyper& hyper, std::uint64_t seed) {
  if (train.empty()) throw ValidationError("degenerate training set: no examples");
  const auto positives = std::count_if(train.begin(), train.end(), [](const auto& ex) { return ex.positive; });
  if (positives == 0 || static_cast<std::size_t>(positives) == train.size()) {
    throw ValidationError("degenerate training set: only one class present");
  }
  if (hyper.epochs <= 0) throw ValidationError("epochs must be positive");
  if (!(hyper.learning_rate > 0.0) || !std::isfinite(hyper.learning_rate)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (!(hyper.l2 >= 0.0) || hyper.learning_rate * hyper.l2 >= 1.0) {
    throw ValidationError("l2 must be non-negative with learning_rate * l2 < 1");
  }

  BaselineModel model = BaselineModel::zeros(hyper.feature_dim);
  model.meta = TrainingMeta{seed, hyper.epochs, hyper.learning_rate, hyper.l2, {}};
  const auto xs = featurize(model, train);

  // Weights are kept as scale * v so that L2 shrinkage of the whole vector is
  // a single multiply per step.
  std::vector<double>& v = model.weights;
  double scale = 1.0;
  const double decay = 1.0 - hyper.learning_rate * hyper.l2;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const SparseFeatures& x = xs[i];
      double z = model.bias;
      for (std::size_t k = 0; k < x.index.size(); ++k) z += scale * v[x.index[k]] * x.value[k];
      const double residual = sigmoid(z) - (train[i].positive ? 1.0 : 0.0);

      scale *= decay;
      const double step = hyper.learning_rate * residual / scale;
      for (std::size_t k = 0; k < x.index.size(); ++k) v[x.index[k]] -= step * x.value[k];
      model.bias -= hyper.learning_rate * residual;

      if (scale < 1e-9) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    }
    for (double& w : v) w *= scale;
    scale = 1.0;

    const double loss = objective(model, train, hyper.l2);
    if (!std::isfinite(loss)) throw Error(fmt::format("training diverged at epoch {}", epoch + 1));
    model.meta.loss_history.push_back(loss);
  }
  return model;
}

double training_accuracy(const BaselineModel& model, std::span<const TrainingExample> data, double threshold) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) correct += (model.predict(ex.input) >= threshold) == ex.positive;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::string encode_model(const BaselineModel& model) {
  check_dims(model);
  Writer w;
  w.raw(kMagic);
  w.u32(kModelFormatVersion);
  w.u64(model.feature_dim);
  w.u64(model.meta.seed);
  w.u32(static_cast<std::uint32_t>(model.meta.epochs));
  w.f64(model.meta.learning_rate);
  w.f64(model.meta.l2);
  w.u32(static_cast<std::uint32_t>(model.meta.loss_history.size()));
  for (double l : model.meta.loss_history) w.f64(l);
  w.f64(model.bias);
  for (double x : model.weights) w.f64(x);
  return w.take();
}

BaselineModel decode_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.raw(kMagic.size()) != kMagic) throw ValidationError("not a baseline model file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw ValidationError(
        fmt::format("model format version {} is not supported (expected {})", version, kModelFormatVersion));
  }
  BaselineModel m;
  m.feature_dim = static_cast<std::size_t>(r.u64());
  check_feature_dim(m.feature_dim);
  m.meta.seed = r.u64();
  m.meta.epochs = static_cast<int>(r.u32());
  m.meta.learning_rate = r.f64();
  m.meta.l2 = r.f64();
  const std::uint32_t n_loss = r.u32();
  for (std::uint32_t i = 0; i < n_loss; ++i) m.meta.loss_history.push_back(r.f64());
  m.bias = r.f64();
  m.weights.resize(m.feature_dim);
  for (auto& x : m.weights) {
    x = r.f64();
    if (!std::isfinite(x)) throw ValidationError("model file contains non-finite weights");
  }
  if (!r.done()) throw ValidationError("model file has trailing bytes");
  return m;
}

void save_model(const BaselineModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(model));
}

BaselineModel load_model(const std::filesystem::path& path) {
  try {
    return decode_model(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

BaselineBackend::BaselineBackend(BackendDescriptor descriptor, std::shared_ptr<const BaselineModel> model)
    : descriptor_(std::move(descriptor)), model_(std::move(model)) {
  if (!model_) throw ValidationError(fmt::format("backend '{}' has no model", descriptor_.backend_id));
  check_dims(*model_);
}

std::vector<ClassifierScore> BaselineBackend::score_batch(std::span<const NormalizedInput> inputs) const {
  if (inputs.empty()) throw ValidationError("score_batch called with an empty batch");
  std::vector<ClassifierScore> scores;
  scores.reserve(inputs.size());
  for (const auto& in : inputs) scores.emplace_back(model_->predict(in));
  return scores;
}

}  // namespace triage
