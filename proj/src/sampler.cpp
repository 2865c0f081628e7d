#include "triage/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "triage/error.hpp"
#include "triage/rng.hpp"

namespace triage {
namespace {

bool require_label(const LabeledReport& rec, Tier task) {
  const auto gold = rec.gold(task);
  if (!gold) {
    throw ValidationError(
        fmt::format("report '{}' has no {} label", rec.report.report_id, to_string(task)));
  }
  return *gold;
}

Corpus subset(const Corpus& corpus, const std::vector<bool>& keep, std::string_view role) {
  Corpus out;
  out.provenance = corpus.provenance;
  out.provenance["role"] = std::string(role);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    if (keep[i]) out.records.push_back(corpus.records[i]);
  }
  return out;
}

// Marks `take` of `candidates` (chosen by a seeded shuffle) in `mask`.
void choose(std::vector<std::size_t> candidates, std::size_t take, Rng& rng, std::vector<bool>& mask) {
  rng.shuffle(candidates);
  for (std::size_t k = 0; k < take; ++k) mask[candidates[k]] = true;
}

}  // namespace

ClassCounts class_counts(const Corpus& corpus, Tier task) {
  ClassCounts c;
  c.task = task;
  for (const auto& rec : corpus.records) {
    const auto gold = rec.gold(task);
    if (!gold) {
      ++c.unlabeled;
    } else if (*gold) {
      ++c.positive;
    } else {
      ++c.negative;
    }
  }
  return c;
}

std::size_t undersample_target(double ratio, std::size_t kept_count) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(kept_count) + 1e-9));
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec, Tier task) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ValidationError(fmt::format("train_fraction must lie in (0, 1), got {}", spec.train_fraction));
  }
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    (require_label(corpus.records[i], task) ? positives : negatives).push_back(i);
  }

  const auto train_count = [&](std::size_t n) {
    return static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  };

  Rng rng(spec.seed);
  std::vector<bool> in_train(corpus.records.size(), false);
  if (spec.stratified) {
    choose(positives, train_count(positives.size()), rng, in_train);
    choose(negatives, train_count(negatives.size()), rng, in_train);
  } else {
    std::vector<std::size_t> all(corpus.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    choose(std::move(all), train_count(corpus.records.size()), rng, in_train);
  }

  std::vector<bool> in_test(in_train.size());
  std::transform(in_train.begin(), in_train.end(), in_test.begin(), [](bool b) { return !b; });
  return {subset(corpus, in_train, "train"), subset(corpus, in_test, "test")};
}

Corpus undersample(const Corpus& train, const UndersamplePolicy& policy) {
  if (!(policy.ratio > 0.0) || !std::isfinite(policy.ratio)) {
    throw ValidationError(fmt::format("undersampling ratio must be positive, got {}", policy.ratio));
  }
  std::vector<bool> keep(train.records.size(), false);
  std::vector<std::size_t> sampled;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < train.records.size(); ++i) {
    if (require_label(train.records[i], policy.task) == policy.kept_positive) {
      keep[i] = true;
      ++kept;
    } else {
      sampled.push_back(i);
    }
  }
  if (kept == 0) throw ValidationError("empty kept class");

  const std::size_t target = std::min(undersample_target(policy.ratio, kept), sampled.size());
  Rng rng(policy.seed);
  choose(std::move(sampled), target, rng, keep);
  return subset(train, keep, "train_undersampled");
}

Corpus eligible_for(const Corpus& corpus, Tier task) {
  if (task == Tier::kT1) return corpus;
  Corpus out;
  out.provenance = corpus.provenance;
  for (const auto& rec : corpus.records) {
    if (rec.t2_label) out.records.push_back(rec);
  }
  return out;
}

DatasetBuild build_dataset(const Corpus& corpus, Tier task, const SplitSpec& split_spec,
                           const UndersamplePolicy& policy) {
  if (policy.task != task) throw ValidationError("undersampling policy is for a different tier");
  DatasetBuild build;
  const Corpus eligible = eligible_for(corpus, task);
  build.excluded = corpus.records.size() - eligible.records.size();
  build.eligible = class_counts(eligible, task);
  if (build.eligible.positive == 0 || build.eligible.negative == 0) {
    throw ValidationError(fmt::format("{} data set needs both classes (positive {}, negative {})", to_string(task),
                                      build.eligible.positive, build.eligible.negative));
  }

  auto [train, test] = split(eligible, split_spec, task);
  build.train_before = class_counts(train, task);
  build.train = undersample(train, policy);
  build.train_after = class_counts(build.train, task);
  build.test = std::move(test);
  build.test_counts = class_counts(build.test, task);
  return build;
}

}  // namespace triage
