#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include <unistd.h>

#include "triage/backend.hpp"
#include "triage/corpus.hpp"
#include "triage/sectioner.hpp"

namespace triage::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("triage-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline PathologyReport report_from(std::string id, std::string raw) {
  PathologyReport r;
  r.report_id = std::move(id);
  r.diagnosis_year = 2023;
  r.raw_text = std::move(raw);
  r.sections = parse_sections(r.raw_text, SectionSynonymTable::builtin());
  return r;
}

inline LabeledReport labeled(std::string id, std::string raw, std::optional<T1Label> t1,
                             std::optional<T2Label> t2 = std::nullopt) {
  return {report_from(std::move(id), std::move(raw)), t1, t2};
}

// Backend whose score for each input comes from a callback on the assembled
// text. Counts calls and inputs; safe to share across threads.
class ScriptedBackend final : public ClassifierBackend {
 public:
  using Scorer = std::function<double(const NormalizedInput&)>;

  ScriptedBackend(BackendDescriptor d, Scorer scorer) : descriptor_(std::move(d)), scorer_(std::move(scorer)) {}

  const BackendDescriptor& descriptor() const override { return descriptor_; }

  std::vector<ClassifierScore> score_batch(std::span<const NormalizedInput> inputs) const override {
    if (inputs.empty()) throw ValidationError("empty batch");
    calls_++;
    scored_ += inputs.size();
    std::vector<ClassifierScore> out;
    for (const auto& in : inputs) out.emplace_back(scorer_(in));
    return out;
  }

  std::size_t calls() const { return calls_; }
  std::size_t scored() const { return scored_; }

 private:
  BackendDescriptor descriptor_;
  Scorer scorer_;
  mutable std::atomic<std::size_t> calls_{0};
  mutable std::atomic<std::size_t> scored_{0};
};

}  // namespace triage::testing
