#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "triage/backend.hpp"
#include "triage/baseline.hpp"
#include "triage/cascade.hpp"
#include "triage/preprocess.hpp"
#include "triage/remote.hpp"
#include "triage/sampler.hpp"

namespace triage {

struct MemberConfig {
  BackendDescriptor descriptor;
  PipelineConfig pipeline;
  double threshold = kDefaultThreshold;
  // native_baseline: model file, resolved against the output directory.
  std::filesystem::path model;
  // remote: member-specific endpoint; falls back to the tier endpoint.
  std::optional<std::string> endpoint;
};

struct TierSettings {
  Tier task = Tier::kT1;
  std::array<MemberConfig, 2> members;
  std::optional<std::string> remote_endpoint;
  RemoteOptions remote;
};

struct UndersampleSettings {
  double ratio = 0.0;
  std::optional<std::uint64_t> seed;
};

// Declarative run description read from one JSON document. Relative paths
// resolve against the config file's directory, except model files, which
// resolve against out_dir.
struct RunConfig {
  std::filesystem::path base_dir;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> synonyms_file;

  double train_fraction = 0.8;
  bool stratified = true;
  std::optional<std::uint64_t> split_seed;
  UndersampleSettings undersample_t1{0.8, std::nullopt};
  UndersampleSettings undersample_t2{1.2, std::nullopt};

  BaselineHyper baseline;
  std::optional<std::uint64_t> baseline_seed;

  std::size_t batch_size = 64;
  std::size_t workers = 1;

  TierSettings t1;
  TierSettings t2;

  const TierSettings& tier(Tier t) const { return t == Tier::kT1 ? t1 : t2; }
  const MemberConfig& member(Tier t, PipelineVariant variant) const;
  std::filesystem::path model_path(const MemberConfig& m) const;
  std::string endpoint_for(const TierSettings& tier, const MemberConfig& m) const;
};

// Environment lookup, replaceable in tests.
using EnvLookup = std::function<std::optional<std::string>(const char*)>;
std::optional<std::string> process_env(const char* name);

// Parses and validates a config document. TRIAGE_REMOTE_ENDPOINT_T1/_T2
// override the tiers' remote endpoints. Throws ValidationError.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           const EnvLookup& env = process_env);
RunConfig load_run_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

// Instantiates a tier's backends: loads baseline model files and sets up
// remote clients.
TierConfig make_tier_config(const RunConfig& config, Tier tier);

}  // namespace triage
