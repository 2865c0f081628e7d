#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triage/backend.hpp"

namespace triage {

// Client side of the batch scoring protocol:
//   POST {endpoint}/v1/classify
//   x-client: reportable-triage/1
//   {"task":"t1","texts":["...",...]}  ->  200 {"scores":[0.93,...]}

inline constexpr std::string_view kClassifyPath = "/v1/classify";
inline constexpr std::string_view kClientHeader = "x-client";
inline constexpr std::string_view kClientId = "reportable-triage/1";

enum class RemoteErrorKind {
  kTimeout,
  kConnection,
  kHttpStatus,
  kMalformedBody,
  kCountMismatch,
  kScoreRange,
};

std::string_view to_string(RemoteErrorKind kind);

// Only timeouts and connection failures are retried.
constexpr bool is_transport(RemoteErrorKind kind) {
  return kind == RemoteErrorKind::kTimeout || kind == RemoteErrorKind::kConnection;
}

class RemoteError : public Error {
 public:
  RemoteError(RemoteErrorKind kind, std::string detail, int attempts = 1, std::string backend_id = {},
              std::size_t batch_begin = 0, std::size_t batch_end = 0);

  RemoteErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }
  int attempts() const { return attempts_; }
  const std::string& backend_id() const { return backend_id_; }
  // Half-open index range of the failed batch within the scored inputs.
  std::size_t batch_begin() const { return batch_begin_; }
  std::size_t batch_end() const { return batch_end_; }

  RemoteError with_context(std::string backend_id, std::size_t begin, std::size_t end) const;

 private:
  RemoteErrorKind kind_;
  std::string detail_;
  int attempts_;
  std::string backend_id_;
  std::size_t batch_begin_;
  std::size_t batch_end_;
};

struct RemoteOptions {
  std::chrono::milliseconds timeout{5000};
  // Extra attempts after a transport failure.
  int max_retries = 2;
  std::size_t batch_size = 32;
  // Batches in flight at once for RemoteBackend.
  std::size_t max_concurrency = 1;
};

// Exact request body sent for a batch.
std::string encode_request(Tier task, std::span<const std::string> texts);

// Validates a response body against the expected batch size.
std::vector<ClassifierScore> decode_response(std::string_view body, std::size_t expected);

// Scores one batch, retrying transport failures up to options.max_retries.
// Throws RemoteError.
std::vector<ClassifierScore> remote_score(std::string_view endpoint, Tier task, std::span<const std::string> texts,
                                          const RemoteOptions& options = {});

class RemoteBackend final : public ClassifierBackend {
 public:
  RemoteBackend(BackendDescriptor descriptor, std::string endpoint, RemoteOptions options = {});

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<ClassifierScore> score_batch(std::span<const NormalizedInput> inputs) const override;

  const std::string& endpoint() const { return endpoint_; }

 private:
  BackendDescriptor descriptor_;
  std::string endpoint_;
  RemoteOptions options_;
};

}  // namespace triage
