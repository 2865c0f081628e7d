#include "triage/remote.hpp"

#include <cmath>
#include <future>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace triage {
namespace {

using Clock = std::chrono::steady_clock;

struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string path;    // prefix + /v1/classify
};

Endpoint split_endpoint(std::string_view endpoint) {
  if (endpoint.empty()) throw ValidationError("remote endpoint is not configured");
  std::string_view rest = endpoint;
  std::size_t scheme_end = rest.find("://");
  std::size_t host_start = scheme_end == std::string_view::npos ? 0 : scheme_end + 3;
  const std::size_t slash = rest.find('/', host_start);
  Endpoint ep;
  ep.origin = std::string(rest.substr(0, slash));
  std::string prefix = slash == std::string_view::npos ? std::string() : std::string(rest.substr(slash));
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  ep.path = prefix + std::string(kClassifyPath);
  return ep;
}

RemoteError transport_error(httplib::Error err, Clock::duration elapsed, std::chrono::milliseconds timeout,
                            int attempts) {
  const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                         ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                          elapsed >= timeout * 9 / 10);
  return RemoteError(timed_out ? RemoteErrorKind::kTimeout : RemoteErrorKind::kConnection,
                     timed_out ? fmt::format("no response within {} ms", timeout.count())
                               : fmt::format("transport failure: {}", httplib::to_string(err)),
                     attempts);
}

}  // namespace

std::string_view to_string(RemoteErrorKind kind) {
  switch (kind) {
    case RemoteErrorKind::kTimeout:
      return "timeout";
    case RemoteErrorKind::kConnection:
      return "connection";
    case RemoteErrorKind::kHttpStatus:
      return "http_status";
    case RemoteErrorKind::kMalformedBody:
      return "malformed_body";
    case RemoteErrorKind::kCountMismatch:
      return "count_mismatch";
    case RemoteErrorKind::kScoreRange:
      return "score_range";
  }
  return "unknown";
}

RemoteError::RemoteError(RemoteErrorKind kind, std::string detail, int attempts, std::string backend_id,
                         std::size_t batch_begin, std::size_t batch_end)
    : Error(backend_id.empty()
                ? fmt::format("remote {} error: {}", to_string(kind), detail)
                : fmt::format("remote {} error from backend '{}' on batch [{}, {}) after {} attempt(s): {}",
                              to_string(kind), backend_id, batch_begin, batch_end, attempts, detail)),
      kind_(kind),
      detail_(std::move(detail)),
      attempts_(attempts),
      backend_id_(std::move(backend_id)),
      batch_begin_(batch_begin),
      batch_end_(batch_end) {}

RemoteError RemoteError::with_context(std::string backend_id, std::size_t begin, std::size_t end) const {
  return RemoteError(kind_, detail_, attempts_, std::move(backend_id), begin, end);
}

std::string encode_request(Tier task, std::span<const std::string> texts) {
  nlohmann::ordered_json body;
  body["task"] = to_string(task);
  body["texts"] = nlohmann::ordered_json::array();
  for (const auto& t : texts) body["texts"].push_back(t);
  return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<ClassifierScore> decode_response(std::string_view body, std::size_t expected) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw RemoteError(RemoteErrorKind::kMalformedBody, fmt::format("response is not JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("scores") || !doc["scores"].is_array()) {
    throw RemoteError(RemoteErrorKind::kMalformedBody, "response lacks a \"scores\" array");
  }
  const auto& scores = doc["scores"];
  if (scores.size() != expected) {
    throw RemoteError(RemoteErrorKind::kCountMismatch,
                      fmt::format("expected {} scores, received {}", expected, scores.size()));
  }
  std::vector<ClassifierScore> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].is_number()) {
      throw RemoteError(RemoteErrorKind::kMalformedBody, fmt::format("score {} is not a number", i));
    }
    const double p = scores[i].get<double>();
    if (std::isnan(p) || p < 0.0 || p > 1.0) {
      throw RemoteError(RemoteErrorKind::kScoreRange, fmt::format("score {} = {} is outside [0, 1]", i, p));
    }
    out.emplace_back(p);
  }
  return out;
}

std::vector<ClassifierScore> remote_score(std::string_view endpoint, Tier task, std::span<const std::string> texts,
                                          const RemoteOptions& options) {
  if (texts.empty()) throw ValidationError("remote_score called with an empty batch");
  if (options.max_retries < 0) throw ValidationError("max_retries must be >= 0");
  const Endpoint ep = split_endpoint(endpoint);
  const std::string body = encode_request(task, texts);

  httplib::Client client(ep.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  const httplib::Headers headers = {{std::string(kClientHeader), std::string(kClientId)}};

  const int attempts = 1 + options.max_retries;
  for (int attempt = 1;; ++attempt) {
    const auto start = Clock::now();
    auto result = client.Post(ep.path, headers, body, "application/json");
    if (!result) {
      RemoteError err = transport_error(result.error(), Clock::now() - start, options.timeout, attempt);
      if (attempt < attempts) continue;
      throw err;
    }
    if (result->status != 200) {
      throw RemoteError(RemoteErrorKind::kHttpStatus, fmt::format("HTTP status {}", result->status), attempt);
    }
    try {
      return decode_response(result->body, texts.size());
    } catch (const RemoteError& e) {
      throw RemoteError(e.kind(), e.detail(), attempt);
    }
  }
}

RemoteBackend::RemoteBackend(BackendDescriptor descriptor, std::string endpoint, RemoteOptions options)
    : descriptor_(std::move(descriptor)), endpoint_(std::move(endpoint)), options_(options) {
  split_endpoint(endpoint_);
  if (options_.batch_size == 0) throw ValidationError("remote batch_size must be positive");
  if (options_.max_concurrency == 0) options_.max_concurrency = 1;
}

std::vector<ClassifierScore> RemoteBackend::score_batch(std::span<const NormalizedInput> inputs) const {
  if (inputs.empty()) throw ValidationError("score_batch called with an empty batch");

  const std::size_t n_batches = (inputs.size() + options_.batch_size - 1) / options_.batch_size;
  auto run_batch = [&](std::size_t b) {
    const std::size_t begin = b * options_.batch_size;
    const std::size_t end = std::min(begin + options_.batch_size, inputs.size());
    std::vector<std::string> texts;
    texts.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) texts.push_back(inputs[i].text);
    try {
      return remote_score(endpoint_, descriptor_.task, texts, options_);
    } catch (const RemoteError& e) {
      throw e.with_context(descriptor_.backend_id, begin, end);
    }
  };

  std::vector<ClassifierScore> scores;
  scores.reserve(inputs.size());
  // Batches in a window run concurrently; results are stitched back by batch
  // index, never by completion order.
  for (std::size_t first = 0; first < n_batches; first += options_.max_concurrency) {
    const std::size_t last = std::min(first + options_.max_concurrency, n_batches);
    std::vector<std::future<std::vector<ClassifierScore>>> window;
    for (std::size_t b = first; b < last; ++b) {
      window.push_back(std::async(last - first > 1 ? std::launch::async : std::launch::deferred, run_batch, b));
    }
    for (auto& f : window) {
      auto part = f.get();
      scores.insert(scores.end(), part.begin(), part.end());
    }
  }
  return scores;
}

}  // namespace triage
