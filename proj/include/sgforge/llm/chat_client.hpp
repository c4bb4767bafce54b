#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sgforge/common.hpp"

namespace sgforge::llm {

enum class ChatBackend { http, mock };
enum class MockMode { strict, default_text, sequence, echo };

inline std::string request_digest(std::string_view prompt, std::string_view image_ref,
                                  int round_index) {
  std::uint64_t h = fnv1a64(prompt);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(image_ref, h);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(std::to_string(round_index), h);
  return to_hex(h);
}

/// Digest-keyed canned responses for the mock backend.
class MockFixtureStore {
 public:
  MockFixtureStore() = default;

  static MockFixtureStore load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("FixtureFileMissing", "cannot open fixture file: " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw input_error("FixtureParse", "fixture file " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw input_error("FixtureParse", "fixture file must hold an object");
    MockFixtureStore store;
    for (const auto& [key, value] : doc.items()) {
      if (!value.is_string()) {
        throw input_error("FixtureParse", "fixture value for '" + key + "' must be a string");
      }
      store.entries_[key] = value.get<std::string>();
    }
    return store;
  }

  void save(const std::string& path) const {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [key, value] : entries_) doc[key] = value;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw input_error("FixtureFileWrite", "cannot write fixture file: " + path);
    out << doc.dump(2) << "\n";
  }

  void set(const std::string& digest, const std::string& text) { entries_[digest] = text; }

  [[nodiscard]] const std::string* find(const std::string& digest) const {
    auto it = entries_.find(digest);
    return it == entries_.end() ? nullptr : &it->second;
  }

  [[nodiscard]] std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::string> entries_;
};

struct ChatClientConfig {
  ChatBackend backend = ChatBackend::mock;
  std::string endpoint;
  std::string model_name = "mock-model";
  double temperature = 0.1;
  int max_retries = 3;
  double timeout_seconds = 30.0;
  int backoff_base_ms = 250;
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  std::string api_key_env = "SGFORGE_LLM_API_KEY";
  int max_parallel = 4;
  MockMode mock_mode = MockMode::default_text;
  std::string fixture_path;
  std::string default_text = "other room";
  std::vector<std::string> mock_sequence;
  std::string audit_path;

  void check() const {
    if (temperature < 0.0 || temperature > 2.0) {
      throw input_error("BadTemperature", "temperature must lie in [0,2]");
    }
    if (max_retries < 0) throw input_error("BadRetries", "max_retries must be non-negative");
    if (max_parallel < 1) throw input_error("BadParallelism", "max_parallel must be positive");
    if (backend == ChatBackend::http && endpoint.empty()) {
      throw input_error("MissingEndpoint", "http backend requires an endpoint URL");
    }
  }
};

namespace detail {

struct EndpointParts {
  std::string base;
  std::string path;
};

inline EndpointParts split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw input_error("BadEndpoint", "endpoint must include a scheme: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace detail

/// Chat-completion gateway. One instance serves either a live HTTP backend or
/// the deterministic fixture-backed mock; immutable after construction apart
/// from retry accounting and the optional audit log.
class ChatClient {
 public:
  explicit ChatClient(ChatClientConfig config) : ChatClient(std::move(config), {}) {}

  ChatClient(ChatClientConfig config, MockFixtureStore fixtures)
      : config_(std::move(config)),
        fixtures_(std::move(fixtures)),
        slots_(config_.max_parallel) {
    config_.check();
    if (config_.backend == ChatBackend::mock && !config_.fixture_path.empty()) {
      fixtures_ = MockFixtureStore::load(config_.fixture_path);
    }
  }

  [[nodiscard]] const ChatClientConfig& config() const { return config_; }
  [[nodiscard]] const MockFixtureStore& fixtures() const { return fixtures_; }
  [[nodiscard]] long total_retries() const { return retries_.load(); }

  [[nodiscard]] std::string chat(const std::string& prompt, int round_index = 0,
                                 const std::optional<std::string>& image_ref = {}) const {
    if (prompt.empty()) throw input_error("EmptyPrompt", "chat prompt must be non-empty");
    slots_.acquire();
    std::string response;
    try {
      response = config_.backend == ChatBackend::mock ? chat_mock(prompt, round_index, image_ref)
                                                      : chat_http(prompt, image_ref);
    } catch (...) {
      slots_.release();
      throw;
    }
    slots_.release();
    audit(prompt, round_index, image_ref, response);
    return response;
  }

 private:
  [[nodiscard]] std::string chat_mock(const std::string& prompt, int round_index,
                                      const std::optional<std::string>& image_ref) const {
    switch (config_.mock_mode) {
      case MockMode::echo:
        return prompt;
      case MockMode::sequence: {
        const auto idx = static_cast<std::size_t>(round_index);
        if (round_index < 0 || idx >= config_.mock_sequence.size()) {
          throw backend_error("FixtureMiss", "mock sequence has no entry for round " +
                                                 std::to_string(round_index));
        }
        return config_.mock_sequence[idx];
      }
      case MockMode::strict:
      case MockMode::default_text: {
        const std::string digest = request_digest(prompt, image_ref.value_or(""), round_index);
        if (const std::string* hit = fixtures_.find(digest)) return *hit;
        if (config_.mock_mode == MockMode::strict) {
          throw backend_error("FixtureMiss", "no fixture for digest " + digest);
        }
        return config_.default_text;
      }
    }
    throw Error("Internal", "unreachable mock mode", ErrorCategory::internal);
  }

  [[nodiscard]] std::string chat_http(const std::string& prompt,
                                      const std::optional<std::string>& image_ref) const {
    const detail::EndpointParts parts = detail::split_endpoint(config_.endpoint);
    nlohmann::json message{{"role", "user"}, {"content", prompt}};
    if (image_ref) message["image_ref"] = *image_ref;
    nlohmann::json body{{"model", config_.model_name},
                        {"temperature", config_.temperature},
                        {"messages", nlohmann::json::array({message})}};
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace(config_.auth_header, config_.auth_prefix + key);
    }

    std::string last_failure = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        retries_.fetch_add(1);
        const auto delay = std::chrono::milliseconds(
            static_cast<long long>(config_.backoff_base_ms) * (1LL << (attempt - 1)));
        std::this_thread::sleep_for(delay);
      }
      httplib::Client cli(parts.base);
      const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
      cli.set_connection_timeout(timeout);
      cli.set_read_timeout(timeout);
      cli.set_write_timeout(timeout);

      httplib::Result result = cli.Post(parts.path, headers, payload, "application/json");
      if (!result) {
        last_failure = "transport error: " + httplib::to_string(result.error());
        continue;
      }
      const int status = result->status;
      if (status == 200) return parse_response(result->body);
      if (status == 401 || status == 403) {
        throw backend_error("AuthError", "backend rejected credentials (HTTP " +
                                             std::to_string(status) + ")");
      }
      if (status == 429 || status >= 500) {
        last_failure = "HTTP " + std::to_string(status);
        continue;
      }
      throw backend_error("HttpStatus",
                          "backend returned HTTP " + std::to_string(status) + ": " + result->body);
    }
    if (last_failure.rfind("HTTP 429", 0) == 0) {
      throw backend_error("RateLimited", "rate limited after " +
                                             std::to_string(config_.max_retries) + " retries");
    }
    if (last_failure.rfind("transport error", 0) == 0) {
      throw backend_error("Timeout", last_failure + " after " +
                                         std::to_string(config_.max_retries) + " retries");
    }
    throw backend_error("ServerError", last_failure + " after " +
                                           std::to_string(config_.max_retries) + " retries");
  }

  [[nodiscard]] static std::string parse_response(const std::string& body) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw backend_error("BadResponse", std::string("response is not JSON: ") + e.what());
    }
    if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty()) {
      const auto& first = doc["choices"][0];
      if (first.contains("message") && first["message"].contains("content") &&
          first["message"]["content"].is_string()) {
        return first["message"]["content"].get<std::string>();
      }
      if (first.contains("text") && first["text"].is_string()) {
        return first["text"].get<std::string>();
      }
    }
    if (doc.contains("result") && doc["result"].is_string()) {
      return doc["result"].get<std::string>();
    }
    throw backend_error("BadResponse", "response carries no completion text");
  }

  void audit(const std::string& prompt, int round_index,
             const std::optional<std::string>& image_ref, const std::string& response) const {
    if (config_.audit_path.empty()) return;
    nlohmann::ordered_json line{
        {"digest", request_digest(prompt, image_ref.value_or(""), round_index)},
        {"round", round_index},
        {"prompt", prompt},
        {"image_ref", image_ref.value_or("")},
        {"response", response}};
    std::lock_guard<std::mutex> guard(audit_mutex_);
    std::ofstream out(config_.audit_path, std::ios::app);
    if (out) out << line.dump() << "\n";
  }

  ChatClientConfig config_;
  MockFixtureStore fixtures_;
  mutable std::counting_semaphore<> slots_;
  mutable std::atomic<long> retries_{0};
  mutable std::mutex audit_mutex_;
};

}  // namespace sgforge::llm
