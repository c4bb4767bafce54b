#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace sgforge {

/// Coarse failure classes, mapped onto CLI exit codes (input=1, backend=2,
/// invariant=3).
enum class ErrorCategory { input, backend, invariant, internal };

/// Single exception type used throughout the library. `code()` carries a
/// stable machine-readable name ("DuplicateId", "Timeout", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        ErrorCategory category = ErrorCategory::input)
      : std::runtime_error(code + ": " + message),
        code_(std::move(code)),
        category_(category) {}

  [[nodiscard]] const std::string& code() const { return code_; }
  [[nodiscard]] ErrorCategory category() const { return category_; }

 private:
  std::string code_;
  ErrorCategory category_;
};

inline Error input_error(std::string code, const std::string& message) {
  return Error(std::move(code), message, ErrorCategory::input);
}

inline Error backend_error(std::string code, const std::string& message) {
  return Error(std::move(code), message, ErrorCategory::backend);
}

inline Error invariant_error(std::string code, const std::string& message) {
  return Error(std::move(code), message, ErrorCategory::invariant);
}

// FNV-1a, 64 bit. Stable across platforms; used for request digests and
// config hashes, not for security.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& part : parts) {
    if (!out.empty()) out += sep;
    out += part;
  }
  return out;
}

/// Runs fn(i) for i in [0, count) on up to max_parallel worker threads.
/// Callers are responsible for storing results by index; completion order is
/// unspecified. Exceptions are captured and the first one rethrown.
inline void parallel_for(std::size_t count, std::size_t max_parallel,
                         const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  max_parallel = std::max<std::size_t>(1, std::min(max_parallel, count));
  if (max_parallel == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(max_parallel);
  workers.reserve(max_parallel);
  for (std::size_t w = 0; w < max_parallel; ++w) {
    workers.emplace_back([&, w] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace sgforge
