#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sgforge/common.hpp"

namespace sgforge::llm {

/// Text template with named `{placeholder}` slots drawn from a fixed set.
class PromptTemplate {
 public:
  static const std::set<std::string>& allowed_placeholders() {
    static const std::set<std::string> names{"node_info", "label_set", "instructions"};
    return names;
  }

  PromptTemplate() = default;

  PromptTemplate(std::string template_id, std::string body)
      : template_id_(std::move(template_id)), body_(std::move(body)) {
    parse();
  }

  [[nodiscard]] const std::string& template_id() const { return template_id_; }
  [[nodiscard]] const std::string& body() const { return body_; }
  [[nodiscard]] const std::set<std::string>& placeholders() const { return placeholders_; }

  [[nodiscard]] std::string render(const std::map<std::string, std::string>& bindings) const {
    for (const std::string& name : placeholders_) {
      if (bindings.find(name) == bindings.end()) {
        throw input_error("UnboundPlaceholder",
                          "template '" + template_id_ + "' requires binding for {" + name + "}");
      }
    }
    std::string out;
    out.reserve(body_.size());
    std::size_t i = 0;
    while (i < body_.size()) {
      if (body_[i] != '{') {
        out.push_back(body_[i]);
        ++i;
        continue;
      }
      const std::size_t close = body_.find('}', i);
      const std::string name = body_.substr(i + 1, close - i - 1);
      out += bindings.at(name);
      i = close + 1;
    }
    return out;
  }

 private:
  void parse() {
    std::size_t i = 0;
    while (i < body_.size()) {
      const char c = body_[i];
      if (c == '}') {
        throw input_error("MalformedTemplate",
                          "template '" + template_id_ + "' has an unmatched '}'");
      }
      if (c != '{') {
        ++i;
        continue;
      }
      const std::size_t close = body_.find('}', i);
      if (close == std::string::npos) {
        throw input_error("MalformedTemplate",
                          "template '" + template_id_ + "' has an unmatched '{'");
      }
      const std::string name = body_.substr(i + 1, close - i - 1);
      if (allowed_placeholders().find(name) == allowed_placeholders().end()) {
        throw input_error("UnknownPlaceholder",
                          "template '" + template_id_ + "' uses undeclared placeholder {" + name +
                              "}");
      }
      placeholders_.insert(name);
      i = close + 1;
    }
  }

  std::string template_id_;
  std::string body_;
  std::set<std::string> placeholders_;
};

}  // namespace sgforge::llm
