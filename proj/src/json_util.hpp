#pragma once

#include <set>
#include <string>

#include "json.hpp"
#include "tvn/error.hpp"

namespace tvn::detail {

using nlohmann::json;

// Reads a JSON object field by field and rejects keys nobody asked for.
class StrictReader {
 public:
  StrictReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void optional(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    out = convert<T>(j_.at(key), key);
  }

  template <typename T>
  T required(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing field '" + key + "'");
    used_.insert(key);
    return convert<T>(j_.at(key), key);
  }

  const json& object(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing field '" + key + "'");
    used_.insert(key);
    return j_.at(key);
  }

  // Marks a field as consumed without converting it.
  void skip(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) {
        throw ConfigError(where_ + ": unknown field '" + it.key() + "'");
      }
    }
  }

  const std::string& where() const { return where_; }

 private:
  template <typename T>
  T convert(const json& v, const std::string& key) const {
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

}  // namespace tvn::detail
