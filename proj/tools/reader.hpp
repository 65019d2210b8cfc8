#pragma once

// Strict accessor over a JSON object: rejects keys outside the allowed set
// and reports every problem with its field path.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tse/core.hpp"

namespace tse::scenario {

class Reader {
public:
  Reader(const nlohmann::json& node, std::string path, std::initializer_list<const char*> allowed);

  const std::string& path() const { return path_; }
  bool has(const char* key) const { return node_->contains(key); }
  const nlohmann::json& raw(const char* key) const;

  double number(const char* key) const;
  double number_or(const char* key, double fallback) const;
  std::optional<double> optional_number(const char* key) const;
  std::size_t count(const char* key) const;
  std::size_t count_or(const char* key, std::size_t fallback) const;
  bool boolean_or(const char* key, bool fallback) const;
  std::string string(const char* key) const;
  std::string string_or(const char* key, std::string fallback) const;
  std::vector<double> numbers(const char* key) const;
  std::vector<std::size_t> counts(const char* key) const;
  std::vector<std::string> strings(const char* key) const;
  Matrix matrix(const char* key) const;

  Reader object(const char* key, std::initializer_list<const char*> allowed) const;
  std::vector<Reader> objects(const char* key, std::initializer_list<const char*> allowed) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
  std::string field(const std::string& key) const;
  const nlohmann::json& require(const char* key) const;
  double as_number(const nlohmann::json& j, const std::string& where) const;

  const nlohmann::json* node_;
  std::string path_;
};

}  // namespace tse::scenario
