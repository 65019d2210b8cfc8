#include "reader.hpp"

#include <cmath>
#include <limits>

namespace tse::scenario {

using nlohmann::json;

Reader::Reader(const json& node, std::string path, std::initializer_list<const char*> allowed)
    : node_(&node), path_(std::move(path)) {
  if (!node.is_object()) throw ConfigError(path_ + ": expected an object");
  for (const auto& [key, value] : node.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(field(key) + ": unknown key");
  }
}

std::string Reader::field(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

void Reader::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(field(key) + ": " + message);
}

const json& Reader::raw(const char* key) const { return require(key); }

const json& Reader::require(const char* key) const {
  auto it = node_->find(key);
  if (it == node_->end()) fail(key, "missing required key");
  return *it;
}

double Reader::as_number(const json& j, const std::string& where) const {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": expected a finite number");
  return v;
}

double Reader::number(const char* key) const { return as_number(require(key), field(key)); }

double Reader::number_or(const char* key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::optional<double> Reader::optional_number(const char* key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::size_t Reader::count(const char* key) const {
  const auto& j = require(key);
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(key, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::size_t Reader::count_or(const char* key, std::size_t fallback) const {
  return has(key) ? count(key) : fallback;
}

bool Reader::boolean_or(const char* key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& j = require(key);
  if (!j.is_boolean()) fail(key, "expected true or false");
  return j.get<bool>();
}

std::string Reader::string(const char* key) const {
  const auto& j = require(key);
  if (!j.is_string()) fail(key, "expected a string");
  return j.get<std::string>();
}

std::string Reader::string_or(const char* key, std::string fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> Reader::numbers(const char* key) const {
  const auto& j = require(key);
  if (!j.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_number(j[i], field(key) + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> Reader::counts(const char* key) const {
  const auto& j = require(key);
  if (!j.is_array()) fail(key, "expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer() || j[i].get<long long>() < 0)
      throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a non-negative integer");
    out.push_back(j[i].get<std::size_t>());
  }
  return out;
}

std::vector<std::string> Reader::strings(const char* key) const {
  const auto& j = require(key);
  if (!j.is_array()) fail(key, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string())
      throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a string");
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

Matrix Reader::matrix(const char* key) const {
  const auto& j = require(key);
  if (!j.is_array() || j.empty()) fail(key, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array()) fail(key, "row " + std::to_string(r) + " is not an array");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols || cols == 0) fail(key, "rows must be non-empty and of equal length");
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = as_number(j[r][c], field(key) + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  return m;
}

Reader Reader::object(const char* key, std::initializer_list<const char*> allowed) const {
  return Reader(require(key), field(key), allowed);
}

std::vector<Reader> Reader::objects(const char* key, std::initializer_list<const char*> allowed) const {
  const auto& j = require(key);
  if (!j.is_array()) fail(key, "expected an array of objects");
  std::vector<Reader> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.emplace_back(j[i], field(key) + "[" + std::to_string(i) + "]", allowed);
  return out;
}

}  // namespace tse::scenario
