#pragma once

// Minimal JSON Schema (2020-12 subset) validator for the test suite:
// type, enum, const, minimum, exclusiveMinimum, properties, required,
// additionalProperties, items, allOf, oneOf, if/then and local $ref.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace vartherm::testing {

class SchemaValidator {
 public:
  explicit SchemaValidator(nlohmann::json root) : root_(std::move(root)) {}

  std::vector<std::string> validate(const nlohmann::json& doc) const {
    std::vector<std::string> errors;
    check(root_, doc, "$", errors);
    return errors;
  }

 private:
  using json = nlohmann::json;

  const json& resolve(const std::string& ref) const {
    if (ref.rfind("#/", 0) != 0) throw std::runtime_error("unsupported $ref " + ref);
    return root_.at(json::json_pointer(ref.substr(1)));
  }

  static bool has_type(const json& v, const std::string& t) {
    if (t == "null") return v.is_null();
    if (t == "boolean") return v.is_boolean();
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "number") return v.is_number();
    if (t == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()));
    throw std::runtime_error("unknown type " + t);
  }

  bool ok(const json& schema, const json& v) const {
    std::vector<std::string> e;
    check(schema, v, "", e);
    return e.empty();
  }

  void check(const json& s, const json& v, const std::string& path, std::vector<std::string>& err) const {
    if (s.is_boolean()) {
      if (!s.get<bool>()) err.push_back(path + ": not allowed");
      return;
    }
    if (s.contains("$ref")) check(resolve(s["$ref"]), v, path, err);
    if (s.contains("type")) {
      bool match = false;
      if (s["type"].is_array()) {
        for (const auto& t : s["type"]) match = match || has_type(v, t);
      } else {
        match = has_type(v, s["type"]);
      }
      if (!match) {
        err.push_back(path + ": expected type " + s["type"].dump() + ", got " + v.type_name());
        return;
      }
    }
    if (s.contains("enum")) {
      bool found = false;
      for (const auto& e : s["enum"]) found = found || e == v;
      if (!found) err.push_back(path + ": " + v.dump() + " not in enum");
    }
    if (s.contains("const") && s["const"] != v) err.push_back(path + ": expected " + s["const"].dump());
    if (v.is_number()) {
      const double x = v.get<double>();
      if (s.contains("minimum") && x < s["minimum"].get<double>()) err.push_back(path + ": below minimum");
      if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>())
        err.push_back(path + ": not above exclusiveMinimum");
    }
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& k : s["required"])
          if (!v.contains(k.get<std::string>())) err.push_back(path + ": missing " + k.get<std::string>());
      for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string sub = path + "." + it.key();
        if (s.contains("properties") && s["properties"].contains(it.key())) {
          check(s["properties"][it.key()], it.value(), sub, err);
        } else if (s.contains("additionalProperties")) {
          check(s["additionalProperties"], it.value(), sub, err);
        }
      }
    }
    if (v.is_array() && s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(s["items"], v[i], path + "[" + std::to_string(i) + "]", err);
    if (s.contains("allOf"))
      for (const auto& sub : s["allOf"]) check(sub, v, path, err);
    if (s.contains("oneOf")) {
      int n = 0;
      for (const auto& sub : s["oneOf"]) n += ok(sub, v) ? 1 : 0;
      if (n != 1) err.push_back(path + ": matches " + std::to_string(n) + " oneOf branches");
    }
    if (s.contains("if") && ok(s["if"], v)) {
      if (s.contains("then")) check(s["then"], v, path, err);
    } else if (s.contains("if") && s.contains("else")) {
      check(s["else"], v, path, err);
    }
  }

  json root_;
};

}  // namespace vartherm::testing
