#include "json_schema.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "dlambert/errors.hpp"

namespace dlambert::cli {
namespace {

using nlohmann::json;

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  // Returns the first violation, if any.
  std::optional<std::string> check(const json& schema, const json& v, const std::string& path) const {
    if (schema.is_boolean()) {
      if (schema.get<bool>()) return std::nullopt;
      return at(path) + "not allowed";
    }
    if (schema.contains("$ref")) return check(resolve(schema.at("$ref").get<std::string>()), v, path);

    if (schema.contains("type") && !type_matches(schema.at("type"), v)) {
      return at(path) + "expected type " + schema.at("type").dump() + ", got " + v.type_name();
    }
    if (schema.contains("enum")) {
      bool found = false;
      for (const auto& e : schema.at("enum")) found = found || e == v;
      if (!found) return at(path) + "value " + v.dump() + " not in " + schema.at("enum").dump();
    }
    if (v.is_number()) {
      const double x = v.get<double>();
      if (schema.contains("minimum") && x < schema.at("minimum").get<double>()) {
        return at(path) + "must be >= " + schema.at("minimum").dump();
      }
      if (schema.contains("maximum") && x > schema.at("maximum").get<double>()) {
        return at(path) + "must be <= " + schema.at("maximum").dump();
      }
      if (schema.contains("exclusiveMinimum") && !(x > schema.at("exclusiveMinimum").get<double>())) {
        return at(path) + "must be > " + schema.at("exclusiveMinimum").dump();
      }
    }
    if (v.is_array()) {
      if (schema.contains("minItems") && v.size() < schema.at("minItems").get<std::size_t>()) {
        return at(path) + "expected at least " + schema.at("minItems").dump() + " items";
      }
      if (schema.contains("maxItems") && v.size() > schema.at("maxItems").get<std::size_t>()) {
        return at(path) + "expected at most " + schema.at("maxItems").dump() + " items";
      }
      if (schema.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (auto e = check(schema.at("items"), v[i], path + "/" + std::to_string(i))) return e;
        }
      }
    }
    if (v.is_object()) {
      if (schema.contains("required")) {
        for (const auto& key : schema.at("required")) {
          if (!v.contains(key.get<std::string>())) return at(path) + "missing required key " + key.dump();
        }
      }
      const json* props = schema.contains("properties") ? &schema.at("properties") : nullptr;
      for (const auto& [key, value] : v.items()) {
        const std::string sub = path + "/" + key;
        if (props && props->contains(key)) {
          if (auto e = check(props->at(key), value, sub)) return e;
        } else if (schema.contains("additionalProperties")) {
          const json& extra = schema.at("additionalProperties");
          if (extra.is_boolean() && !extra.get<bool>()) return at(path) + "unknown key \"" + key + "\"";
          if (auto e = check(extra, value, sub)) return e;
        }
      }
    }
    if (schema.contains("anyOf")) {
      std::optional<std::string> last;
      for (const auto& alt : schema.at("anyOf")) {
        last = check(alt, v, path);
        if (!last) break;
      }
      if (last) return last;
    }
    if (schema.contains("oneOf")) {
      int matches = 0;
      std::optional<std::string> closest;
      for (const auto& alt : schema.at("oneOf")) {
        auto e = check(alt, v, path);
        if (!e) {
          ++matches;
        } else if (!closest || discriminates(alt, v)) {
          closest = e;
        }
      }
      if (matches == 0) return closest;
      if (matches > 1) return at(path) + "matches more than one alternative";
    }
    return std::nullopt;
  }

 private:
  static std::string at(const std::string& path) { return (path.empty() ? std::string("/") : path) + ": "; }

  // An alternative whose "kind"-style enum matches gives the most useful message.
  static bool discriminates(const json& alt, const json& v) {
    if (!alt.contains("properties") || !v.is_object()) return false;
    for (const auto& [key, sub] : alt.at("properties").items()) {
      if (sub.contains("enum") && sub.at("enum").size() == 1 && v.contains(key) && v.at(key) == sub.at("enum")[0]) {
        return true;
      }
    }
    return false;
  }

  static bool type_matches(const json& type, const json& v) {
    if (type.is_array()) {
      for (const auto& t : type) {
        if (type_matches(t, v)) return true;
      }
      return false;
    }
    const std::string t = type.get<std::string>();
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "number") return v.is_number();
    if (t == "integer") {
      if (v.is_number_integer()) return true;
      return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
    }
    throw ConfigError("schema: unsupported type \"" + t + "\"");
  }

  const json& resolve(const std::string& ref) const {
    if (ref.empty() || ref[0] != '#') throw ConfigError("schema: only local references are supported: " + ref);
    return root_.at(json::json_pointer(ref.substr(1)));
  }

  const json& root_;
};

}  // namespace

void validate_schema(const nlohmann::json& schema, const nlohmann::json& instance) {
  if (auto e = Validator(schema).check(schema, instance, "")) throw ConfigError("config " + *e);
}

}  // namespace dlambert::cli
