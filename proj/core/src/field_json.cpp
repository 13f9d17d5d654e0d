#include "dlambert/field_json.hpp"

#include <set>
#include <string>

#include "dlambert/errors.hpp"

namespace dlambert {
namespace {

double number_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("friction field: missing \"") + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("friction field: \"") + key + "\" must be a number");
  return v.get<double>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("friction field: unknown key \"" + key + "\"");
  }
}

}  // namespace

FrictionField field_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("friction field must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("friction field: \"kind\" must be a string");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "zero") {
    reject_unknown(j, {"kind"});
    return FrictionField::zero();
  }
  if (kind == "constant") {
    reject_unknown(j, {"kind", "D0"});
    return FrictionField::constant(number_field(j, "D0"));
  }
  if (kind == "radial_exp") {
    reject_unknown(j, {"kind", "D0", "k"});
    return FrictionField::radial_exp(number_field(j, "D0"), number_field(j, "k"));
  }
  if (kind == "radial_table") {
    reject_unknown(j, {"kind", "table"});
    if (!j.contains("table") || !j.at("table").is_array()) throw ConfigError("friction field: \"table\" must be an array of [r, D] pairs");
    std::vector<std::pair<double, double>> knots;
    for (const auto& row : j.at("table")) {
      if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
        throw ConfigError("friction field: table rows must be [r, D] number pairs");
      }
      knots.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    return FrictionField::radial_table(std::move(knots));
  }
  throw ConfigError("friction field: unknown kind \"" + kind + "\"");
}

nlohmann::json field_to_json(const FrictionField& field) {
  const auto& k = field.kind();
  if (std::holds_alternative<FrictionField::Zero>(k)) return {{"kind", "zero"}};
  if (const auto* c = std::get_if<FrictionField::Constant>(&k)) return {{"kind", "constant"}, {"D0", c->d0}};
  if (const auto* e = std::get_if<FrictionField::RadialExp>(&k)) {
    return {{"kind", "radial_exp"}, {"D0", e->d0}, {"k", e->k}};
  }
  if (const auto* t = std::get_if<FrictionField::RadialTable>(&k)) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < t->r.size(); ++i) rows.push_back({t->r[i], t->d[i]});
    return {{"kind", "radial_table"}, {"table", rows}};
  }
  throw ConfigError("custom friction fields have no JSON form");
}

}  // namespace dlambert
