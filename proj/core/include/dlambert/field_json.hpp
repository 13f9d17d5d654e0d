#pragma once

#include <nlohmann/json.hpp>

#include "dlambert/friction.hpp"

namespace dlambert {

// JSON form of a friction field:
//   {"kind": "zero"}
//   {"kind": "constant", "D0": 0.1}
//   {"kind": "radial_exp", "D0": 0.2, "k": 1.0}
//   {"kind": "radial_table", "table": [[r, D], ...]}   (strictly increasing r)
// Throws ConfigError on schema violations.
FrictionField field_from_json(const nlohmann::json& j);
nlohmann::json field_to_json(const FrictionField& field);

}  // namespace dlambert
