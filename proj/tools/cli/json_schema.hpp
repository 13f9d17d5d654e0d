#pragma once

#include <nlohmann/json.hpp>

namespace dlambert::cli {

// Validates `instance` against a JSON Schema (draft-07 subset: type, enum,
// properties, required, additionalProperties, items, minItems, maxItems,
// minimum, maximum, exclusiveMinimum, oneOf, anyOf, local $ref).
// Throws ConfigError naming the offending JSON pointer.
void validate_schema(const nlohmann::json& schema, const nlohmann::json& instance);

}  // namespace dlambert::cli
