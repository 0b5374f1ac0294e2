#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace rca {

// Minimal structural validator for the shipped output schemas. Supported
// schema keywords: type, properties, required, items, enum,
// additionalProperties (boolean), minItems, minimum, maximum. Returns one
// human-readable violation per failure; empty means the instance conforms.
std::vector<std::string> validate_schema(const nlohmann::json& instance,
                                         const nlohmann::json& schema);

// Convenience wrapper: throws ModelError listing the violations.
void require_schema(const nlohmann::json& instance, const nlohmann::json& schema,
                    const std::string& what);

}  // namespace rca
