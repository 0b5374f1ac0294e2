#pragma once

#include <string>

#include <json.hpp>

#include "rca/scm.hpp"

namespace rca {

// Model document layout:
//   {
//     "variables": ["X1", ...],
//     "edges": [["parent","child"], ...],
//     "diagnosis": "D" | null,
//     "mechanisms": [ {"kind": ...}, ... ]   one per variable,
//     "errors":     [ {"kind": ...}, ... ]   one per non-diagnosis variable
//   }
// Round-trips losslessly: dump(from_json(j)) reparses to an equal document.

nlohmann::json scm_to_json(const Scm& scm);
Scm scm_from_json(const nlohmann::json& j);

void save_scm(const Scm& scm, const std::string& path);
Scm load_scm(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);

}  // namespace rca
