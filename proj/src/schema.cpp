#include "rca/schema.hpp"

#include "rca/common.hpp"

namespace rca {

namespace {

using nlohmann::json;

bool matches_type(const json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number();
    if (type == "integer") return v.is_number_integer();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    return false;
}

void check(const json& v, const json& schema, const std::string& path,
           std::vector<std::string>& out) {
    if (!schema.is_object()) return;

    if (schema.contains("type")) {
        const json& t = schema.at("type");
        bool ok = false;
        if (t.is_string()) {
            ok = matches_type(v, t.get<std::string>());
        } else if (t.is_array()) {
            for (const auto& alt : t) ok = ok || matches_type(v, alt.get<std::string>());
        }
        if (!ok) {
            out.push_back(path + ": expected type " + t.dump() + ", got " +
                          std::string(v.type_name()));
            return;  // further keyword checks would just cascade
        }
    }

    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& alt : schema.at("enum")) ok = ok || (alt == v);
        if (!ok) out.push_back(path + ": value " + v.dump() + " not in enum");
    }

    if (v.is_number()) {
        const double x = v.get<double>();
        if (schema.contains("minimum") && x < schema.at("minimum").get<double>()) {
            out.push_back(path + ": " + v.dump() + " below minimum " +
                          schema.at("minimum").dump());
        }
        if (schema.contains("maximum") && x > schema.at("maximum").get<double>()) {
            out.push_back(path + ": " + v.dump() + " above maximum " +
                          schema.at("maximum").dump());
        }
    }

    if (v.is_object()) {
        if (schema.contains("required")) {
            for (const auto& name : schema.at("required")) {
                if (!v.contains(name.get<std::string>())) {
                    out.push_back(path + ": missing required property '" +
                                  name.get<std::string>() + "'");
                }
            }
        }
        const json props = schema.value("properties", json::object());
        for (const auto& [key, child] : v.items()) {
            if (props.contains(key)) {
                check(child, props.at(key), path + "." + key, out);
            } else if (schema.contains("additionalProperties") &&
                       schema.at("additionalProperties").is_boolean() &&
                       !schema.at("additionalProperties").get<bool>()) {
                out.push_back(path + ": unexpected property '" + key + "'");
            }
        }
    }

    if (v.is_array()) {
        if (schema.contains("minItems") &&
            v.size() < schema.at("minItems").get<std::size_t>()) {
            out.push_back(path + ": array has " + std::to_string(v.size()) +
                          " items, fewer than minItems " + schema.at("minItems").dump());
        }
        if (schema.contains("items")) {
            std::size_t i = 0;
            for (const auto& child : v) {
                check(child, schema.at("items"), path + "[" + std::to_string(i) + "]", out);
                ++i;
            }
        }
    }
}

}  // namespace

std::vector<std::string> validate_schema(const nlohmann::json& instance,
                                         const nlohmann::json& schema) {
    std::vector<std::string> out;
    check(instance, schema, "$", out);
    return out;
}

void require_schema(const nlohmann::json& instance, const nlohmann::json& schema,
                    const std::string& what) {
    const std::vector<std::string> violations = validate_schema(instance, schema);
    if (violations.empty()) return;
    std::string msg = what + " fails schema:";
    for (const auto& v : violations) {
        msg += "\n  ";
        msg += v;
    }
    throw ModelError(msg);
}

}  // namespace rca
