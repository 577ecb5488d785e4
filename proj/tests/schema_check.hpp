#pragma once

// Validator for the JSON-schema subset used by schemas/*.json: type, const,
// minimum, required, properties, additionalProperties: false, items and
// local "#/$defs/..." references.

#include <string>
#include <vector>

#include <json.hpp>

namespace schema_check {

using nlohmann::json;

inline void validate(const json& schema, const json& value, const json& root, const std::string& path,
                     std::vector<std::string>& errors) {
  if (schema.contains("$ref")) {
    const auto ref = schema["$ref"].get<std::string>();
    const std::string prefix = "#/$defs/";
    if (ref.rfind(prefix, 0) != 0) {
      errors.push_back(path + ": unsupported $ref " + ref);
      return;
    }
    validate(root.at("$defs").at(ref.substr(prefix.size())), value, root, path, errors);
    return;
  }
  if (schema.contains("const") && value != schema["const"]) {
    errors.push_back(path + ": expected " + schema["const"].dump());
  }
  if (schema.contains("type")) {
    const auto type = schema["type"].get<std::string>();
    const bool ok = (type == "object" && value.is_object()) || (type == "array" && value.is_array()) ||
                    (type == "integer" && value.is_number_integer()) ||
                    (type == "number" && value.is_number()) || (type == "string" && value.is_string()) ||
                    (type == "boolean" && value.is_boolean());
    if (!ok) {
      errors.push_back(path + ": expected " + type);
      return;
    }
  }
  if (schema.contains("minimum") && value.is_number() && value.get<double>() < schema["minimum"].get<double>()) {
    errors.push_back(path + ": below minimum");
  }
  if (value.is_object()) {
    for (const auto& key : schema.value("required", json::array())) {
      if (!value.contains(key.get<std::string>())) errors.push_back(path + ": missing " + key.get<std::string>());
    }
    const auto props = schema.value("properties", json::object());
    for (const auto& [key, v] : value.items()) {
      if (props.contains(key)) {
        validate(props[key], v, root, path + "/" + key, errors);
      } else if (schema.contains("additionalProperties") && schema["additionalProperties"] == false) {
        errors.push_back(path + ": unexpected key " + key);
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (std::size_t k = 0; k < value.size(); ++k) {
      validate(schema["items"], value[k], root, path + "/" + std::to_string(k), errors);
    }
  }
}

inline std::vector<std::string> validate(const json& schema, const json& value) {
  std::vector<std::string> errors;
  validate(schema, value, schema, "", errors);
  return errors;
}

}  // namespace schema_check
