#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace vigil {

// All JSON in the project goes through ordered_json so emitted field order is
// stable and logs/reports are diffable.
using Json = nlohmann::ordered_json;

// One payload slot on the simulated bus: a numeric channel or a symbolic atom.
using Value = std::variant<double, std::string>;
using ValueList = std::vector<Value>;

inline bool is_num(const Value& v) { return std::holds_alternative<double>(v); }
inline double num(const Value& v) { return std::get<double>(v); }
inline const std::string& str(const Value& v) { return std::get<std::string>(v); }

Json to_json(const ValueList& values);
ValueList value_list_from_json(const Json& j);
std::string to_string(const ValueList& values);

}  // namespace vigil
