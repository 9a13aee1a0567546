#include "vigil/values.hpp"

#include "vigil/errors.hpp"

namespace vigil {

Json to_json(const ValueList& values) {
  Json arr = Json::array();
  for (const Value& v : values) {
    if (is_num(v)) {
      arr.push_back(num(v));
    } else {
      arr.push_back(str(v));
    }
  }
  return arr;
}

ValueList value_list_from_json(const Json& j) {
  if (!j.is_array()) raise(Err::SchemaViolation, "payload must be an array");
  ValueList out;
  out.reserve(j.size());
  for (const Json& e : j) {
    if (e.is_number()) {
      out.emplace_back(e.get<double>());
    } else if (e.is_string()) {
      out.emplace_back(e.get<std::string>());
    } else if (e.is_boolean()) {
      out.emplace_back(e.get<bool>() ? 1.0 : 0.0);
    } else {
      raise(Err::SchemaViolation, "payload entries must be numbers or strings");
    }
  }
  return out;
}

std::string to_string(const ValueList& values) { return to_json(values).dump(); }

}  // namespace vigil
