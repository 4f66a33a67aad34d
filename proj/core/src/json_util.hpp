#pragma once

// Strict accessors over nlohmann::json used by every file-format parser.

#include <initializer_list>
#include <string>
#include <string_view>

#include "equiflow/error.hpp"
#include "equiflow/format.hpp"
#include "json.hpp"

namespace equiflow::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline json parse_json(std::string_view text, std::string_view what)
{
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

inline void require_object(const json& j, std::string_view context)
{
  if (!j.is_object()) throw SchemaError(std::string(context) + ": expected an object");
}

/// Rejects keys outside `allowed`. A "format" key is always allowed but must
/// carry the current version tag.
inline void require_known_keys(const json& j, std::initializer_list<std::string_view> allowed,
                               std::string_view context)
{
  require_object(j, context);
  for (const auto& [key, value] : j.items()) {
    if (key == "format") {
      if (!value.is_string() || value.get<std::string>() != kFormatVersion)
        throw SchemaError(std::string(context) + ": unsupported format tag");
      continue;
    }
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw SchemaError(std::string(context) + ": unknown field \"" + key + "\"");
  }
}

inline const json& field(const json& j, const char* key, std::string_view context)
{
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(std::string(context) + ": missing field \"" + key + "\"");
  return *it;
}

inline double get_number(const json& j, const char* key, std::string_view context)
{
  const json& v = field(j, key, context);
  if (!v.is_number())
    throw SchemaError(std::string(context) + ": field \"" + key + "\" must be a number");
  return v.get<double>();
}

inline long long get_integer(const json& j, const char* key, std::string_view context)
{
  const json& v = field(j, key, context);
  if (!v.is_number_integer())
    throw SchemaError(std::string(context) + ": field \"" + key + "\" must be an integer");
  return v.get<long long>();
}

inline bool get_bool(const json& j, const char* key, std::string_view context)
{
  const json& v = field(j, key, context);
  if (!v.is_boolean())
    throw SchemaError(std::string(context) + ": field \"" + key + "\" must be a boolean");
  return v.get<bool>();
}

inline std::string get_string(const json& j, const char* key, std::string_view context)
{
  const json& v = field(j, key, context);
  if (!v.is_string())
    throw SchemaError(std::string(context) + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

inline const json& get_array(const json& j, const char* key, std::string_view context)
{
  const json& v = field(j, key, context);
  if (!v.is_array())
    throw SchemaError(std::string(context) + ": field \"" + key + "\" must be an array");
  return v;
}

/// Report numbers are rounded to kReportDigits so dumps are stable.
inline json report_number(double v) { return json(round_significant(v)); }

}  // namespace equiflow::detail
