// Copyright 2026 The Flowgate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// A JSON-schema subset sufficient for the experiment schema: type, enum,
// properties, additionalProperties (boolean), required, items, minItems,
// maxItems, minLength, minimum, maximum, exclusiveMinimum, exclusiveMaximum.

#include <string>

#include "flowgate/cli/config.hpp"
#include "flowgate/cli/schema_text.hpp"
#include "flowgate/error.hpp"

namespace flowgate::cli {
namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigInvalid, (path.empty() ? std::string("/") : path) + ": " + what);
}

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>()));
  }
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

void check(const json& v, const json& s, const std::string& path) {
  if (s.contains("type")) {
    const auto& t = s["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = has_type(v, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || has_type(v, alt.get<std::string>());
    }
    if (!ok) invalid(path, "expected " + t.dump() + ", got " + v.dump());
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) invalid(path, "value " + v.dump() + " not in " + s["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>()) {
      invalid(path, "must be >= " + s["minimum"].dump());
    }
    if (s.contains("maximum") && x > s["maximum"].get<double>()) {
      invalid(path, "must be <= " + s["maximum"].dump());
    }
    if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>()) {
      invalid(path, "must be > " + s["exclusiveMinimum"].dump());
    }
    if (s.contains("exclusiveMaximum") && x >= s["exclusiveMaximum"].get<double>()) {
      invalid(path, "must be < " + s["exclusiveMaximum"].dump());
    }
  }
  if (v.is_string() && s.contains("minLength") &&
      v.get<std::string>().size() < s["minLength"].get<std::size_t>()) {
    invalid(path, "string too short");
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) {
      invalid(path, "needs at least " + s["minItems"].dump() + " items");
    }
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) {
      invalid(path, "allows at most " + s["maxItems"].dump() + " items");
    }
    if (s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        check(v[i], s["items"], path + "/" + std::to_string(i));
      }
    }
  }
  if (v.is_object()) {
    const json props = s.value("properties", json::object());
    if (s.contains("required")) {
      for (const auto& r : s["required"]) {
        if (!v.contains(r.get<std::string>())) {
          invalid(path + "/" + r.get<std::string>(), "required field missing");
        }
      }
    }
    for (const auto& [key, value] : v.items()) {
      if (props.contains(key)) {
        check(value, props[key], path + "/" + key);
      } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
        invalid(path + "/" + key, "unknown field");
      }
    }
  }
}

}  // namespace

const json& experiment_schema() {
  static const json schema = json::parse(kExperimentSchemaText);
  return schema;
}

void validate_against_schema(const json& doc, const json& schema) { check(doc, schema, ""); }

}  // namespace flowgate::cli
