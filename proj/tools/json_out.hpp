#pragma once

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <string>

#include "helmbranch/io.hpp"

namespace helmbranch::cli {

using json = nlohmann::ordered_json;

/// Pretty JSON with every float written as %.17g; non-finite floats become null.
inline void write_json(std::ostream& out, const json& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  if (j.is_number_float()) {
    const double v = j.get<double>();
    out << (std::isfinite(v) ? fmt17(v) : "null");
  } else if (j.is_object()) {
    if (j.empty()) {
      out << "{}";
      return;
    }
    out << "{\n";
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      out << (first ? "" : ",\n") << pad << json(key).dump() << ": ";
      write_json(out, value, indent + 2);
      first = false;
    }
    out << '\n' << close << '}';
  } else if (j.is_array()) {
    bool flat = true;
    for (const auto& v : j) flat = flat && v.is_primitive();
    if (flat) {
      out << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ", ";
        write_json(out, j[i], indent);
      }
      out << ']';
      return;
    }
    out << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out << (i ? ",\n" : "") << pad;
      write_json(out, j[i], indent + 2);
    }
    out << '\n' << close << ']';
  } else {
    out << j.dump();
  }
}

}  // namespace helmbranch::cli
