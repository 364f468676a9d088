#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "advtest/error.hpp"
#include "advtest/text.hpp"

namespace advtest {

using ojson = nlohmann::ordered_json;

namespace detail {

template <class J>
void dump_compact(const J& j, std::string& out) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: out += "null"; break;
    case nlohmann::json::value_t::boolean: out += j.template get<bool>() ? "true" : "false"; break;
    case nlohmann::json::value_t::number_integer: out += std::to_string(j.template get<std::int64_t>()); break;
    case nlohmann::json::value_t::number_unsigned: out += std::to_string(j.template get<std::uint64_t>()); break;
    case nlohmann::json::value_t::number_float: {
      const double v = j.template get<double>();
      if (!std::isfinite(v)) throw Error("cannot encode non-finite number");
      out += format_double(v);
      break;
    }
    case nlohmann::json::value_t::string: out += j.dump(); break;
    case nlohmann::json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        dump_compact(e, out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += J(it.key()).dump();
        out += ':';
        dump_compact(it.value(), out);
      }
      out += '}';
      break;
    }
    default: throw Error("cannot encode binary or discarded json value");
  }
}

}  // namespace detail

/// Single-line JSON with shortest round-trip doubles; byte-stable.
template <class J>
std::string dump_line(const J& j) {
  std::string out;
  detail::dump_compact(j, out);
  return out;
}

}  // namespace advtest
