#pragma once

// Generic layer of the specification language: a line-oriented lexer and a
// schema-driven builder that turns `key: value` lines, `[a,b]` ranges and
// `Header {` ... `}` blocks into a tree of entities. The typed scene, agent and
// sampler parsers sit on top of this.
//
// Surface syntax:
//   - `//` starts a comment that runs to the end of the line (outside quotes)
//   - `Name {` opens an explicit block; `}` closes it (anywhere on a line)
//   - `key: value` is a property; several may share a line separated by `,`
//   - `key:` with nothing after it opens an implicit section that stays open
//     for as long as following keys belong to it
//   - keys are case-insensitive; spaces and `-` normalize to `_`

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "advtest/error.hpp"
#include "advtest/text.hpp"

namespace advtest::sdl {

struct Range {
  double low = 0;
  double high = 0;
  bool operator==(const Range&) const = default;
};

enum class DType {
  Scalar,          // number, optionally with a unit suffix (5Hz)
  Integer,
  UnsignedInteger,
  UniformRange,    // [lo,hi]
  Parameter,       // literal scalar or [lo,hi]
  IntegerArray,
  NumberArray,
  Boolean,
  Enum,            // bare identifier
  String,          // quoted or bare
  IdentifierList,  // [a, b, c]
  OptionValue,     // number or boolean
};

using Value = std::variant<double, std::int64_t, std::uint64_t, Range, std::vector<std::int64_t>,
                           std::vector<double>, bool, std::string, std::vector<std::string>>;

/// A named, typed property of an entity (meta-model level).
struct Property {
  std::string name;
  DType dtype = DType::Scalar;
  Value value;
  std::string raw;
  SourcePos pos;
  SourcePos value_pos;
};

/// A named collection of properties and nested entities.
struct Entity {
  std::string name;
  SourcePos pos;
  std::vector<Property> properties;
  std::vector<Entity> children;

  const Property* find(std::string_view key) const {
    for (const auto& p : properties)
      if (p.name == key) return &p;
    return nullptr;
  }
  const Entity* child(std::string_view key) const {
    for (const auto& c : children)
      if (c.name == key) return &c;
    return nullptr;
  }
  std::vector<const Entity*> children_named(std::string_view key) const {
    std::vector<const Entity*> out;
    for (const auto& c : children)
      if (c.name == key) out.push_back(&c);
    return out;
  }
};

struct PropertySchema {
  PropertySchema(DType d = DType::Scalar, std::string u = {}) : dtype(d), unit(std::move(u)) {}
  DType dtype;
  std::string unit;  // accepted unit suffix for Scalar, case-insensitive
};

struct BlockSchema {
  std::map<std::string, PropertySchema, std::less<>> properties;
  std::map<std::string, const BlockSchema*, std::less<>> children;
  std::set<std::string, std::less<>> repeatable;
  /// When set, any key containing '.' is accepted with this schema.
  std::optional<PropertySchema> dotted_keys;
  /// When set, any key at all is accepted with this schema.
  std::optional<PropertySchema> any_key;

  const PropertySchema* property(std::string_view key) const {
    if (auto it = properties.find(key); it != properties.end()) return &it->second;
    if (any_key) return &*any_key;
    if (dotted_keys && key.find('.') != std::string_view::npos) return &*dotted_keys;
    return nullptr;
  }
  const BlockSchema* block(std::string_view key) const {
    auto it = children.find(key);
    return it == children.end() ? nullptr : it->second;
  }
};

/// Lowercase; runs of spaces, tabs and '-' become a single '_'.
inline std::string normalize_key(std::string_view raw) {
  std::string out;
  bool pending = false;
  for (char ch : trim(raw)) {
    if (ch == ' ' || ch == '\t' || ch == '-') {
      pending = true;
      continue;
    }
    if (pending && !out.empty()) out += '_';
    pending = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

namespace detail {

struct RawItem {
  enum class Kind { Open, Close, Section, Property };
  Kind kind;
  std::string key;
  std::string raw_key;
  std::string value;
  SourcePos pos;
  SourcePos value_pos;
};

inline bool key_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '-' || c == ' ' || c == '\t' || c == '.';
}

inline std::vector<RawItem> lex(std::string_view text) {
  std::vector<RawItem> items;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    const auto at = [&](std::size_t i) { return SourcePos{line_no, i + 1}; };

    // Cut the comment, respecting quoted strings.
    {
      bool quoted = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (quoted) {
          if (line[i] == '\\')
            ++i;
          else if (line[i] == '"')
            quoted = false;
        } else if (line[i] == '"') {
          quoted = true;
        } else if (line[i] == '/' && i + 1 < line.size() && line[i + 1] == '/') {
          line = line.substr(0, i);
          break;
        }
      }
    }

    std::size_t i = 0;
    const auto skip_ws = [&] {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    while (true) {
      skip_ws();
      if (i >= line.size()) break;
      const char c = line[i];
      if (c == '}') {
        items.push_back({RawItem::Kind::Close, {}, {}, {}, at(i), at(i)});
        ++i;
        continue;
      }
      if (c == ',') {
        ++i;
        continue;
      }
      if (c == '{') throw SyntaxError(at(i), "unexpected '{'", "key");
      const std::size_t key_begin = i;
      while (i < line.size() && key_char(line[i])) ++i;
      const std::string_view raw_key = trim(line.substr(key_begin, i - key_begin));
      if (raw_key.empty())
        throw SyntaxError(at(i), std::string("unexpected character '") + line[i] + "'", "key");
      const std::string key = normalize_key(raw_key);
      if (i >= line.size() || line[i] == '}')
        throw SyntaxError(at(i), "key '" + std::string(raw_key) + "' without value", "':' or '{'");
      if (line[i] == '{') {
        items.push_back({RawItem::Kind::Open, key, std::string(raw_key), {}, at(key_begin), at(i)});
        ++i;
        continue;
      }
      if (line[i] != ':') throw SyntaxError(at(i), std::string("unexpected character '") + line[i] + "'", "':' or '{'");
      ++i;
      skip_ws();
      if (i < line.size() && line[i] == '{') {
        items.push_back({RawItem::Kind::Open, key, std::string(raw_key), {}, at(key_begin), at(i)});
        ++i;
        continue;
      }
      const std::size_t value_begin = i;
      int depth = 0;
      bool quoted = false;
      for (; i < line.size(); ++i) {
        const char v = line[i];
        if (quoted) {
          if (v == '\\')
            ++i;
          else if (v == '"')
            quoted = false;
          continue;
        }
        if (v == '"') {
          quoted = true;
        } else if (v == '[') {
          ++depth;
        } else if (v == ']') {
          if (depth == 0) throw SyntaxError(at(i), "unmatched ']'");
          --depth;
        } else if (depth == 0 && (v == ',' || v == '}')) {
          break;
        } else if (v == '{') {
          throw SyntaxError(at(i), "unexpected '{' inside value");
        }
      }
      if (quoted) throw SyntaxError(at(line.size()), "unterminated string", "'\"'");
      if (depth != 0) throw SyntaxError(at(line.size()), "unterminated list", "']'");
      const std::string_view value = trim(line.substr(value_begin, i - value_begin));
      const auto kind = value.empty() ? RawItem::Kind::Section : RawItem::Kind::Property;
      std::size_t vpos = value_begin;
      while (vpos < line.size() && std::isspace(static_cast<unsigned char>(line[vpos]))) ++vpos;
      items.push_back({kind, key, std::string(raw_key), std::string(value), at(key_begin), at(vpos)});
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  (void)line_no;
  return items;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  const auto first = static_cast<unsigned char>(s.front());
  if (!std::isalpha(first) && s.front() != '_') return false;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '_' && c != '-' && c != '.') return false;
  }
  return true;
}

inline std::vector<std::string_view> split_list(std::string_view v, SourcePos pos, const std::string& field) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw SemanticError(pos, field, "expected a bracketed list, got '" + std::string(v) + "'");
  std::string_view inner = trim(v.substr(1, v.size() - 2));
  std::vector<std::string_view> out;
  if (inner.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = inner.find(',', start);
    out.push_back(trim(inner.substr(start, comma == std::string_view::npos ? inner.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto e : out)
    if (e.empty()) throw SemanticError(pos, field, "empty list element");
  return out;
}

inline double number_or_throw(std::string_view s, SourcePos pos, const std::string& field) {
  auto v = parse_double(s);
  if (!v) throw SemanticError(pos, field, "expected a number, got '" + std::string(s) + "'");
  return *v;
}

inline std::string unquote(std::string_view s, SourcePos pos, const std::string& field) {
  if (s.empty() || s.front() != '"') return std::string(s);
  if (s.size() < 2 || s.back() != '"') throw SemanticError(pos, field, "unterminated string");
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) {
      ++i;
      out += s[i] == 'n' ? '\n' : s[i];
    } else if (s[i] == '"') {
      throw SemanticError(pos, field, "stray quote in string");
    } else {
      out += s[i];
    }
  }
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

inline Value parse_value(const PropertySchema& schema, std::string_view raw, SourcePos pos,
                         const std::string& field) {
  if (raw.empty()) throw SemanticError(pos, field, "missing value");
  switch (schema.dtype) {
    case DType::Scalar: {
      std::size_t n = raw.size();
      while (n > 0 && std::isalpha(static_cast<unsigned char>(raw[n - 1]))) --n;
      const std::string_view num = trim(raw.substr(0, n));
      const std::string_view unit = raw.substr(n);
      if (!unit.empty() && (schema.unit.empty() || !iequals(unit, schema.unit)))
        throw SemanticError(pos, field, "unexpected unit '" + std::string(unit) + "'");
      return number_or_throw(num, pos, field);
    }
    case DType::Integer: {
      auto v = parse_int(raw);
      if (!v) throw SemanticError(pos, field, "expected an integer, got '" + std::string(raw) + "'");
      return *v;
    }
    case DType::UnsignedInteger: {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || p != raw.data() + raw.size())
        throw SemanticError(pos, field, "expected a non-negative 64-bit integer, got '" + std::string(raw) + "'");
      return v;
    }
    case DType::UniformRange:
    case DType::Parameter: {
      if (raw.front() != '[') {
        if (schema.dtype == DType::UniformRange)
          throw SemanticError(pos, field, "expected a range [low,high]");
        return number_or_throw(raw, pos, field);
      }
      auto parts = split_list(raw, pos, field);
      if (parts.size() != 2) throw SemanticError(pos, field, "a range takes exactly two bounds");
      Range r{number_or_throw(parts[0], pos, field), number_or_throw(parts[1], pos, field)};
      if (r.low > r.high)
        throw SemanticError(pos, field,
                            "inverted range [" + format_double(r.low) + "," + format_double(r.high) + "]");
      return r;
    }
    case DType::IntegerArray: {
      std::vector<std::int64_t> out;
      for (auto e : split_list(raw, pos, field)) {
        auto v = parse_int(e);
        if (!v) throw SemanticError(pos, field, "expected integers in list");
        out.push_back(*v);
      }
      if (out.empty()) throw SemanticError(pos, field, "integer array must not be empty");
      return out;
    }
    case DType::NumberArray: {
      std::vector<double> out;
      for (auto e : split_list(raw, pos, field)) out.push_back(number_or_throw(e, pos, field));
      if (out.empty()) throw SemanticError(pos, field, "number array must not be empty");
      return out;
    }
    case DType::Boolean:
      if (iequals(raw, "true")) return true;
      if (iequals(raw, "false")) return false;
      throw SemanticError(pos, field, "expected true or false, got '" + std::string(raw) + "'");
    case DType::Enum: {
      if (!is_identifier(raw)) throw SemanticError(pos, field, "expected an identifier, got '" + std::string(raw) + "'");
      return normalize_key(raw);
    }
    case DType::String:
      return unquote(raw, pos, field);
    case DType::IdentifierList: {
      std::vector<std::string> out;
      for (auto e : split_list(raw, pos, field)) {
        if (!is_identifier(e)) throw SemanticError(pos, field, "expected identifiers in list");
        out.push_back(normalize_key(e));
      }
      return out;
    }
    case DType::OptionValue:
      if (iequals(raw, "true")) return true;
      if (iequals(raw, "false")) return false;
      return number_or_throw(raw, pos, field);
  }
  throw SemanticError(pos, field, "unsupported value");
}

}  // namespace detail

/**
 * Parse `text` against `root`. Implicit sections (`key:` with no value) close
 * as soon as a key appears that they do not declare; explicit blocks close only
 * at `}`. Unknown keys and blocks are errors.
 */
inline Entity parse_document(std::string_view text, const BlockSchema& root) {
  using detail::RawItem;
  struct Frame {
    const BlockSchema* schema;
    Entity* entity;
    bool explicit_block;
    SourcePos opened;
  };

  Entity doc;
  doc.name = "";
  doc.pos = {1, 1};
  std::vector<Frame> stack{{&root, &doc, true, {1, 1}}};

  const auto unwind_to = [&](auto accepts) {
    while (!stack.back().explicit_block && !accepts(*stack.back().schema)) stack.pop_back();
  };
  const auto block_label = [&](const Frame& f) { return f.entity->name.empty() ? std::string("document") : f.entity->name; };

  for (auto& item : detail::lex(text)) {
    switch (item.kind) {
      case RawItem::Kind::Close: {
        while (!stack.back().explicit_block) stack.pop_back();
        if (stack.size() == 1) throw SyntaxError(item.pos, "unmatched '}'");
        stack.pop_back();
        break;
      }
      case RawItem::Kind::Open:
      case RawItem::Kind::Section: {
        if (item.kind == RawItem::Kind::Section) {
          // `key:` might be a property with an empty value rather than a section.
          unwind_to([&](const BlockSchema& s) { return s.block(item.key) || s.property(item.key); });
          if (!stack.back().schema->block(item.key) && stack.back().schema->property(item.key)) {
            const auto& ps = *stack.back().schema->property(item.key);
            (void)ps;
            throw SemanticError(item.value_pos, item.key, "missing value");
          }
        } else {
          unwind_to([&](const BlockSchema& s) { return s.block(item.key) != nullptr; });
        }
        Frame& top = stack.back();
        const BlockSchema* child = top.schema->block(item.key);
        if (!child)
          throw SemanticError(item.pos, item.key, "unknown block in " + block_label(top));
        if (!top.schema->repeatable.count(item.key) && top.entity->child(item.key))
          throw SemanticError(item.pos, item.key, "duplicate block");
        top.entity->children.push_back(Entity{item.key, item.pos, {}, {}});
        Entity* e = &top.entity->children.back();
        stack.push_back({child, e, item.kind == RawItem::Kind::Open, item.pos});
        break;
      }
      case RawItem::Kind::Property: {
        unwind_to([&](const BlockSchema& s) { return s.property(item.key) != nullptr; });
        Frame& top = stack.back();
        const PropertySchema* ps = top.schema->property(item.key);
        if (!ps) throw SemanticError(item.pos, item.key, "unknown key in " + block_label(top));
        if (top.entity->find(item.key)) throw SemanticError(item.pos, item.key, "duplicate key");
        Property p;
        p.name = item.key;
        p.dtype = ps->dtype;
        p.raw = item.value;
        p.pos = item.pos;
        p.value_pos = item.value_pos;
        p.value = detail::parse_value(*ps, item.value, item.value_pos, item.key);
        top.entity->properties.push_back(std::move(p));
        break;
      }
    }
  }
  while (!stack.back().explicit_block) stack.pop_back();
  if (stack.size() > 1) {
    std::size_t lines = 1;
    for (char c : text) lines += c == '\n';
    throw SyntaxError({lines, 1}, "block '" + stack.back().entity->name + "' opened at " +
                                      stack.back().opened.str() + " is not closed", "'}'");
  }
  return doc;
}

}  // namespace advtest::sdl
