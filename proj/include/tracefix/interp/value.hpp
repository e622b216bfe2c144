#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace tracefix::interp {

// Runtime value. Arrays are immutable and shared; an index assignment
// builds a new array, so values captured in a trace never change.
class Value {
 public:
  using Array = std::vector<Value>;
  enum class Kind { Unit, Int, Bool, Str, Array };

  Value() = default;
  static Value unit() { return Value(); }
  static Value integer(std::int64_t v);
  static Value boolean(bool v);
  static Value string(std::string v);
  static Value array(Array items);

  Kind kind() const { return static_cast<Kind>(v_.index()); }
  bool is_int() const { return kind() == Kind::Int; }
  bool is_bool() const { return kind() == Kind::Bool; }
  bool is_str() const { return kind() == Kind::Str; }
  bool is_array() const { return kind() == Kind::Array; }

  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  const std::string& as_str() const { return std::get<std::string>(v_); }
  const Array& as_array() const { return *std::get<std::shared_ptr<const Array>>(v_); }

  // Deep structural equality.
  friend bool operator==(const Value& a, const Value& b);

  // MiniLang literal syntax; strings are quoted, Unit renders as `unit`.
  std::string literal() const;
  // Text produced by `print`: like literal() but a top-level string is raw.
  std::string display() const;

 private:
  std::variant<std::monostate, std::int64_t, bool, std::string, std::shared_ptr<const Array>> v_;
};

const char* to_string(Value::Kind kind);

// Parses a literal value (integers, booleans, strings, arrays of literals,
// or `unit`). Throws lang::SyntaxError on anything else.
Value parse_value(const std::string& text);

}  // namespace tracefix::interp
