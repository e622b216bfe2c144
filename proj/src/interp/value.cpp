#include "tracefix/interp/value.hpp"

#include "tracefix/lang/parser.hpp"
#include "tracefix/lang/printer.hpp"

namespace tracefix::interp {

Value Value::integer(std::int64_t v) {
  Value out;
  out.v_ = v;
  return out;
}

Value Value::boolean(bool v) {
  Value out;
  out.v_ = v;
  return out;
}

Value Value::string(std::string v) {
  Value out;
  out.v_ = std::move(v);
  return out;
}

Value Value::array(Array items) {
  Value out;
  out.v_ = std::make_shared<const Array>(std::move(items));
  return out;
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::Unit: return true;
    case Value::Kind::Int: return a.as_int() == b.as_int();
    case Value::Kind::Bool: return a.as_bool() == b.as_bool();
    case Value::Kind::Str: return a.as_str() == b.as_str();
    case Value::Kind::Array: {
      const auto& pa = std::get<std::shared_ptr<const Value::Array>>(a.v_);
      const auto& pb = std::get<std::shared_ptr<const Value::Array>>(b.v_);
      return pa == pb || *pa == *pb;
    }
  }
  return false;
}

std::string Value::literal() const {
  switch (kind()) {
    case Kind::Unit: return "unit";
    case Kind::Int: return std::to_string(as_int());
    case Kind::Bool: return as_bool() ? "true" : "false";
    case Kind::Str: return lang::quote(as_str());
    case Kind::Array: {
      std::string out = "[";
      const Array& items = as_array();
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i].literal();
      }
      return out + "]";
    }
  }
  return "";
}

std::string Value::display() const { return is_str() ? as_str() : literal(); }

const char* to_string(Value::Kind kind) {
  switch (kind) {
    case Value::Kind::Unit: return "Unit";
    case Value::Kind::Int: return "Int";
    case Value::Kind::Bool: return "Bool";
    case Value::Kind::Str: return "Str";
    case Value::Kind::Array: return "Array";
  }
  return "?";
}

namespace {

Value literal_value(const lang::Expr& e) {
  using lang::ExprKind;
  switch (e.kind) {
    case ExprKind::IntLit: return Value::integer(e.int_value);
    case ExprKind::BoolLit: return Value::boolean(e.bool_value);
    case ExprKind::StrLit: return Value::string(e.text);
    case ExprKind::ArrayLit: {
      Value::Array items;
      for (const auto& c : e.children) items.push_back(literal_value(c));
      return Value::array(std::move(items));
    }
    case ExprKind::Var:
      if (e.text == "unit") return Value::unit();
      break;
    default: break;
  }
  throw lang::SyntaxError(1, "not a literal value: " + lang::pretty_print(e));
}

}  // namespace

Value parse_value(const std::string& text) { return literal_value(lang::parse_expression(text)); }

}  // namespace tracefix::interp
