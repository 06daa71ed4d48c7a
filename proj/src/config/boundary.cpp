#include "cohort/config.hpp"
#include "cohort/errors.hpp"

namespace cohort {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_ref_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '.';
}

BoundaryRef parse_ref(std::string_view token, std::string_view window, std::string_view full) {
  BoundaryRef ref;
  if (token == "trigger") return BoundaryRef::trigger();
  if (token == "start" || token == "end") {
    ref.is_trigger = false;
    ref.window = std::string(window);
    ref.side = token == "start" ? Side::start : Side::end;
    ref.sibling = true;
    return ref;
  }
  auto dot = token.find('.');
  if (dot == std::string_view::npos) {
    throw ConfigError("unknown reference '" + std::string(token) + "' in boundary '" +
                      std::string(full) + "' (expected trigger, start, end or <window>.start|end)");
  }
  std::string_view target = token.substr(0, dot);
  std::string_view side = token.substr(dot + 1);
  if (!is_valid_identifier(target) || (side != "start" && side != "end")) {
    throw ConfigError("malformed reference '" + std::string(token) + "' in boundary '" +
                      std::string(full) + "'");
  }
  ref.is_trigger = false;
  ref.window = std::string(target);
  ref.side = side == "start" ? Side::start : Side::end;
  ref.sibling = false;
  return ref;
}

}  // namespace

std::string BoundaryRef::qualified_name() const {
  if (is_trigger) return "trigger";
  return window + (side == Side::start ? ".start" : ".end");
}

BoundaryExpr parse_boundary_expr(std::string_view text, std::string_view window) {
  std::string_view s = trim(text);
  if (s.empty()) throw ConfigError("empty boundary expression");
  BoundaryExpr expr;
  if (s == "NULL") {
    expr.kind = BoundaryKind::unbounded;
    return expr;
  }

  std::size_t i = 0;
  while (i < s.size() && is_ref_char(s[i])) ++i;
  if (i == 0) throw ConfigError("malformed boundary expression '" + std::string(s) + "'");
  expr.reference = parse_ref(s.substr(0, i), window, s);
  std::string_view rest = trim(s.substr(i));
  if (rest.empty()) {
    expr.kind = BoundaryKind::reference;
    return expr;
  }

  if (rest.starts_with("->") || rest.starts_with("<-")) {
    expr.kind = BoundaryKind::event_bound;
    expr.direction = rest.starts_with("->") ? SearchDirection::next : SearchDirection::previous;
    std::string_view pred = trim(rest.substr(2));
    if (pred != kAnyEvent && !is_valid_identifier(pred)) {
      throw ConfigError("malformed predicate '" + std::string(pred) + "' in boundary '" +
                        std::string(s) + "'");
    }
    expr.bound_predicate = std::string(pred);
    return expr;
  }
  if (rest.front() == '+' || rest.front() == '-') {
    expr.kind = BoundaryKind::temporal_offset;
    expr.sign = rest.front() == '+' ? OffsetSign::plus : OffsetSign::minus;
    expr.offset = parse_duration(trim(rest.substr(1)));
    return expr;
  }
  throw ConfigError("malformed boundary expression '" + std::string(s) + "'");
}

std::string format_boundary_expr(const BoundaryExpr& expr) {
  if (expr.kind == BoundaryKind::unbounded) return "NULL";
  std::string ref;
  if (expr.reference.is_trigger) {
    ref = "trigger";
  } else if (expr.reference.sibling) {
    ref = expr.reference.side == Side::start ? "start" : "end";
  } else {
    ref = expr.reference.qualified_name();
  }
  switch (expr.kind) {
    case BoundaryKind::reference:
      return ref;
    case BoundaryKind::temporal_offset:
      return ref + (expr.sign == OffsetSign::plus ? " + " : " - ") + format_duration(expr.offset);
    case BoundaryKind::event_bound:
      return ref + (expr.direction == SearchDirection::next ? " -> " : " <- ") +
             expr.bound_predicate;
    case BoundaryKind::unbounded:
      break;
  }
  return "NULL";
}

}  // namespace cohort
