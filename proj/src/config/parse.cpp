#include "cohort/config.hpp"
#include "cohort/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cohort {

std::string_view CodeMatcher::stem() const noexcept {
  std::string_view p = pattern;
  if (is_prefix()) p.remove_suffix(1);
  return p;
}

bool CodeMatcher::matches(std::string_view code) const noexcept {
  if (is_prefix()) return code.starts_with(stem());
  return code == pattern;
}

const std::string& predicate_name(const Predicate& p) {
  return std::visit([](const auto& v) -> const std::string& { return v.name; }, p);
}

const Predicate* TaskConfig::find_predicate(std::string_view name) const {
  for (const auto& p : predicates)
    if (predicate_name(p) == name) return &p;
  return nullptr;
}

const WindowDef* TaskConfig::find_window(std::string_view name) const {
  for (const auto& w : windows)
    if (w.name == name) return &w;
  return nullptr;
}

const WindowDef* TaskConfig::label_window() const {
  for (const auto& w : windows)
    if (w.label_predicate) return &w;
  return nullptr;
}

const WindowDef* TaskConfig::index_window() const {
  for (const auto& w : windows)
    if (w.index_boundary) return &w;
  return nullptr;
}

bool is_valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto head = [](char c) { return (c >= 'a' && c <= 'z') || c == '_'; };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
  if (!head(name.front())) return false;
  return std::all_of(name.begin() + 1, name.end(), tail);
}

bool is_reserved_name(std::string_view name) {
  return name == "trigger" || name == "start" || name == "end" || name == kAnyEvent;
}

std::vector<std::string> predicate_dependency_order(const TaskConfig& config) {
  std::vector<std::string> order;
  std::set<std::string, std::less<>> placed;
  for (const auto& p : config.predicates) {
    if (std::holds_alternative<PlainPredicate>(p)) {
      order.push_back(predicate_name(p));
      placed.insert(predicate_name(p));
    }
  }
  std::vector<const DerivedPredicate*> pending;
  for (const auto& p : config.predicates)
    if (const auto* d = std::get_if<DerivedPredicate>(&p)) pending.push_back(d);

  while (!pending.empty()) {
    auto ready = std::find_if(pending.begin(), pending.end(), [&](const DerivedPredicate* d) {
      return std::all_of(d->operands.begin(), d->operands.end(), [&](const std::string& op) {
        return op == kAnyEvent || placed.contains(op);
      });
    });
    if (ready == pending.end()) {
      throw ConfigError("cyclic derived predicate involving '" + pending.front()->name + "'");
    }
    order.push_back((*ready)->name);
    placed.insert((*ready)->name);
    pending.erase(ready);
  }
  return order;
}

namespace {

[[noreturn]] void fail(const YAML::Node& at, const std::string& message) {
  const YAML::Mark mark = at.Mark();
  if (mark.is_null()) throw ConfigError(message);
  throw ConfigError(message, static_cast<std::size_t>(mark.line) + 1,
                    static_cast<std::size_t>(mark.column) + 1);
}

// Rewraps an unpositioned ConfigError from a helper at the given node.
template <class F>
auto at_node(const YAML::Node& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    fail(node, e.message());
  }
}

std::string scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a scalar");
  return node.Scalar();
}

bool boolean(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be true or false");
  const std::string& s = node.Scalar();
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  fail(node, what + " must be true or false, got '" + s + "'");
}

double real(const YAML::Node& node, const std::string& what) {
  const std::string s = scalar(node, what);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) fail(node, what + " must be a number");
  return v;
}

// Visits a mapping's entries in document order, rejecting duplicate keys.
template <class F>
void for_each_entry(const YAML::Node& map, const std::string& what, F&& f) {
  if (!map.IsMap()) fail(map, what + " must be a mapping");
  std::set<std::string> seen;
  for (const auto& kv : map) {
    const std::string key = scalar(kv.first, what + " key");
    if (!seen.insert(key).second) fail(kv.first, "duplicate name '" + key + "' in " + what);
    f(key, kv.first, kv.second);
  }
}

void check_name(const YAML::Node& at, const std::string& name, const std::string& kind) {
  if (is_reserved_name(name)) fail(at, "'" + name + "' is a reserved name and cannot name a " + kind);
  if (!is_valid_identifier(name)) {
    fail(at, "invalid " + kind + " name '" + name + "' (expected [a-z_][a-z0-9_]*)");
  }
}

DerivedPredicate parse_derived(const std::string& name, const YAML::Node& node) {
  const std::string text = scalar(node, "expr");
  DerivedPredicate d;
  d.name = name;
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    fail(node, "malformed predicate expression '" + text + "'");
  }
  std::string fn = text.substr(0, open);
  fn.erase(std::remove(fn.begin(), fn.end(), ' '), fn.end());
  if (fn == "any_of" || fn == "or") {
    d.combinator = Combinator::any_of;
  } else if (fn == "all_of" || fn == "and") {
    d.combinator = Combinator::all_of;
  } else {
    fail(node, "unknown combinator '" + fn + "' (expected any_of or all_of)");
  }
  if (close + 1 != text.size()) fail(node, "trailing text after ')' in '" + text + "'");
  std::stringstream args(text.substr(open + 1, close - open - 1));
  std::string arg;
  while (std::getline(args, arg, ',')) {
    auto b = arg.find_first_not_of(" \t");
    auto e = arg.find_last_not_of(" \t");
    if (b == std::string::npos) fail(node, "empty operand in '" + text + "'");
    d.operands.push_back(arg.substr(b, e - b + 1));
  }
  if (d.operands.size() < 2) fail(node, "'" + text + "' needs at least two operands");
  return d;
}

Predicate parse_predicate(const std::string& name, const YAML::Node& node) {
  if (!node.IsMap()) fail(node, "predicate '" + name + "' must be a mapping");
  const bool has_code = static_cast<bool>(node["code"]);
  const bool has_expr = static_cast<bool>(node["expr"]);
  if (has_code == has_expr) fail(node, "predicate '" + name + "' needs exactly one of code or expr");

  std::set<std::string> allowed = has_code ? std::set<std::string>{"code", "value_min", "value_max"}
                                           : std::set<std::string>{"expr"};
  for_each_entry(node, "predicate '" + name + "'", [&](const std::string& key, const YAML::Node& k,
                                                       const YAML::Node&) {
    if (!allowed.contains(key)) fail(k, "unknown key '" + key + "' in predicate '" + name + "'");
  });

  if (has_expr) return parse_derived(name, node["expr"]);

  PlainPredicate p;
  p.name = name;
  p.code.pattern = scalar(node["code"], "code");
  if (p.code.pattern.empty()) fail(node["code"], "predicate '" + name + "' has an empty code");
  if (node["value_min"]) p.value_min = real(node["value_min"], "value_min");
  if (node["value_max"]) p.value_max = real(node["value_max"], "value_max");
  if (p.value_min && p.value_max && *p.value_min > *p.value_max) {
    fail(node, "predicate '" + name + "' has value_min > value_max");
  }
  return p;
}

std::optional<std::int64_t> parse_count_bound(std::string_view text, const YAML::Node& at) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text == "None" || text == "null" || text == "~" || text.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(at, "malformed count bound '" + std::string(text) + "'");
  }
  if (v < 0) fail(at, "count bound must be nonnegative, got " + std::to_string(v));
  return v;
}

ConstraintBound parse_constraint(const std::string& predicate, const YAML::Node& node) {
  ConstraintBound c;
  c.predicate = predicate;
  if (node.IsSequence()) {
    if (node.size() != 2) fail(node, "constraint on '" + predicate + "' needs exactly (min, max)");
    auto item = [&](const YAML::Node& n) {
      return n.IsNull() ? std::optional<std::int64_t>{} : parse_count_bound(scalar(n, "bound"), n);
    };
    c.min = item(node[0]);
    c.max = item(node[1]);
  } else {
    std::string_view s = scalar(node, "constraint");
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s.size() < 2 || s.front() != '(' || s.back() != ')') {
      fail(node, "constraint on '" + predicate + "' must look like (min, max)");
    }
    s = s.substr(1, s.size() - 2);
    auto comma = s.find(',');
    if (comma == std::string_view::npos || s.find(',', comma + 1) != std::string_view::npos) {
      fail(node, "constraint on '" + predicate + "' must look like (min, max)");
    }
    c.min = parse_count_bound(s.substr(0, comma), node);
    c.max = parse_count_bound(s.substr(comma + 1), node);
  }
  if (!c.min && !c.max) fail(node, "constraint on '" + predicate + "' bounds nothing");
  if (c.min && c.max && *c.min > *c.max) fail(node, "constraint on '" + predicate + "' has min > max");
  return c;
}

BoundaryExpr parse_boundary_node(const YAML::Node& node, const std::string& window) {
  if (node.IsNull()) return BoundaryExpr{};
  const std::string text = scalar(node, "boundary");
  return at_node(node, [&] { return parse_boundary_expr(text, window); });
}

struct WindowNodes {
  YAML::Node self;
  YAML::Node start;
  YAML::Node end;
};

WindowDef parse_window(const std::string& name, const YAML::Node& node, WindowNodes& nodes) {
  static const std::set<std::string> allowed = {"start",       "end", "start_inclusive",
                                                "end_inclusive", "has", "label",
                                                "index_timestamp"};
  for_each_entry(node, "window '" + name + "'",
                 [&](const std::string& key, const YAML::Node& k, const YAML::Node&) {
                   if (!allowed.contains(key)) fail(k, "unknown key '" + key + "' in window '" + name + "'");
                 });
  if (!node["start"]) fail(node, "window '" + name + "' is missing 'start'");
  if (!node["end"]) fail(node, "window '" + name + "' is missing 'end'");

  WindowDef w;
  w.name = name;
  nodes.self = node;
  nodes.start = node["start"];
  nodes.end = node["end"];
  w.start = parse_boundary_node(nodes.start, name);
  w.end = parse_boundary_node(nodes.end, name);
  if (w.start.kind == BoundaryKind::unbounded && w.end.kind == BoundaryKind::unbounded) {
    fail(node, "window '" + name + "' has both boundaries unbounded");
  }
  if (node["start_inclusive"]) w.start_inclusive = boolean(node["start_inclusive"], "start_inclusive");
  if (node["end_inclusive"]) w.end_inclusive = boolean(node["end_inclusive"], "end_inclusive");
  if (const YAML::Node has = node["has"]; has && !has.IsNull()) {
    for_each_entry(has, "constraints of window '" + name + "'",
                   [&](const std::string& pred, const YAML::Node&, const YAML::Node& value) {
                     w.constraints.push_back(parse_constraint(pred, value));
                   });
  }
  if (node["label"]) w.label_predicate = scalar(node["label"], "label");
  if (const YAML::Node idx = node["index_timestamp"]) {
    const std::string s = scalar(idx, "index_timestamp");
    if (s == "start") {
      w.index_boundary = Side::start;
    } else if (s == "end") {
      w.index_boundary = Side::end;
    } else {
      fail(idx, "index_timestamp must be 'start' or 'end', got '" + s + "'");
    }
  }
  return w;
}

// Each boundary points at exactly one other boundary (its reference, or its
// sibling when unbounded). The config is valid iff following those pointers
// from every boundary reaches the trigger.
void check_reference_graph(const TaskConfig& config, const std::vector<WindowNodes>& nodes) {
  std::map<std::string, std::pair<std::size_t, Side>> index;
  for (std::size_t i = 0; i < config.windows.size(); ++i) {
    index[config.windows[i].name + ".start"] = {i, Side::start};
    index[config.windows[i].name + ".end"] = {i, Side::end};
  }
  auto parent_of = [&](std::size_t w, Side side) -> std::string {
    const WindowDef& win = config.windows[w];
    const BoundaryExpr& b = win.boundary(side);
    if (b.kind == BoundaryKind::unbounded) return win.name + (side == Side::start ? ".end" : ".start");
    return b.reference.qualified_name();
  };
  for (std::size_t w = 0; w < config.windows.size(); ++w) {
    for (Side side : {Side::start, Side::end}) {
      std::set<std::string> visited;
      std::string current = config.windows[w].name + (side == Side::start ? ".start" : ".end");
      while (current != "trigger") {
        if (!visited.insert(current).second) {
          fail(nodes[w].self, "cyclic window reference: '" + config.windows[w].name + "." +
                                 (side == Side::start ? "start" : "end") +
                                 "' never reaches the trigger (cycle through '" + current + "')");
        }
        auto [wi, s] = index.at(current);
        current = parent_of(wi, s);
      }
    }
  }
}

}  // namespace

TaskConfig parse_task_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("syntax error: " + e.msg, static_cast<std::size_t>(e.mark.line) + 1,
                      static_cast<std::size_t>(e.mark.column) + 1);
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping with predicates, trigger and windows", 1, 1);

  TaskConfig config;
  std::map<std::string, YAML::Node> predicate_nodes;
  for_each_entry(root, "configuration", [&](const std::string& key, const YAML::Node& k,
                                            const YAML::Node&) {
    if (key != "predicates" && key != "trigger" && key != "windows") {
      fail(k, "unknown top-level key '" + key + "'");
    }
  });
  if (!root["predicates"]) fail(root, "missing 'predicates'");
  if (!root["trigger"]) fail(root, "missing 'trigger'");
  if (!root["windows"]) fail(root, "missing 'windows'");

  for_each_entry(root["predicates"], "predicates",
                 [&](const std::string& name, const YAML::Node& key, const YAML::Node& value) {
                   check_name(key, name, "predicate");
                   config.predicates.push_back(parse_predicate(name, value));
                   predicate_nodes[name] = value;
                 });

  auto known_predicate = [&](const std::string& name) {
    return name == kAnyEvent || config.find_predicate(name) != nullptr;
  };

  for (const auto& p : config.predicates) {
    if (const auto* d = std::get_if<DerivedPredicate>(&p)) {
      for (const auto& op : d->operands) {
        if (!known_predicate(op)) {
          fail(predicate_nodes[d->name], "unknown predicate '" + op + "' in '" + d->name + "'");
        }
      }
    }
  }
  try {
    config.dependency_order = predicate_dependency_order(config);
  } catch (const ConfigError& e) {
    fail(root["predicates"], e.message());
  }

  const YAML::Node trigger = root["trigger"];
  config.trigger = scalar(trigger, "trigger");
  if (!known_predicate(config.trigger)) fail(trigger, "trigger names unknown predicate '" + config.trigger + "'");

  const YAML::Node windows = root["windows"];
  std::vector<WindowNodes> window_nodes;
  if (!windows.IsNull()) {
    for_each_entry(windows, "windows",
                   [&](const std::string& name, const YAML::Node& key, const YAML::Node& value) {
                     check_name(key, name, "window");
                     WindowNodes nodes;
                     config.windows.push_back(parse_window(name, value, nodes));
                     window_nodes.push_back(nodes);
                   });
  }

  const WindowDef* label_owner = nullptr;
  const WindowDef* index_owner = nullptr;
  for (std::size_t i = 0; i < config.windows.size(); ++i) {
    const WindowDef& w = config.windows[i];
    const WindowNodes& nodes = window_nodes[i];
    for (Side side : {Side::start, Side::end}) {
      const BoundaryExpr& b = w.boundary(side);
      const YAML::Node& at = side == Side::start ? nodes.start : nodes.end;
      if (b.kind == BoundaryKind::unbounded) continue;
      if (!b.reference.is_trigger && !config.find_window(b.reference.window)) {
        fail(at, "boundary references unknown window '" + b.reference.window + "'");
      }
      if (b.kind == BoundaryKind::event_bound && !known_predicate(b.bound_predicate)) {
        fail(at, "boundary references unknown predicate '" + b.bound_predicate + "'");
      }
    }
    for (const auto& c : w.constraints) {
      if (!known_predicate(c.predicate)) {
        fail(nodes.self["has"], "constraint references unknown predicate '" + c.predicate + "'");
      }
    }
    if (w.label_predicate) {
      if (label_owner) fail(nodes.self["label"], "multiple label windows ('" + label_owner->name + "' and '" + w.name + "')");
      if (!known_predicate(*w.label_predicate)) {
        fail(nodes.self["label"], "label references unknown predicate '" + *w.label_predicate + "'");
      }
      label_owner = &w;
    }
    if (w.index_boundary) {
      if (index_owner) {
        fail(nodes.self["index_timestamp"], "multiple index windows ('" + index_owner->name + "' and '" + w.name + "')");
      }
      index_owner = &w;
    }
  }
  check_reference_graph(config, window_nodes);
  return config;
}

TaskConfig load_task_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file", 0, 0, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_task_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(e.message(), e.line(), e.column(), path.string());
  }
}

}  // namespace cohort
