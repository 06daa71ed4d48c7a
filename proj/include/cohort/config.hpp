#pragma once

// Task-configuration language: predicates, a trigger and a set of
// interrelated windows whose boundaries form a tree rooted at the trigger.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cohort {

/// Built-in predicate matching every event.
inline constexpr std::string_view kAnyEvent = "_ANY_EVENT";

/// Exact code match, or prefix match when the pattern ends in `*`.
struct CodeMatcher {
  std::string pattern;

  bool is_prefix() const noexcept { return !pattern.empty() && pattern.back() == '*'; }
  std::string_view stem() const noexcept;
  bool matches(std::string_view code) const noexcept;

  friend bool operator==(const CodeMatcher&, const CodeMatcher&) = default;
};

struct PlainPredicate {
  std::string name;
  CodeMatcher code;
  std::optional<double> value_min;  // inclusive
  std::optional<double> value_max;  // inclusive

  friend bool operator==(const PlainPredicate&, const PlainPredicate&) = default;
};

enum class Combinator { any_of, all_of };

struct DerivedPredicate {
  std::string name;
  Combinator combinator = Combinator::any_of;
  std::vector<std::string> operands;

  friend bool operator==(const DerivedPredicate&, const DerivedPredicate&) = default;
};

using Predicate = std::variant<PlainPredicate, DerivedPredicate>;

const std::string& predicate_name(const Predicate& p);

/// Nonnegative span in whole seconds.
struct Duration {
  std::int64_t seconds = 0;

  friend auto operator<=>(const Duration&, const Duration&) = default;
};

enum class Side { start, end };

/// A boundary a window can be defined against. `window` is empty for the
/// trigger; `sibling` records that the text used the bare `start`/`end`
/// form, in which case `window` is the enclosing window.
struct BoundaryRef {
  bool is_trigger = true;
  std::string window;
  Side side = Side::start;
  bool sibling = false;

  static BoundaryRef trigger() { return {}; }
  std::string qualified_name() const;  // "trigger" or "<window>.start|end"

  friend bool operator==(const BoundaryRef&, const BoundaryRef&) = default;
};

enum class BoundaryKind { unbounded, reference, temporal_offset, event_bound };
enum class OffsetSign { plus, minus };
enum class SearchDirection { next, previous };

struct BoundaryExpr {
  BoundaryKind kind = BoundaryKind::unbounded;
  BoundaryRef reference;
  Duration offset;
  OffsetSign sign = OffsetSign::plus;
  std::string bound_predicate;
  SearchDirection direction = SearchDirection::next;

  std::int64_t signed_offset_seconds() const noexcept {
    return sign == OffsetSign::plus ? offset.seconds : -offset.seconds;
  }

  friend bool operator==(const BoundaryExpr&, const BoundaryExpr&) = default;
};

/// Inclusive [min, max] bound on a predicate's count inside a window.
struct ConstraintBound {
  std::string predicate;
  std::optional<std::int64_t> min;
  std::optional<std::int64_t> max;

  bool admits(std::int64_t count) const noexcept {
    return (!min || count >= *min) && (!max || count <= *max);
  }

  friend bool operator==(const ConstraintBound&, const ConstraintBound&) = default;
};

struct WindowDef {
  std::string name;
  BoundaryExpr start;
  BoundaryExpr end;
  bool start_inclusive = true;
  bool end_inclusive = true;
  std::vector<ConstraintBound> constraints;
  std::optional<std::string> label_predicate;
  std::optional<Side> index_boundary;

  const BoundaryExpr& boundary(Side side) const { return side == Side::start ? start : end; }

  friend bool operator==(const WindowDef&, const WindowDef&) = default;
};

struct TaskConfig {
  std::vector<Predicate> predicates;  // declaration order
  std::string trigger;
  std::vector<WindowDef> windows;  // declaration order
  std::vector<std::string> dependency_order;

  const Predicate* find_predicate(std::string_view name) const;
  const WindowDef* find_window(std::string_view name) const;
  const WindowDef* label_window() const;
  const WindowDef* index_window() const;

  friend bool operator==(const TaskConfig&, const TaskConfig&) = default;
};

Duration parse_duration(std::string_view text);
std::string format_duration(Duration d);

BoundaryExpr parse_boundary_expr(std::string_view text, std::string_view window);
std::string format_boundary_expr(const BoundaryExpr& expr);

/// Parses and fully validates a configuration document. Every failure is a
/// ConfigError; no partially built config is ever returned.
TaskConfig parse_task_config(std::string_view text);
TaskConfig load_task_config(const std::filesystem::path& path);

/// Plain predicates in declaration order, then derived predicates so that
/// every operand precedes its user.
std::vector<std::string> predicate_dependency_order(const TaskConfig& config);

/// Canonical document text; parse_task_config(serialize_task_config(c)) == c.
std::string serialize_task_config(const TaskConfig& config);

/// Hex SHA-256 of the canonical serialization.
std::string config_hash(const TaskConfig& config);

bool is_valid_identifier(std::string_view name);
bool is_reserved_name(std::string_view name);

}  // namespace cohort
