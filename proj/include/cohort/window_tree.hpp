#pragma once

// Rooted boundary tree derived from a task's windows. Nodes are distinct
// window boundaries (pure references share a node with their target); edges
// say how a child is resolved from its parent.

#include "cohort/config.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cohort {

using NodeId = std::size_t;

struct TreeNode {
  std::string id;  // "trigger" or "<window>.start|end"
  std::vector<std::string> windows_closing_here;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

enum class SpanKind { temporal, event_bound, unbounded_sentinel };

struct TreeEdge {
  NodeId parent = 0;
  NodeId child = 0;
  SpanKind kind = SpanKind::temporal;
  std::int64_t offset_seconds = 0;              // temporal
  std::string predicate;                        // event_bound
  SearchDirection direction = SearchDirection::next;  // event_bound
  Side sentinel_side = Side::start;             // unbounded_sentinel: start => first event, end => last

  friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

struct WindowTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the trigger
  std::vector<TreeEdge> edges;  // one per non-root node, depth-first order
  std::map<std::string, NodeId> boundary_nodes;  // every "<window>.start|end" (aliases included) and "trigger"
  std::optional<std::string> label_window;
  NodeId index_node = 0;

  static constexpr NodeId root = 0;

  NodeId node_for(const std::string& window, Side side) const;
  const TreeNode& node(NodeId id) const { return nodes[id]; }
  std::optional<NodeId> find(const std::string& id) const;

  friend bool operator==(const WindowTree&, const WindowTree&) = default;
};

/// Throws ConfigError for cyclic or disconnected references and for windows
/// whose boundaries are both unbounded.
WindowTree build_tree(const TaskConfig& config);

/// Depth-first, parent edge before descendants, siblings in window
/// declaration order (start before end within a window).
std::vector<TreeEdge> traversal_order(const WindowTree& tree);

}  // namespace cohort
