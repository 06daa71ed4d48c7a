#include "cohort/window_tree.hpp"

#include "cohort/errors.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace cohort {

NodeId WindowTree::node_for(const std::string& window, Side side) const {
  return boundary_nodes.at(window + (side == Side::start ? ".start" : ".end"));
}

std::optional<NodeId> WindowTree::find(const std::string& id) const {
  for (NodeId i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  return std::nullopt;
}

namespace {

std::string boundary_name(const std::string& window, Side side) {
  return window + (side == Side::start ? ".start" : ".end");
}

struct Boundary {
  std::size_t window;
  Side side;
  const BoundaryExpr* expr;
};

// Preliminary node built before depth-first renumbering.
struct Draft {
  std::string id;
  std::string parent;  // boundary name or "trigger" (pre-canonicalization)
  TreeEdge edge;
  std::size_t order_key;  // window index * 2 + side
};

}  // namespace

WindowTree build_tree(const TaskConfig& config) {
  std::map<std::string, Boundary> boundaries;
  for (std::size_t w = 0; w < config.windows.size(); ++w) {
    const WindowDef& win = config.windows[w];
    if (win.start.kind == BoundaryKind::unbounded && win.end.kind == BoundaryKind::unbounded) {
      throw ConfigError("window '" + win.name + "' has both boundaries unbounded");
    }
    boundaries[boundary_name(win.name, Side::start)] = {w, Side::start, &win.start};
    boundaries[boundary_name(win.name, Side::end)] = {w, Side::end, &win.end};
  }

  auto target_of = [&](const Boundary& b) -> std::string {
    const WindowDef& win = config.windows[b.window];
    if (b.expr->kind == BoundaryKind::unbounded) {
      return boundary_name(win.name, b.side == Side::start ? Side::end : Side::start);
    }
    const std::string target = b.expr->reference.qualified_name();
    if (target != "trigger" && !boundaries.contains(target)) {
      throw ConfigError("window '" + win.name + "' references unknown boundary '" + target + "'");
    }
    return target;
  };

  // Pure references collapse onto their target's node.
  std::map<std::string, std::string> canonical_cache;
  std::function<std::string(const std::string&, std::set<std::string>&)> canonical =
      [&](const std::string& name, std::set<std::string>& seen) -> std::string {
    if (name == "trigger") return name;
    if (auto it = canonical_cache.find(name); it != canonical_cache.end()) return it->second;
    const Boundary& b = boundaries.at(name);
    if (b.expr->kind != BoundaryKind::reference) return canonical_cache[name] = name;
    if (!seen.insert(name).second) throw ConfigError("cyclic window reference through '" + name + "'");
    return canonical_cache[name] = canonical(target_of(b), seen);
  };

  std::vector<Draft> drafts;
  for (const auto& [name, b] : boundaries) {
    std::set<std::string> seen;
    if (canonical(name, seen) != name) continue;
    Draft d;
    d.id = name;
    d.order_key = b.window * 2 + (b.side == Side::start ? 0 : 1);
    std::set<std::string> parent_seen;
    d.parent = canonical(target_of(b), parent_seen);
    switch (b.expr->kind) {
      case BoundaryKind::temporal_offset:
        d.edge.kind = SpanKind::temporal;
        d.edge.offset_seconds = b.expr->signed_offset_seconds();
        break;
      case BoundaryKind::event_bound:
        d.edge.kind = SpanKind::event_bound;
        d.edge.predicate = b.expr->bound_predicate;
        d.edge.direction = b.expr->direction;
        break;
      case BoundaryKind::unbounded:
        d.edge.kind = SpanKind::unbounded_sentinel;
        d.edge.sentinel_side = b.side;
        break;
      case BoundaryKind::reference:
        break;
    }
    drafts.push_back(std::move(d));
  }

  std::map<std::string, std::vector<std::size_t>> children;
  for (std::size_t i = 0; i < drafts.size(); ++i) children[drafts[i].parent].push_back(i);
  for (auto& [parent, kids] : children) {
    std::sort(kids.begin(), kids.end(),
              [&](std::size_t a, std::size_t b) { return drafts[a].order_key < drafts[b].order_key; });
  }

  WindowTree tree;
  tree.nodes.push_back(TreeNode{"trigger", {}});
  std::map<std::string, NodeId> ids{{"trigger", WindowTree::root}};
  // Iterative preorder DFS so that node ids follow resolution order.
  std::vector<std::size_t> stack;
  auto push_children = [&](const std::string& parent) {
    auto it = children.find(parent);
    if (it == children.end()) return;
    for (auto k = it->second.rbegin(); k != it->second.rend(); ++k) stack.push_back(*k);
  };
  push_children("trigger");
  while (!stack.empty()) {
    const std::size_t d = stack.back();
    stack.pop_back();
    const NodeId id = tree.nodes.size();
    ids[drafts[d].id] = id;
    tree.nodes.push_back(TreeNode{drafts[d].id, {}});
    TreeEdge edge = drafts[d].edge;
    edge.parent = ids.at(drafts[d].parent);
    edge.child = id;
    tree.edges.push_back(std::move(edge));
    push_children(drafts[d].id);
  }
  if (tree.nodes.size() != drafts.size() + 1) {
    std::string stray;
    for (const auto& d : drafts)
      if (!ids.contains(d.id)) stray = d.id;
    throw ConfigError("cyclic or disconnected window reference: '" + stray + "' is not reachable from the trigger");
  }

  for (const auto& [name, b] : boundaries) {
    std::set<std::string> seen;
    tree.boundary_nodes[name] = ids.at(canonical(name, seen));
  }
  tree.boundary_nodes["trigger"] = WindowTree::root;

  for (const auto& win : config.windows) {
    const NodeId closing = std::max(tree.node_for(win.name, Side::start), tree.node_for(win.name, Side::end));
    tree.nodes[closing].windows_closing_here.push_back(win.name);
    if (win.label_predicate) tree.label_window = win.name;
    if (win.index_boundary) tree.index_node = tree.node_for(win.name, *win.index_boundary);
  }
  return tree;
}

std::vector<TreeEdge> traversal_order(const WindowTree& tree) {
  std::vector<std::vector<std::size_t>> children(tree.nodes.size());
  for (std::size_t e = 0; e < tree.edges.size(); ++e) children[tree.edges[e].parent].push_back(e);
  for (auto& kids : children) {
    std::sort(kids.begin(), kids.end(),
              [&](std::size_t a, std::size_t b) { return tree.edges[a].child < tree.edges[b].child; });
  }
  std::vector<TreeEdge> order;
  order.reserve(tree.edges.size());
  std::vector<NodeId> stack{WindowTree::root};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    for (auto k = children[n].rbegin(); k != children[n].rend(); ++k) {
      stack.push_back(tree.edges[*k].child);
    }
    if (n != WindowTree::root) {
      for (const auto& e : tree.edges)
        if (e.child == n) order.push_back(e);
    }
  }
  return order;
}

}  // namespace cohort
