#include "edgesim/graph_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgesim/error.hpp"

namespace edgesim {

double distance(const Point& a, const Point& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Edge make_edge(Vertex a, Vertex b) {
  if (a == b) {
    throw Error(ErrorCode::SelfLoop, "edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
  }
  return a < b ? Edge{a, b} : Edge{b, a};
}

bool GraphLayout::has_edge(Vertex a, Vertex b) const {
  if (!is_active(a) || !is_active(b)) return false;
  const auto& nbrs = adjacency_[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

std::vector<Vertex> GraphLayout::active_vertices() const {
  std::vector<Vertex> out;
  out.reserve(active_count_);
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) out.push_back(static_cast<Vertex>(i));
  }
  return out;
}

std::vector<Edge> GraphLayout::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < adjacency_.size(); ++i) {
    const auto u = static_cast<Vertex>(i);
    for (Vertex v : adjacency_[i]) {
      if (v > u) out.push_back({u, v});
    }
  }
  return out;
}

std::vector<Vertex> GraphLayout::free_slots(std::size_t count) const {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < mask_.size() && out.size() < count; ++i) {
    if (!mask_[i]) out.push_back(static_cast<Vertex>(i));
  }
  return out;
}

// Mutation helpers shared by construction and event application.
class LayoutEditor {
 public:
  explicit LayoutEditor(GraphLayout& g) : g_(g) {}

  void check_slot(Vertex v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= g_.mask_.size()) {
      throw Error(ErrorCode::IndexOutOfRange, "vertex " + std::to_string(v) + " outside [0, " +
                                                  std::to_string(g_.mask_.size()) + ")");
    }
  }

  bool insert_edge(Edge e) {
    check_slot(e.u);
    check_slot(e.v);
    if (e.u == e.v) throw Error(ErrorCode::SelfLoop, "vertex " + std::to_string(e.u));
    if (!g_.mask_[e.u] || !g_.mask_[e.v]) {
      throw Error(ErrorCode::InactiveVertex, "edge (" + std::to_string(e.u) + "," +
                                                 std::to_string(e.v) + ") touches an inactive slot");
    }
    auto& a = g_.adjacency_[e.u];
    auto it = std::lower_bound(a.begin(), a.end(), e.v);
    if (it != a.end() && *it == e.v) return false;
    a.insert(it, e.v);
    auto& b = g_.adjacency_[e.v];
    b.insert(std::lower_bound(b.begin(), b.end(), e.u), e.u);
    ++g_.edge_count_;
    return true;
  }

  bool erase_edge(Edge e) {
    check_slot(e.u);
    check_slot(e.v);
    auto& a = g_.adjacency_[e.u];
    auto it = std::lower_bound(a.begin(), a.end(), e.v);
    if (it == a.end() || *it != e.v) return false;
    a.erase(it);
    auto& b = g_.adjacency_[e.v];
    b.erase(std::lower_bound(b.begin(), b.end(), e.u));
    --g_.edge_count_;
    return true;
  }

  void activate(Vertex v, Point p, double task_kb) {
    check_slot(v);
    if (g_.mask_[v]) {
      throw Error(ErrorCode::MaskConflict, "slot " + std::to_string(v) + " is already occupied");
    }
    g_.mask_[v] = 1;
    g_.positions_[v] = p;
    g_.task_kb_[v] = task_kb;
    ++g_.active_count_;
  }

  void deactivate(Vertex v) {
    check_slot(v);
    if (!g_.mask_[v]) {
      throw Error(ErrorCode::MaskConflict, "slot " + std::to_string(v) + " is already empty");
    }
    for (Vertex n : g_.adjacency_[v]) {
      auto& other = g_.adjacency_[n];
      other.erase(std::lower_bound(other.begin(), other.end(), v));
      --g_.edge_count_;
    }
    g_.adjacency_[v].clear();
    g_.mask_[v] = 0;
    --g_.active_count_;
  }

  void translate(Vertex v, Point delta) {
    check_slot(v);
    if (!g_.mask_[v]) throw Error(ErrorCode::InactiveVertex, "cannot move slot " + std::to_string(v));
    g_.positions_[v].x += delta.x;
    g_.positions_[v].y += delta.y;
  }

  // Appends everything, then sorts and deduplicates each list once.
  void bulk_insert(std::span<const Edge> edges) {
    for (const Edge& raw : edges) {
      const Edge e = make_edge(raw.u, raw.v);
      check_slot(e.u);
      check_slot(e.v);
      if (!g_.mask_[e.u] || !g_.mask_[e.v]) {
        throw Error(ErrorCode::InactiveVertex, "edge touches an inactive slot");
      }
      g_.adjacency_[e.u].push_back(e.v);
      g_.adjacency_[e.v].push_back(e.u);
    }
    std::size_t half = 0;
    for (auto& a : g_.adjacency_) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      half += a.size();
    }
    g_.edge_count_ = half / 2;
  }

  void resize(std::size_t capacity) {
    g_.mask_.assign(capacity, 0);
    g_.positions_.assign(capacity, Point{});
    g_.task_kb_.assign(capacity, 0.0);
    g_.adjacency_.assign(capacity, {});
    g_.active_count_ = 0;
    g_.edge_count_ = 0;
  }

 private:
  GraphLayout& g_;
};

GraphLayout new_layout(std::size_t n_active, std::span<const Edge> edges,
                       std::span<const Point> positions, std::span<const double> task_sizes_kb,
                       std::size_t capacity) {
  if (capacity == 0) capacity = n_active;
  if (capacity < n_active) {
    throw Error(ErrorCode::IndexOutOfRange, "capacity smaller than active count");
  }
  if (positions.size() != n_active || task_sizes_kb.size() != n_active) {
    throw Error(ErrorCode::ShapeMismatch, "positions and task sizes must have n_active entries");
  }
  GraphLayout g;
  LayoutEditor ed(g);
  ed.resize(capacity);
  for (std::size_t i = 0; i < n_active; ++i) {
    ed.activate(static_cast<Vertex>(i), positions[i], task_sizes_kb[i]);
  }
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n_active ||
        static_cast<std::size_t>(e.v) >= n_active) {
      throw Error(ErrorCode::IndexOutOfRange, "edge (" + std::to_string(e.u) + "," +
                                                  std::to_string(e.v) + ") references index >= " +
                                                  std::to_string(n_active));
    }
  }
  ed.bulk_insert(edges);
  return g;
}

std::size_t active_degree(const GraphLayout& layout, Vertex v) {
  if (!layout.is_active(v)) {
    throw Error(ErrorCode::InactiveVertex, "vertex " + std::to_string(v));
  }
  return layout.neighbors(v).size();
}

namespace {

struct EventApplier {
  GraphLayout& g;
  LayoutEditor ed{g};

  void operator()(const AddUsers& ev) {
    if (ev.positions.size() != ev.slots.size() || ev.task_sizes_kb.size() != ev.slots.size()) {
      throw Error(ErrorCode::ShapeMismatch, "AddUsers payload sizes disagree");
    }
    for (std::size_t i = 0; i < ev.slots.size(); ++i) {
      ed.activate(ev.slots[i], ev.positions[i], ev.task_sizes_kb[i]);
    }
    for (const Edge& e : ev.edges) ed.insert_edge(make_edge(e.u, e.v));
  }

  void operator()(const RemoveUsers& ev) {
    for (Vertex v : ev.slots) ed.deactivate(v);
  }

  void operator()(const Rewire& ev) {
    for (const Edge& e : ev.remove) ed.erase_edge(make_edge(e.u, e.v));
    for (const Edge& e : ev.add) ed.insert_edge(make_edge(e.u, e.v));
  }

  void operator()(const Move& ev) {
    if (ev.deltas.size() != ev.vertices.size()) {
      throw Error(ErrorCode::ShapeMismatch, "Move payload sizes disagree");
    }
    for (std::size_t i = 0; i < ev.vertices.size(); ++i) {
      ed.translate(ev.vertices[i], ev.deltas[i]);
    }
  }
};

}  // namespace

GraphLayout apply_event(GraphLayout layout, const GraphEvent& event) {
  std::visit(EventApplier{layout}, event);
  return layout;
}

void check_invariants(const GraphLayout& g) {
  std::size_t active = 0;
  std::size_t half_edges = 0;
  for (std::size_t i = 0; i < g.capacity(); ++i) {
    const auto v = static_cast<Vertex>(i);
    const auto nbrs = g.neighbors(v);
    if (g.is_active(v)) ++active;
    if (!g.is_active(v) && !nbrs.empty()) {
      throw Error(ErrorCode::InactiveVertex, "inactive slot " + std::to_string(v) + " has edges");
    }
    if (!std::is_sorted(nbrs.begin(), nbrs.end()) ||
        std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end()) {
      throw Error(ErrorCode::IndexOutOfRange, "adjacency of " + std::to_string(v) + " unsorted");
    }
    for (Vertex n : nbrs) {
      if (n == v) throw Error(ErrorCode::SelfLoop, "vertex " + std::to_string(v));
      if (!g.is_active(n)) {
        throw Error(ErrorCode::InactiveVertex, "edge to inactive slot " + std::to_string(n));
      }
      const auto back = g.neighbors(n);
      if (!std::binary_search(back.begin(), back.end(), v)) {
        throw Error(ErrorCode::IndexOutOfRange, "asymmetric adjacency");
      }
    }
    half_edges += nbrs.size();
  }
  if (active != g.active_count() || half_edges != 2 * g.edge_count()) {
    throw Error(ErrorCode::CountMismatch, "layout counters out of sync");
  }
}

}  // namespace edgesim
