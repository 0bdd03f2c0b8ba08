#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace edgesim {

using Vertex = std::int32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b) noexcept;

/// Rectangular deployment area with its origin at (0, 0), in meters.
struct Plane {
  double width = 2000.0;
  double height = 2000.0;

  bool contains(const Point& p) const noexcept {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
};

/// Undirected association between two user slots, stored with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Returns the edge with endpoints ordered; throws SelfLoop when u == v.
Edge make_edge(Vertex a, Vertex b);

/// The dynamic user graph: a fixed number of slots, a membership mask,
/// per-slot position and task size, and an undirected edge set among the
/// active slots. Neighbor lists are kept sorted so iteration order (and
/// therefore everything downstream) is reproducible.
class GraphLayout {
 public:
  GraphLayout() = default;

  std::size_t capacity() const noexcept { return mask_.size(); }
  std::size_t active_count() const noexcept { return active_count_; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  bool is_active(Vertex v) const noexcept {
    return v >= 0 && static_cast<std::size_t>(v) < mask_.size() && mask_[v] != 0;
  }
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }
  const Point& position(Vertex v) const { return positions_.at(v); }
  std::span<const Point> positions() const noexcept { return positions_; }
  double task_size_kb(Vertex v) const { return task_kb_.at(v); }
  std::span<const double> task_sizes_kb() const noexcept { return task_kb_; }
  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_.at(v); }

  bool has_edge(Vertex a, Vertex b) const;
  /// Active vertices in ascending index order.
  std::vector<Vertex> active_vertices() const;
  /// All edges as (u < v) pairs in lexicographic order.
  std::vector<Edge> edges() const;
  /// Lowest-index inactive slots, at most `count` of them.
  std::vector<Vertex> free_slots(std::size_t count) const;

  friend bool operator==(const GraphLayout&, const GraphLayout&) = default;

 private:
  friend GraphLayout new_layout(std::size_t, std::span<const Edge>, std::span<const Point>,
                                std::span<const double>, std::size_t);
  friend class LayoutEditor;

  std::vector<std::uint8_t> mask_;
  std::vector<Point> positions_;
  std::vector<double> task_kb_;
  std::vector<std::vector<Vertex>> adjacency_;
  std::size_t active_count_ = 0;
  std::size_t edge_count_ = 0;
};

/// Builds a layout whose first `n_active` slots are active. `capacity`
/// (total slots) defaults to `n_active`; extra slots start masked out so
/// users can join later. Duplicate edges collapse to one.
GraphLayout new_layout(std::size_t n_active, std::span<const Edge> edges,
                       std::span<const Point> positions, std::span<const double> task_sizes_kb,
                       std::size_t capacity = 0);

/// Number of active neighbors of an active vertex.
std::size_t active_degree(const GraphLayout& layout, Vertex v);

struct AddUsers {
  std::vector<Vertex> slots;
  std::vector<Point> positions;
  std::vector<double> task_sizes_kb;
  /// May connect new users to each other or to already-active users.
  std::vector<Edge> edges;
};

struct RemoveUsers {
  std::vector<Vertex> slots;
};

struct Rewire {
  std::vector<Edge> add;
  std::vector<Edge> remove;
};

struct Move {
  std::vector<Vertex> vertices;
  std::vector<Point> deltas;
};

using GraphEvent = std::variant<AddUsers, RemoveUsers, Rewire, Move>;

/// Applies one mutation. Pure: the input layout is taken by value and the
/// mutated copy returned.
GraphLayout apply_event(GraphLayout layout, const GraphEvent& event);

/// Asserts the structural invariants (no edge touches an inactive slot,
/// symmetric sorted adjacency, consistent counters). Throws on violation.
void check_invariants(const GraphLayout& layout);

}  // namespace edgesim
