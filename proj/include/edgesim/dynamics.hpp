#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgesim/graph_core.hpp"

namespace edgesim {

/// Seeded generators for GraphEvent payloads. They only read the layout;
/// apply_event does the mutation, so every change can be replayed.

/// Re-draws the position of every active user uniformly inside the plane.
GraphEvent make_move_event(const GraphLayout& layout, const Plane& plane, std::uint64_t seed);

struct ChangeSpec {
  /// Fraction of users and of associations allowed to change.
  double rate = 0.2;
  Plane plane;
  double new_user_task_kb = 0.0;
  /// Links requested per joining user; 0 uses the layout's mean degree.
  std::size_t links_per_new_user = 0;
};

/// Changes the user count (join or leave, chosen at random) by
/// floor(rate * active) users and rewires associations, keeping the total
/// number of edge insertions and deletions, including those caused by
/// users leaving or joining, within floor(rate * edges).
std::vector<GraphEvent> make_dynamic_change(const GraphLayout& layout, const ChangeSpec& spec,
                                            std::uint64_t seed);

GraphLayout apply_events(GraphLayout layout, std::span<const GraphEvent> events);

}  // namespace edgesim
