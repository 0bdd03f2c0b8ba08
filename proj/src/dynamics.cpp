#include "edgesim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace edgesim {

GraphEvent make_move_event(const GraphLayout& layout, const Plane& plane, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, plane.width);
  std::uniform_real_distribution<double> uy(0.0, plane.height);
  Move ev;
  for (Vertex v : layout.active_vertices()) {
    const Point target{ux(rng), uy(rng)};
    const Point& cur = layout.position(v);
    ev.vertices.push_back(v);
    ev.deltas.push_back({target.x - cur.x, target.y - cur.y});
  }
  return ev;
}

namespace {

Edge random_non_edge(const GraphLayout& g, std::span<const Vertex> pool, std::mt19937_64& rng,
                     bool& found) {
  found = false;
  if (pool.size() < 2) return {};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  // Bounded rejection sampling; dense layouts may simply run out of slots.
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Vertex a = pool[pick(rng)];
    const Vertex b = pool[pick(rng)];
    if (a == b || g.has_edge(a, b)) continue;
    found = true;
    return make_edge(a, b);
  }
  return {};
}

}  // namespace

std::vector<GraphEvent> make_dynamic_change(const GraphLayout& layout, const ChangeSpec& spec,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GraphEvent> events;
  GraphLayout work = layout;

  const std::size_t n = layout.active_count();
  const auto user_budget = static_cast<std::size_t>(std::floor(spec.rate * static_cast<double>(n)));
  std::size_t edge_budget =
      static_cast<std::size_t>(std::floor(spec.rate * static_cast<double>(layout.edge_count())));

  const std::size_t free = layout.capacity() - n;
  bool grow = std::bernoulli_distribution(0.5)(rng);
  if (grow && free == 0) grow = false;
  if (!grow && n <= user_budget + 1) grow = free > 0;

  if (user_budget > 0 && grow) {
    const std::size_t k = std::min(user_budget, free);
    AddUsers add;
    add.slots = layout.free_slots(k);
    std::uniform_real_distribution<double> ux(0.0, spec.plane.width);
    std::uniform_real_distribution<double> uy(0.0, spec.plane.height);
    for (std::size_t i = 0; i < add.slots.size(); ++i) {
      add.positions.push_back({ux(rng), uy(rng)});
      add.task_sizes_kb.push_back(spec.new_user_task_kb);
    }
    std::size_t per_user = spec.links_per_new_user;
    if (per_user == 0 && n > 0) {
      per_user = static_cast<std::size_t>(
          std::lround(2.0 * static_cast<double>(layout.edge_count()) / static_cast<double>(n)));
    }
    work = apply_event(std::move(work), AddUsers{add.slots, add.positions, add.task_sizes_kb, {}});
    std::vector<Vertex> partners = work.active_vertices();
    std::uniform_int_distribution<std::size_t> pick(0, partners.size() - 1);
    for (Vertex v : add.slots) {
      std::size_t made = 0;
      for (int attempt = 0; made < per_user && edge_budget > 0 && attempt < 8 * static_cast<int>(per_user) + 8;
           ++attempt) {
        const Vertex w = partners[pick(rng)];
        if (w == v || work.has_edge(v, w)) continue;
        const Edge e = make_edge(v, w);
        work = apply_event(std::move(work), Rewire{{e}, {}});
        add.edges.push_back(e);
        ++made;
        --edge_budget;
      }
    }
    events.emplace_back(std::move(add));
  } else if (user_budget > 0) {
    std::vector<Vertex> candidates = layout.active_vertices();
    std::shuffle(candidates.begin(), candidates.end(), rng);
    RemoveUsers rm;
    for (Vertex v : candidates) {
      if (rm.slots.size() == user_budget) break;
      const std::size_t deg = work.neighbors(v).size();
      if (deg > edge_budget) continue;
      work = apply_event(std::move(work), RemoveUsers{{v}});
      edge_budget -= deg;
      rm.slots.push_back(v);
    }
    std::sort(rm.slots.begin(), rm.slots.end());
    if (!rm.slots.empty()) events.emplace_back(std::move(rm));
  }

  // Remaining association budget: half deletions, half insertions.
  Rewire rw;
  std::vector<Edge> existing = work.edges();
  std::shuffle(existing.begin(), existing.end(), rng);
  const std::size_t n_remove = std::min(edge_budget / 2, existing.size());
  rw.remove.assign(existing.begin(), existing.begin() + static_cast<std::ptrdiff_t>(n_remove));
  work = apply_event(std::move(work), Rewire{{}, rw.remove});
  const std::size_t n_add = edge_budget - n_remove;
  const std::vector<Vertex> pool = work.active_vertices();
  for (std::size_t i = 0; i < n_add; ++i) {
    bool found = false;
    const Edge e = random_non_edge(work, pool, rng, found);
    if (!found) break;
    work = apply_event(std::move(work), Rewire{{e}, {}});
    rw.add.push_back(e);
  }
  if (!rw.add.empty() || !rw.remove.empty()) events.emplace_back(std::move(rw));
  return events;
}

GraphLayout apply_events(GraphLayout layout, std::span<const GraphEvent> events) {
  for (const GraphEvent& ev : events) layout = apply_event(std::move(layout), ev);
  return layout;
}

}  // namespace edgesim
