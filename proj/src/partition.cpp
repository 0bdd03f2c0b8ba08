#include "edgesim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "edgesim/error.hpp"

namespace edgesim {

const char* to_string(CutAction a) noexcept {
  switch (a) {
    case CutAction::Continue: return "continue";
    case CutAction::RecordSeg: return "record_seg";
    case CutAction::FlushSegExit: return "flush_seg_exit";
    case CutAction::TerminalFlush: return "terminal_flush";
  }
  return "?";
}

namespace {

// BFS scratch reused across the cuts of one hicut call. Visited marks are a
// generation stamp so each cut starts with a clean slate in O(1).
class LayerCutter {
 public:
  explicit LayerCutter(std::size_t capacity) : stamp_(capacity, 0), layer_(capacity, 0) {}

  LayerCutResult run(const GraphLayout& g, Vertex start, std::span<const std::uint8_t> assigned) {
    ++gen_;
    LayerCutResult out;
    out.trace.start = start;
    auto& result = out.subgraph;
    auto& steps = out.trace.steps;

    result.push_back(start);
    stamp_[start] = gen_;
    layer_[start] = 1;

    std::vector<Vertex> cur{start};
    std::vector<Vertex> next;
    std::vector<Vertex> seg;
    std::size_t d_prev = 0;
    int l = 0;
    bool exited = false;

    auto flush = [&result](std::vector<Vertex>& from) {
      result.insert(result.end(), from.begin(), from.end());
      from.clear();
    };

    while (!cur.empty()) {
      ++l;
      std::size_t d = 0;
      next.clear();
      for (Vertex v : cur) {
        for (Vertex r : g.neighbors(v)) {
          if (assigned[r]) continue;
          if (stamp_[r] == gen_) {
            // Edges back into earlier layers belong to the part already walked.
            if (layer_[r] < l) continue;
            ++d;
            continue;
          }
          ++d;
          stamp_[r] = gen_;
          layer_[r] = l + 1;
          next.push_back(r);
        }
      }

      if (d == 0) {
        flush(seg);
        if (l > 1) flush(cur);
        steps.push_back({l, d, CutAction::TerminalFlush});
        exited = true;
        break;
      }
      if (l == 1) {
        d_prev = d;
        steps.push_back({l, d, CutAction::Continue});
      } else if (d_prev <= d) {
        if (!seg.empty() && d_prev < d) {
          flush(seg);
          steps.push_back({l, d, CutAction::FlushSegExit});
          exited = true;
          break;
        }
        d_prev = d;
        flush(cur);
        steps.push_back({l, d, CutAction::Continue});
      } else {
        flush(seg);
        seg = cur;
        d_prev = d;
        steps.push_back({l, d, CutAction::RecordSeg});
      }
      cur.swap(next);
    }

    if (!exited) {
      flush(seg);
      steps.push_back({l + 1, 0, CutAction::TerminalFlush});
    }
    std::sort(result.begin(), result.end());
    return out;
  }

 private:
  std::vector<std::uint32_t> stamp_;
  std::vector<int> layer_;
  std::uint32_t gen_ = 0;
};

}  // namespace

LayerCutResult layer_cut(const GraphLayout& layout, Vertex start,
                         std::span<const std::uint8_t> assigned) {
  if (assigned.size() != layout.capacity()) {
    throw Error(ErrorCode::ShapeMismatch, "assigned mask must cover every slot");
  }
  if (!layout.is_active(start) || assigned[start]) {
    throw Error(ErrorCode::InactiveStart, "start vertex " + std::to_string(start));
  }
  LayerCutter cutter(layout.capacity());
  return cutter.run(layout, start, assigned);
}

HicutResult hicut(const GraphLayout& layout) {
  if (layout.active_count() == 0) throw Error(ErrorCode::EmptyGraph, "no active vertices");
  HicutResult out;
  std::vector<std::uint8_t> assigned(layout.capacity(), 0);
  out.partition.assignment.assign(layout.capacity(), kUnassigned);
  LayerCutter cutter(layout.capacity());
  for (std::size_t i = 0; i < layout.capacity(); ++i) {
    const auto v = static_cast<Vertex>(i);
    if (!layout.is_active(v) || assigned[v]) continue;
    LayerCutResult cut = cutter.run(layout, v, assigned);
    const auto idx = static_cast<std::int32_t>(out.partition.subgraphs.size());
    for (Vertex m : cut.subgraph) {
      assigned[m] = 1;
      out.partition.assignment[m] = idx;
    }
    out.partition.subgraphs.push_back(std::move(cut.subgraph));
    out.traces.push_back(std::move(cut.trace));
  }
  return out;
}

std::size_t cut_edge_count(const GraphLayout& layout, const Partition& partition) {
  std::size_t cut = 0;
  for (std::size_t i = 0; i < layout.capacity(); ++i) {
    const auto u = static_cast<Vertex>(i);
    for (Vertex v : layout.neighbors(u)) {
      if (v > u && partition.assignment[u] != partition.assignment[v]) ++cut;
    }
  }
  return cut;
}

void validate_partition(const GraphLayout& layout, const Partition& p) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::CountMismatch, what); };
  if (p.assignment.size() != layout.capacity()) fail("assignment length differs from capacity");
  std::size_t covered = 0;
  for (std::size_t c = 0; c < p.subgraphs.size(); ++c) {
    const auto& sg = p.subgraphs[c];
    if (sg.empty()) fail("subgraph " + std::to_string(c) + " is empty");
    for (Vertex v : sg) {
      if (!layout.is_active(v)) fail("subgraph holds inactive vertex " + std::to_string(v));
      if (p.assignment[v] != static_cast<std::int32_t>(c)) {
        fail("vertex " + std::to_string(v) + " listed in subgraph " + std::to_string(c) +
             " but assigned elsewhere");
      }
    }
    covered += sg.size();
  }
  for (std::size_t i = 0; i < layout.capacity(); ++i) {
    const auto v = static_cast<Vertex>(i);
    const bool has = p.assignment[i] != kUnassigned;
    if (layout.is_active(v) != has) fail("vertex " + std::to_string(v) + " coverage mismatch");
  }
  if (covered != layout.active_count()) fail("a vertex appears in more than one subgraph");
}

bool trace_is_sound(const CutTrace& trace) {
  const auto& s = trace.steps;
  if (s.empty() || s.front().layer != 1) return false;
  bool recorded = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool last = i + 1 == s.size();
    const CutStep& st = s[i];
    if (i > 0 && st.layer != s[i - 1].layer + 1) return false;
    switch (st.action) {
      case CutAction::Continue:
        if (st.edges == 0) return false;
        if (i > 0) {
          const std::size_t prev = s[i - 1].edges;
          if (prev > st.edges) return false;
          if (recorded && prev < st.edges) return false;
        }
        break;
      case CutAction::RecordSeg:
        if (i == 0 || !(st.edges < s[i - 1].edges) || st.edges == 0) return false;
        recorded = true;
        break;
      case CutAction::FlushSegExit:
        if (i == 0 || !recorded || !(s[i - 1].edges < st.edges) || !last) return false;
        break;
      case CutAction::TerminalFlush:
        if (st.edges != 0 || !last) return false;
        break;
    }
  }
  const CutAction end = s.back().action;
  return end == CutAction::FlushSegExit || end == CutAction::TerminalFlush;
}

Partition partition_from_labels(const GraphLayout& layout, std::span<const std::int32_t> labels) {
  if (labels.size() != layout.capacity()) {
    throw Error(ErrorCode::ShapeMismatch, "labels must cover every slot");
  }
  std::map<std::int32_t, std::vector<Vertex>> groups;
  for (Vertex v : layout.active_vertices()) groups[labels[v]].push_back(v);
  Partition p;
  p.assignment.assign(layout.capacity(), kUnassigned);
  for (auto& [label, members] : groups) {
    const auto idx = static_cast<std::int32_t>(p.subgraphs.size());
    for (Vertex v : members) p.assignment[v] = idx;
    p.subgraphs.push_back(std::move(members));
  }
  return p;
}

Partition single_subgraph_partition(const GraphLayout& layout) {
  std::vector<std::int32_t> labels(layout.capacity(), 0);
  return partition_from_labels(layout, labels);
}

// ---- Dinic ----------------------------------------------------------------

namespace {

class Dinic {
 public:
  explicit Dinic(std::size_t n) : head_(n, -1), level_(n), it_(n) {}

  void add_undirected(std::int32_t u, std::int32_t v, std::int64_t cap) {
    add_arc(u, v, cap);
    add_arc(v, u, cap);
    // Pair them up as each other's reverse.
    const std::size_t a = to_.size() - 2;
    rev_[a] = static_cast<std::int32_t>(a + 1);
    rev_[a + 1] = static_cast<std::int32_t>(a);
  }

  std::int64_t run(std::int32_t s, std::int32_t t) {
    std::int64_t flow = 0;
    while (bfs(s, t)) {
      std::copy(head_.begin(), head_.end(), it_.begin());
      while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) flow += f;
    }
    return flow;
  }

  std::vector<std::uint8_t> reachable(std::int32_t s) const {
    std::vector<std::uint8_t> seen(head_.size(), 0);
    std::vector<std::int32_t> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const std::int32_t u = stack.back();
      stack.pop_back();
      for (std::int32_t a = head_[u]; a != -1; a = next_[a]) {
        if (cap_[a] > 0 && !seen[to_[a]]) {
          seen[to_[a]] = 1;
          stack.push_back(to_[a]);
        }
      }
    }
    return seen;
  }

 private:
  void add_arc(std::int32_t u, std::int32_t v, std::int64_t cap) {
    to_.push_back(v);
    cap_.push_back(cap);
    rev_.push_back(-1);
    next_.push_back(head_[u]);
    head_[u] = static_cast<std::int32_t>(to_.size() - 1);
  }

  bool bfs(std::int32_t s, std::int32_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<std::int32_t> q{s};
    level_[s] = 0;
    for (std::size_t qi = 0; qi < q.size(); ++qi) {
      const std::int32_t u = q[qi];
      for (std::int32_t a = head_[u]; a != -1; a = next_[a]) {
        if (cap_[a] > 0 && level_[to_[a]] < 0) {
          level_[to_[a]] = level_[u] + 1;
          q.push_back(to_[a]);
        }
      }
    }
    return level_[t] >= 0;
  }

  std::int64_t dfs(std::int32_t u, std::int32_t t, std::int64_t pushed) {
    if (u == t) return pushed;
    for (std::int32_t& a = it_[u]; a != -1; a = next_[a]) {
      const std::int32_t v = to_[a];
      if (cap_[a] <= 0 || level_[v] != level_[u] + 1) continue;
      const std::int64_t got = dfs(v, t, std::min(pushed, cap_[a]));
      if (got > 0) {
        cap_[a] -= got;
        cap_[rev_[a]] += got;
        return got;
      }
    }
    return 0;
  }

  std::vector<std::int32_t> head_, next_, to_, rev_;
  std::vector<std::int64_t> cap_;
  std::vector<int> level_;
  std::vector<std::int32_t> it_;
};

}  // namespace

FlowResult max_flow(std::size_t n_vertices, std::span<const WeightedArc> arcs, std::int32_t source,
                    std::int32_t sink) {
  const auto n = static_cast<std::int32_t>(n_vertices);
  if (source < 0 || source >= n || sink < 0 || sink >= n) {
    throw Error(ErrorCode::IndexOutOfRange, "terminal outside the network");
  }
  if (source == sink) throw Error(ErrorCode::SelfLoop, "source equals sink");
  Dinic net(n_vertices);
  for (const WeightedArc& a : arcs) {
    if (a.u < 0 || a.u >= n || a.v < 0 || a.v >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "arc endpoint outside the network");
    }
    if (a.u != a.v) net.add_undirected(a.u, a.v, a.capacity);
  }
  FlowResult out;
  out.value = net.run(source, sink);
  out.source_side = net.reachable(source);
  return out;
}

MincutResult mincut_partition(const GraphLayout& layout, std::span<const std::int64_t> edge_weights,
                              int n_servers, std::uint64_t seed) {
  if (n_servers < 2) throw Error(ErrorCode::InsufficientServers, "need at least 2 servers");
  if (edge_weights.size() != layout.edge_count()) {
    throw Error(ErrorCode::ShapeMismatch, "one weight per edge expected");
  }
  const std::vector<Vertex> active = layout.active_vertices();
  if (active.empty()) throw Error(ErrorCode::EmptyGraph, "no active vertices");
  for (std::int64_t w : edge_weights) {
    if (w <= 0) throw Error(ErrorCode::ConstraintViolation, "edge weights must be positive");
  }

  // Servers sit at cell centres of a grid over the vertices' bounding box.
  double x0 = std::numeric_limits<double>::max(), y0 = x0;
  double x1 = std::numeric_limits<double>::lowest(), y1 = x1;
  for (Vertex v : active) {
    const Point& p = layout.position(v);
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  const auto M = static_cast<std::size_t>(n_servers);
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(M))));
  const std::size_t rows = (M + cols - 1) / cols;
  std::vector<std::size_t> cell(M);
  std::iota(cell.begin(), cell.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(cell.begin(), cell.end(), rng);
  std::vector<Point> site(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double cx = (static_cast<double>(cell[k] % cols) + 0.5) / static_cast<double>(cols);
    const double cy = (static_cast<double>(cell[k] / cols) + 0.5) / static_cast<double>(rows);
    site[k] = {x0 + cx * (x1 - x0), y0 + cy * (y1 - y0)};
  }

  MincutResult out;
  out.anchors.assign(M, -1);
  std::vector<std::uint8_t> taken(layout.capacity(), 0);
  for (std::size_t k = 0; k < M; ++k) {
    double best = std::numeric_limits<double>::max();
    for (Vertex v : active) {
      if (taken[v]) continue;
      const double d = distance(layout.position(v), site[k]);
      if (d < best) {
        best = d;
        out.anchors[k] = v;
      }
    }
    if (out.anchors[k] >= 0) taken[out.anchors[k]] = 1;
  }

  std::vector<std::int32_t> region(layout.capacity(), kUnassigned);
  for (Vertex v : active) {
    double best = std::numeric_limits<double>::max();
    for (std::size_t k = 0; k < M; ++k) {
      if (out.anchors[k] < 0) continue;
      const double d = distance(layout.position(v), site[k]);
      if (d < best) {
        best = d;
        region[v] = static_cast<std::int32_t>(k);
      }
    }
  }
  for (std::size_t k = 0; k < M; ++k) {
    if (out.anchors[k] >= 0) region[out.anchors[k]] = static_cast<std::int32_t>(k);
  }

  // Weighted adjacency aligned with the sorted edge list.
  const std::vector<Edge> edges = layout.edges();
  std::vector<std::vector<std::pair<Vertex, std::int64_t>>> wadj(layout.capacity());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    wadj[edges[i].u].push_back({edges[i].v, edge_weights[i]});
  }

  std::vector<std::int32_t> local(layout.capacity(), -1);
  std::vector<Vertex> members;
  std::vector<WeightedArc> arcs;
  for (std::size_t k = 0; k < M; ++k) {
    if (out.anchors[k] < 0) continue;
    for (std::size_t l = k + 1; l < M; ++l) {
      if (out.anchors[l] < 0) continue;
      members.clear();
      arcs.clear();
      for (Vertex v : active) {
        if (region[v] == static_cast<std::int32_t>(k) || region[v] == static_cast<std::int32_t>(l)) {
          local[v] = static_cast<std::int32_t>(members.size());
          members.push_back(v);
        }
      }
      for (Vertex u : members) {
        for (const auto& [v, w] : wadj[u]) {
          if (local[v] >= 0) arcs.push_back({local[u], local[v], w});
        }
      }
      const FlowResult f = max_flow(members.size(), arcs, local[out.anchors[k]], local[out.anchors[l]]);
      out.pair_cuts.push_back({static_cast<int>(k), static_cast<int>(l), f.value});
      for (Vertex v : members) {
        region[v] = static_cast<std::int32_t>(f.source_side[local[v]] ? k : l);
        local[v] = -1;
      }
    }
  }

  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (region[edges[i].u] != region[edges[i].v]) out.final_cut_weight += edge_weights[i];
  }
  out.partition = partition_from_labels(layout, region);
  return out;
}

}  // namespace edgesim
