#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgesim/graph_core.hpp"

namespace edgesim {

inline constexpr std::int32_t kUnassigned = -1;

/// Disjoint subgraphs covering the active vertices. Each subgraph is sorted.
struct Partition {
  std::vector<std::vector<Vertex>> subgraphs;
  /// Per slot: index into `subgraphs`, or kUnassigned.
  std::vector<std::int32_t> assignment;

  std::size_t size() const noexcept { return subgraphs.size(); }
  friend bool operator==(const Partition&, const Partition&) = default;
};

enum class CutAction { Continue, RecordSeg, FlushSegExit, TerminalFlush };

const char* to_string(CutAction a) noexcept;

struct CutStep {
  int layer = 0;
  std::size_t edges = 0;
  CutAction action = CutAction::Continue;

  friend bool operator==(const CutStep&, const CutStep&) = default;
};

struct CutTrace {
  Vertex start = 0;
  std::vector<CutStep> steps;
};

struct LayerCutResult {
  std::vector<Vertex> subgraph;  // sorted
  CutTrace trace;
};

/// One cut from `start`. `assigned` is indexed by slot; nonzero entries are
/// vertices owned by earlier subgraphs. They are never entered and edges to
/// them are not counted.
LayerCutResult layer_cut(const GraphLayout& layout, Vertex start,
                         std::span<const std::uint8_t> assigned);

struct HicutResult {
  Partition partition;
  std::vector<CutTrace> traces;
};

HicutResult hicut(const GraphLayout& layout);

/// Edges whose endpoints sit in different subgraphs.
std::size_t cut_edge_count(const GraphLayout& layout, const Partition& partition);

/// Throws CountMismatch describing the first problem found.
void validate_partition(const GraphLayout& layout, const Partition& partition);

/// Checks the branch conditions recorded in a trace; returns false on the
/// first inconsistent step.
bool trace_is_sound(const CutTrace& trace);

/// Every active vertex in one subgraph.
Partition single_subgraph_partition(const GraphLayout& layout);

/// Builds a Partition from a per-slot group label (labels need not be dense).
Partition partition_from_labels(const GraphLayout& layout, std::span<const std::int32_t> labels);

// ---- min-cut comparison baseline ------------------------------------------

struct WeightedArc {
  std::int32_t u = 0;
  std::int32_t v = 0;
  std::int64_t capacity = 0;
};

struct FlowResult {
  std::int64_t value = 0;
  /// 1 for vertices reachable from the source in the final residual graph.
  std::vector<std::uint8_t> source_side;
};

/// Dinic max-flow on an undirected network (each arc usable both ways).
FlowResult max_flow(std::size_t n_vertices, std::span<const WeightedArc> arcs, std::int32_t source,
                    std::int32_t sink);

struct PairCut {
  int server_a = 0;
  int server_b = 0;
  std::int64_t value = 0;
};

struct MincutResult {
  Partition partition;
  std::vector<PairCut> pair_cuts;
  /// Anchor vertex per server, -1 if the server got none.
  std::vector<Vertex> anchors;
  /// Total weight of edges between different regions at the end.
  std::int64_t final_cut_weight = 0;
};

/// Iterated s-t min-cut over server pairs. `edge_weights` is aligned with
/// layout.edges().
MincutResult mincut_partition(const GraphLayout& layout, std::span<const std::int64_t> edge_weights,
                              int n_servers, std::uint64_t seed);

}  // namespace edgesim
