#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

#include "edgesim/graph_core.hpp"

namespace edgesim {

/// Citation network: documents are vertices, links undirected.
struct CitationGraph {
  std::size_t n_docs = 0;
  /// Distinct undirected links, each stored once with u < v, sorted.
  std::vector<Edge> edges;
  /// Link lines in the file, before dedup.
  std::size_t declared_links = 0;
  std::size_t feature_dim = 0;
  std::vector<std::int32_t> labels;
  std::size_t n_classes = 0;
};

/// Text format:
///   GRAPH <n_docs> <n_edges> <feature_dim> <n_classes>
///   <src> <dst>        (n_edges lines, 0-based)
///   <label>            (n_docs lines)
/// Throws ParseError (with line number) or CountMismatch.
CitationGraph load_citation_graph(const std::filesystem::path& path);
CitationGraph parse_citation_graph(std::istream& in);

/// Writes `links` as given (callers choose whether both directions appear).
void write_citation_graph(std::ostream& out, std::size_t n_docs, const std::vector<Edge>& links,
                          std::size_t feature_dim, const std::vector<std::int32_t>& labels,
                          std::size_t n_classes);

/// min(feature_dim, 1500); one feature dimension is one kilobit.
double task_size_from_dim(std::size_t feature_dim) noexcept;

struct SampleOptions {
  /// Top up with random new links among the sampled docs when the induced
  /// subgraph has fewer than requested.
  bool fill_links = false;
  /// Slots in the produced layout (0: exactly n_docs).
  std::size_t capacity = 0;
  Plane plane;
};

/// Uniform document sample, induced links kept up to n_links. Positions are
/// uniform in the plane and every task is task_size_from_dim(feature_dim).
/// Throws SampleTooLarge.
GraphLayout sample_scenario(const CitationGraph& graph, std::size_t n_docs, std::size_t n_links,
                            std::uint64_t seed, const SampleOptions& options = {});

inline constexpr std::size_t kAllLinks = std::numeric_limits<std::size_t>::max();

/// Largest edge count of a simple graph on n vertices.
std::uint64_t max_simple_edges(std::size_t n) noexcept;

struct SyntheticGraph {
  GraphLayout layout;
  /// Aligned with layout.edges().
  std::vector<std::int64_t> weights;
};

/// Uniform simple graph with exactly n_edges edges and integer weights in
/// [weight_lo, weight_hi]. Throws TooManyEdges.
SyntheticGraph gen_synthetic(std::size_t n_vertices, std::uint64_t n_edges,
                             std::pair<std::int64_t, std::int64_t> weight_range, std::uint64_t seed,
                             const Plane& plane = {});

}  // namespace edgesim
