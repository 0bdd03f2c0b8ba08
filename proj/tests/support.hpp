#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "edgesim/graph_core.hpp"

namespace testsupport {

using edgesim::Edge;
using edgesim::GraphLayout;
using edgesim::Point;
using edgesim::Vertex;

// 20-user example layout. Rebuilt from the worked walkthrough: from V1 the
// per-layer edge counts are 3, 2, 1, 4 and the whole graph splits into five
// groups {1..6} {7..11} {12..15} {16,17,18} {19,20} (1-based below).
inline GraphLayout example_layout() {
  const int raw[][2] = {{1, 2},   {1, 3},   {1, 6},   {2, 4},   {3, 5},   {5, 7},   {7, 8},
                        {7, 9},   {7, 10},  {7, 11},  {8, 12},  {12, 13}, {12, 14}, {12, 15},
                        {13, 16}, {16, 17}, {16, 18}, {17, 18}, {19, 20}};
  std::vector<Edge> edges;
  for (const auto& e : raw) edges.push_back(edgesim::make_edge(e[0] - 1, e[1] - 1));
  std::vector<Point> pos;
  for (int i = 0; i < 20; ++i) pos.push_back({100.0 * (i % 5) + 50.0, 100.0 * (i / 5) + 50.0});
  std::vector<double> sizes(20, 8.0);
  return edgesim::new_layout(20, edges, pos, sizes);
}

inline std::vector<std::vector<Vertex>> example_groups() {
  return {{0, 1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}, {11, 12, 13, 14}, {15, 16, 17}, {18, 19}};
}

// Random layout with n active vertices (plus some masked-out slack) and the
// given edge probability. Positions uniform in a 2000 m square.
inline GraphLayout random_layout(std::size_t n, double p, std::uint64_t seed,
                                 std::size_t slack = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2000.0);
  std::uniform_real_distribution<double> size(1.0, 1500.0);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (coin(rng)) edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(j)});
    }
  }
  std::vector<Point> pos;
  std::vector<double> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    pos.push_back({u(rng), u(rng)});
    sizes.push_back(size(rng));
  }
  return edgesim::new_layout(n, edges, pos, sizes, n + slack);
}

// The property corpus: sizes 5..200, densities from very sparse to dense.
inline GraphLayout corpus_layout(int index) {
  std::mt19937_64 rng(0x5eed0000ULL + static_cast<std::uint64_t>(index));
  const auto n = std::uniform_int_distribution<std::size_t>(5, 200)(rng);
  const double mean_degree = std::uniform_real_distribution<double>(0.2, 12.0)(rng);
  const double p = std::min(1.0, mean_degree / static_cast<double>(n - 1));
  return random_layout(n, p, rng());
}

}  // namespace testsupport
