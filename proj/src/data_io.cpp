#include "edgesim/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>

#include "edgesim/error.hpp"

namespace edgesim {

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T number(std::string_view tok, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    parse_fail(line_no, "not an integer: '" + std::string(tok) + "'");
  }
  return value;
}

}  // namespace

CitationGraph parse_citation_graph(std::istream& in) {
  CitationGraph g;
  std::string line;
  std::size_t line_no = 0;

  // Next non-blank line, or false at end of input.
  auto next = [&](std::vector<std::string_view>& tok) {
    while (std::getline(in, line)) {
      ++line_no;
      tok = tokens(line);
      if (!tok.empty()) return true;
    }
    return false;
  };

  std::vector<std::string_view> tok;
  if (!next(tok)) parse_fail(line_no + 1, "missing GRAPH header");
  if (tok[0] != "GRAPH" || tok.size() != 5) {
    parse_fail(line_no, "expected 'GRAPH <n_docs> <n_edges> <feature_dim> <n_classes>'");
  }
  g.n_docs = number<std::size_t>(tok[1], line_no);
  g.declared_links = number<std::size_t>(tok[2], line_no);
  g.feature_dim = number<std::size_t>(tok[3], line_no);
  g.n_classes = number<std::size_t>(tok[4], line_no);

  std::vector<Edge> links;
  links.reserve(g.declared_links);
  for (std::size_t e = 0; e < g.declared_links; ++e) {
    if (!next(tok)) {
      throw Error(ErrorCode::CountMismatch, "header declares " + std::to_string(g.declared_links) +
                                                " links, file ends after " + std::to_string(e));
    }
    if (tok.size() == 1) {
      throw Error(ErrorCode::CountMismatch, "line " + std::to_string(line_no) + ": header declares " +
                                                std::to_string(g.declared_links) + " links, found " +
                                                std::to_string(e) + " before the labels");
    }
    if (tok.size() != 2) parse_fail(line_no, "expected '<src> <dst>'");
    const auto u = number<std::int64_t>(tok[0], line_no);
    const auto v = number<std::int64_t>(tok[1], line_no);
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= g.n_docs || static_cast<std::size_t>(v) >= g.n_docs) {
      parse_fail(line_no, "document id outside [0, " + std::to_string(g.n_docs) + ")");
    }
    if (u == v) continue;
    links.push_back(make_edge(static_cast<Vertex>(u), static_cast<Vertex>(v)));
  }
  std::sort(links.begin(), links.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  links.erase(std::unique(links.begin(), links.end(),
                          [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
              links.end());
  g.edges = std::move(links);

  g.labels.reserve(g.n_docs);
  for (std::size_t i = 0; i < g.n_docs; ++i) {
    if (!next(tok)) {
      throw Error(ErrorCode::CountMismatch, "header declares " + std::to_string(g.n_docs) +
                                                " documents, found " + std::to_string(i) + " labels");
    }
    if (tok.size() != 1) {
      throw Error(ErrorCode::CountMismatch, "line " + std::to_string(line_no) +
                                                ": link line where a label was expected");
    }
    g.labels.push_back(number<std::int32_t>(tok[0], line_no));
  }
  if (next(tok)) {
    throw Error(ErrorCode::CountMismatch, "line " + std::to_string(line_no) + ": data after the last label");
  }
  return g;
}

CitationGraph load_citation_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_citation_graph(in);
}

void write_citation_graph(std::ostream& out, std::size_t n_docs, const std::vector<Edge>& links,
                          std::size_t feature_dim, const std::vector<std::int32_t>& labels,
                          std::size_t n_classes) {
  if (labels.size() != n_docs) throw Error(ErrorCode::CountMismatch, "one label per document");
  out << "GRAPH " << n_docs << ' ' << links.size() << ' ' << feature_dim << ' ' << n_classes << '\n';
  for (const Edge& e : links) out << e.u << ' ' << e.v << '\n';
  for (std::int32_t l : labels) out << l << '\n';
}

double task_size_from_dim(std::size_t feature_dim) noexcept {
  return static_cast<double>(std::min<std::size_t>(feature_dim, 1500));
}

std::uint64_t max_simple_edges(std::size_t n) noexcept {
  const auto m = static_cast<std::uint64_t>(n);
  return m < 2 ? 0 : m * (m - 1) / 2;
}

namespace {

// Knuth's selection sampling: k of n in increasing order, one pass.
template <typename Visit>
void select_sorted(std::uint64_t n, std::uint64_t k, std::mt19937_64& rng, Visit visit) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uint64_t chosen = 0;
  for (std::uint64_t t = 0; t < n && chosen < k; ++t) {
    if (static_cast<double>(n - t) * u01(rng) < static_cast<double>(k - chosen)) {
      visit(t);
      ++chosen;
    }
  }
}

std::vector<Point> uniform_points(std::size_t n, const Plane& plane, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0.0, plane.width), uy(0.0, plane.height);
  std::vector<Point> out(n);
  for (Point& p : out) {
    p.x = ux(rng);
    p.y = uy(rng);
  }
  return out;
}

}  // namespace

GraphLayout sample_scenario(const CitationGraph& graph, std::size_t n_docs, std::size_t n_links,
                            std::uint64_t seed, const SampleOptions& options) {
  if (n_docs > graph.n_docs) {
    throw Error(ErrorCode::SampleTooLarge, "asked for " + std::to_string(n_docs) + " of " +
                                               std::to_string(graph.n_docs) + " documents");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::int32_t> index(graph.n_docs, -1);
  std::int32_t next = 0;
  select_sorted(graph.n_docs, n_docs, rng, [&](std::uint64_t d) { index[d] = next++; });

  std::vector<Edge> kept;
  for (const Edge& e : graph.edges) {
    const std::int32_t a = index[static_cast<std::size_t>(e.u)];
    const std::int32_t b = index[static_cast<std::size_t>(e.v)];
    if (a >= 0 && b >= 0) kept.push_back(make_edge(a, b));
  }
  if (kept.size() > n_links) {
    std::shuffle(kept.begin(), kept.end(), rng);
    kept.resize(n_links);
  } else if (options.fill_links && kept.size() < n_links) {
    const std::uint64_t target = std::min<std::uint64_t>(n_links, max_simple_edges(n_docs));
    auto key = [n_docs](const Edge& e) {
      return static_cast<std::uint64_t>(e.u) * n_docs + static_cast<std::uint64_t>(e.v);
    };
    std::unordered_set<std::uint64_t> seen;
    for (const Edge& e : kept) seen.insert(key(e));
    std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(n_docs) - 1);
    while (kept.size() < target) {
      const std::int32_t a = pick(rng), b = pick(rng);
      if (a == b) continue;
      const Edge e = make_edge(a, b);
      if (seen.insert(key(e)).second) kept.push_back(e);
    }
  }
  const auto positions = uniform_points(n_docs, options.plane, rng);
  const std::vector<double> sizes(n_docs, task_size_from_dim(graph.feature_dim));
  return new_layout(n_docs, kept, positions, sizes, std::max(options.capacity, n_docs));
}

SyntheticGraph gen_synthetic(std::size_t n_vertices, std::uint64_t n_edges,
                             std::pair<std::int64_t, std::int64_t> weight_range, std::uint64_t seed,
                             const Plane& plane) {
  const std::uint64_t slots = max_simple_edges(n_vertices);
  if (n_edges > slots) {
    throw Error(ErrorCode::TooManyEdges, std::to_string(n_edges) + " edges requested, " +
                                             std::to_string(n_vertices) + " vertices allow " +
                                             std::to_string(slots));
  }
  if (weight_range.first > weight_range.second) {
    throw Error(ErrorCode::ConfigError, "empty weight range");
  }
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  edges.reserve(n_edges);
  // Slot t enumerates pairs (u, v), u < v, row by row; the scan is in order
  // so the row cursor only moves forward.
  std::uint64_t row = 0, row_start = 0;
  const auto n = static_cast<std::uint64_t>(n_vertices);
  select_sorted(slots, n_edges, rng, [&](std::uint64_t t) {
    while (t >= row_start + (n - 1 - row)) {
      row_start += n - 1 - row;
      ++row;
    }
    const std::uint64_t v = row + 1 + (t - row_start);
    edges.push_back({static_cast<Vertex>(row), static_cast<Vertex>(v)});
  });
  SyntheticGraph out;
  std::uniform_int_distribution<std::int64_t> w(weight_range.first, weight_range.second);
  out.weights.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) out.weights.push_back(w(rng));
  const auto positions = uniform_points(n_vertices, plane, rng);
  const std::vector<double> sizes(n_vertices, 0.0);
  out.layout = new_layout(n_vertices, edges, positions, sizes);
  return out;
}

}  // namespace edgesim
