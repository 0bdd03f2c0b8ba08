#include <sstream>

#include "doctest.h"
#include "edgesim/data_io.hpp"
#include "edgesim/error.hpp"
#include "edgesim/partition.hpp"

using namespace edgesim;

namespace {

ErrorCode code_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_citation_graph(in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

#ifdef EDGESIM_DATA_DIR
std::string fixture(const char* name) { return std::string(EDGESIM_DATA_DIR) + "/" + name + ".graph"; }
#endif

}  // namespace

TEST_CASE("parse a tiny graph with both link directions") {
  std::istringstream in("GRAPH 4 4 12 2\n0 1\n1 0\n2 3\n1 2\n0\n1\n1\n0\n");
  const CitationGraph g = parse_citation_graph(in);
  CHECK(g.n_docs == 4);
  CHECK(g.declared_links == 4);
  CHECK(g.edges.size() == 3);
  CHECK(g.feature_dim == 12);
  CHECK(g.labels == std::vector<std::int32_t>{0, 1, 1, 0});
}

TEST_CASE("parse errors carry a line number") {
  std::istringstream in("GRAPH 3 2 5 1\n0 1\n0 x\n0\n0\n0\n");
  try {
    parse_citation_graph(in);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of("GRAPH 3 1\n") == ErrorCode::ParseError);
  CHECK(code_of("NODES 3 1 1 1\n") == ErrorCode::ParseError);
  CHECK(code_of("GRAPH 3 1 5 1\n0 7\n0\n0\n0\n") == ErrorCode::ParseError);
}

TEST_CASE("header and body disagree") {
  CHECK(code_of("GRAPH 3 3 5 1\n0 1\n1 2\n0\n0\n0\n") == ErrorCode::CountMismatch);
  CHECK(code_of("GRAPH 3 1 5 1\n0 1\n1 2\n0\n0\n0\n") == ErrorCode::CountMismatch);
  CHECK(code_of("GRAPH 3 1 5 1\n0 1\n0\n0\n") == ErrorCode::CountMismatch);
  CHECK(code_of("GRAPH 3 1 5 1\n0 1\n0\n0\n0\n1\n") == ErrorCode::CountMismatch);
}

TEST_CASE("write then parse round trip") {
  const std::vector<Edge> links{{0, 2}, {2, 0}, {1, 2}};
  std::ostringstream out;
  write_citation_graph(out, 3, links, 7, {2, 0, 1}, 3);
  std::istringstream in(out.str());
  const CitationGraph g = parse_citation_graph(in);
  CHECK(g.edges.size() == 2);
  CHECK(g.declared_links == 3);
  CHECK(g.n_classes == 3);
}

TEST_CASE("task size from feature dim") {
  CHECK(task_size_from_dim(1433) == 1433.0);
  CHECK(task_size_from_dim(3703) == 1500.0);
  CHECK(task_size_from_dim(0) == 0.0);
  double last = 0.0;
  for (std::size_t d = 0; d < 4000; d += 7) {
    CHECK(task_size_from_dim(d) >= last);
    CHECK(task_size_from_dim(d) <= 1500.0);
    last = task_size_from_dim(d);
  }
}

TEST_CASE("sampling") {
  std::ostringstream out;
  std::vector<Edge> links;
  for (int i = 0; i < 50; ++i) {
    for (int j = i + 1; j < 50; j += 3) links.push_back({i, j});
  }
  std::vector<std::int32_t> labels(50, 0);
  write_citation_graph(out, 50, links, 600, labels, 1);
  std::istringstream in(out.str());
  const CitationGraph g = parse_citation_graph(in);

  const GraphLayout a = sample_scenario(g, 20, 30, 5);
  const GraphLayout b = sample_scenario(g, 20, 30, 5);
  CHECK(a.active_count() == 20);
  CHECK(a.edge_count() <= 30);
  CHECK(a.edges() == b.edges());
  CHECK(a.position(3).x == b.position(3).x);
  CHECK(a.task_size_kb(0) == 600.0);
  check_invariants(a);

  const GraphLayout full = sample_scenario(g, 50, kAllLinks, 1);
  CHECK(full.edges() == g.edges);

  SampleOptions fill;
  fill.fill_links = true;
  fill.capacity = 25;
  const GraphLayout topped = sample_scenario(g, 10, 40, 3, fill);
  CHECK(topped.edge_count() == 40);
  CHECK(topped.capacity() == 25);
  check_invariants(topped);

  try {
    sample_scenario(g, 51, 10, 1);
    FAIL("expected SampleTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SampleTooLarge);
  }
}

TEST_CASE("synthetic graphs") {
  const SyntheticGraph k4 = gen_synthetic(4, 6, {1, 1}, 3);
  CHECK(k4.layout.edge_count() == 6);
  CHECK(k4.weights == std::vector<std::int64_t>(6, 1));

  const SyntheticGraph s = gen_synthetic(500, 5010, {1, 100}, 9);
  CHECK(s.layout.edge_count() == 5010);
  CHECK(s.weights.size() == 5010);
  for (auto w : s.weights) {
    CHECK(w >= 1);
    CHECK(w <= 100);
  }
  check_invariants(s.layout);
  CHECK(gen_synthetic(500, 5010, {1, 100}, 9).layout.edges() == s.layout.edges());
  CHECK(max_simple_edges(500) == 124750);
  try {
    gen_synthetic(500, 500100, {1, 100}, 1);
    FAIL("expected TooManyEdges");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyEdges);
  }
}

TEST_CASE("synthetic edge slots are uniform") {
  // Each of the 10 slots of K5 should be picked about 3/10 of the time.
  std::vector<int> hits(25, 0);
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    for (const Edge& e : gen_synthetic(5, 3, {1, 1}, static_cast<std::uint64_t>(t)).layout.edges()) {
      ++hits[static_cast<std::size_t>(e.u * 5 + e.v)];
    }
  }
  for (int u = 0; u < 5; ++u) {
    for (int v = u + 1; v < 5; ++v) {
      CHECK(std::abs(hits[static_cast<std::size_t>(u * 5 + v)] / double(trials) - 0.3) < 0.04);
    }
  }
}

#ifdef EDGESIM_DATA_DIR
TEST_CASE("fixture datasets match the published counts") {
  const CitationGraph citeseer = load_citation_graph(fixture("citeseer"));
  CHECK(citeseer.n_docs == 3327);
  CHECK(citeseer.declared_links == 9104);
  CHECK(citeseer.edges.size() * 2 == 9104);
  CHECK(citeseer.feature_dim == 3703);
  const CitationGraph cora = load_citation_graph(fixture("cora"));
  CHECK(cora.n_docs == 2708);
  CHECK(cora.declared_links == 10556);
  CHECK(cora.feature_dim == 1433);
  const CitationGraph pubmed = load_citation_graph(fixture("pubmed"));
  CHECK(pubmed.n_docs == 19717);
  CHECK(pubmed.declared_links == 88648);
  CHECK(pubmed.feature_dim == 500);
  const GraphLayout s = sample_scenario(pubmed, 300, 4800, 1);
  CHECK(s.active_count() == 300);
  CHECK(s.edge_count() <= 4800);
}
#endif

TEST_CASE("missing file") {
  try {
    load_citation_graph("/nonexistent/graph.txt");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
