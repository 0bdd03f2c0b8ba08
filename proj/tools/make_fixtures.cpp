// Writes synthetic stand-ins for the three citation datasets: same document
// counts, link counts (both directions listed), feature dims and class
// counts, with links biased towards documents of the same class.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edgesim/data_io.hpp"
#include "edgesim/error.hpp"

namespace {

struct Shape {
  std::string name;
  std::size_t docs;
  std::size_t directed_links;
  std::size_t dim;
  std::size_t classes;
};

void write_fixture(const Shape& s, const std::string& dir, std::uint64_t seed, double same_class) {
  std::mt19937_64 rng(seed);
  std::vector<std::int32_t> labels(s.docs);
  std::uniform_int_distribution<std::int32_t> cls(0, static_cast<std::int32_t>(s.classes) - 1);
  for (auto& l : labels) l = cls(rng);
  std::vector<std::vector<std::int32_t>> members(s.classes);
  for (std::size_t i = 0; i < s.docs; ++i) members[static_cast<std::size_t>(labels[i])].push_back(static_cast<std::int32_t>(i));

  const std::size_t pairs = s.directed_links / 2;
  std::set<std::pair<std::int32_t, std::int32_t>> seen;
  std::uniform_int_distribution<std::int32_t> doc(0, static_cast<std::int32_t>(s.docs) - 1);
  std::bernoulli_distribution local(same_class);
  while (seen.size() < pairs) {
    const std::int32_t u = doc(rng);
    std::int32_t v;
    if (local(rng)) {
      const auto& pool = members[static_cast<std::size_t>(labels[static_cast<std::size_t>(u)])];
      v = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    } else {
      v = doc(rng);
    }
    if (u == v) continue;
    seen.insert({std::min(u, v), std::max(u, v)});
  }
  std::vector<edgesim::Edge> links;
  links.reserve(2 * pairs);
  for (const auto& [a, b] : seen) {
    links.push_back({a, b});
    links.push_back({b, a});
  }
  const std::string path = dir + "/" + s.name + ".graph";
  std::ofstream out(path);
  if (!out) throw edgesim::Error(edgesim::ErrorCode::IoError, "cannot write " + path);
  edgesim::write_citation_graph(out, s.docs, links, s.dim, labels, s.classes);
  std::cout << path << ": " << s.docs << " docs, " << links.size() << " links\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate citation-graph fixtures"};
  std::string out_dir = "data";
  std::uint64_t seed = 7;
  double same_class = 0.8;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--same-class", same_class, "probability a link stays inside its class");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Shape> shapes{
      {"citeseer", 3327, 9104, 3703, 6},
      {"cora", 2708, 10556, 1433, 7},
      {"pubmed", 19717, 88648, 500, 3},
  };
  try {
    for (std::size_t i = 0; i < shapes.size(); ++i) write_fixture(shapes[i], out_dir, seed + i, same_class);
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
