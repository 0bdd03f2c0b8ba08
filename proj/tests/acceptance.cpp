// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "cost_cases.hpp"
#include "edgesim/agents.hpp"
#include "edgesim/cost_model.hpp"
#include "edgesim/env.hpp"
#include "edgesim/error.hpp"
#include "edgesim/harness.hpp"
#include "edgesim/nn.hpp"
#include "edgesim/partition.hpp"
#include "edgesim/scenario.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace edgesim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

// ---------------------------------------------------------------- 1

Verdict golden_example() {
  const GraphLayout g = testsupport::example_layout();
  const std::vector<std::uint8_t> none(g.capacity(), 0);
  const auto t0 = Clock::now();
  const LayerCutResult first = layer_cut(g, 0, none);
  const HicutResult all = hicut(g);
  const double ms = seconds_since(t0) * 1e3;
  std::vector<std::size_t> d;
  for (const CutStep& s : first.trace.steps) d.push_back(s.edges);
  const bool ok = all.partition.size() == 5 && all.partition.subgraphs == testsupport::example_groups() &&
                  first.subgraph == std::vector<Vertex>{0, 1, 2, 3, 4, 5} &&
                  d == std::vector<std::size_t>{3, 2, 1, 4} && ms < 1.0;
  return {ok, std::to_string(all.partition.size()) + " subgraphs, " + fmt(ms) + " ms"};
}

// ---------------------------------------------------------------- 2, 3

struct CorpusResult {
  int invalid = 0;
  int unsound = 0;
  double seconds = 0.0;
};

CorpusResult corpus_run() {
  CorpusResult r;
  const auto t0 = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    const GraphLayout g = testsupport::corpus_layout(i);
    const HicutResult h = hicut(g);
    try {
      validate_partition(g, h.partition);
    } catch (const Error&) {
      ++r.invalid;
    }
    for (const CutTrace& t : h.traces) r.unsound += !trace_is_sound(t);
  }
  r.seconds = seconds_since(t0);
  return r;
}

// ---------------------------------------------------------------- 4

std::int64_t brute_min_cut(const GraphLayout& g, const std::vector<std::int64_t>& w, Vertex s, Vertex t) {
  const std::size_t n = g.capacity();
  const std::vector<Edge> edges = g.edges();
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> s & 1u) || (mask >> t & 1u)) continue;
    std::int64_t cut = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (((mask >> edges[i].u) & 1u) != ((mask >> edges[i].v) & 1u)) cut += w[i];
    }
    best = std::min(best, cut);
  }
  return best;
}

Verdict mincut_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4004);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 12)(rng);
    const double p = std::uniform_real_distribution<double>(0.15, 0.8)(rng);
    const GraphLayout g = testsupport::random_layout(n, p, rng());
    std::vector<std::int64_t> w(g.edge_count());
    for (auto& x : w) x = std::uniform_int_distribution<std::int64_t>(1, 50)(rng);
    // Two servers: a single s-t cut over the whole graph between the anchors.
    const MincutResult r = mincut_partition(g, w, 2, rng());
    if (r.pair_cuts.size() != 1) {
      ++mismatches;
      continue;
    }
    const std::int64_t expect = brute_min_cut(g, w, r.anchors[0], r.anchors[1]);
    mismatches += r.pair_cuts[0].value != expect || r.final_cut_weight != expect;
  }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < 30.0, std::to_string(mismatches) + " mismatches in 200 graphs, " + fmt(s) + " s"};
}

// ---------------------------------------------------------------- 5

Verdict partition_bench(const fs::path& out) {
  const ExperimentConfig cfg = load_config(fs::path(EDGESIM_SOURCE_DIR) / "configs/bench.conf");
  const std::vector<BenchRow> rows = run_partition_bench(cfg, out / "bench");
  std::map<std::pair<bool, std::size_t>, std::pair<const BenchRow*, const BenchRow*>> points;
  for (const BenchRow& r : rows) {
    auto& slot = points[{r.dense, r.n_vertices}];
    (r.algo == "hicut" ? slot.first : slot.second) = &r;
  }
  bool faster = true;
  double worst_growth = 0.0;
  for (bool dense : {false, true}) {
    double r0 = 0.0;
    for (const auto& [key, pair] : points) {
      if (key.first != dense) continue;
      const BenchRow& h = *pair.first;
      if (dense) faster = faster && h.runtime_ms < pair.second->runtime_ms;
      const double n = static_cast<double>(h.n_vertices), e = static_cast<double>(h.n_edges);
      const double ratio = h.runtime_ms / (n * n + n * e);
      if (r0 == 0.0) r0 = ratio;
      worst_growth = std::max(worst_growth, ratio / r0);
    }
  }
  // Validity of both partitions is enforced inside run_partition_bench.
  return {faster && worst_growth <= 2.0,
          std::string(faster ? "hicut faster at every dense point" : "hicut NOT faster at some dense point") +
              ", worst runtime/(N^2+NE) relative to the smallest point " + fmt(worst_growth)};
}

// ---------------------------------------------------------------- 6

Verdict cost_model_suite() {
  std::ifstream in(fs::path(EDGESIM_SOURCE_DIR) / "tests/data/cost_cases.json");
  const nlohmann::json doc = nlohmann::json::parse(in);
  int bad = 0, cases = 0;
  const double tol = 1e-9;
  for (const auto& c : doc["cases"]) {
    ++cases;
    const testsupport::Built b = testsupport::build_case(c);
    const auto& e = c["expected"];
    const CostBreakdown got = system_cost(b.s, b.g, b.d);
    const std::pair<double, const char*> fields[] = {
        {got.t_upload, "t_upload"}, {got.i_upload, "i_upload"}, {got.t_compute, "t_compute"},
        {got.t_transfer, "t_transfer"}, {got.i_transfer, "i_transfer"}, {got.i_agg, "i_agg"},
        {got.i_upd, "i_upd"}, {got.T_all, "T_all"}, {got.I_all, "I_all"}, {got.C, "C"}};
    for (const auto& [value, key] : fields) bad += !testsupport::close_rel(value, e[key], tol);
    for (std::size_t i = 0; i < b.g.active_count(); ++i) {
      const double r = uplink_rate(b.s, b.g, static_cast<Vertex>(i), static_cast<std::size_t>(b.d.server[i]));
      bad += !testsupport::close_rel(r, e["rates"][i], tol);
    }
  }
  // Telescoping: marginal costs summed over an episode equal the final cost.
  double worst = 0.0;
  ScenarioSpec spec;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GraphLayout g = testsupport::random_layout(30, 0.1, 500 + seed, 6);
    const Scenario s = build_scenario(spec, 30, 36, seed);
    EnvState st = reset(g, hicut(g).partition, s);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double sum = 0.0;
    while (!st.finished()) {
      JointAction joint(s.n_servers());
      for (auto& a : joint) a = {u01(rng), u01(rng)};
      const StepOutcome o = step(st, joint);
      sum += o.cost;
      st = o.next;
    }
    const double total = system_cost(s, g, st.decision).C;
    worst = std::max(worst, std::abs(sum - total) / total);
  }
  return {cases == 50 && bad == 0 && worst <= 1e-6,
          std::to_string(bad) + " component mismatches over " + std::to_string(cases) +
              " cases, worst telescoping error " + fmt(worst, 3)};
}

// ---------------------------------------------------------------- 7

// Plain loops, no Eigen algebra: A_hat = A + I, d_i = row sums,
// H = relu(P X W0), out = P H W1 with P_ij = A_hat_ij / sqrt(d_i d_j).
std::vector<std::vector<double>> naive_gcn(const std::vector<std::vector<double>>& a,
                                           const std::vector<std::vector<double>>& x,
                                           const std::vector<std::vector<double>>& w0,
                                           const std::vector<std::vector<double>>& w1) {
  const std::size_t n = a.size();
  std::vector<double> deg(n, 0.0);
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j] + (i == j ? 1.0 : 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p[i][j] = (a[i][j] + (i == j ? 1.0 : 0.0)) / std::sqrt(deg[i] * deg[j]);
  }
  auto mul = [](const std::vector<std::vector<double>>& l, const std::vector<std::vector<double>>& r) {
    std::vector<std::vector<double>> o(l.size(), std::vector<double>(r[0].size(), 0.0));
    for (std::size_t i = 0; i < l.size(); ++i)
      for (std::size_t k = 0; k < r.size(); ++k)
        for (std::size_t j = 0; j < r[0].size(); ++j) o[i][j] += l[i][k] * r[k][j];
    return o;
  };
  auto h = mul(mul(p, x), w0);
  for (auto& row : h)
    for (double& v : row) v = std::max(v, 0.0);
  return mul(mul(p, h), w1);
}

Verdict gcn_forward_check() {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> n01(0.0, 1.0);
  double worst = 0.0;
  auto to_eigen = [](const std::vector<std::vector<double>>& m) {
    Eigen::MatrixXd e(m.size(), m[0].size());
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m[0].size(); ++j) e(i, j) = m[i][j];
    return e;
  };
  auto random_matrix = [&](std::size_t r, std::size_t c) {
    std::vector<std::vector<double>> m(r, std::vector<double>(c));
    for (auto& row : m)
      for (double& v : row) v = n01(rng);
    return m;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 25)(rng);
    const std::size_t f = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::size_t hdim = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::size_t o = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const double density = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::bernoulli_distribution(density)(rng)) a[i][j] = a[j][i] = 1.0;
    const auto x = random_matrix(n, f), w0 = random_matrix(f, hdim), w1 = random_matrix(hdim, o);
    const Eigen::MatrixXd got = gcn_forward(to_eigen(a), to_eigen(x), to_eigen(w0), to_eigen(w1));
    const Eigen::MatrixXd want = to_eigen(naive_gcn(a, x, w0, w1));
    const double scale = std::max(1e-12, want.cwiseAbs().maxCoeff());
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff() / scale);
  }
  // A = 0: the propagation is the identity, so the output is relu(X W0) W1.
  const auto x = random_matrix(6, 3), w0 = random_matrix(3, 5), w1 = random_matrix(5, 2);
  const Eigen::MatrixXd ex = to_eigen(x), e0 = to_eigen(w0), e1 = to_eigen(w1);
  const bool zero_exact = gcn_forward(Eigen::MatrixXd::Zero(6, 6), ex, e0, e1) == (ex * e0).cwiseMax(0.0) * e1;
  // One vertex: P = [1], output relu(x w0) w1 in closed form.
  Eigen::MatrixXd one(1, 1), w(1, 1), v(1, 1);
  one << 2.0;
  w << -1.5;
  v << 3.0;
  const bool single_exact = gcn_forward(Eigen::MatrixXd::Zero(1, 1), one, w, v)(0, 0) == 0.0 &&
                            gcn_forward(Eigen::MatrixXd::Zero(1, 1), one, -w, v)(0, 0) == 9.0;
  return {worst <= 1e-10 && zero_exact && single_exact,
          "worst relative error " + fmt(worst, 3) + (zero_exact ? ", A=0 exact" : ", A=0 NOT exact") +
              (single_exact ? ", single vertex exact" : ", single vertex NOT exact")};
}

// ---------------------------------------------------------------- 8

Verdict gradient_check() {
  std::mt19937_64 rng(808);
  const Mlp actor = Mlp::create({20, 64, 64, 64, 2}, Activation::Relu, Activation::Sigmoid, rng);
  const Mlp critic = Mlp::create({28, 64, 64, 64, 1}, Activation::Relu, Activation::Identity, rng);
  const auto a = testsupport::gradient_check(actor, 100, 1);
  const auto c = testsupport::gradient_check(critic, 100, 2);
  return {a.failures == 0 && c.failures == 0 && a.probes == 100 && c.probes == 100,
          "actor worst " + fmt(a.worst, 3) + ", critic worst " + fmt(c.worst, 3)};
}

// ---------------------------------------------------------------- 9, 10, 11

struct Means {
  double cost = 0.0;
  double cross = 0.0;
};

std::map<std::string, Means> sweep_means(const std::vector<SweepRow>& rows) {
  std::map<std::string, Means> sum;
  std::map<std::string, int> count;
  for (const SweepRow& r : rows) {
    sum[r.method].cost += r.cost;
    sum[r.method].cross += r.cross_server_mj;
    ++count[r.method];
  }
  for (auto& [m, v] : sum) {
    v.cost /= count[m];
    v.cross /= count[m];
  }
  return sum;
}

ExperimentConfig desk_config() { return load_config(fs::path(EDGESIM_SOURCE_DIR) / "configs/desk.conf"); }

fs::path train_dir(const fs::path& out, std::uint64_t seed) { return out / ("train_seed" + std::to_string(seed)); }

struct Trained {
  std::vector<EpisodeLog> log;
  double seconds = 0.0;
};

Trained train(const ExperimentConfig& base, const std::string& method, std::uint64_t seed, const fs::path& out) {
  ExperimentConfig cfg = base;
  cfg.method = method;
  cfg.train_seed = seed;
  const auto t0 = Clock::now();
  Trained t{run_training(cfg, out), 0.0};
  t.seconds = seconds_since(t0);
  return t;
}

Verdict desk_learning(const ExperimentConfig& cfg, const fs::path& out, const Trained& drlgo) {
  ExperimentConfig c = cfg;
  c.datasets = {c.train_dataset};
  c.methods = {"drlgo", "gm", "rm"};
  const auto m = sweep_means(run_sweep(c, out));
  const Means d = m.at("drlgo"), g = m.at("gm"), r = m.at("rm");
  const bool ok = d.cost <= g.cost && d.cost <= r.cost && d.cross <= r.cross && cfg.episodes <= 500 &&
                  drlgo.seconds <= 900.0;
  return {ok, "cost drlgo " + fmt(d.cost, 6) + " gm " + fmt(g.cost, 6) + " rm " + fmt(r.cost, 6) +
                  "; cross drlgo " + fmt(d.cross, 6) + " rm " + fmt(r.cross, 6) + "; " +
                  std::to_string(cfg.episodes) + " episodes in " + fmt(drlgo.seconds) + " s"};
}

// Trailing mean over the last `window` episodes.
std::vector<double> smooth(const std::vector<EpisodeLog>& log, std::size_t window) {
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    acc += log[i].global_reward;
    if (i >= window) acc -= log[i - window].global_reward;
    out.push_back(acc / static_cast<double>(std::min(i + 1, window)));
  }
  return out;
}

double quintile_mean(const std::vector<double>& v, int q) {
  const std::size_t lo = v.size() * q / 5, hi = v.size() * (q + 1) / 5;
  return std::accumulate(v.begin() + lo, v.begin() + hi, 0.0) / static_cast<double>(hi - lo);
}

// P(X >= k) for X ~ Binomial(n, 1/2).
double sign_test_p(int k, int n) {
  double p = 0.0;
  for (int i = k; i <= n; ++i) {
    double c = 1.0;
    for (int j = 0; j < i; ++j) c = c * (n - j) / (j + 1);
    p += c * std::pow(0.5, n);
  }
  return p;
}

Verdict convergence(const std::vector<Trained>& runs) {
  int improved = 0;
  std::string detail;
  for (const Trained& t : runs) {
    const auto s = smooth(t.log, 20);
    const double first = quintile_mean(s, 0), last = quintile_mean(s, 4);
    improved += last > first;
    detail += fmt(first, 5) + "->" + fmt(last, 5) + " ";
  }
  const double p = sign_test_p(improved, static_cast<int>(runs.size()));
  return {p < 0.05, std::to_string(improved) + "/" + std::to_string(runs.size()) + " improved, p=" + fmt(p, 3) +
                        " [" + detail.substr(0, detail.size() - 1) + "]"};
}

Verdict ablation(const ExperimentConfig& cfg, const fs::path& out) {
  const std::vector<AblationRow> rows = run_ablation(cfg, out);
  std::map<std::string, std::map<std::string, double>> cross;
  std::map<std::string, std::map<std::string, int>> n;
  for (const AblationRow& r : rows) {
    cross[r.dataset][r.arm] += r.cross_server_mj;
    ++n[r.dataset][r.arm];
  }
  int wins = 0;
  std::string detail;
  for (auto& [ds, arms] : cross) {
    const double a = arms["drlgo"] / n[ds]["drlgo"], b = arms["drl_only"] / n[ds]["drl_only"];
    wins += a <= b;
    detail += ds + " " + fmt(a, 6) + " vs " + fmt(b, 6) + "; ";
  }
  return {wins >= 2 && cross.size() == 3,
          std::to_string(wins) + "/" + std::to_string(cross.size()) + " datasets: " + detail.substr(0, detail.size() - 2)};
}

// ---------------------------------------------------------------- 12

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// bench.csv without the runtime column, which is wall-clock.
std::string bench_without_runtime(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() == 5) cols.erase(cols.begin() + 3);
    for (const auto& c : cols) out += c + ",";
    out += '\n';
  }
  return out;
}

Verdict cli_determinism(const fs::path& out) {
  fs::create_directories(out);
  const fs::path conf = out / "tiny.conf";
  {
    std::ofstream c(conf);
    c << "data_dir = " << (fs::path(EDGESIM_SOURCE_DIR) / "data").string() << "\n"
      << "datasets = pubmed, cora\nusers = 16\nassoc = 30\nsweep_users = 12, 16\nsweep_assoc = 20, 30\n"
      << "seeds = 1..4\nepisodes = 12\nbatch_size = 16\nhidden = 32, 32\nptom_episodes_per_update = 2\n"
      << "methods = drlgo, drl_only, ptom, gm, rm\nposition_steps = 2\n"
      << "bench_sparse = 200:1000\nbench_dense = 100:6000\nbench_servers = 4\nbench_repeats = 1\n";
  }
  const std::vector<std::string> commands = {"train", "train", "train", "sweep", "ablate", "bench"};
  const std::vector<std::string> methods = {"drlgo", "drl_only", "ptom"};
  int failures = 0;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = out / run;
    fs::remove_all(dir);
    for (std::size_t i = 0; i < commands.size(); ++i) {
      fs::path cfg_path = conf;
      if (commands[i] == "train") {
        cfg_path = out / ("tiny_" + methods[i] + ".conf");
        std::ofstream(cfg_path) << slurp(conf) << "method = " << methods[i] << "\n";
      }
      const std::string cmd = std::string("\"") + EDGESIM_SIM_PATH + "\" " + commands[i] + " --config \"" +
                              cfg_path.string() + "\" --out \"" + dir.string() + "\" --seed 3 > /dev/null";
      failures += std::system(cmd.c_str()) != 0;
    }
  }
  int differ = 0;
  const std::vector<std::string> files = {"train_drlgo.csv", "train_drl_only.csv", "train_ptom.csv",
                                          "sweep.csv", "ablate.csv", "bench_notes.txt"};
  for (const auto& f : files) {
    const std::string a = slurp(out / "a" / f);
    differ += a.empty() || a != slurp(out / "b" / f);
  }
  differ += bench_without_runtime(out / "a/bench.csv") != bench_without_runtime(out / "b/bench.csv");
  return {failures == 0 && differ == 0, std::to_string(failures) + " failed runs, " + std::to_string(differ) +
                                            " of 7 outputs differ (bench runtimes excluded)"};
}

}  // namespace

int main() {
#if defined(__GLIBC__)
  // Same allocator padding as the sim tool; see tools/sim.cpp.
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
  const fs::path out = EDGESIM_ACCEPT_OUT;
  fs::remove_all(out);
  fs::create_directories(out);
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& run) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion " << id << " (" << name << "): " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail
              << std::endl;
  };

  report(1, "worked example", golden_example);
  const CorpusResult corpus = corpus_run();
  report(2, "partition validity", [&] {
    return Verdict{corpus.invalid == 0 && corpus.seconds < 10.0,
                   std::to_string(corpus.invalid) + " invalid of 1000, " + fmt(corpus.seconds) + " s"};
  });
  report(3, "trace soundness", [&] {
    return Verdict{corpus.unsound == 0, std::to_string(corpus.unsound) + " unsound traces"};
  });
  report(4, "min-cut oracle", mincut_oracle);
  report(5, "partition benchmark", [&] { return partition_bench(out); });
  report(6, "cost model", cost_model_suite);
  report(7, "gcn forward", gcn_forward_check);
  report(8, "gradient check", gradient_check);

  // One shared set of trained policies for 9 and 11; seeds 1..5 for 10.
  const ExperimentConfig cfg = desk_config();
  std::vector<Trained> runs;
  std::string training_error;
  try {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) runs.push_back(train(cfg, "drlgo", seed, train_dir(out, seed)));
    train(cfg, "drl_only", 1, train_dir(out, 1));
  } catch (const std::exception& e) {
    training_error = e.what();
  }
  auto needs_training = [&](const std::function<Verdict()>& f) {
    return [&, f] { return training_error.empty() ? f() : Verdict{false, "training threw: " + training_error}; };
  };
  report(9, "desk learning", needs_training([&] { return desk_learning(cfg, train_dir(out, 1), runs[0]); }));
  report(10, "convergence", needs_training([&] { return convergence(runs); }));
  report(11, "ablation", needs_training([&] { return ablation(cfg, train_dir(out, 1)); }));
  report(12, "determinism", [&] { return cli_determinism(out / "cli"); });
  return failed == 0 ? 0 : 1;
}
