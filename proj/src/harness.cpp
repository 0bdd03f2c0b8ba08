#include "edgesim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <random>

#include "edgesim/data_io.hpp"
#include "edgesim/dynamics.hpp"
#include "edgesim/error.hpp"
#include "edgesim/partition.hpp"

namespace edgesim {

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "cannot format number");
  return std::string(buf, ptr);
}

std::filesystem::path checkpoint_root(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  return cfg.checkpoint_dir.empty() ? out_dir / "checkpoints" : cfg.checkpoint_dir;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for one labelled stream; every part feeds the hash in order.
template <typename... Parts>
std::uint64_t derive(std::uint64_t base, Parts... parts) {
  std::uint64_t h = splitmix(base);
  ((h = splitmix(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

std::ofstream open_csv(const std::filesystem::path& out_dir, const std::string& name, const char* header) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / name, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (out_dir / name).string());
  out << header << '\n';
  return out;
}

class GraphCache {
 public:
  explicit GraphCache(std::filesystem::path dir) : dir_(std::move(dir)) {}
  const CitationGraph& get(const std::string& name) {
    auto it = graphs_.find(name);
    if (it == graphs_.end()) {
      const auto path = dir_ / (name + ".graph");
      if (!std::filesystem::exists(path)) throw Error(ErrorCode::ConfigError, "datasets: no file " + path.string());
      it = graphs_.emplace(name, load_citation_graph(path)).first;
    }
    return it->second;
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, CitationGraph> graphs_;
};

GraphLayout sample_layout(const ExperimentConfig& cfg, const CitationGraph& g, std::size_t users,
                          std::size_t assoc, std::uint64_t seed) {
  SampleOptions opt;
  opt.fill_links = cfg.fill_links;
  opt.capacity = cfg.slot_count();
  opt.plane = cfg.scenario.plane;
  return sample_scenario(g, users, assoc, seed, opt);
}

Scenario base_scenario(const ExperimentConfig& cfg) {
  return build_scenario(cfg.scenario, cfg.users, cfg.slot_count(), cfg.scenario_seed);
}

EnvOptions env_options(const ExperimentConfig& cfg) {
  EnvOptions o;
  o.zeta = cfg.zeta;
  return o;
}

// Learned policies, loaded on first use once the observation sizes are known.
class Policies {
 public:
  Policies(const ExperimentConfig& cfg, std::filesystem::path root) : cfg_(cfg), root_(std::move(root)) {}

  Maddpg& team(const std::string& method, const EnvState& env) {
    auto& slot = teams_[method];
    if (!slot) {
      slot = std::make_unique<Maddpg>(env.ctx->obs_dim, env.ctx->state_dim, env.n_agents(), cfg_.maddpg, 0);
      load_team(*slot, root_ / method);
    }
    if (slot->obs_dim != env.ctx->obs_dim || slot->state_dim != env.ctx->state_dim) {
      throw Error(ErrorCode::ArchMismatch, method + ": layout slots differ from the trained team");
    }
    return *slot;
  }

  Ptom& ptom(const EnvState& env) {
    if (!ptom_) {
      ptom_ = std::make_unique<Ptom>(env.ctx->state_dim, env.n_agents(), cfg_.ptom, 0);
      load_ptom(*ptom_, root_ / "ptom");
    }
    return *ptom_;
  }

 private:
  const ExperimentConfig& cfg_;
  std::filesystem::path root_;
  std::map<std::string, std::unique_ptr<Maddpg>> teams_;
  std::unique_ptr<Ptom> ptom_;
};

struct Outcome {
  CostBreakdown cost;
  double cross_mj = 0.0;
};

Outcome evaluate(const std::string& method, const GraphLayout& layout, const Scenario& scenario,
                 std::uint64_t seed, const ExperimentConfig& cfg, Policies& policies) {
  OffloadDecision d;
  if (method == "gm") {
    d = greedy_offload(layout, scenario);
  } else if (method == "rm") {
    std::mt19937_64 rng(derive(seed, fnv1a("rm")));
    d = random_offload(layout, scenario, rng);
  } else if (method == "drlgo" || method == "drl_only") {
    const EnvState env = make_env(layout, scenario, method == "drlgo", env_options(cfg));
    d = maddpg_offload(policies.team(method, env), env);
  } else if (method == "ptom") {
    const EnvState env = make_env(layout, scenario, false, env_options(cfg));
    d = ptom_offload(policies.ptom(env), env);
  } else {
    throw Error(ErrorCode::ConfigError, "methods: unknown method '" + method + "'");
  }
  check_decision(scenario, layout, d);
  return {system_cost(scenario, layout, d), cross_server_cost(scenario, layout, d)};
}

// Evaluates one layout, averaging over `position_steps` position redraws
// when asked.
Outcome evaluate_positions(const std::string& method, const GraphLayout& layout, const Scenario& scenario,
                           std::uint64_t seed, const ExperimentConfig& cfg, Policies& policies) {
  if (cfg.position_steps == 0) return evaluate(method, layout, scenario, seed, cfg, policies);
  Outcome sum;
  GraphLayout moving = layout;
  for (std::size_t t = 0; t < cfg.position_steps; ++t) {
    moving = apply_event(std::move(moving), make_move_event(moving, cfg.scenario.plane, derive(seed, t, 0x6d6f7665)));
    const Outcome o = evaluate(method, moving, scenario, derive(seed, t), cfg, policies);
    sum.cost.T_all += o.cost.T_all;
    sum.cost.I_all += o.cost.I_all;
    sum.cost.C += o.cost.C;
    sum.cross_mj += o.cross_mj;
  }
  const auto n = static_cast<double>(cfg.position_steps);
  sum.cost.T_all /= n;
  sum.cost.I_all /= n;
  sum.cost.C /= n;
  sum.cross_mj /= n;
  return sum;
}

// Identical for every method, so methods are compared on the same layouts.
struct EvalCase {
  GraphLayout layout;
  Scenario scenario;
};

EvalCase eval_case(const ExperimentConfig& cfg, const CitationGraph& g, const std::string& dataset,
                   const Scenario& base, std::size_t users, std::size_t assoc, std::uint64_t seed) {
  EvalCase c{sample_layout(cfg, g, users, assoc, derive(cfg.layout_seed, fnv1a(dataset), users, assoc, seed)), base};
  reassign_capacities(c.scenario, users, derive(cfg.scenario_seed, seed, 0x636170));
  return c;
}

void write_sweep_row(std::ostream& out, const SweepRow& r, const std::string& seed) {
  out << r.method << ',' << r.dataset << ',' << r.n_users << ',' << r.n_assoc << ',' << seed << ','
      << format_number(r.t_all_s) << ',' << format_number(r.i_all_mj) << ',' << format_number(r.cost) << ','
      << format_number(r.cross_server_mj) << '\n';
}

template <typename Row>
double mean_of(const std::vector<Row>& rows, double Row::*field) {
  double s = 0.0;
  for (const Row& r : rows) s += r.*field;
  return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

}  // namespace

TrainingWorld make_world(const ExperimentConfig& cfg, bool drl_only) {
  GraphCache cache(cfg.data_dir);
  const CitationGraph& g = cache.get(cfg.train_dataset);
  TrainingWorld w;
  w.base = sample_layout(cfg, g, cfg.users, cfg.assoc, cfg.layout_seed);
  w.scenario = base_scenario(cfg);
  w.change.rate = cfg.change_rate;
  w.change.plane = cfg.scenario.plane;
  w.change.new_user_task_kb = task_size_from_dim(g.feature_dim);
  w.dynamic = cfg.change_rate > 0.0;
  w.env = env_options(cfg);
  return drl_only ? drl_only_variant(std::move(w)) : w;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  validate_config(cfg);
  GraphCache cache(cfg.data_dir);
  Policies policies(cfg, checkpoint_root(cfg, out_dir));
  std::ofstream out = open_csv(out_dir, "sweep.csv", "method,dataset,n_users,n_assoc,seed,T_all_s,I_all_mJ,cost,cross_server_mJ");
  std::vector<SweepRow> all;
  for (const std::string& dataset : cfg.datasets) {
    const CitationGraph& g = cache.get(dataset);
    for (GnnModel model : cfg.gnn_models) {
      Scenario base = base_scenario(cfg);
      base.gnn.model = model;
      const std::string label = cfg.gnn_models.size() > 1 ? dataset + "+" + to_string(model) : dataset;
      for (std::size_t p = 0; p < cfg.sweep_users.size(); ++p) {
        const std::size_t users = cfg.sweep_users[p], assoc = cfg.sweep_assoc[p];
        std::vector<EvalCase> cases;
        for (std::uint64_t seed : cfg.seeds) cases.push_back(eval_case(cfg, g, dataset, base, users, assoc, seed));
        for (const std::string& method : cfg.methods) {
          std::vector<SweepRow> rows;
          for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
            const std::uint64_t seed = cfg.seeds[i];
            const Outcome o = evaluate_positions(method, cases[i].layout, cases[i].scenario, seed, cfg, policies);
            SweepRow r{method, label, users, assoc, seed, o.cost.T_all, o.cost.I_all, o.cost.C, o.cross_mj};
            write_sweep_row(out, r, std::to_string(seed));
            rows.push_back(r);
          }
          SweepRow mean{method, label, users, assoc, 0, mean_of(rows, &SweepRow::t_all_s),
                        mean_of(rows, &SweepRow::i_all_mj), mean_of(rows, &SweepRow::cost),
                        mean_of(rows, &SweepRow::cross_server_mj)};
          write_sweep_row(out, mean, "mean");
          all.insert(all.end(), rows.begin(), rows.end());
        }
      }
    }
  }
  return all;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<BenchRow> run_partition_bench(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  validate_config(cfg);
  std::ofstream out = open_csv(out_dir, "bench.csv", "algo,n_vertices,n_edges,runtime_ms,cut_edges");
  std::ofstream notes(out_dir / "bench_notes.txt", std::ios::binary);
  std::vector<BenchRow> rows;
  for (int pass = 0; pass < 2; ++pass) {
    const bool dense = pass == 1;
    for (const auto& [n, requested] : dense ? cfg.bench_dense : cfg.bench_sparse) {
      const std::uint64_t edges = std::min(requested, max_simple_edges(n));
      if (edges != requested) {
        notes << (dense ? "dense" : "sparse") << ' ' << n << ": " << requested << " edges requested, clamped to "
              << edges << '\n';
      }
      const SyntheticGraph g =
          gen_synthetic(n, edges, cfg.bench_weights, derive(cfg.bench_seed, n, requested), cfg.scenario.plane);
      std::vector<double> t_hicut, t_mincut;
      Partition p_hicut, p_mincut;
      for (int r = 0; r < cfg.bench_repeats; ++r) {
        t_hicut.push_back(time_ms([&] { p_hicut = hicut(g.layout).partition; }));
      }
      const std::uint64_t mseed = derive(cfg.bench_seed, n, requested, 1);
      for (int r = 0; r < cfg.bench_repeats; ++r) {
        t_mincut.push_back(time_ms([&] { p_mincut = mincut_partition(g.layout, g.weights, cfg.bench_servers, mseed).partition; }));
      }
      validate_partition(g.layout, p_hicut);
      validate_partition(g.layout, p_mincut);
      for (int a = 0; a < 2; ++a) {
        BenchRow r;
        r.algo = a == 0 ? "hicut" : "mincut";
        r.n_vertices = n;
        r.n_edges = edges;
        r.runtime_ms = median(a == 0 ? t_hicut : t_mincut);
        r.cut_edges = cut_edge_count(g.layout, a == 0 ? p_hicut : p_mincut);
        r.requested_edges = requested;
        r.dense = dense;
        out << r.algo << ',' << r.n_vertices << ',' << r.n_edges << ',' << format_number(r.runtime_ms) << ','
            << r.cut_edges << '\n';
        rows.push_back(r);
      }
      out.flush();
    }
  }
  return rows;
}

std::vector<EpisodeLog> run_training(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  validate_config(cfg);
  const std::string& method = cfg.method;
  if (method != "drlgo" && method != "drl_only" && method != "ptom") {
    throw Error(ErrorCode::ConfigError, "method: '" + method + "' is not trainable");
  }
  const TrainingWorld world = make_world(cfg, method != "drlgo");
  const EnvState probe = make_episode(world, 0);
  std::ofstream out = open_csv(out_dir, "train_" + method + ".csv", "episode,global_reward,critic_loss_mean,epsilon");
  auto log_row = [&out](const EpisodeLog& l) {
    out << l.episode << ',' << format_number(l.global_reward) << ',' << format_number(l.critic_loss_mean) << ','
        << format_number(l.epsilon) << '\n';
  };
  const std::filesystem::path dir = checkpoint_root(cfg, out_dir) / method;
  const std::uint64_t net_seed = derive(cfg.train_seed, fnv1a(method));
  const std::uint64_t run_seed = derive(cfg.train_seed, fnv1a(method), 1);
  std::vector<EpisodeLog> logs;
  if (method == "ptom") {
    Ptom agent(probe.ctx->state_dim, probe.n_agents(), cfg.ptom, net_seed);
    logs = ptom_train(agent, world, cfg.episodes, run_seed, log_row);
    save_ptom(agent, dir);
  } else {
    Maddpg team(probe.ctx->obs_dim, probe.ctx->state_dim, probe.n_agents(), cfg.maddpg, net_seed);
    logs = train_maddpg(team, world, cfg.episodes, run_seed, log_row);
    save_team(team, dir);
  }
  return logs;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  validate_config(cfg);
  GraphCache cache(cfg.data_dir);
  Policies policies(cfg, checkpoint_root(cfg, out_dir));
  std::ofstream out = open_csv(out_dir, "ablate.csv", "arm,dataset,seed,cost,cross_server_mJ");
  const Scenario base = base_scenario(cfg);
  std::vector<AblationRow> all;
  for (const std::string& dataset : cfg.datasets) {
    const CitationGraph& g = cache.get(dataset);
    std::vector<EvalCase> cases;
    for (std::uint64_t seed : cfg.seeds) cases.push_back(eval_case(cfg, g, dataset, base, cfg.users, cfg.assoc, seed));
    for (const std::string arm : {"drlgo", "drl_only"}) {
      std::vector<AblationRow> rows;
      for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        const Outcome o = evaluate_positions(arm, cases[i].layout, cases[i].scenario, cfg.seeds[i], cfg, policies);
        AblationRow r{arm, dataset, cfg.seeds[i], o.cost.C, o.cross_mj};
        out << r.arm << ',' << r.dataset << ',' << r.seed << ',' << format_number(r.cost) << ','
            << format_number(r.cross_server_mj) << '\n';
        rows.push_back(r);
      }
      out << arm << ',' << dataset << ",mean," << format_number(mean_of(rows, &AblationRow::cost)) << ','
          << format_number(mean_of(rows, &AblationRow::cross_server_mj)) << '\n';
      all.insert(all.end(), rows.begin(), rows.end());
    }
  }
  return all;
}

}  // namespace edgesim
