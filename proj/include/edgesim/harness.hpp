#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgesim/agents.hpp"
#include "edgesim/scenario.hpp"

namespace edgesim {

/// Everything an experiment needs. Defaults are the desk-scale setup; the
/// `key = value` names accepted by parse_config are listed in the README.
struct ExperimentConfig {
  ScenarioSpec scenario;
  std::uint64_t scenario_seed = 1;

  std::filesystem::path data_dir = "data";
  std::vector<std::string> datasets{"pubmed"};
  std::string train_dataset = "pubmed";
  std::size_t users = 30;
  std::size_t assoc = 60;
  /// User slots; 0 sizes them for the largest user count after growth.
  std::size_t slots = 0;
  bool fill_links = true;
  std::uint64_t layout_seed = 1;
  double change_rate = 0.2;
  double zeta = -1.0;

  std::vector<std::string> methods{"drlgo", "ptom", "gm", "rm"};
  /// What `train` trains.
  std::string method = "drlgo";
  std::vector<std::size_t> sweep_users{30};
  std::vector<std::size_t> sweep_assoc{60};
  /// Position redraws per evaluation run; rows report the mean over them.
  std::size_t position_steps = 0;
  std::vector<GnnModel> gnn_models{GnnModel::GCN};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  std::size_t episodes = 500;
  std::uint64_t train_seed = 1;
  MaddpgConfig maddpg;
  PtomConfig ptom;
  /// Empty: <out>/checkpoints.
  std::filesystem::path checkpoint_dir;

  std::vector<std::pair<std::size_t, std::uint64_t>> bench_sparse;
  std::vector<std::pair<std::size_t, std::uint64_t>> bench_dense;
  int bench_servers = 25;
  int bench_repeats = 5;
  std::pair<std::int64_t, std::int64_t> bench_weights{1, 100};
  std::uint64_t bench_seed = 1;

  std::size_t slot_count() const;
};

/// Parses `key = value` lines ('#' starts a comment). Relative paths are
/// taken relative to `base_dir`. Throws ConfigError naming the key.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Field-level checks (positive sizes, nonempty seeds, known methods...).
void validate_config(const ExperimentConfig& cfg);

/// Shortest round-trip text for a double; used for every CSV number.
std::string format_number(double x);

struct SweepRow {
  std::string method;
  std::string dataset;
  std::size_t n_users = 0;
  std::size_t n_assoc = 0;
  std::uint64_t seed = 0;
  double t_all_s = 0.0;
  double i_all_mj = 0.0;
  double cost = 0.0;
  double cross_server_mj = 0.0;
};

struct BenchRow {
  std::string algo;
  std::size_t n_vertices = 0;
  std::uint64_t n_edges = 0;
  double runtime_ms = 0.0;
  std::size_t cut_edges = 0;
  /// Requested edges before clamping to the simple-graph maximum.
  std::uint64_t requested_edges = 0;
  bool dense = false;
};

struct AblationRow {
  std::string arm;
  std::string dataset;
  std::uint64_t seed = 0;
  double cost = 0.0;
  double cross_server_mj = 0.0;
};

/// Per-(method, dataset, point, seed) evaluation. Learned methods load their
/// checkpoints (MissingCheckpoint if absent). Writes <out>/sweep.csv with a
/// mean row (seed column "mean") after each point.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// HiCut vs pairwise min-cut on synthetic ladders; writes <out>/bench.csv
/// and <out>/bench_notes.txt (edge clamps).
std::vector<BenchRow> run_partition_bench(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Trains cfg.method; writes <out>/train_<method>.csv and checkpoints.
std::vector<EpisodeLog> run_training(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// drlgo vs drl_only on identical layouts; writes <out>/ablate.csv.
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// The training world for a config (sampled base layout and scenario).
TrainingWorld make_world(const ExperimentConfig& cfg, bool drl_only = false);

std::filesystem::path checkpoint_root(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace edgesim
