// sim sweep|bench|train|ablate --config <file> --out <dir> [--seed k]
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "edgesim/error.hpp"
#include "edgesim/harness.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (key = value lines)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--seed", c.seed, "train: training seed; sweep/ablate: evaluate this seed only; bench: graph seed");
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training frees and reallocates the same minibatch-sized blocks on every
  // update; without padding glibc hands the heap top back to the kernel each
  // time and system time ends up rivalling the arithmetic.
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
  CLI::App app{"Edge offloading simulator"};
  app.require_subcommand(1);
  Common c;
  auto* sweep = app.add_subcommand("sweep", "evaluate methods over the sweep points and seeds");
  auto* bench = app.add_subcommand("bench", "HiCut vs pairwise min-cut on synthetic graphs");
  auto* train = app.add_subcommand("train", "train the configured method and save checkpoints");
  auto* ablate = app.add_subcommand("ablate", "drlgo vs drl_only on identical layouts");
  for (auto* cmd : {sweep, bench, train, ablate}) add_common(cmd, c);
  CLI11_PARSE(app, argc, argv);

  try {
    edgesim::ExperimentConfig cfg = edgesim::load_config(c.config);
    if (c.seed) {
      cfg.train_seed = *c.seed;
      cfg.bench_seed = *c.seed;
      cfg.seeds = {*c.seed};
    }
    if (sweep->parsed()) {
      const auto rows = edgesim::run_sweep(cfg, c.out);
      std::cout << rows.size() << " sweep rows written to " << c.out << "/sweep.csv\n";
    } else if (bench->parsed()) {
      const auto rows = edgesim::run_partition_bench(cfg, c.out);
      for (const auto& r : rows) {
        std::cout << r.algo << ' ' << r.n_vertices << ' ' << r.n_edges << ' ' << r.runtime_ms << " ms\n";
      }
    } else if (train->parsed()) {
      const auto logs = edgesim::run_training(cfg, c.out);
      std::cout << logs.size() << " episodes of " << cfg.method << "; checkpoints in "
                << edgesim::checkpoint_root(cfg, c.out).string() << '\n';
    } else if (ablate->parsed()) {
      const auto rows = edgesim::run_ablation(cfg, c.out);
      std::cout << rows.size() << " ablation rows written to " << c.out << "/ablate.csv\n";
    }
  } catch (const edgesim::Error& e) {
    std::cerr << "sim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
