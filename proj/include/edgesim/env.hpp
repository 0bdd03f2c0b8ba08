#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "edgesim/cost_model.hpp"
#include "edgesim/graph_core.hpp"
#include "edgesim/partition.hpp"

namespace edgesim {

struct EnvOptions {
  /// Weight of the spread penalty; negative picks 0.5 x mean upload energy.
  double zeta = -1.0;
  /// Turn the spread penalty off entirely (the HiCut-less variant).
  bool use_penalty = true;
};

/// Everything fixed for one episode, shared between successive states.
struct EnvContext {
  GraphLayout layout;
  Partition partition;
  Scenario scenario;
  double zeta = 0.0;
  bool use_penalty = true;
  /// Offloading order: active users, ascending.
  std::vector<Vertex> order;
  /// slots x servers, precomputed upload cost per link.
  std::vector<LinkCost> upload;
  /// servers x servers: 1/R_kl + 1/R_lk in s/Mb (zero on the diagonal).
  std::vector<double> inv_rate_pair;
  /// Aggregation energy per neighbour (mJ); update energy paid once.
  double agg_per_neighbor_mj = 0.0;
  double update_mj = 0.0;
  std::size_t obs_dim = 0;
  std::size_t state_dim = 0;
};

struct EnvState {
  std::shared_ptr<const EnvContext> ctx;
  std::size_t cursor = 0;
  OffloadDecision decision;
  std::vector<int> remaining;
  /// subgraphs x servers: users of subgraph c placed on server m.
  std::vector<int> sub_on_server;
  std::vector<int> sub_placed;

  std::size_t n_agents() const noexcept { return remaining.size(); }
  bool finished() const noexcept { return cursor >= ctx->order.size(); }
  Vertex current_user() const { return ctx->order.at(cursor); }
};

using Action = std::array<double, 2>;
using JointAction = std::vector<Action>;

EnvState reset(GraphLayout layout, Partition partition, Scenario scenario, EnvOptions options = {});

/// Per-agent observation (fixed length for a given scenario).
std::vector<double> observe(const EnvState& state, std::size_t m);
/// Centralised state used by the critics.
std::vector<double> global_state(const EnvState& state);

enum class ResolvePath { UniqueYes, TiedYes, BestA1, Fallback };

struct Resolution {
  std::size_t server = 0;
  ResolvePath path = ResolvePath::UniqueYes;
  /// Agents that said yes (a1 >= a2), capacity or not.
  int yes_votes = 0;
};

Resolution resolve_decision(const EnvState& state, const JointAction& joint);

/// zeta * (servers hosting the user's subgraph) / (its users placed so far),
/// evaluated as if `user` were already on `server`.
double subgraph_penalty(const EnvState& state, Vertex user, std::size_t server);

/// Cost increase from placing `user` on `server` next.
double marginal_cost(const EnvState& state, Vertex user, std::size_t server);

struct StepOutcome {
  std::vector<double> rewards;
  double global_reward = 0.0;
  EnvState next;
  std::vector<std::uint8_t> done;
  bool all_done = false;
  std::size_t server = 0;
  double cost = 0.0;
  double penalty = 0.0;
};

StepOutcome step(const EnvState& state, const JointAction& joint);
/// Same transition with the server chosen directly.
StepOutcome step_to(const EnvState& state, std::size_t server);

}  // namespace edgesim
