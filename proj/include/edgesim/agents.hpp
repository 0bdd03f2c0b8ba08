#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "edgesim/cost_model.hpp"
#include "edgesim/dynamics.hpp"
#include "edgesim/env.hpp"
#include "edgesim/nn.hpp"

namespace edgesim {

// ---------------------------------------------------------------- replay

/// One joint step. Inputs are stored as float to keep large buffers small.
struct Transition {
  std::vector<float> state;
  std::vector<float> next_state;
  std::vector<std::vector<float>> obs;
  std::vector<std::vector<float>> next_obs;
  /// Two entries per agent, agent-index order.
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> done;
};

/// Ring buffer; the oldest transition is overwritten once full.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(Transition t);
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;
  /// Distinct indices (in at() numbering). Throws InsufficientBuffer.
  std::vector<std::size_t> sample_indices(std::size_t batch);

 private:
  std::vector<Transition> data_;
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------- MADDPG

struct MaddpgConfig {
  std::vector<int> hidden{64, 64, 64};
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double gamma = 0.99;
  double tau = 0.01;
  std::size_t buffer_capacity = 100000;
  std::size_t batch_size = 256;
  /// Transitions collected before updates start (at least one batch).
  std::size_t warmup = 0;
  /// Environment steps between train_step calls.
  int update_every = 1;
  /// Gradient steps per update.
  int updates_per_step = 1;
  double epsilon = 0.1;
  /// Weight of the squared pre-sigmoid actor outputs in the actor loss;
  /// keeps the sigmoids out of saturation.
  double actor_reg = 1e-3;
  /// Multiplies rewards before they enter the buffer.
  double reward_scale = 1.0;
  /// Every agent learns from the summed reward of the step and bootstraps
  /// until the episode ends, instead of its own reward and done flag.
  bool team_reward = true;
};

struct MaddpgAgent {
  Mlp actor, target_actor, critic, target_critic;
  AdamState actor_opt, critic_opt;
  double epsilon = 0.1;
};

/// Critic input: global state, then every agent's action pair in index order.
MaddpgAgent make_agent(std::size_t obs_dim, std::size_t state_dim, std::size_t n_agents,
                       const MaddpgConfig& cfg, std::mt19937_64& rng);

Action select_action(const MaddpgAgent& agent, std::span<const double> observation, bool explore,
                     std::mt19937_64& rng);

struct AgentLoss {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

/// One update of every agent from a shared minibatch. Throws InsufficientBuffer.
std::vector<AgentLoss> train_step(std::vector<MaddpgAgent>& agents, ReplayBuffer& buffer,
                                  std::size_t batch, double gamma, double tau, double actor_reg = 0.0);

/// Critic targets for stored transitions `idx` as seen by agent m.
Eigen::VectorXd critic_targets(const std::vector<MaddpgAgent>& agents, const ReplayBuffer& buffer,
                               std::span<const std::size_t> idx, std::size_t m, double gamma);

struct Maddpg {
  MaddpgConfig cfg;
  std::vector<MaddpgAgent> agents;
  ReplayBuffer buffer;
  std::size_t obs_dim = 0;
  std::size_t state_dim = 0;
  std::uint64_t env_steps = 0;

  Maddpg(std::size_t obs_dim, std::size_t state_dim, std::size_t n_agents, MaddpgConfig cfg,
         std::uint64_t seed);
};

enum class EpisodeMode { Train, Eval };

struct EpisodeResult {
  /// Sum over steps of the agents' rewards (negative cost and penalties).
  double reward = 0.0;
  double penalty = 0.0;
  OffloadDecision decision;
  CostBreakdown cost;
  double cross_server_mj = 0.0;
  /// Mean critic loss over the updates run in this episode (0 if none).
  double critic_loss_mean = 0.0;
  std::size_t updates = 0;
};

EpisodeResult run_episode(EnvState env, Maddpg& team, EpisodeMode mode, std::mt19937_64& rng);

void save_team(const Maddpg& team, const std::filesystem::path& dir);
/// Restores actors and critics saved by save_team. Throws MissingCheckpoint.
void load_team(Maddpg& team, const std::filesystem::path& dir);

// ---------------------------------------------------------------- worlds

/// Where training episodes come from: a base layout perturbed per episode.
struct TrainingWorld {
  GraphLayout base;
  Scenario scenario;
  ChangeSpec change;
  bool dynamic = true;
  /// HiCut partition and spread penalty; off gives one subgraph, no penalty.
  bool use_hicut = true;
  EnvOptions env;
};

/// Layout perturbed from the base, capacities re-drawn, partitioned, reset.
EnvState make_episode(const TrainingWorld& world, std::uint64_t seed);
/// Partition and reset for a fixed layout and scenario.
EnvState make_env(const GraphLayout& layout, const Scenario& scenario, bool use_hicut,
                  EnvOptions options = {});

/// The same stack without subgraph constraints: one subgraph, no penalty.
TrainingWorld drl_only_variant(TrainingWorld world);

struct EpisodeLog {
  std::size_t episode = 0;
  double global_reward = 0.0;
  double critic_loss_mean = 0.0;
  double epsilon = 0.0;
};

using EpisodeCallback = std::function<void(const EpisodeLog&)>;

std::vector<EpisodeLog> train_maddpg(Maddpg& team, const TrainingWorld& world, std::size_t episodes,
                                     std::uint64_t seed, const EpisodeCallback& on_episode = {});

/// Deterministic decision from the actors.
OffloadDecision maddpg_offload(Maddpg& team, const EnvState& env);

// ---------------------------------------------------------------- baselines

/// Nearest server (Euclidean, ties to the lower index) that still has room.
OffloadDecision greedy_offload(const GraphLayout& layout, const Scenario& scenario);
/// Uniform among servers with remaining capacity.
OffloadDecision random_offload(const GraphLayout& layout, const Scenario& scenario,
                               std::mt19937_64& rng);

// ---------------------------------------------------------------- PTOM

struct PtomConfig {
  std::vector<int> hidden{64, 64, 64};
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  double gamma = 0.99;
  double clip = 0.2;
  int epochs = 4;
  std::size_t episodes_per_update = 4;
  std::size_t minibatch = 64;
  double reward_scale = 1.0;
};

struct Ptom {
  PtomConfig cfg;
  Mlp policy;
  Mlp value;
  AdamState policy_opt, value_opt;
  std::size_t state_dim = 0;
  std::size_t n_servers = 0;
  std::size_t trained_episodes = 0;
  std::mt19937_64 rng;

  Ptom(std::size_t state_dim, std::size_t n_servers, PtomConfig cfg, std::uint64_t seed);
};

/// Masked softmax over servers with room.
std::vector<double> ptom_probs(const Ptom& agent, const EnvState& env);

struct PtomSample {
  std::vector<double> state;
  std::vector<std::uint8_t> mask;
  std::size_t action = 0;
  double logp = 0.0;
  double ret = 0.0;
};

struct PtomUpdate {
  double max_ratio_dev = 0.0;
  int reverted = 0;
  int steps = 0;
};

/// Clipped-surrogate update on a rollout. A step that would push any
/// sampled ratio outside [1-clip, 1+clip] is undone and ends the update.
PtomUpdate ptom_update(Ptom& agent, const std::vector<PtomSample>& batch);

/// Runs PTOM's own world (no partition constraints) for `episodes`.
std::vector<EpisodeLog> ptom_train(Ptom& agent, const TrainingWorld& world, std::size_t episodes,
                                   std::uint64_t seed, const EpisodeCallback& on_episode = {});

/// Per-user argmax. Throws InsufficientEpisodes before any training.
OffloadDecision ptom_offload(const Ptom& agent, const EnvState& env);

void save_ptom(const Ptom& agent, const std::filesystem::path& dir);
/// Restores the policy and value nets; counts as trained. Throws MissingCheckpoint.
void load_ptom(Ptom& agent, const std::filesystem::path& dir);

}  // namespace edgesim
