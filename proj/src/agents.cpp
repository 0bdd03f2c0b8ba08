#include "edgesim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "edgesim/error.hpp"
#include "edgesim/partition.hpp"
#include "edgesim/scenario.hpp"

namespace edgesim {

// ---------------------------------------------------------------- replay

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw Error(ErrorCode::ConfigError, "replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw Error(ErrorCode::IndexOutOfRange, "replay index " + std::to_string(i));
  return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch) {
  const std::size_t n = data_.size();
  if (batch == 0 || n < batch) {
    throw Error(ErrorCode::InsufficientBuffer,
                "buffer holds " + std::to_string(n) + ", batch needs " + std::to_string(batch));
  }
  // Floyd's algorithm: distinct picks, no full shuffle.
  std::vector<std::size_t> out;
  out.reserve(batch);
  for (std::size_t j = n - batch; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng_);
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(j);
    }
  }
  return out;
}

// ---------------------------------------------------------------- MADDPG

namespace {

std::vector<int> layer_dims(std::size_t in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{static_cast<int>(in)};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

template <typename T>
std::vector<float> to_float(const std::vector<T>& v) {
  return std::vector<float>(v.begin(), v.end());
}

// Minibatch laid out as columns.
struct Batch {
  Eigen::MatrixXd state, next_state, actions;
  std::vector<Eigen::MatrixXd> obs, next_obs;
  Eigen::MatrixXd rewards;  // agents x B
  Eigen::MatrixXd done;     // agents x B
};

Batch gather(const ReplayBuffer& buffer, std::span<const std::size_t> idx, std::size_t n_agents) {
  const auto B = static_cast<Eigen::Index>(idx.size());
  const Transition& first = buffer.at(idx[0]);
  Batch b;
  b.state.resize(static_cast<Eigen::Index>(first.state.size()), B);
  b.next_state.resize(b.state.rows(), B);
  b.actions.resize(static_cast<Eigen::Index>(2 * n_agents), B);
  b.rewards.resize(static_cast<Eigen::Index>(n_agents), B);
  b.done.resize(static_cast<Eigen::Index>(n_agents), B);
  for (std::size_t m = 0; m < n_agents; ++m) {
    b.obs.emplace_back(static_cast<Eigen::Index>(first.obs[m].size()), B);
    b.next_obs.emplace_back(static_cast<Eigen::Index>(first.obs[m].size()), B);
  }
  for (Eigen::Index j = 0; j < B; ++j) {
    const Transition& t = buffer.at(idx[static_cast<std::size_t>(j)]);
    if (t.obs.size() != n_agents || t.state.size() != static_cast<std::size_t>(b.state.rows())) {
      throw Error(ErrorCode::ShapeMismatch, "transition does not match the team");
    }
    b.state.col(j) = Eigen::Map<const Eigen::VectorXf>(t.state.data(), b.state.rows()).cast<double>();
    b.next_state.col(j) =
        Eigen::Map<const Eigen::VectorXf>(t.next_state.data(), b.state.rows()).cast<double>();
    for (std::size_t m = 0; m < n_agents; ++m) {
      const auto rows = b.obs[m].rows();
      b.obs[m].col(j) = Eigen::Map<const Eigen::VectorXf>(t.obs[m].data(), rows).cast<double>();
      b.next_obs[m].col(j) = Eigen::Map<const Eigen::VectorXf>(t.next_obs[m].data(), rows).cast<double>();
      b.actions(static_cast<Eigen::Index>(2 * m), j) = t.actions[2 * m];
      b.actions(static_cast<Eigen::Index>(2 * m + 1), j) = t.actions[2 * m + 1];
      b.rewards(static_cast<Eigen::Index>(m), j) = t.rewards[m];
      b.done(static_cast<Eigen::Index>(m), j) = t.done[m] ? 1.0 : 0.0;
    }
  }
  return b;
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Eigen::MatrixXd target_actions(const std::vector<MaddpgAgent>& agents, const Batch& b) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(2 * agents.size()), b.state.cols());
  for (std::size_t k = 0; k < agents.size(); ++k) {
    out.middleRows(static_cast<Eigen::Index>(2 * k), 2) = forward(agents[k].target_actor, b.next_obs[k]);
  }
  return out;
}

Eigen::VectorXd targets_for(const MaddpgAgent& agent, const Batch& b, const Eigen::MatrixXd& next_actions,
                            std::size_t m, double gamma) {
  const auto row = static_cast<Eigen::Index>(m);
  const Eigen::VectorXd reward = b.rewards.row(row).transpose();
  const Eigen::VectorXd live = (1.0 - b.done.row(row).array()).matrix().transpose();
  if (gamma == 0.0) return reward;
  const Eigen::VectorXd q_next = forward(agent.target_critic, stack(b.next_state, next_actions)).row(0).transpose();
  return reward + gamma * live.cwiseProduct(q_next);
}

}  // namespace

MaddpgAgent make_agent(std::size_t obs_dim, std::size_t state_dim, std::size_t n_agents,
                       const MaddpgConfig& cfg, std::mt19937_64& rng) {
  MaddpgAgent a;
  a.actor = Mlp::create(layer_dims(obs_dim, cfg.hidden, 2), Activation::Relu, Activation::Sigmoid, rng);
  a.critic = Mlp::create(layer_dims(state_dim + 2 * n_agents, cfg.hidden, 1), Activation::Relu,
                         Activation::Identity, rng);
  a.target_actor = a.actor;
  a.target_critic = a.critic;
  a.actor_opt = AdamState::for_net(a.actor, cfg.actor_lr);
  a.critic_opt = AdamState::for_net(a.critic, cfg.critic_lr);
  a.epsilon = cfg.epsilon;
  return a;
}

Action select_action(const MaddpgAgent& agent, std::span<const double> observation, bool explore,
                     std::mt19937_64& rng) {
  if (observation.size() != static_cast<std::size_t>(agent.actor.in_dim())) {
    throw Error(ErrorCode::ShapeMismatch, "observation has " + std::to_string(observation.size()) +
                                              " entries, actor expects " +
                                              std::to_string(agent.actor.in_dim()));
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (explore && agent.epsilon > 0.0 && u01(rng) < agent.epsilon) {
    const double a1 = u01(rng);
    return {a1, u01(rng)};
  }
  const Eigen::Map<const Eigen::VectorXd> x(observation.data(), static_cast<Eigen::Index>(observation.size()));
  const Eigen::VectorXd y = forward(agent.actor, Eigen::VectorXd(x));
  return {std::clamp(y[0], 0.0, 1.0), std::clamp(y[1], 0.0, 1.0)};
}

Eigen::VectorXd critic_targets(const std::vector<MaddpgAgent>& agents, const ReplayBuffer& buffer,
                               std::span<const std::size_t> idx, std::size_t m, double gamma) {
  if (m >= agents.size()) throw Error(ErrorCode::IndexOutOfRange, "agent " + std::to_string(m));
  const Batch b = gather(buffer, idx, agents.size());
  return targets_for(agents[m], b, target_actions(agents, b), m, gamma);
}

std::vector<AgentLoss> train_step(std::vector<MaddpgAgent>& agents, ReplayBuffer& buffer,
                                  std::size_t batch, double gamma, double tau, double actor_reg) {
  const auto idx = buffer.sample_indices(batch);
  const std::size_t M = agents.size();
  const Batch b = gather(buffer, idx, M);
  const auto B = static_cast<double>(idx.size());
  const Eigen::MatrixXd next_actions = target_actions(agents, b);
  const Eigen::MatrixXd sa = stack(b.state, b.actions);
  const auto sd = b.state.rows();

  std::vector<AgentLoss> out(M);
  for (std::size_t m = 0; m < M; ++m) {
    MaddpgAgent& ag = agents[m];
    const Eigen::VectorXd y = targets_for(ag, b, next_actions, m, gamma);

    MlpCache cache;
    const Eigen::MatrixXd q = forward(ag.critic, sa, &cache);
    const Eigen::RowVectorXd diff = q.row(0) - y.transpose();
    out[m].critic_loss = diff.squaredNorm() / B;
    MlpGrads cg = MlpGrads::zeros_like(ag.critic);
    backward(ag.critic, cache, (2.0 / B) * diff, cg);
    adam_step(ag.critic, cg, ag.critic_opt);

    MlpCache actor_cache;
    const Eigen::MatrixXd own = forward(ag.actor, b.obs[m], &actor_cache);
    Eigen::MatrixXd joint = sa;
    joint.middleRows(sd + static_cast<Eigen::Index>(2 * m), 2) = own;
    MlpCache qcache;
    const Eigen::MatrixXd qa = forward(ag.critic, joint, &qcache);
    out[m].actor_objective = qa.mean();
    MlpGrads unused = MlpGrads::zeros_like(ag.critic);
    const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, qa.cols(), -1.0 / B);
    const Eigen::MatrixXd dx = backward(ag.critic, qcache, dq, unused);
    MlpGrads ag_grads = MlpGrads::zeros_like(ag.actor);
    const Eigen::MatrixXd dreg = (2.0 * actor_reg / B) * actor_cache.pre.back();
    backward(ag.actor, actor_cache, dx.middleRows(sd + static_cast<Eigen::Index>(2 * m), 2), ag_grads,
             actor_reg > 0.0 ? &dreg : nullptr);
    adam_step(ag.actor, ag_grads, ag.actor_opt);
  }
  for (MaddpgAgent& ag : agents) {
    soft_update(ag.target_actor, ag.actor, tau);
    soft_update(ag.target_critic, ag.critic, tau);
  }
  return out;
}

Maddpg::Maddpg(std::size_t obs_dim_, std::size_t state_dim_, std::size_t n_agents, MaddpgConfig cfg_,
               std::uint64_t seed)
    : cfg(std::move(cfg_)), buffer(cfg.buffer_capacity, seed ^ 0x9e3779b97f4a7c15ULL),
      obs_dim(obs_dim_), state_dim(state_dim_) {
  if (cfg.update_every < 1) throw Error(ErrorCode::ConfigError, "update_every must be >= 1");
  std::mt19937_64 rng(seed);
  for (std::size_t m = 0; m < n_agents; ++m) agents.push_back(make_agent(obs_dim, state_dim, n_agents, cfg, rng));
}

namespace {

void finish_metrics(EpisodeResult& r, const EnvState& s) {
  const EnvContext& c = *s.ctx;
  check_decision(c.scenario, c.layout, s.decision);
  r.decision = s.decision;
  r.cost = system_cost(c.scenario, c.layout, s.decision);
  r.cross_server_mj = cross_server_cost(c.scenario, c.layout, s.decision);
}

}  // namespace

EpisodeResult run_episode(EnvState env, Maddpg& team, EpisodeMode mode, std::mt19937_64& rng) {
  const std::size_t M = team.agents.size();
  if (env.n_agents() != M) throw Error(ErrorCode::ShapeMismatch, "team size differs from server count");
  if (env.ctx->obs_dim != team.obs_dim || env.ctx->state_dim != team.state_dim) {
    throw Error(ErrorCode::ShapeMismatch, "environment dimensions differ from the team's networks");
  }
  const bool train = mode == EpisodeMode::Train;
  const std::size_t warm = std::max(team.cfg.batch_size, team.cfg.warmup);
  EpisodeResult r;
  double loss_sum = 0.0;

  std::vector<std::vector<double>> obs(M);
  for (std::size_t m = 0; m < M; ++m) obs[m] = observe(env, m);
  while (!env.finished()) {
    JointAction joint(M);
    for (std::size_t m = 0; m < M; ++m) joint[m] = select_action(team.agents[m], obs[m], train, rng);
    StepOutcome out = step(env, joint);
    for (double x : out.rewards) r.reward += x;
    r.penalty += out.penalty;

    std::vector<std::vector<double>> next_obs(M);
    for (std::size_t m = 0; m < M; ++m) next_obs[m] = observe(out.next, m);
    if (train) {
      Transition t;
      t.state = to_float(global_state(env));
      t.next_state = to_float(global_state(out.next));
      for (std::size_t m = 0; m < M; ++m) {
        t.obs.push_back(to_float(obs[m]));
        t.next_obs.push_back(to_float(next_obs[m]));
        t.actions.push_back(joint[m][0]);
        t.actions.push_back(joint[m][1]);
      }
      if (team.cfg.team_reward) {
        t.rewards.assign(M, out.global_reward * team.cfg.reward_scale);
        t.done.assign(M, out.all_done ? 1 : 0);
      } else {
        for (double x : out.rewards) t.rewards.push_back(x * team.cfg.reward_scale);
        t.done = out.done;
      }
      team.buffer.push(std::move(t));
      ++team.env_steps;
      if (team.buffer.size() >= warm && team.env_steps % static_cast<std::uint64_t>(team.cfg.update_every) == 0) {
        for (int u = 0; u < team.cfg.updates_per_step; ++u) {
          const auto losses = train_step(team.agents, team.buffer, team.cfg.batch_size, team.cfg.gamma,
                                          team.cfg.tau, team.cfg.actor_reg);
          double mean = 0.0;
          for (const AgentLoss& l : losses) mean += l.critic_loss;
          loss_sum += mean / static_cast<double>(M);
          ++r.updates;
        }
      }
    }
    obs = std::move(next_obs);
    env = std::move(out.next);
  }
  if (r.updates > 0) r.critic_loss_mean = loss_sum / static_cast<double>(r.updates);
  finish_metrics(r, env);
  return r;
}

namespace {

std::filesystem::path net_file(const std::filesystem::path& dir, std::size_t m, const char* what) {
  return dir / ("agent" + std::to_string(m) + "_" + what + ".bin");
}

Mlp load_matching(const std::filesystem::path& file, const Mlp& like) {
  Mlp net = load_mlp(file);
  if (!net.same_shape(like)) throw Error(ErrorCode::ArchMismatch, file.string() + " has a different architecture");
  return net;
}

}  // namespace

void save_team(const Maddpg& team, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t m = 0; m < team.agents.size(); ++m) {
    const MaddpgAgent& a = team.agents[m];
    save_mlp(a.actor, net_file(dir, m, "actor"));
    save_mlp(a.critic, net_file(dir, m, "critic"));
    save_mlp(a.target_actor, net_file(dir, m, "target_actor"));
    save_mlp(a.target_critic, net_file(dir, m, "target_critic"));
  }
}

void load_team(Maddpg& team, const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::MissingCheckpoint, "no checkpoint directory " + dir.string());
  }
  for (std::size_t m = 0; m < team.agents.size(); ++m) {
    MaddpgAgent& a = team.agents[m];
    a.actor = load_matching(net_file(dir, m, "actor"), a.actor);
    a.critic = load_matching(net_file(dir, m, "critic"), a.critic);
    a.target_actor = load_matching(net_file(dir, m, "target_actor"), a.target_actor);
    a.target_critic = load_matching(net_file(dir, m, "target_critic"), a.target_critic);
  }
}

// ---------------------------------------------------------------- worlds

EnvState make_env(const GraphLayout& layout, const Scenario& scenario, bool use_hicut, EnvOptions options) {
  Partition p = use_hicut ? hicut(layout).partition : single_subgraph_partition(layout);
  if (!use_hicut) options.use_penalty = false;
  return reset(layout, std::move(p), scenario, options);
}

EnvState make_episode(const TrainingWorld& world, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GraphLayout layout = world.base;
  const std::uint64_t change_seed = rng();
  if (world.dynamic) {
    const auto events = make_dynamic_change(world.base, world.change, change_seed);
    layout = apply_events(std::move(layout), events);
  }
  Scenario s = world.scenario;
  reassign_capacities(s, layout.active_count(), rng());
  return make_env(layout, s, world.use_hicut, world.env);
}

TrainingWorld drl_only_variant(TrainingWorld world) {
  world.use_hicut = false;
  world.env.use_penalty = false;
  return world;
}

std::vector<EpisodeLog> train_maddpg(Maddpg& team, const TrainingWorld& world, std::size_t episodes,
                                     std::uint64_t seed, const EpisodeCallback& on_episode) {
  std::mt19937_64 rng(seed);
  std::vector<EpisodeLog> logs;
  logs.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    const EnvState env = make_episode(world, rng());
    const EpisodeResult r = run_episode(env, team, EpisodeMode::Train, rng);
    EpisodeLog log{e, r.reward, r.critic_loss_mean, team.agents.empty() ? 0.0 : team.agents[0].epsilon};
    logs.push_back(log);
    if (on_episode) on_episode(log);
  }
  return logs;
}

OffloadDecision maddpg_offload(Maddpg& team, const EnvState& env) {
  std::mt19937_64 unused(0);
  return run_episode(env, team, EpisodeMode::Eval, unused).decision;
}

// ---------------------------------------------------------------- baselines

OffloadDecision greedy_offload(const GraphLayout& layout, const Scenario& scenario) {
  const std::size_t M = scenario.n_servers();
  OffloadDecision d = OffloadDecision::empty(layout.capacity(), M);
  std::vector<int> room(M);
  for (std::size_t k = 0; k < M; ++k) room[k] = scenario.servers[k].capacity;
  std::vector<std::size_t> by_distance(M);
  for (Vertex v : layout.active_vertices()) {
    std::iota(by_distance.begin(), by_distance.end(), std::size_t{0});
    std::stable_sort(by_distance.begin(), by_distance.end(), [&](std::size_t a, std::size_t b) {
      return distance(layout.position(v), scenario.servers[a].position) <
             distance(layout.position(v), scenario.servers[b].position);
    });
    const auto it = std::find_if(by_distance.begin(), by_distance.end(), [&](std::size_t k) { return room[k] > 0; });
    if (it == by_distance.end()) throw Error(ErrorCode::AllServersFull, "no room for user " + std::to_string(v));
    d.assign(v, *it);
    --room[*it];
  }
  return d;
}

OffloadDecision random_offload(const GraphLayout& layout, const Scenario& scenario, std::mt19937_64& rng) {
  const std::size_t M = scenario.n_servers();
  OffloadDecision d = OffloadDecision::empty(layout.capacity(), M);
  std::vector<int> room(M);
  for (std::size_t k = 0; k < M; ++k) room[k] = scenario.servers[k].capacity;
  std::vector<std::size_t> open;
  for (Vertex v : layout.active_vertices()) {
    open.clear();
    for (std::size_t k = 0; k < M; ++k) {
      if (room[k] > 0) open.push_back(k);
    }
    if (open.empty()) throw Error(ErrorCode::AllServersFull, "no room for user " + std::to_string(v));
    const std::size_t k = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
    d.assign(v, k);
    --room[k];
  }
  return d;
}

// ---------------------------------------------------------------- PTOM

Ptom::Ptom(std::size_t state_dim_, std::size_t n_servers_, PtomConfig cfg_, std::uint64_t seed)
    : cfg(std::move(cfg_)), state_dim(state_dim_), n_servers(n_servers_), rng(seed) {
  policy = Mlp::create(layer_dims(state_dim, cfg.hidden, static_cast<int>(n_servers)), Activation::Relu,
                       Activation::Identity, rng);
  // Small last layer: the untrained policy starts close to uniform.
  policy.W.back() *= 0.01;
  value = Mlp::create(layer_dims(state_dim, cfg.hidden, 1), Activation::Relu, Activation::Identity, rng);
  policy_opt = AdamState::for_net(policy, cfg.policy_lr);
  value_opt = AdamState::for_net(value, cfg.value_lr);
}

namespace {

std::vector<std::uint8_t> room_mask(const EnvState& env) {
  std::vector<std::uint8_t> mask(env.n_agents());
  for (std::size_t m = 0; m < mask.size(); ++m) mask[m] = env.remaining[m] > 0;
  return mask;
}

// Column-wise masked softmax.
Eigen::MatrixXd masked_softmax(const Eigen::MatrixXd& logits, const std::vector<std::vector<std::uint8_t>>& masks) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const auto& mask = masks[static_cast<std::size_t>(j)];
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < logits.rows(); ++k) {
      if (mask[static_cast<std::size_t>(k)]) top = std::max(top, logits(k, j));
    }
    double z = 0.0;
    for (Eigen::Index k = 0; k < logits.rows(); ++k) {
      if (mask[static_cast<std::size_t>(k)]) {
        p(k, j) = std::exp(logits(k, j) - top);
        z += p(k, j);
      }
    }
    p.col(j) /= z;
  }
  return p;
}

Eigen::VectorXd state_column(const EnvState& env, std::size_t expect) {
  const auto s = global_state(env);
  if (s.size() != expect) throw Error(ErrorCode::ShapeMismatch, "state size differs from the policy input");
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

Eigen::MatrixXd states_of(const std::vector<PtomSample>& batch, std::span<const std::size_t> idx) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(batch[0].state.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto& s = batch[idx[j]].state;
    x.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(s.data(), x.rows());
  }
  return x;
}

std::vector<std::vector<std::uint8_t>> masks_of(const std::vector<PtomSample>& batch, std::span<const std::size_t> idx) {
  std::vector<std::vector<std::uint8_t>> out;
  for (std::size_t i : idx) out.push_back(batch[i].mask);
  return out;
}

double max_ratio_deviation(const Ptom& agent, const std::vector<PtomSample>& batch,
                           std::span<const std::size_t> all) {
  const Eigen::MatrixXd p = masked_softmax(forward(agent.policy, states_of(batch, all)), masks_of(batch, all));
  double worst = 0.0;
  for (std::size_t j = 0; j < all.size(); ++j) {
    const PtomSample& s = batch[all[j]];
    const double ratio = std::exp(std::log(p(static_cast<Eigen::Index>(s.action), static_cast<Eigen::Index>(j))) - s.logp);
    worst = std::max(worst, std::abs(ratio - 1.0));
  }
  return worst;
}

}  // namespace

std::vector<double> ptom_probs(const Ptom& agent, const EnvState& env) {
  const Eigen::VectorXd logits = forward(agent.policy, state_column(env, agent.state_dim));
  const Eigen::MatrixXd p = masked_softmax(logits, {room_mask(env)});
  return std::vector<double>(p.data(), p.data() + p.size());
}

PtomUpdate ptom_update(Ptom& agent, const std::vector<PtomSample>& batch) {
  PtomUpdate out;
  if (batch.empty()) return out;
  const std::size_t n = batch.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});

  const Eigen::MatrixXd states = states_of(batch, all);
  const Eigen::VectorXd v = forward(agent.value, states).row(0).transpose();
  Eigen::VectorXd adv(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) adv[static_cast<Eigen::Index>(i)] = batch[i].ret - v[static_cast<Eigen::Index>(i)];
  const double mean = adv.mean();
  const double sd = std::sqrt((adv.array() - mean).square().mean());
  adv = (adv.array() - mean) / (sd + 1e-8);

  std::vector<std::size_t> order = all;
  bool stop = false;
  for (int epoch = 0; epoch < agent.cfg.epochs && !stop; ++epoch) {
    std::shuffle(order.begin(), order.end(), agent.rng);
    for (std::size_t from = 0; from < n && !stop; from += agent.cfg.minibatch) {
      const std::span<const std::size_t> idx(order.data() + from, std::min(agent.cfg.minibatch, n - from));
      const auto B = static_cast<double>(idx.size());
      const Eigen::MatrixXd x = states_of(batch, idx);

      MlpCache vcache;
      const Eigen::MatrixXd vp = forward(agent.value, x, &vcache);
      Eigen::MatrixXd dv(1, x.cols());
      for (std::size_t j = 0; j < idx.size(); ++j) {
        dv(0, static_cast<Eigen::Index>(j)) = 2.0 * (vp(0, static_cast<Eigen::Index>(j)) - batch[idx[j]].ret) / B;
      }
      MlpGrads vg = MlpGrads::zeros_like(agent.value);
      backward(agent.value, vcache, dv, vg);
      adam_step(agent.value, vg, agent.value_opt);

      MlpCache pcache;
      const Eigen::MatrixXd logits = forward(agent.policy, x, &pcache);
      const Eigen::MatrixXd p = masked_softmax(logits, masks_of(batch, idx));
      Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(p.rows(), p.cols());
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const PtomSample& s = batch[idx[j]];
        const auto col = static_cast<Eigen::Index>(j);
        const auto a = static_cast<Eigen::Index>(s.action);
        const double ratio = std::exp(std::log(p(a, col)) - s.logp);
        const double A = adv[static_cast<Eigen::Index>(idx[j])];
        if ((A > 0 && ratio > 1.0 + agent.cfg.clip) || (A < 0 && ratio < 1.0 - agent.cfg.clip)) continue;
        // d(-ratio * A)/d(logits) = -A * ratio * (onehot - p)
        dlogits.col(col) = A * ratio * p.col(col) / B;
        dlogits(a, col) -= A * ratio / B;
      }
      const Mlp saved = agent.policy;
      const AdamState saved_opt = agent.policy_opt;
      MlpGrads pg = MlpGrads::zeros_like(agent.policy);
      backward(agent.policy, pcache, dlogits, pg);
      adam_step(agent.policy, pg, agent.policy_opt);
      ++out.steps;
      const double dev = max_ratio_deviation(agent, batch, all);
      if (dev > agent.cfg.clip) {
        agent.policy = saved;
        agent.policy_opt = saved_opt;
        ++out.reverted;
        stop = true;
      } else {
        out.max_ratio_dev = std::max(out.max_ratio_dev, dev);
      }
    }
  }
  return out;
}

std::vector<EpisodeLog> ptom_train(Ptom& agent, const TrainingWorld& world, std::size_t episodes,
                                   std::uint64_t seed, const EpisodeCallback& on_episode) {
  const TrainingWorld plain = drl_only_variant(world);
  std::mt19937_64 rng(seed);
  std::vector<EpisodeLog> logs;
  std::vector<PtomSample> batch;
  double value_loss = 0.0;
  std::size_t in_batch = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    EnvState env = make_episode(plain, rng());
    const std::size_t first = batch.size();
    double total = 0.0;
    std::vector<double> rewards;
    while (!env.finished()) {
      PtomSample s;
      s.state = global_state(env);
      if (s.state.size() != agent.state_dim) throw Error(ErrorCode::ShapeMismatch, "state size differs from the policy");
      s.mask = room_mask(env);
      const auto p = ptom_probs(agent, env);
      s.action = std::discrete_distribution<std::size_t>(p.begin(), p.end())(agent.rng);
      s.logp = std::log(p[s.action]);
      const StepOutcome out = step_to(env, s.action);
      const double r = -(out.cost + out.penalty);
      total += r;
      rewards.push_back(r * agent.cfg.reward_scale);
      batch.push_back(std::move(s));
      env = out.next;
    }
    double g = 0.0;
    for (std::size_t t = rewards.size(); t-- > 0;) {
      g = rewards[t] + agent.cfg.gamma * g;
      batch[first + t].ret = g;
    }
    ++agent.trained_episodes;
    ++in_batch;
    if (in_batch == agent.cfg.episodes_per_update || e + 1 == episodes) {
      std::vector<std::size_t> all(batch.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      const Eigen::VectorXd v = forward(agent.value, states_of(batch, all)).row(0).transpose();
      value_loss = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        value_loss += std::pow(v[static_cast<Eigen::Index>(i)] - batch[i].ret, 2);
      }
      value_loss /= static_cast<double>(batch.size());
      ptom_update(agent, batch);
      batch.clear();
      in_batch = 0;
    }
    EpisodeLog log{e, total, value_loss, 0.0};
    logs.push_back(log);
    if (on_episode) on_episode(log);
  }
  return logs;
}

OffloadDecision ptom_offload(const Ptom& agent, const EnvState& start) {
  if (agent.trained_episodes == 0) {
    throw Error(ErrorCode::InsufficientEpisodes, "PTOM policy has not been trained");
  }
  EnvState env = start;
  while (!env.finished()) {
    const auto p = ptom_probs(agent, env);
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    env = step_to(env, best).next;
  }
  return env.decision;
}

void save_ptom(const Ptom& agent, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_mlp(agent.policy, dir / "ptom_policy.bin");
  save_mlp(agent.value, dir / "ptom_value.bin");
}

void load_ptom(Ptom& agent, const std::filesystem::path& dir) {
  agent.policy = load_matching(dir / "ptom_policy.bin", agent.policy);
  agent.value = load_matching(dir / "ptom_value.bin", agent.value);
  agent.trained_episodes = std::max<std::size_t>(agent.trained_episodes, 1);
}

}  // namespace edgesim
