#include "edgesim/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgesim/error.hpp"

namespace edgesim {

namespace {

constexpr std::size_t kUserFeatures = 4;
constexpr std::size_t kFocusFeatures = 11;
constexpr double kDegreeScale = 10.0;
constexpr double kTaskScale = 1500.0;
constexpr double kUserBandwidthScale = 50.0;
constexpr double kServerBandwidthScale = 100.0;

double capacity_scale(const EnvContext& c) {
  const double n = static_cast<double>(c.order.size());
  return std::max(1.0, std::ceil(n / static_cast<double>(c.scenario.n_servers())));
}

void push_user(std::vector<double>& out, const EnvContext& c, Vertex v) {
  const GraphLayout& g = c.layout;
  const Point& p = g.position(v);
  out.push_back(p.x / c.scenario.plane.width);
  out.push_back(p.y / c.scenario.plane.height);
  out.push_back(static_cast<double>(g.neighbors(v).size()) / kDegreeScale);
  out.push_back(g.task_size_kb(v) / kTaskScale);
}

// What agent m needs to know about the user being placed right now.
void push_focus(std::vector<double>& out, const EnvState& s, std::size_t m) {
  const EnvContext& c = *s.ctx;
  if (s.finished()) {
    out.insert(out.end(), kFocusFeatures, 0.0);
    return;
  }
  const Vertex u = s.current_user();
  const GraphLayout& g = c.layout;
  push_user(out, c, u);
  const Plane& pl = c.scenario.plane;
  const double diag = std::hypot(pl.width, pl.height);
  out.push_back(distance(g.position(u), c.scenario.servers[m].position) / diag);
  const auto nbrs = g.neighbors(u);
  double on_m = 0.0, elsewhere = 0.0;
  for (Vertex j : nbrs) {
    const std::int32_t k = s.decision.server[j];
    if (k < 0) continue;
    if (static_cast<std::size_t>(k) == m) {
      on_m += 1.0;
    } else {
      elsewhere += 1.0;
    }
  }
  const double deg = std::max<double>(1.0, static_cast<double>(nbrs.size()));
  out.push_back(on_m / deg);
  out.push_back(elsewhere / deg);
  const auto sub = static_cast<std::size_t>(c.partition.assignment[u]);
  const double sub_size = static_cast<double>(c.partition.subgraphs[sub].size());
  const std::size_t M = c.scenario.n_servers();
  out.push_back(static_cast<double>(s.sub_on_server[sub * M + m]) / sub_size);
  out.push_back(static_cast<double>(s.sub_placed[sub]) / sub_size);
  out.push_back(s.remaining[m] > 0 ? 1.0 : 0.0);
  out.push_back(static_cast<double>(s.cursor) / static_cast<double>(c.order.size()));
}

}  // namespace

EnvState reset(GraphLayout layout, Partition partition, Scenario scenario, EnvOptions options) {
  validate_scenario(scenario, &layout);
  validate_partition(layout, partition);
  auto ctx = std::make_shared<EnvContext>();
  ctx->layout = std::move(layout);
  ctx->partition = std::move(partition);
  ctx->scenario = std::move(scenario);
  ctx->use_penalty = options.use_penalty;

  const GraphLayout& g = ctx->layout;
  const Scenario& sc = ctx->scenario;
  const std::size_t M = sc.n_servers();
  ctx->order = g.active_vertices();

  ctx->upload.assign(g.capacity() * M, LinkCost{});
  double upload_energy = 0.0;
  for (Vertex v : ctx->order) {
    for (std::size_t m = 0; m < M; ++m) {
      ctx->upload[static_cast<std::size_t>(v) * M + m] = user_upload_cost(sc, g, v, m);
    }
    upload_energy += ctx->upload[static_cast<std::size_t>(v) * M].energy_mj;
  }
  ctx->inv_rate_pair.assign(M * M, 0.0);
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t l = 0; l < M; ++l) {
      if (k != l) ctx->inv_rate_pair[k * M + l] = 1.0 / server_rate(sc, k, l) + 1.0 / server_rate(sc, l, k);
    }
  }
  const double mult = model_multiplier(sc.gnn.model);
  double per_nbr_pj = 0.0;
  for (std::size_t kappa = 1; kappa < sc.gnn.layer_kb.size(); ++kappa) {
    per_nbr_pj += mult * sc.costs.agg_pj_per_bit * sc.gnn.layer_kb[kappa - 1] * 1000.0;
  }
  ctx->agg_per_neighbor_mj = per_nbr_pj * 1e-9;
  ctx->update_mj = gnn_energy(sc, g).update_mj;

  if (options.zeta >= 0.0) {
    ctx->zeta = options.zeta;
  } else {
    const double n = std::max<double>(1.0, static_cast<double>(ctx->order.size()));
    ctx->zeta = 0.5 * upload_energy / n;
  }

  const std::size_t slots = g.capacity();
  ctx->obs_dim = slots * kUserFeatures + 1 + slots * M + kFocusFeatures;
  ctx->state_dim = slots * kUserFeatures + M + slots * M + M * M + M * kFocusFeatures;

  EnvState s;
  s.ctx = ctx;
  s.decision = OffloadDecision::empty(slots, M);
  s.remaining.resize(M);
  for (std::size_t m = 0; m < M; ++m) s.remaining[m] = sc.servers[m].capacity;
  s.sub_on_server.assign(ctx->partition.size() * M, 0);
  s.sub_placed.assign(ctx->partition.size(), 0);
  return s;
}

std::vector<double> observe(const EnvState& s, std::size_t m) {
  const EnvContext& c = *s.ctx;
  const std::size_t M = c.scenario.n_servers();
  if (m >= M) throw Error(ErrorCode::IndexOutOfRange, "agent " + std::to_string(m));
  const GraphLayout& g = c.layout;
  std::vector<double> out;
  out.reserve(c.obs_dim);
  std::vector<std::uint8_t> visible(g.capacity(), 0);
  for (std::size_t i = 0; i < g.capacity(); ++i) {
    const auto v = static_cast<Vertex>(i);
    visible[i] = g.is_active(v) && c.scenario.in_scope(m, g.position(v));
    if (visible[i]) {
      push_user(out, c, v);
    } else {
      out.insert(out.end(), kUserFeatures, 0.0);
    }
  }
  out.push_back(static_cast<double>(s.remaining[m]) / capacity_scale(c));
  for (std::size_t i = 0; i < g.capacity(); ++i) {
    for (std::size_t k = 0; k < M; ++k) {
      out.push_back(visible[i] ? c.scenario.b_user(static_cast<Vertex>(i), k) / kUserBandwidthScale : 0.0);
    }
  }
  push_focus(out, s, m);
  return out;
}

std::vector<double> global_state(const EnvState& s) {
  const EnvContext& c = *s.ctx;
  const std::size_t M = c.scenario.n_servers();
  const GraphLayout& g = c.layout;
  std::vector<double> out;
  out.reserve(c.state_dim);
  for (std::size_t i = 0; i < g.capacity(); ++i) {
    const auto v = static_cast<Vertex>(i);
    if (g.is_active(v)) {
      push_user(out, c, v);
    } else {
      out.insert(out.end(), kUserFeatures, 0.0);
    }
  }
  for (std::size_t m = 0; m < M; ++m) {
    out.push_back(static_cast<double>(s.remaining[m]) / capacity_scale(c));
  }
  for (std::size_t i = 0; i < g.capacity(); ++i) {
    const bool on = g.is_active(static_cast<Vertex>(i));
    for (std::size_t k = 0; k < M; ++k) {
      out.push_back(on ? c.scenario.b_user(static_cast<Vertex>(i), k) / kUserBandwidthScale : 0.0);
    }
  }
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t l = 0; l < M; ++l) out.push_back(c.scenario.b_server(k, l) / kServerBandwidthScale);
  }
  for (std::size_t m = 0; m < M; ++m) push_focus(out, s, m);
  return out;
}

Resolution resolve_decision(const EnvState& s, const JointAction& joint) {
  const std::size_t M = s.n_agents();
  if (joint.size() != M) throw Error(ErrorCode::ShapeMismatch, "one action pair per agent");
  Resolution r;
  bool any_capacity = false;
  double best_margin = -1.0;
  int best = -1;
  int ties = 0;
  for (std::size_t m = 0; m < M; ++m) {
    const double a1 = std::clamp(joint[m][0], 0.0, 1.0);
    const double a2 = std::clamp(joint[m][1], 0.0, 1.0);
    const bool has_room = s.remaining[m] > 0;
    any_capacity = any_capacity || has_room;
    if (a1 < a2) continue;
    ++r.yes_votes;
    if (!has_room) continue;
    const double margin = a1 - a2;
    if (margin > best_margin) {
      best_margin = margin;
      best = static_cast<int>(m);
      ties = 1;
    } else if (margin == best_margin) {
      ++ties;
    }
  }
  if (!any_capacity) throw Error(ErrorCode::AllServersFull, "no server has remaining capacity");
  if (best >= 0) {
    r.server = static_cast<std::size_t>(best);
    r.path = ties > 1 ? ResolvePath::TiedYes : ResolvePath::UniqueYes;
    return r;
  }
  double best_a1 = -1.0;
  for (std::size_t m = 0; m < M; ++m) {
    if (s.remaining[m] <= 0) continue;
    const double a1 = std::clamp(joint[m][0], 0.0, 1.0);
    if (a1 > best_a1) {
      best_a1 = a1;
      best = static_cast<int>(m);
    }
  }
  r.server = static_cast<std::size_t>(best);
  r.path = ResolvePath::BestA1;
  return r;
}

double subgraph_penalty(const EnvState& s, Vertex user, std::size_t server) {
  const EnvContext& c = *s.ctx;
  if (!c.use_penalty) return 0.0;
  const std::size_t M = c.scenario.n_servers();
  const auto sub = static_cast<std::size_t>(c.partition.assignment.at(user));
  int servers_used = 0;
  for (std::size_t m = 0; m < M; ++m) {
    const int here = s.sub_on_server[sub * M + m] + (m == server ? 1 : 0);
    servers_used += here > 0;
  }
  const int placed = s.sub_placed[sub] + 1;
  return c.zeta * static_cast<double>(servers_used) / static_cast<double>(placed);
}

double marginal_cost(const EnvState& s, Vertex user, std::size_t k) {
  const EnvContext& c = *s.ctx;
  const Scenario& sc = c.scenario;
  const std::size_t M = sc.n_servers();
  const GraphLayout& g = c.layout;
  const LinkCost& up = c.upload[static_cast<std::size_t>(user) * M + k];
  const double x_i = g.task_size_kb(user);
  double t = up.time_s + compute_time(sc, k, x_i);
  double e = up.energy_mj;
  const auto nbrs = g.neighbors(user);
  for (Vertex j : nbrs) {
    const std::int32_t l = s.decision.server[j];
    if (l < 0 || static_cast<std::size_t>(l) == k) continue;
    const double mb = (x_i + g.task_size_kb(j)) / 1000.0;
    t += mb * c.inv_rate_pair[k * M + static_cast<std::size_t>(l)];
    e += sc.costs.transfer_mj_per_mb * mb;
  }
  e += c.agg_per_neighbor_mj * static_cast<double>(nbrs.size());
  if (s.cursor == 0) e += c.update_mj;
  return sc.weights.time * t + sc.weights.energy * e;
}

StepOutcome step_to(const EnvState& s, std::size_t server) {
  if (s.finished()) throw Error(ErrorCode::EpisodeFinished, "every user is already offloaded");
  const std::size_t M = s.n_agents();
  if (server >= M) throw Error(ErrorCode::IndexOutOfRange, "server " + std::to_string(server));
  if (s.remaining[server] <= 0) {
    throw Error(ErrorCode::ConstraintViolation, "C1: server " + std::to_string(server) + " is full");
  }
  const Vertex u = s.current_user();
  StepOutcome out;
  out.server = server;
  out.cost = marginal_cost(s, u, server);
  out.penalty = subgraph_penalty(s, u, server);

  out.next = s;
  EnvState& n = out.next;
  n.decision.assign(u, server);
  --n.remaining[server];
  const auto sub = static_cast<std::size_t>(s.ctx->partition.assignment[u]);
  ++n.sub_on_server[sub * M + server];
  ++n.sub_placed[sub];
  ++n.cursor;

  out.rewards.assign(M, 0.0);
  out.rewards[server] = -(out.cost + out.penalty);
  out.global_reward = out.rewards[server];
  out.all_done = n.finished();
  out.done.resize(M);
  for (std::size_t m = 0; m < M; ++m) out.done[m] = out.all_done || n.remaining[m] == 0;
  return out;
}

StepOutcome step(const EnvState& s, const JointAction& joint) {
  if (s.finished()) throw Error(ErrorCode::EpisodeFinished, "every user is already offloaded");
  return step_to(s, resolve_decision(s, joint).server);
}

}  // namespace edgesim
