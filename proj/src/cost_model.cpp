#include "edgesim/cost_model.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "edgesim/error.hpp"

namespace edgesim {

namespace {

std::atomic<std::uint64_t> g_clamped{0};

constexpr double kPjToMj = 1e-9;
constexpr double kBitsPerKb = 1000.0;

[[noreturn]] void violated(const std::string& which, const std::string& what) {
  throw Error(ErrorCode::ConstraintViolation, which + ": " + what);
}

}  // namespace

double model_multiplier(GnnModel m) noexcept {
  switch (m) {
    case GnnModel::GCN: return 1.0;
    case GnnModel::GAT: return 1.3;
    case GnnModel::SAGE: return 1.2;
    case GnnModel::SGC: return 0.8;
  }
  return 1.0;
}

const char* to_string(GnnModel m) noexcept {
  switch (m) {
    case GnnModel::GCN: return "gcn";
    case GnnModel::GAT: return "gat";
    case GnnModel::SAGE: return "sage";
    case GnnModel::SGC: return "sgc";
  }
  return "?";
}

GnnModel gnn_model_from_string(const std::string& name) {
  if (name == "gcn") return GnnModel::GCN;
  if (name == "gat") return GnnModel::GAT;
  if (name == "sage") return GnnModel::SAGE;
  if (name == "sgc") return GnnModel::SGC;
  throw Error(ErrorCode::ConfigError, "unknown gnn model '" + name + "'");
}

bool Scenario::in_scope(std::size_t m, const Point& p) const noexcept {
  const Point& c = servers[m].position;
  const double h = 0.5 * scope_m;
  return std::abs(p.x - c.x) <= h && std::abs(p.y - c.y) <= h;
}

void validate_scenario(const Scenario& s, const GraphLayout* layout) {
  const std::size_t M = s.n_servers();
  if (M == 0) throw Error(ErrorCode::InsufficientServers, "scenario has no servers");
  if (s.bandwidth_user_mhz.size() != s.n_slots() * M || s.bandwidth_server_mhz.size() != M * M) {
    throw Error(ErrorCode::ShapeMismatch, "bandwidth tables do not match slots/servers");
  }
  if (layout && layout->capacity() > s.n_slots()) {
    throw Error(ErrorCode::ShapeMismatch, "layout has more slots than the scenario");
  }
  double p_server = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    if (!(s.servers[k].cpu_ghz > 0.0)) violated("C2", "server " + std::to_string(k) + " rate");
    if (!(s.servers[k].tx_power_mw > 0.0)) violated("C6", "server power must be positive");
    if (s.servers[k].capacity < 0) violated("C1", "negative capacity");
    p_server += s.servers[k].tx_power_mw;
  }
  double b_server = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t l = k + 1; l < M; ++l) {
      if (!(s.b_server(k, l) > 0.0)) violated("C4", "server bandwidth must be positive");
      b_server += s.b_server(k, l);
    }
  }
  double b_user = 0.0, p_user = 0.0;
  for (std::size_t i = 0; i < s.n_slots(); ++i) {
    const auto v = static_cast<Vertex>(i);
    if (layout && !layout->is_active(v)) continue;
    if (!(s.user_power_mw[i] > 0.0)) violated("C5", "user power must be positive");
    p_user += s.user_power_mw[i];
    for (std::size_t m = 0; m < M; ++m) {
      if (!(s.b_user(v, m) > 0.0)) violated("C3", "user bandwidth must be positive");
      b_user += s.b_user(v, m);
    }
  }
  // Tiny slack so budgets rescaled to exactly the cap pass.
  const double tol = 1e-9;
  if (b_user > s.caps.b_max_user_mhz * (1 + tol)) violated("C3", "user bandwidth over budget");
  if (b_server > s.caps.b_max_server_mhz * (1 + tol)) violated("C4", "server bandwidth over budget");
  if (p_user > s.caps.p_max_user_mw * (1 + tol)) violated("C5", "user power over budget");
  if (p_server > s.caps.p_max_server_mw * (1 + tol)) violated("C6", "server power over budget");
}

OffloadDecision OffloadDecision::empty(std::size_t n_slots, std::size_t n_servers) {
  OffloadDecision d;
  d.server.assign(n_slots, -1);
  d.load.assign(n_servers, 0);
  return d;
}

void OffloadDecision::assign(Vertex i, std::size_t k) {
  if (server.at(i) >= 0) --load.at(static_cast<std::size_t>(server[i]));
  server[i] = static_cast<std::int32_t>(k);
  ++load.at(k);
}

std::size_t OffloadDecision::assigned_count() const {
  std::size_t n = 0;
  for (auto s : server) n += s >= 0;
  return n;
}

void check_decision(const Scenario& s, const GraphLayout& layout, const OffloadDecision& d) {
  if (d.server.size() < layout.capacity() || d.load.size() != s.n_servers()) {
    throw Error(ErrorCode::ShapeMismatch, "decision does not match layout/scenario");
  }
  std::vector<int> load(s.n_servers(), 0);
  for (std::size_t i = 0; i < layout.capacity(); ++i) {
    const auto v = static_cast<Vertex>(i);
    const std::int32_t k = d.server[i];
    if (layout.is_active(v) && k < 0) violated("C1", "user " + std::to_string(i) + " not offloaded");
    if (!layout.is_active(v) && k >= 0) violated("C1", "inactive slot " + std::to_string(i) + " placed");
    if (k >= static_cast<std::int32_t>(s.n_servers())) violated("C1", "unknown server");
    if (k >= 0) ++load[static_cast<std::size_t>(k)];
  }
  for (std::size_t k = 0; k < s.n_servers(); ++k) {
    if (load[k] > s.servers[k].capacity) {
      violated("C1", "server " + std::to_string(k) + " over capacity");
    }
  }
}

double dbm_to_mw(double dbm) noexcept { return std::pow(10.0, dbm / 10.0); }

std::uint64_t distance_clamp_count() noexcept { return g_clamped.load(); }

double channel_gain(double distance_m, double ref_gain) {
  if (distance_m < 1.0) {
    g_clamped.fetch_add(1);
    distance_m = 1.0;
  }
  return ref_gain / (distance_m * distance_m);
}

double shannon_rate(double bandwidth_mhz, double power_mw, double gain, double noise_dbm) {
  return bandwidth_mhz * std::log2(1.0 + power_mw * gain / dbm_to_mw(noise_dbm));
}

double uplink_rate(const Scenario& s, Vertex i, std::size_t m, double distance_m) {
  return shannon_rate(s.b_user(i, m), s.user_power_mw.at(i), channel_gain(distance_m, s.ref_gain),
                      s.noise_dbm);
}

double uplink_rate(const Scenario& s, const GraphLayout& layout, Vertex i, std::size_t m) {
  return uplink_rate(s, i, m, distance(layout.position(i), s.servers.at(m).position));
}

double server_rate(const Scenario& s, std::size_t k, std::size_t l) {
  return shannon_rate(s.b_server(k, l), s.servers.at(k).tx_power_mw, s.server_gain, s.noise_dbm);
}

LinkCost upload_cost(double x_kb, double rate_mbps, double unit_mj_per_mb) {
  LinkCost c;
  if (x_kb == 0.0) return c;
  c.time_s = x_kb / (rate_mbps * 1000.0);
  c.energy_mj = x_kb / 1000.0 * unit_mj_per_mb;
  return c;
}

LinkCost user_upload_cost(const Scenario& s, const GraphLayout& layout, Vertex i, std::size_t m,
                          bool assigned) {
  if (!assigned) return {};
  return upload_cost(layout.task_size_kb(i), uplink_rate(s, layout, i, m), s.costs.upload_mj_per_mb);
}

TransferCost transfer_cost(const Scenario& s, const OffloadDecision& d, const GraphLayout& layout) {
  const std::size_t M = s.n_servers();
  TransferCost out;
  out.kb_by_pair.assign(M * M, 0.0);
  double sent_kb = 0.0;
  for (Vertex i : layout.active_vertices()) {
    const std::int32_t k = d.server.at(i);
    if (k < 0) continue;
    for (Vertex j : layout.neighbors(i)) {
      const std::int32_t l = d.server.at(j);
      if (l < 0 || l == k) continue;
      // x_{k->l} gets X_i once per neighbour of i that sits on l.
      const double x = layout.task_size_kb(i);
      out.kb_by_pair[static_cast<std::size_t>(k) * M + static_cast<std::size_t>(l)] += x;
      out.kb_by_pair[static_cast<std::size_t>(l) * M + static_cast<std::size_t>(k)] += x;
      sent_kb += x;
    }
  }
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t l = 0; l < M; ++l) {
      const double x = out.kb_by_pair[k * M + l];
      if (k == l || x == 0.0) continue;
      out.time_s += x / (server_rate(s, k, l) * 1000.0);
    }
  }
  out.energy_mj = s.costs.transfer_mj_per_mb * sent_kb / 1000.0;
  return out;
}

double compute_time(const Scenario& s, std::size_t k, double x_kb) {
  const double f = s.servers.at(k).cpu_ghz;
  if (!(f > 0.0)) throw Error(ErrorCode::InvalidServerRate, "server " + std::to_string(k));
  return x_kb / (f * 1e6);
}

GnnEnergy gnn_energy(const GnnSpec& gnn, const UnitCosts& costs, const GraphLayout& layout) {
  GnnEnergy e;
  if (layout.active_count() == 0 || gnn.layer_kb.size() < 2) return e;
  const double mult = model_multiplier(gnn.model);
  const double degree_sum = 2.0 * static_cast<double>(layout.edge_count());
  double agg_pj = 0.0, upd_pj = 0.0;
  for (std::size_t kappa = 1; kappa < gnn.layer_kb.size(); ++kappa) {
    const double prev_bits = gnn.layer_kb[kappa - 1] * kBitsPerKb;
    const double cur_bits = gnn.layer_kb[kappa] * kBitsPerKb;
    agg_pj += mult * costs.agg_pj_per_bit * degree_sum * prev_bits;
    upd_pj += mult * costs.update_pj_per_bit * prev_bits * cur_bits +
              costs.activation_pj_per_bit * cur_bits;
  }
  e.agg_mj = agg_pj * kPjToMj;
  e.update_mj = upd_pj * kPjToMj;
  return e;
}

GnnEnergy gnn_energy(const Scenario& s, const GraphLayout& layout) {
  return gnn_energy(s.gnn, s.costs, layout);
}

CostBreakdown system_cost(const Scenario& s, const GraphLayout& layout, const OffloadDecision& d) {
  validate_scenario(s, &layout);
  check_decision(s, layout, d);
  CostBreakdown c;
  for (Vertex i : layout.active_vertices()) {
    const auto k = static_cast<std::size_t>(d.server[i]);
    const LinkCost up = user_upload_cost(s, layout, i, k);
    c.t_upload += up.time_s;
    c.i_upload += up.energy_mj;
    c.t_compute += compute_time(s, k, layout.task_size_kb(i));
  }
  const TransferCost tr = transfer_cost(s, d, layout);
  c.t_transfer = tr.time_s;
  c.i_transfer = tr.energy_mj;
  const GnnEnergy g = gnn_energy(s, layout);
  c.i_agg = g.agg_mj;
  c.i_upd = g.update_mj;
  c.T_all = c.t_upload + c.t_transfer + c.t_compute;
  c.I_all = c.i_upload + c.i_transfer + c.i_agg + c.i_upd;
  c.C = s.weights.time * c.T_all + s.weights.energy * c.I_all;
  return c;
}

double cross_server_cost(const Scenario& s, const GraphLayout& layout, const OffloadDecision& d) {
  return transfer_cost(s, d, layout).energy_mj;
}

Eigen::MatrixXd gcn_propagation(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "adjacency must be square");
  const Eigen::MatrixXd tilde = a + Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::VectorXd inv_sqrt = tilde.rowwise().sum().array().rsqrt();
  return inv_sqrt.asDiagonal() * tilde * inv_sqrt.asDiagonal();
}

Eigen::MatrixXd gcn_forward(const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& features,
                            const Eigen::MatrixXd& w0, const Eigen::MatrixXd& w1) {
  if (adjacency.rows() != adjacency.cols() || features.rows() != adjacency.rows() ||
      w0.rows() != features.cols() || w1.rows() != w0.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "gcn operand shapes are not conformable");
  }
  const Eigen::MatrixXd p = gcn_propagation(adjacency);
  const Eigen::MatrixXd hidden = (p * features * w0).cwiseMax(0.0);
  return p * hidden * w1;
}

}  // namespace edgesim
