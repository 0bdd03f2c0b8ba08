#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edgesim/graph_core.hpp"

namespace edgesim {

// Units used throughout: data in kilobits, rates in Mb/s, bandwidth in MHz,
// power in mW (noise in dBm), time in seconds, energy in millijoules.

struct Server {
  Point position;
  /// Effective processing rate; 1 GHz is taken as 1 Gb/s of task data.
  double cpu_ghz = 2.0;
  int capacity = 0;
  double tx_power_mw = 10.0;
};

struct UnitCosts {
  double upload_mj_per_mb = 3.0;
  double transfer_mj_per_mb = 5.0;
  double agg_pj_per_bit = 20.0;
  double update_pj_per_bit = 100.0;
  double activation_pj_per_bit = 50.0;
};

enum class GnnModel { GCN, GAT, SAGE, SGC };

/// Cost multiplier on the aggregation and update constants per model.
double model_multiplier(GnnModel m) noexcept;
const char* to_string(GnnModel m) noexcept;
GnnModel gnn_model_from_string(const std::string& name);

struct GnnSpec {
  /// S_0..S_F in kilobits; F = size() - 1 layers.
  std::vector<double> layer_kb{1.0, 0.5, 0.05};
  GnnModel model = GnnModel::GCN;
};

struct Caps {
  double b_max_user_mhz = 5000.0;
  double b_max_server_mhz = 500.0;
  double p_max_user_mw = 1500.0;
  double p_max_server_mw = 60.0;
};

struct CostWeights {
  double time = 1.0;
  double energy = 1.0;
};

struct Scenario {
  Plane plane;
  std::vector<Server> servers;
  /// Side of the square each server observes, centred on the server.
  double scope_m = 500.0;
  /// Per user slot.
  std::vector<double> user_power_mw;
  /// Per user slot, one entry per AP (row-major, slots x servers).
  std::vector<double> bandwidth_user_mhz;
  /// servers x servers, symmetric, zero diagonal.
  std::vector<double> bandwidth_server_mhz;
  double noise_dbm = -110.0;
  double ref_gain = 1e-3;
  double server_gain = 1e-5;
  UnitCosts costs;
  GnnSpec gnn;
  Caps caps;
  CostWeights weights;

  std::size_t n_servers() const noexcept { return servers.size(); }
  std::size_t n_slots() const noexcept { return user_power_mw.size(); }
  double b_user(Vertex i, std::size_t m) const {
    return bandwidth_user_mhz.at(static_cast<std::size_t>(i) * servers.size() + m);
  }
  double b_server(std::size_t k, std::size_t l) const {
    return bandwidth_server_mhz.at(k * servers.size() + l);
  }
  /// True when p lies in server m's square scope.
  bool in_scope(std::size_t m, const Point& p) const noexcept;
};

/// Checks positivity and the budget constraints C2..C6 over every slot, or
/// over the active users of `layout` when given. Throws ConstraintViolation.
void validate_scenario(const Scenario& s, const GraphLayout* layout = nullptr);

struct OffloadDecision {
  /// Per slot: server index or -1.
  std::vector<std::int32_t> server;
  /// Tasks currently placed on each server.
  std::vector<int> load;

  static OffloadDecision empty(std::size_t n_slots, std::size_t n_servers);
  bool is_assigned(Vertex i) const { return server.at(i) >= 0; }
  int w(Vertex i, std::size_t k) const { return server.at(i) == static_cast<std::int32_t>(k); }
  void assign(Vertex i, std::size_t k);
  std::size_t assigned_count() const;

  friend bool operator==(const OffloadDecision&, const OffloadDecision&) = default;
};

/// C1 (every active user on exactly one server, nobody else placed) and the
/// per-server capacity. Throws ConstraintViolation.
void check_decision(const Scenario& s, const GraphLayout& layout, const OffloadDecision& d);

struct LinkCost {
  double time_s = 0.0;
  double energy_mj = 0.0;
};

struct TransferCost {
  double time_s = 0.0;
  double energy_mj = 0.0;
  /// Symmetric servers x servers matrix of exchanged data (kb), zero diagonal.
  std::vector<double> kb_by_pair;
};

struct GnnEnergy {
  double agg_mj = 0.0;
  double update_mj = 0.0;
};

struct CostBreakdown {
  double t_upload = 0.0;
  double t_transfer = 0.0;
  double t_compute = 0.0;
  double T_all = 0.0;
  double i_upload = 0.0;
  double i_transfer = 0.0;
  double i_agg = 0.0;
  double i_upd = 0.0;
  double I_all = 0.0;
  double C = 0.0;

  friend bool operator==(const CostBreakdown&, const CostBreakdown&) = default;
};

double dbm_to_mw(double dbm) noexcept;

/// Number of times a distance below 1 m was clamped (process-wide).
std::uint64_t distance_clamp_count() noexcept;

/// Free-space gain ref_gain * d^-2, with d clamped to at least 1 m.
double channel_gain(double distance_m, double ref_gain = 1e-3);

/// Shannon rate in Mb/s for bandwidth in MHz.
double shannon_rate(double bandwidth_mhz, double power_mw, double gain, double noise_dbm);

double uplink_rate(const Scenario& s, Vertex i, std::size_t m, double distance_m);
double uplink_rate(const Scenario& s, const GraphLayout& layout, Vertex i, std::size_t m);
double server_rate(const Scenario& s, std::size_t k, std::size_t l);

/// Upload of x_kb at rate_mbps: time x/R, energy x * unit cost.
LinkCost upload_cost(double x_kb, double rate_mbps, double unit_mj_per_mb);
/// Upload cost of user i to AP m given the layout, or zeros when `assigned`
/// is false.
LinkCost user_upload_cost(const Scenario& s, const GraphLayout& layout, Vertex i, std::size_t m,
                          bool assigned = true);

TransferCost transfer_cost(const Scenario& s, const OffloadDecision& d, const GraphLayout& layout);

/// Seconds for server k to process x_kb. Throws InvalidServerRate if f_k <= 0.
double compute_time(const Scenario& s, std::size_t k, double x_kb);

/// Aggregation and update energy for the given layer sizes and constants.
GnnEnergy gnn_energy(const GnnSpec& gnn, const UnitCosts& costs, const GraphLayout& layout);
GnnEnergy gnn_energy(const Scenario& s, const GraphLayout& layout);

CostBreakdown system_cost(const Scenario& s, const GraphLayout& layout, const OffloadDecision& d);

/// Energy spent moving neighbour data between servers.
double cross_server_cost(const Scenario& s, const GraphLayout& layout, const OffloadDecision& d);

/// Symmetric-normalised propagation matrix D^-1/2 (A + I) D^-1/2.
Eigen::MatrixXd gcn_propagation(const Eigen::MatrixXd& adjacency);

/// Two-layer GCN with ReLU inside and identity outside.
Eigen::MatrixXd gcn_forward(const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& features,
                            const Eigen::MatrixXd& w0, const Eigen::MatrixXd& w1);

}  // namespace edgesim
