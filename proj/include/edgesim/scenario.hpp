#pragma once

#include <cstdint>
#include <vector>

#include "edgesim/cost_model.hpp"

namespace edgesim {

/// Ranges the builder samples from. Defaults follow the published parameter
/// table; constants it does not give are set to documented placeholders.
struct ScenarioSpec {
  Plane plane;
  int n_servers = 4;
  double scope_m = 500.0;
  double cpu_ghz_min = 2.0, cpu_ghz_max = 10.0;
  double user_power_min_mw = 2.0, user_power_max_mw = 5.0;
  double server_power_min_mw = 10.0, server_power_max_mw = 15.0;
  double user_bw_min_mhz = 20.0, user_bw_max_mhz = 50.0;
  double server_bw_mhz = 100.0;
  double noise_dbm = -110.0;
  double ref_gain = 1e-3;
  double server_gain = 1e-5;
  UnitCosts costs;
  GnnSpec gnn;
  Caps caps;
  CostWeights weights;
};

/// Server sites: cell centres of a near-square grid over the plane (for four
/// servers, the quadrant centres).
std::vector<Point> server_sites(const Plane& plane, int n_servers);

/// Capacities at 5/4, 1 and 3/4 of ceil(n_users / M), levels drawn at
/// random, floored, then the largest topped up so the total covers n_users.
std::vector<int> service_capacities(std::size_t n_users, int n_servers, std::uint64_t seed);

/// Samples a scenario with `n_slots` user slots. Budgets that the sampled
/// values would exceed (C3..C6) are met by scaling the affected quantity
/// down uniformly.
Scenario build_scenario(const ScenarioSpec& spec, std::size_t n_users, std::size_t n_slots,
                        std::uint64_t seed);

/// Re-draws only the capacities (per episode during training).
void reassign_capacities(Scenario& s, std::size_t n_users, std::uint64_t seed);

}  // namespace edgesim
