#include "edgesim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "edgesim/error.hpp"

namespace edgesim {

std::vector<Point> server_sites(const Plane& plane, int n_servers) {
  if (n_servers < 1) throw Error(ErrorCode::InsufficientServers, "need at least one server");
  const auto M = static_cast<std::size_t>(n_servers);
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(M))));
  const std::size_t rows = (M + cols - 1) / cols;
  std::vector<Point> out;
  for (std::size_t k = 0; k < M; ++k) {
    const double cx = (static_cast<double>(k % cols) + 0.5) / static_cast<double>(cols);
    const double cy = (static_cast<double>(k / cols) + 0.5) / static_cast<double>(rows);
    out.push_back({cx * plane.width, cy * plane.height});
  }
  return out;
}

std::vector<int> service_capacities(std::size_t n_users, int n_servers, std::uint64_t seed) {
  if (n_servers < 1) throw Error(ErrorCode::InsufficientServers, "need at least one server");
  std::mt19937_64 rng(seed);
  const double mean = std::ceil(static_cast<double>(n_users) / n_servers);
  const double levels[3] = {1.25, 1.0, 0.75};
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<int> caps(static_cast<std::size_t>(n_servers));
  long total = 0;
  for (int& c : caps) {
    c = static_cast<int>(std::floor(levels[pick(rng)] * mean));
    total += c;
  }
  if (total < static_cast<long>(n_users)) {
    auto largest = std::max_element(caps.begin(), caps.end());
    *largest += static_cast<int>(static_cast<long>(n_users) - total);
  }
  return caps;
}

Scenario build_scenario(const ScenarioSpec& spec, std::size_t n_users, std::size_t n_slots,
                        std::uint64_t seed) {
  if (n_slots < n_users) throw Error(ErrorCode::ConfigError, "fewer slots than users");
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  Scenario s;
  s.plane = spec.plane;
  s.scope_m = spec.scope_m;
  s.noise_dbm = spec.noise_dbm;
  s.ref_gain = spec.ref_gain;
  s.server_gain = spec.server_gain;
  s.costs = spec.costs;
  s.gnn = spec.gnn;
  s.caps = spec.caps;
  s.weights = spec.weights;

  const auto M = static_cast<std::size_t>(spec.n_servers);
  const auto sites = server_sites(spec.plane, spec.n_servers);
  double p_server = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    Server sv;
    sv.position = sites[k];
    sv.cpu_ghz = uni(spec.cpu_ghz_min, spec.cpu_ghz_max);
    sv.tx_power_mw = uni(spec.server_power_min_mw, spec.server_power_max_mw);
    p_server += sv.tx_power_mw;
    s.servers.push_back(sv);
  }
  if (p_server > spec.caps.p_max_server_mw) {
    const double f = spec.caps.p_max_server_mw / p_server;
    for (auto& sv : s.servers) sv.tx_power_mw *= f;
  }

  const double pairs = static_cast<double>(M * (M - 1) / 2);
  const double b_kl = pairs > 0 ? std::min(spec.server_bw_mhz, spec.caps.b_max_server_mhz / pairs)
                                : spec.server_bw_mhz;
  s.bandwidth_server_mhz.assign(M * M, b_kl);
  for (std::size_t k = 0; k < M; ++k) s.bandwidth_server_mhz[k * M + k] = 0.0;

  double p_user = 0.0, b_user = 0.0;
  for (std::size_t i = 0; i < n_slots; ++i) {
    s.user_power_mw.push_back(uni(spec.user_power_min_mw, spec.user_power_max_mw));
    p_user += s.user_power_mw.back();
    for (std::size_t m = 0; m < M; ++m) {
      s.bandwidth_user_mhz.push_back(uni(spec.user_bw_min_mhz, spec.user_bw_max_mhz));
      b_user += s.bandwidth_user_mhz.back();
    }
  }
  if (p_user > spec.caps.p_max_user_mw) {
    const double f = spec.caps.p_max_user_mw / p_user;
    for (double& p : s.user_power_mw) p *= f;
  }
  if (b_user > spec.caps.b_max_user_mhz) {
    const double f = spec.caps.b_max_user_mhz / b_user;
    for (double& b : s.bandwidth_user_mhz) b *= f;
  }

  reassign_capacities(s, n_users, rng());
  validate_scenario(s);
  return s;
}

void reassign_capacities(Scenario& s, std::size_t n_users, std::uint64_t seed) {
  const auto caps = service_capacities(n_users, static_cast<int>(s.n_servers()), seed);
  for (std::size_t k = 0; k < s.n_servers(); ++k) s.servers[k].capacity = caps[k];
}

}  // namespace edgesim
