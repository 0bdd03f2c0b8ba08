#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <string>
#include <string_view>

#include "edgesim/error.hpp"
#include "edgesim/harness.hpp"

namespace edgesim {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    const std::string part = trim(std::string_view(s).substr(start, pos - start));
    if (!part.empty()) out.push_back(part);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigError, key + ": " + why);
}

template <typename T>
T parse_num(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad(key, "cannot read '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad(key, "expected true or false, got '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const std::string& item : split(text, ',')) {
    // a..b expands to an inclusive integer range.
    const auto dots = item.find("..");
    if constexpr (std::is_integral_v<T>) {
      if (dots != std::string::npos) {
        const T lo = parse_num<T>(key, trim(item.substr(0, dots)));
        const T hi = parse_num<T>(key, trim(item.substr(dots + 2)));
        if (hi < lo) bad(key, "empty range '" + item + "'");
        for (T v = lo; v <= hi; ++v) out.push_back(v);
        continue;
      }
    }
    out.push_back(parse_num<T>(key, item));
  }
  return out;
}

std::vector<std::pair<std::size_t, std::uint64_t>> parse_ladder(const std::string& key, const std::string& text) {
  std::vector<std::pair<std::size_t, std::uint64_t>> out;
  for (const std::string& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) bad(key, "expected <vertices>:<edges>, got '" + item + "'");
    out.emplace_back(parse_num<std::size_t>(key, trim(item.substr(0, colon))),
                     parse_num<std::uint64_t>(key, trim(item.substr(colon + 1))));
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"drlgo", "ptom", "gm", "rm", "drl_only"};
  return m;
}

}  // namespace

std::size_t ExperimentConfig::slot_count() const {
  if (slots > 0) return slots;
  std::size_t most = users;
  for (std::size_t u : sweep_users) most = std::max(most, u);
  return most + static_cast<std::size_t>(std::floor(change_rate * static_cast<double>(most)));
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  std::filesystem::path dir = base_dir;
  ScenarioSpec& s = c.scenario;
  MaddpgConfig& md = c.maddpg;
  PtomConfig& pt = c.ptom;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto num = [](auto& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) {
      field = parse_num<std::remove_reference_t<decltype(field)>>(k, v);
    };
  };
  auto flag = [](bool& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_bool(k, v); };
  };

  const std::map<std::string, Setter> setters{
      {"n_servers", num(s.n_servers)},
      {"plane_width", num(s.plane.width)},
      {"plane_height", num(s.plane.height)},
      {"scope_m", num(s.scope_m)},
      {"cpu_ghz_min", num(s.cpu_ghz_min)},
      {"cpu_ghz_max", num(s.cpu_ghz_max)},
      {"user_power_min_mw", num(s.user_power_min_mw)},
      {"user_power_max_mw", num(s.user_power_max_mw)},
      {"server_power_min_mw", num(s.server_power_min_mw)},
      {"server_power_max_mw", num(s.server_power_max_mw)},
      {"user_bw_min_mhz", num(s.user_bw_min_mhz)},
      {"user_bw_max_mhz", num(s.user_bw_max_mhz)},
      {"server_bw_mhz", num(s.server_bw_mhz)},
      {"noise_dbm", num(s.noise_dbm)},
      {"weight_time", num(s.weights.time)},
      {"weight_energy", num(s.weights.energy)},
      {"upload_mj_per_mb", num(s.costs.upload_mj_per_mb)},
      {"transfer_mj_per_mb", num(s.costs.transfer_mj_per_mb)},
      {"gnn_layer_kb", [&s](const std::string& k, const std::string& v) { s.gnn.layer_kb = parse_list<double>(k, v); }},
      {"gnn_model", [&c](const std::string& k, const std::string& v) {
         c.gnn_models.clear();
         for (const std::string& name : split(v, ',')) {
           try {
             c.gnn_models.push_back(gnn_model_from_string(name));
           } catch (const Error&) {
             bad(k, "unknown model '" + name + "'");
           }
         }
       }},
      {"scenario_seed", num(c.scenario_seed)},
      {"data_dir", [&c, &dir](const std::string&, const std::string& v) { c.data_dir = resolve(dir, v); }},
      {"datasets", [&c](const std::string&, const std::string& v) { c.datasets = split(v, ','); }},
      {"train_dataset", [&c](const std::string&, const std::string& v) { c.train_dataset = v; }},
      {"users", num(c.users)},
      {"assoc", num(c.assoc)},
      {"slots", num(c.slots)},
      {"fill_links", flag(c.fill_links)},
      {"layout_seed", num(c.layout_seed)},
      {"change_rate", num(c.change_rate)},
      {"zeta", num(c.zeta)},
      {"methods", [&c](const std::string&, const std::string& v) { c.methods = split(v, ','); }},
      {"method", [&c](const std::string&, const std::string& v) { c.method = v; }},
      {"sweep_users", [&c](const std::string& k, const std::string& v) { c.sweep_users = parse_list<std::size_t>(k, v); }},
      {"sweep_assoc", [&c](const std::string& k, const std::string& v) { c.sweep_assoc = parse_list<std::size_t>(k, v); }},
      {"position_steps", num(c.position_steps)},
      {"seeds", [&c](const std::string& k, const std::string& v) { c.seeds = parse_list<std::uint64_t>(k, v); }},
      {"episodes", num(c.episodes)},
      {"train_seed", num(c.train_seed)},
      {"checkpoint_dir", [&c, &dir](const std::string&, const std::string& v) { c.checkpoint_dir = resolve(dir, v); }},
      {"hidden", [&md, &pt](const std::string& k, const std::string& v) {
         md.hidden = parse_list<int>(k, v);
         pt.hidden = md.hidden;
       }},
      {"actor_lr", num(md.actor_lr)},
      {"critic_lr", num(md.critic_lr)},
      {"gamma", num(md.gamma)},
      {"tau", num(md.tau)},
      {"buffer_capacity", num(md.buffer_capacity)},
      {"batch_size", num(md.batch_size)},
      {"warmup", num(md.warmup)},
      {"update_every", num(md.update_every)},
      {"updates_per_step", num(md.updates_per_step)},
      {"epsilon", num(md.epsilon)},
      {"reward_scale", num(md.reward_scale)},
      {"actor_reg", num(md.actor_reg)},
      {"team_reward", flag(md.team_reward)},
      {"ptom_policy_lr", num(pt.policy_lr)},
      {"ptom_value_lr", num(pt.value_lr)},
      {"ptom_gamma", num(pt.gamma)},
      {"ptom_clip", num(pt.clip)},
      {"ptom_epochs", num(pt.epochs)},
      {"ptom_episodes_per_update", num(pt.episodes_per_update)},
      {"ptom_minibatch", num(pt.minibatch)},
      {"ptom_reward_scale", num(pt.reward_scale)},
      {"bench_sparse", [&c](const std::string& k, const std::string& v) { c.bench_sparse = parse_ladder(k, v); }},
      {"bench_dense", [&c](const std::string& k, const std::string& v) { c.bench_dense = parse_ladder(k, v); }},
      {"bench_servers", num(c.bench_servers)},
      {"bench_repeats", num(c.bench_repeats)},
      {"bench_weight_min", num(c.bench_weights.first)},
      {"bench_weight_max", num(c.bench_weights.second)},
      {"bench_seed", num(c.bench_seed)},
  };

  // `include = file` reads another config in place; later lines win.
  std::function<void(std::istream&, int)> read = [&](std::istream& src, int depth) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(src, line)) {
      ++line_no;
      const auto hash = line.find('#');
      const std::string body = trim(std::string_view(line).substr(0, hash));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      const std::string key = trim(std::string_view(body).substr(0, eq));
      const std::string value = trim(std::string_view(body).substr(eq + 1));
      if (value.empty()) bad(key, "missing value");
      if (key == "include") {
        if (depth >= 8) bad(key, "nested too deeply");
        const std::filesystem::path path = resolve(dir, value);
        std::ifstream inc(path);
        if (!inc) bad(key, "cannot open " + path.string());
        const std::filesystem::path saved = dir;
        dir = path.parent_path();
        read(inc, depth + 1);
        dir = saved;
        continue;
      }
      const auto it = setters.find(key);
      if (it == setters.end()) throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      it->second(key, value);
    }
  };
  read(in, 0);
  if (c.sweep_assoc.size() == 1 && c.sweep_users.size() > 1) {
    c.sweep_assoc.assign(c.sweep_users.size(), c.sweep_assoc[0]);
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

void validate_config(const ExperimentConfig& c) {
  if (c.scenario.n_servers < 1) bad("n_servers", "must be positive");
  if (c.users == 0) bad("users", "must be positive");
  if (c.seeds.empty()) bad("seeds", "must not be empty");
  if (c.sweep_users.empty()) bad("sweep_users", "must not be empty");
  if (c.sweep_users.size() != c.sweep_assoc.size()) bad("sweep_assoc", "needs one entry per sweep_users entry");
  for (std::size_t u : c.sweep_users) {
    if (u == 0) bad("sweep_users", "entries must be positive");
  }
  if (c.slots > 0 && c.slots < c.users) bad("slots", "fewer slots than users");
  if (c.change_rate < 0.0 || c.change_rate >= 1.0) bad("change_rate", "must lie in [0, 1)");
  if (c.datasets.empty()) bad("datasets", "must not be empty");
  for (const std::string& m : c.methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
      bad("methods", "unknown method '" + m + "'");
    }
  }
  if (std::find(known_methods().begin(), known_methods().end(), c.method) == known_methods().end()) {
    bad("method", "unknown method '" + c.method + "'");
  }
  if (c.maddpg.batch_size == 0) bad("batch_size", "must be positive");
  if (c.maddpg.update_every < 1) bad("update_every", "must be >= 1");
  if (c.maddpg.updates_per_step < 1) bad("updates_per_step", "must be >= 1");
  if (c.maddpg.hidden.empty()) bad("hidden", "must list at least one layer");
  if (c.bench_repeats < 1) bad("bench_repeats", "must be >= 1");
  if (c.bench_servers < 1) bad("bench_servers", "must be positive");
  if (c.gnn_models.empty()) bad("gnn_model", "must not be empty");
}

}  // namespace edgesim
