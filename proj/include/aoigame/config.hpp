// Plain-text experiment configuration.
//
//   # comment
//   seed = 7
//   frame_length = 10000
//   p_global_min = 0.05
//   kappa = reciprocal            # | constant 0.5 | table 1, 0.5, 0.25
//   kappa_reinit_period = 0       # restart every clock each k frames; 0 = never
//   reinit_kappa = false          # restart every clock when the roster changes
//   mode = stochastic             # | expected
//
//   [scenario]
//   kind = convergence            # convergence | churn | sweep_prob_vs_n |
//                                 # sweep_age_vs_n | sweep_poa_vs_n | rr_compare
//   n = 10
//   n_range = 1..25
//   frames = 200
//   replicates = 5
//
//   [nodes]
//   costs = 1, 1, 1               # node i uses entry i, missing entries are 1
//
//   [churn]
//   join = 20 7                   # at frame 20, 7 nodes join
//   leave = 80 7                  # at frame 80, 7 nodes leave
//
// `scenario = <kind>` and the scenario keys may also appear before any
// section header.
#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aoigame/core_model.hpp"
#include "aoigame/learning.hpp"

namespace aoigame {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { convergence, churn, sweep_prob_vs_n, sweep_age_vs_n, sweep_poa_vs_n, rr_compare };

inline const std::vector<std::pair<std::string_view, ScenarioKind>>& scenario_kinds() {
  static const std::vector<std::pair<std::string_view, ScenarioKind>> kinds = {
      {"convergence", ScenarioKind::convergence},
      {"churn", ScenarioKind::churn},
      {"sweep_prob_vs_n", ScenarioKind::sweep_prob_vs_n},
      {"sweep_age_vs_n", ScenarioKind::sweep_age_vs_n},
      {"sweep_poa_vs_n", ScenarioKind::sweep_poa_vs_n},
      {"rr_compare", ScenarioKind::rr_compare},
  };
  return kinds;
}

inline std::string_view to_string(ScenarioKind k) {
  for (const auto& [name, kind] : scenario_kinds())
    if (kind == k) return name;
  return "unknown";
}

inline std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) {
  for (const auto& [name, kind] : scenario_kinds())
    if (name == s) return kind;
  return std::nullopt;
}

inline bool is_sweep(ScenarioKind k) {
  return k == ScenarioKind::sweep_prob_vs_n || k == ScenarioKind::sweep_age_vs_n ||
         k == ScenarioKind::sweep_poa_vs_n;
}

struct Scenario {
  ScenarioKind kind = ScenarioKind::convergence;
  std::size_t n = 10;
  std::size_t n_min = 1;
  std::size_t n_max = 25;
  std::size_t frames = 200;
  std::size_t replicates = 5;
};

struct ChurnSpec {
  std::size_t frame = 0;
  std::size_t join = 0;
  std::size_t leave = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t frame_length = 10000;
  double p_global_min = 0.05;
  Schedule schedule;
  LearningMode mode = LearningMode::stochastic;
  std::vector<double> costs;
  std::vector<ChurnSpec> churn;
  Scenario scenario;
  /// Text the configuration was parsed from (empty when built in code).
  std::string source;

  double cost_of(std::size_t position) const { return position < costs.size() ? costs[position] : 1.0; }

  /// Game with an initial roster of `n` nodes; churn events from the
  /// configuration apply only to the churn scenario.
  GameConfig game(std::size_t n, std::uint64_t run_seed) const {
    GameConfig g;
    g.p_global_min = p_global_min;
    g.frame_length = frame_length;
    g.schedule = schedule;
    g.seed = run_seed;
    for (std::size_t i = 0; i < n; ++i) g.nodes.push_back(derive_params(cost_of(i), p_global_min));
    if (scenario.kind == ScenarioKind::churn) {
      std::size_t size = n;
      for (const auto& c : churn) {
        ChurnEvent ev;
        ev.frame = c.frame;
        ev.removed = c.leave;
        size -= std::min(size, c.leave);
        for (std::size_t j = 0; j < c.join; ++j) ev.added.push_back(derive_params(cost_of(size + j), p_global_min));
        size += c.join;
        g.churn_events.push_back(std::move(ev));
      }
    }
    g.validate();
    return g;
  }

  GameConfig game() const { return game(scenario.n, seed); }

  void validate() const {
    if (frame_length < 1) throw ConfigError("frame_length must be >= 1");
    if (!(p_global_min > 0.0 && p_global_min < 0.5))
      throw ConfigError("p_global_min must lie in (0, 0.5)");
    for (double c : costs)
      if (!(c > 0.0)) throw ConfigError("costs must be positive");
    if (scenario.frames < 1) throw ConfigError("frames must be >= 1");
    if (scenario.replicates < 1) throw ConfigError("replicates must be >= 1");
    if (is_sweep(scenario.kind)) {
      if (scenario.n_min < 1 || scenario.n_min > scenario.n_max)
        throw ConfigError("n_range must be a nonempty range of positive integers");
    } else if (scenario.n < 1) {
      throw ConfigError("n must be >= 1");
    }
    if (scenario.kind == ScenarioKind::churn && churn.empty())
      throw ConfigError("churn scenario requires at least one [churn] event");
    if (scenario.kind != ScenarioKind::churn && !churn.empty())
      throw ConfigError("[churn] events are only valid for the churn scenario");
    try {
      if (scenario.kind == ScenarioKind::churn) (void)game();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("churn events: ") + e.what());
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view s, std::string_view what) {
  s = trim(s);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("invalid value '" + std::string(s) + "' for " + std::string(what));
  return value;
}

inline double parse_real(std::string_view s, std::string_view what) {
  // from_chars for double is missing from older libstdc++
  std::string str(trim(s));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (str.empty() || used != str.size())
    throw ConfigError("invalid value '" + str + "' for " + std::string(what));
  return v;
}

inline bool parse_bool(std::string_view s, std::string_view what) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(s) + "' for " + std::string(what));
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto w : split(trim(s), ' '))
    if (!w.empty()) out.push_back(w);
  return out;
}

inline Schedule parse_schedule(std::string_view v) {
  auto w = words(v);
  if (w.empty()) throw ConfigError("kappa needs a value");
  try {
    if (w[0] == "reciprocal" && w.size() == 1) return Schedule::reciprocal();
    if (w[0] == "constant" && w.size() == 2) return Schedule::constant(parse_real(w[1], "kappa"));
    if (w[0] == "table") {
      auto rest = trim(v.substr(v.find("table") + 5));
      std::vector<double> t;
      for (auto x : split(rest, ',')) t.push_back(parse_real(x, "kappa table"));
      return Schedule::from_table(std::move(t));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("kappa must be 'reciprocal', 'constant <k>' or 'table <k1>, <k2>, ...'");
}

}  // namespace detail

/// Parses and validates a configuration. Errors carry the offending line.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  cfg.source = std::string(text);
  bool have_kind = false;
  bool reinit_on_churn = false;
  std::size_t reinit_period = 0;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& msg) { throw ConfigError("line " + std::to_string(line_no) + ": " + msg); };

  auto scenario_key = [&](std::string_view key, std::string_view value) -> bool {
    if (key == "kind" || key == "scenario") {
      auto k = parse_scenario_kind(detail::trim(value));
      if (!k) fail("unknown scenario kind '" + std::string(detail::trim(value)) + "'");
      cfg.scenario.kind = *k;
      have_kind = true;
    } else if (key == "n") {
      cfg.scenario.n = detail::parse_number<std::size_t>(value, "n");
    } else if (key == "n_range") {
      auto dots = value.find("..");
      if (dots == std::string_view::npos) fail("n_range must look like 'a..b'");
      cfg.scenario.n_min = detail::parse_number<std::size_t>(value.substr(0, dots), "n_range");
      cfg.scenario.n_max = detail::parse_number<std::size_t>(value.substr(dots + 2), "n_range");
    } else if (key == "frames") {
      cfg.scenario.frames = detail::parse_number<std::size_t>(value, "frames");
    } else if (key == "replicates") {
      cfg.scenario.replicates = detail::parse_number<std::size_t>(value, "replicates");
    } else {
      return false;
    }
    return true;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "scenario" && section != "nodes" && section != "churn")
        fail("unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (value.empty()) fail("missing value for '" + std::string(key) + "'");

    try {
      if (section.empty()) {
        if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(value, "seed");
        else if (key == "frame_length") cfg.frame_length = detail::parse_number<std::size_t>(value, "frame_length");
        else if (key == "p_global_min") {
          cfg.p_global_min = detail::parse_real(value, "p_global_min");
          if (!(cfg.p_global_min > 0.0 && cfg.p_global_min < 0.5))
            fail("p_global_min = " + std::string(value) + " is outside the admissible domain (0, 0.5)");
        } else if (key == "kappa") cfg.schedule = detail::parse_schedule(value);
        else if (key == "kappa_reinit_period")
          reinit_period = detail::parse_number<std::size_t>(value, "kappa_reinit_period");
        else if (key == "reinit_kappa") reinit_on_churn = detail::parse_bool(value, "reinit_kappa");
        else if (key == "mode") {
          if (value == "stochastic") cfg.mode = LearningMode::stochastic;
          else if (value == "expected") cfg.mode = LearningMode::expected;
          else fail("mode must be 'stochastic' or 'expected'");
        } else if (!scenario_key(key, value)) fail("unknown key '" + std::string(key) + "'");
      } else if (section == "scenario") {
        if (key == "scenario" || !scenario_key(key, value))
          fail("unknown key '" + std::string(key) + "' in [scenario]");
      } else if (section == "nodes") {
        if (key != "costs") fail("unknown key '" + std::string(key) + "' in [nodes]");
        cfg.costs.clear();
        for (auto c : detail::split(value, ',')) {
          double x = detail::parse_real(c, "costs");
          if (!(x > 0.0)) fail("costs must be positive");
          cfg.costs.push_back(x);
        }
      } else if (section == "churn") {
        if (key != "join" && key != "leave") fail("unknown key '" + std::string(key) + "' in [churn]");
        auto w = detail::words(value);
        if (w.size() != 2) fail(std::string(key) + " expects '<frame> <count>'");
        ChurnSpec c;
        c.frame = detail::parse_number<std::size_t>(w[0], "churn frame");
        std::size_t count = detail::parse_number<std::size_t>(w[1], "churn count");
        if (c.frame < 1) fail("churn frames start at 1");
        if (count < 1) fail("churn count must be >= 1");
        (key == "join" ? c.join : c.leave) = count;
        cfg.churn.push_back(c);
      }
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      fail(msg);
    }
  }
  line_no = 0;
  if (!have_kind) throw ConfigError("missing scenario: set 'kind' in a [scenario] block");
  cfg.schedule.reinit_period = reinit_period;
  cfg.schedule.reinit_on_churn = reinit_on_churn;

  // merge same-frame join/leave lines and order by frame
  std::vector<ChurnSpec> merged;
  for (const auto& c : cfg.churn) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const ChurnSpec& m) { return m.frame == c.frame; });
    if (it == merged.end()) merged.push_back(c);
    else {
      it->join += c.join;
      it->leave += c.leave;
    }
  }
  std::stable_sort(merged.begin(), merged.end(), [](auto& a, auto& b) { return a.frame < b.frame; });
  cfg.churn = std::move(merged);
  cfg.validate();
  return cfg;
}

/// Normalized configuration text: every setting spelled out, so equal
/// configurations hash equally however they were written.
inline std::string canonical_text(const ExperimentConfig& cfg) {
  std::ostringstream o;
  o.precision(17);
  o << "seed = " << cfg.seed << "\n";
  o << "frame_length = " << cfg.frame_length << "\n";
  o << "p_global_min = " << cfg.p_global_min << "\n";
  const auto& s = cfg.schedule;
  o << "kappa = ";
  switch (s.kind) {
    case Schedule::Kind::reciprocal: o << "reciprocal"; break;
    case Schedule::Kind::constant: o << "constant " << s.constant_value; break;
    case Schedule::Kind::table:
      o << "table ";
      for (std::size_t i = 0; i < s.table.size(); ++i) o << (i ? ", " : "") << s.table[i];
      break;
  }
  o << "\nkappa_reinit_period = " << s.reinit_period << "\n";
  o << "reinit_kappa = " << (s.reinit_on_churn ? "true" : "false") << "\n";
  o << "mode = " << (cfg.mode == LearningMode::stochastic ? "stochastic" : "expected") << "\n";
  o << "\n[scenario]\nkind = " << to_string(cfg.scenario.kind) << "\n";
  o << "n = " << cfg.scenario.n << "\n";
  o << "n_range = " << cfg.scenario.n_min << ".." << cfg.scenario.n_max << "\n";
  o << "frames = " << cfg.scenario.frames << "\n";
  o << "replicates = " << cfg.scenario.replicates << "\n";
  if (!cfg.costs.empty()) {
    o << "\n[nodes]\ncosts = ";
    for (std::size_t i = 0; i < cfg.costs.size(); ++i) o << (i ? ", " : "") << cfg.costs[i];
    o << "\n";
  }
  if (!cfg.churn.empty()) {
    o << "\n[churn]\n";
    for (const auto& c : cfg.churn) {
      if (c.leave) o << "leave = " << c.frame << " " << c.leave << "\n";
      if (c.join) o << "join = " << c.frame << " " << c.join << "\n";
    }
  }
  return o.str();
}

/// FNV-1a of the configuration text, for run manifests.
inline std::uint64_t config_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace aoigame
