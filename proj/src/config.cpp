#include "clocksync/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "clocksync/errors.hpp"

namespace clocksync {

namespace {

using nlohmann::json;

struct RateField {
  const char* name;
  double PhysicalParams::*member;
};

constexpr RateField kRateFields[] = {
    {"omega1", &PhysicalParams::omega1}, {"omega2", &PhysicalParams::omega2},
    {"gamma1", &PhysicalParams::gamma1}, {"gamma2", &PhysicalParams::gamma2},
    {"kappa", &PhysicalParams::kappa},   {"detuning", &PhysicalParams::detuning},
};

struct PlainField {
  const char* name;
  double PhysicalParams::*member;
};

constexpr PlainField kPlainFields[] = {
    {"nth1", &PhysicalParams::nth1},
    {"nth2", &PhysicalParams::nth2},
    {"na_in", &PhysicalParams::na_in},
};

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return j.get<double>();
}

void apply_params(PhysicalParams& p, const json& j) {
  if (!j.is_object()) throw ConfigError("config: 'params' must be an object");
  std::set<std::string> known;
  for (const RateField& f : kRateFields) {
    const std::string hz = std::string(f.name) + "_hz", rad = std::string(f.name) + "_rad";
    known.insert(hz);
    known.insert(rad);
    if (j.contains(hz) && j.contains(rad))
      throw ConfigError("config: give either '" + hz + "' or '" + rad + "', not both");
    if (j.contains(hz)) p.*f.member = kTwoPi * number(j.at(hz), hz);
    if (j.contains(rad)) p.*f.member = number(j.at(rad), rad);
  }
  for (const PlainField& f : kPlainFields) {
    known.insert(f.name);
    if (j.contains(f.name)) p.*f.member = number(j.at(f.name), f.name);
  }
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("config: unknown key 'params." + key + "'");
}

TickOptions parse_ticks(const json& j, TickOptions t, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "smoothing_window")
      t.smoothing_window = number(value, where + "." + key);
    else if (key == "amplitude_floor")
      t.amplitude_floor = number(value, where + "." + key);
    else
      throw ConfigError("config: unknown key '" + where + "." + key + "'");
  }
  return t;
}

std::vector<double> parse_grid(const json& j) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const json& v : j) grid.push_back(number(v, "grid"));
  } else if (j.is_object()) {
    double start = 0.0, stop = 0.05;
    int points = 26;
    for (const auto& [key, value] : j.items()) {
      if (key == "start")
        start = number(value, "grid.start");
      else if (key == "stop")
        stop = number(value, "grid.stop");
      else if (key == "points") {
        if (!value.is_number_integer()) throw ConfigError("config: 'grid.points' must be an integer");
        points = value.get<int>();
      } else
        throw ConfigError("config: unknown key 'grid." + key + "'");
    }
    if (points < 2) throw ConfigError("config: 'grid.points' must be >= 2");
    for (int k = 0; k < points; ++k) grid.push_back(start + (stop - start) * k / (points - 1));
  } else {
    throw ConfigError("config: 'grid' must be an array or {start, stop, points}");
  }
  if (grid.empty()) throw ConfigError("config: empty grid");
  for (double g : grid)
    if (!(g >= 0.0)) throw ConfigError("config: grid values must be >= 0");
  return grid;
}

void validate(const RunConfig& c) {
  c.params.validate();
  if (!(c.g_over_kappa >= 0.0)) throw ConfigError("config: g_over_kappa must be >= 0");
  if (c.n_traj < 1) throw ConfigError("config: n_traj must be >= 1");
  if (c.duration < 0.0 || c.dt < 0.0) throw ConfigError("config: duration and dt must be >= 0");
  for (const TickOptions* t : {&c.deviation_ticks, &c.accuracy_ticks})
    if (t->smoothing_window < 0.0 || t->amplitude_floor < 0.0 || t->amplitude_floor >= 1.0)
      throw ConfigError("config: tick smoothing must be >= 0 and amplitude floor in [0, 1)");
}

}  // namespace

std::string to_string(SweepProtocol protocol) {
  switch (protocol) {
    case SweepProtocol::analytic: return "analytic";
    case SweepProtocol::monte_carlo: return "monte-carlo";
    case SweepProtocol::both: return "both";
  }
  return "both";
}

std::string to_string(CouplingSign sign) {
  return sign == CouplingSign::opposite ? "opposite" : "same";
}

SweepProtocol parse_protocol(const std::string& text) {
  if (text == "analytic") return SweepProtocol::analytic;
  if (text == "monte-carlo") return SweepProtocol::monte_carlo;
  if (text == "both") return SweepProtocol::both;
  throw ConfigError("unknown protocol '" + text + "' (analytic, monte-carlo, both)");
}

CouplingSign parse_sign(const std::string& text) {
  if (text == "opposite") return CouplingSign::opposite;
  if (text == "same") return CouplingSign::same;
  throw ConfigError("unknown coupling sign '" + text + "' (opposite, same)");
}

void merge_config(RunConfig& c, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");

  // The preset goes first so explicit parameters can override it.
  if (j.contains("preset")) {
    if (!j.at("preset").is_string()) throw ConfigError("config: 'preset' must be a string");
    c.preset = j.at("preset").get<std::string>();
    c.params = preset(c.preset);
  }
  for (const auto& [key, value] : j.items()) {
    auto text = [&] {
      if (!value.is_string()) throw ConfigError("config: '" + key + "' must be a string");
      return value.get<std::string>();
    };
    if (key == "preset") {
      continue;
    } else if (key == "params") {
      apply_params(c.params, value);
      c.preset = "custom";
    } else if (key == "coupling_sign") {
      c.sign = parse_sign(text());
    } else if (key == "g_over_kappa") {
      c.g_over_kappa = number(value, key);
    } else if (key == "grid") {
      c.grid = parse_grid(value);
    } else if (key == "protocol") {
      c.protocol = parse_protocol(text());
    } else if (key == "duration") {
      c.duration = number(value, key);
    } else if (key == "dt") {
      c.dt = number(value, key);
    } else if (key == "burn_in") {
      c.burn_in = number(value, key);
    } else if (key == "n_traj") {
      if (!value.is_number_integer()) throw ConfigError("config: 'n_traj' must be an integer");
      c.n_traj = value.get<int>();
    } else if (key == "master_seed") {
      if (!value.is_number_unsigned())
        throw ConfigError("config: 'master_seed' must be a non-negative integer");
      c.master_seed = value.get<std::uint64_t>();
    } else if (key == "deviation_ticks") {
      c.deviation_ticks = parse_ticks(value, c.deviation_ticks, key);
    } else if (key == "accuracy_ticks") {
      c.accuracy_ticks = parse_ticks(value, c.accuracy_ticks, key);
    } else if (key == "spectrum_offset_hz") {
      c.spectrum_offset_hz = number(value, key);
    } else if (key == "out") {
      c.out = text();
    } else if (key == "svg") {
      if (!value.is_boolean()) throw ConfigError("config: 'svg' must be a boolean");
      c.svg = value.get<bool>();
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  validate(c);
}

RunConfig parse_config(const std::string& json_text) {
  RunConfig c;
  merge_config(c, json_text);
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_to_json(const RunConfig& c) {
  const PhysicalParams& p = c.params;
  json params = {
      {"omega1_rad", p.omega1}, {"omega2_rad", p.omega2}, {"gamma1_rad", p.gamma1},
      {"gamma2_rad", p.gamma2}, {"kappa_rad", p.kappa},   {"detuning_rad", p.detuning},
      {"nth1", p.nth1},         {"nth2", p.nth2},         {"na_in", p.na_in},
  };
  auto ticks = [](const TickOptions& t) {
    return json{{"smoothing_window", t.smoothing_window}, {"amplitude_floor", t.amplitude_floor}};
  };
  json j = {
      {"preset", c.preset},
      {"params", params},
      {"coupling_sign", to_string(c.sign)},
      {"g_over_kappa", c.g_over_kappa},
      {"grid", c.grid},
      {"protocol", to_string(c.protocol)},
      {"duration", c.duration},
      {"dt", c.dt},
      {"burn_in", c.burn_in},
      {"n_traj", c.n_traj},
      {"master_seed", c.master_seed},
      {"deviation_ticks", ticks(c.deviation_ticks)},
      {"accuracy_ticks", ticks(c.accuracy_ticks)},
      {"spectrum_offset_hz", c.spectrum_offset_hz},
      {"out", c.out},
      {"svg", c.svg},
  };
  return j.dump(2) + "\n";
}

}  // namespace clocksync
