#include "scenario.hpp"

#include <limits>

#include "error.hpp"
#include "serialize.hpp"

namespace ccr::scenario {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError(path + "." + key, "unknown key");
  }
}

template <typename T>
T convert(const json& value, const std::string& full_path) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(full_path, "wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return convert<T>(j.at(key), path + "." + key);
}

template <typename T>
T require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing");
  return convert<T>(j.at(key), path + "." + key);
}

traffic::TddConfig parse_tdd(const json& j, const std::string& path,
                             const traffic::TddConfig& defaults) {
  check_keys(j, path,
             {"t_slot_s", "t_pilot_s", "t_message_s", "message_rate_hz", "mimo_group_size",
              "alpha", "carrier_frequency_hz", "light_speed_mps", "speed_limit_mps",
              "max_avs_per_channel", "max_linear_channels"});
  traffic::TddConfig tdd = defaults;
  tdd.t_slot_s = get_or(j, path, "t_slot_s", tdd.t_slot_s);
  tdd.t_pilot_s = get_or(j, path, "t_pilot_s", tdd.t_pilot_s);
  tdd.t_message_s = get_or(j, path, "t_message_s", tdd.t_message_s);
  tdd.message_rate_hz = get_or(j, path, "message_rate_hz", tdd.message_rate_hz);
  tdd.mimo_group_size = get_or(j, path, "mimo_group_size", tdd.mimo_group_size);
  tdd.alpha = get_or(j, path, "alpha", tdd.alpha);
  tdd.carrier_frequency_hz = get_or(j, path, "carrier_frequency_hz", tdd.carrier_frequency_hz);
  tdd.light_speed_mps = get_or(j, path, "light_speed_mps", tdd.light_speed_mps);
  tdd.speed_limit_mps = get_or(j, path, "speed_limit_mps", tdd.speed_limit_mps);
  tdd.max_avs_per_channel = get_or(j, path, "max_avs_per_channel", tdd.max_avs_per_channel);
  tdd.max_linear_channels = get_or(j, path, "max_linear_channels", tdd.max_linear_channels);
  tdd.validate();
  return tdd;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigError("$", "document must be a JSON object");
  check_keys(doc, "$",
             {"version", "seed", "grid", "base_stations", "channel_model", "coverage", "routing",
              "speeds", "trials", "sweeps", "traffic", "tdd_defaults", "comm_requirements"});

  Scenario sc;
  sc.raw = doc;
  int version = get_or(doc, "$", "version", 1);
  if (version != 1) throw ConfigError("$.version", "unsupported version");
  sc.trial.seed = get_or<std::uint64_t>(doc, "$", "seed", 1);

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    check_keys(g, "$.grid", {"avenues", "streets", "block_length_m", "block_width_m"});
    sc.trial.avenues = get_or(g, "$.grid", "avenues", sc.trial.avenues);
    sc.trial.streets = get_or(g, "$.grid", "streets", sc.trial.streets);
    sc.trial.block_length_m = get_or(g, "$.grid", "block_length_m", sc.trial.block_length_m);
    sc.trial.block_width_m = get_or(g, "$.grid", "block_width_m", sc.trial.block_width_m);
    if (sc.trial.avenues < 2) throw ConfigError("$.grid.avenues", "must be >= 2");
    if (sc.trial.streets < 2) throw ConfigError("$.grid.streets", "must be >= 2");
    if (!(sc.trial.block_length_m > 0)) throw ConfigError("$.grid.block_length_m", "must be > 0");
    if (!(sc.trial.block_width_m > 0)) throw ConfigError("$.grid.block_width_m", "must be > 0");
  }

  if (doc.contains("base_stations")) {
    const json& b = doc.at("base_stations");
    check_keys(b, "$.base_stations",
               {"count", "placement", "tx_antennas", "tx_power_dbm", "carrier_frequency_hz",
                "channels"});
    sc.trial.bs_count = get_or(b, "$.base_stations", "count", sc.trial.bs_count);
    if (sc.trial.bs_count < 1) throw ConfigError("$.base_stations.count", "must be >= 1");
    sc.trial.placement = sim::placement_from_string(
        get_or<std::string>(b, "$.base_stations", "placement", "lattice"));
    sc.trial.bs_tx_antennas = get_or(b, "$.base_stations", "tx_antennas", sc.trial.bs_tx_antennas);
    if (sc.trial.bs_tx_antennas < 1) throw ConfigError("$.base_stations.tx_antennas", "must be >= 1");
    sc.trial.bs_tx_power_dbm =
        get_or(b, "$.base_stations", "tx_power_dbm", sc.trial.bs_tx_power_dbm);
    sc.trial.bs_carrier_frequency_hz =
        get_or(b, "$.base_stations", "carrier_frequency_hz", sc.trial.bs_carrier_frequency_hz);
    if (!(sc.trial.bs_carrier_frequency_hz > 0))
      throw ConfigError("$.base_stations.carrier_frequency_hz", "must be > 0");
    sc.trial.bs_channels = get_or(b, "$.base_stations", "channels", sc.trial.bs_channels);
  }

  if (doc.contains("channel_model")) {
    const json& c = doc.at("channel_model");
    check_keys(c, "$.channel_model",
               {"pl_intercept_db", "pl_slope_db_per_decade", "shadowing_std_db",
                "noise_power_dbm", "bandwidth_hz", "doppler_penalty_coeff", "tau_s"});
    auto& m = sc.trial.channel;
    m.pl_intercept_db = get_or(c, "$.channel_model", "pl_intercept_db", m.pl_intercept_db);
    m.pl_slope_db_per_decade =
        get_or(c, "$.channel_model", "pl_slope_db_per_decade", m.pl_slope_db_per_decade);
    m.shadowing_std_db = get_or(c, "$.channel_model", "shadowing_std_db", m.shadowing_std_db);
    if (m.shadowing_std_db < 0) throw ConfigError("$.channel_model.shadowing_std_db", "must be >= 0");
    m.noise_power_dbm = get_or(c, "$.channel_model", "noise_power_dbm", m.noise_power_dbm);
    m.bandwidth_hz = get_or(c, "$.channel_model", "bandwidth_hz", m.bandwidth_hz);
    if (!(m.bandwidth_hz > 0)) throw ConfigError("$.channel_model.bandwidth_hz", "must be > 0");
    m.doppler_penalty_coeff =
        get_or(c, "$.channel_model", "doppler_penalty_coeff", m.doppler_penalty_coeff);
    m.measurement_interval_s = get_or(c, "$.channel_model", "tau_s", m.measurement_interval_s);
    if (!(m.measurement_interval_s > 0)) throw ConfigError("$.channel_model.tau_s", "must be > 0");
  }

  if (doc.contains("coverage")) {
    const json& c = doc.at("coverage");
    check_keys(c, "$.coverage",
               {"gamma_mbps", "epsilon", "sample_spacing_m", "reference_speed_mps"});
    sc.trial.gamma_mbps = get_or(c, "$.coverage", "gamma_mbps", sc.trial.gamma_mbps);
    if (sc.trial.gamma_mbps < 0) throw ConfigError("$.coverage.gamma_mbps", "must be >= 0");
    sc.trial.epsilon = get_or(c, "$.coverage", "epsilon", sc.trial.epsilon);
    if (!(sc.trial.epsilon > 0 && sc.trial.epsilon < 1))
      throw ConfigError("$.coverage.epsilon", "must be in (0,1)");
    sc.trial.sample_spacing_m =
        get_or(c, "$.coverage", "sample_spacing_m", sc.trial.sample_spacing_m);
    if (!(sc.trial.sample_spacing_m > 0))
      throw ConfigError("$.coverage.sample_spacing_m", "must be > 0");
    sc.trial.reference_speed_mps =
        get_or(c, "$.coverage", "reference_speed_mps", sc.trial.reference_speed_mps);
    if (!(sc.trial.reference_speed_mps > 0))
      throw ConfigError("$.coverage.reference_speed_mps", "must be > 0");
  }

  if (doc.contains("routing")) {
    const json& r = doc.at("routing");
    check_keys(r, "$.routing",
               {"gamma_floor_mbps", "gamma_step_mbps", "max_paths", "max_segments"});
    sc.trial.gamma_floor_mbps =
        get_or(r, "$.routing", "gamma_floor_mbps", sc.trial.gamma_floor_mbps);
    if (sc.trial.gamma_floor_mbps < 0)
      throw ConfigError("$.routing.gamma_floor_mbps", "must be >= 0");
    sc.trial.gamma_step_mbps = get_or(r, "$.routing", "gamma_step_mbps", sc.trial.gamma_step_mbps);
    if (!(sc.trial.gamma_step_mbps > 0))
      throw ConfigError("$.routing.gamma_step_mbps", "must be > 0");
    sc.trial.max_paths = get_or<std::size_t>(r, "$.routing", "max_paths", sc.trial.max_paths);
    sc.trial.max_segments =
        get_or<std::size_t>(r, "$.routing", "max_segments", sc.trial.max_segments);
  }

  if (doc.contains("speeds")) {
    const json& s = doc.at("speeds");
    check_keys(s, "$.speeds", {"set_mps"});
    sc.trial.speed_set_mps =
        get_or(s, "$.speeds", "set_mps", sc.trial.speed_set_mps);
    if (sc.trial.speed_set_mps.empty()) throw ConfigError("$.speeds.set_mps", "must not be empty");
    for (double v : sc.trial.speed_set_mps)
      if (!(v > 0)) throw ConfigError("$.speeds.set_mps", "speeds must be > 0");
  }

  if (doc.contains("trials")) {
    const json& t = doc.at("trials");
    check_keys(t, "$.trials",
               {"count", "schemes", "endpoints", "coverage_mode", "workers", "tau_s"});
    sc.trial.trial_count = get_or(t, "$.trials", "count", sc.trial.trial_count);
    if (sc.trial.trial_count < 1) throw ConfigError("$.trials.count", "must be >= 1");
    if (t.contains("schemes")) {
      sc.trial.schemes.clear();
      for (const auto& name : t.at("schemes"))
        sc.trial.schemes.push_back(
            sim::scheme_from_string(convert<std::string>(name, "$.trials.schemes")));
      if (sc.trial.schemes.empty()) throw ConfigError("$.trials.schemes", "must not be empty");
    }
    std::string ep = get_or<std::string>(t, "$.trials", "endpoints", "corners");
    if (ep == "corners")
      sc.trial.endpoints = sim::Endpoints::kCorners;
    else if (ep == "random")
      sc.trial.endpoints = sim::Endpoints::kRandom;
    else
      throw ConfigError("$.trials.endpoints", "must be 'corners' or 'random'");
    std::string mode = get_or<std::string>(t, "$.trials", "coverage_mode", "quantile");
    if (mode == "quantile")
      sc.trial.coverage_mode = sim::CoverageMode::kQuantile;
    else if (mode == "realized")
      sc.trial.coverage_mode = sim::CoverageMode::kRealized;
    else
      throw ConfigError("$.trials.coverage_mode", "must be 'quantile' or 'realized'");
    sc.trial.workers = get_or(t, "$.trials", "workers", sc.trial.workers);
    sc.trial.tau_s = get_or(t, "$.trials", "tau_s", sc.trial.tau_s);
    if (!(sc.trial.tau_s > 0)) throw ConfigError("$.trials.tau_s", "must be > 0");
  }

  if (doc.contains("sweeps")) {
    const json& s = doc.at("sweeps");
    check_keys(s, "$.sweeps",
               {"gamma_mbps", "bs_count", "fc_hz", "alpha", "lambda_m_t_m", "trials_per_point"});
    sc.sweeps.gamma_mbps = get_or(s, "$.sweeps", "gamma_mbps", sc.sweeps.gamma_mbps);
    sc.sweeps.bs_count = get_or(s, "$.sweeps", "bs_count", sc.sweeps.bs_count);
    sc.sweeps.fc_hz = get_or(s, "$.sweeps", "fc_hz", sc.sweeps.fc_hz);
    sc.sweeps.alpha = get_or(s, "$.sweeps", "alpha", sc.sweeps.alpha);
    sc.sweeps.lambda_m_t_m = get_or(s, "$.sweeps", "lambda_m_t_m", sc.sweeps.lambda_m_t_m);
    sc.sweeps.trials_per_point =
        get_or(s, "$.sweeps", "trials_per_point", sc.sweeps.trials_per_point);
    if (sc.sweeps.trials_per_point < 1)
      throw ConfigError("$.sweeps.trials_per_point", "must be >= 1");
  }

  traffic::TddConfig tdd_defaults;
  if (doc.contains("tdd_defaults"))
    tdd_defaults = parse_tdd(doc.at("tdd_defaults"), "$.tdd_defaults", traffic::TddConfig{});

  if (doc.contains("traffic")) {
    const json& t = doc.at("traffic");
    check_keys(t, "$.traffic", {"channels_total", "policy", "min_spacing_m", "cells", "roads"});
    sc.channels_total = get_or(t, "$.traffic", "channels_total", sc.channels_total);
    if (!(sc.channels_total > 0)) throw ConfigError("$.traffic.channels_total", "must be > 0");
    sc.policy = traffic::allocation_policy_from_string(
        get_or<std::string>(t, "$.traffic", "policy", "fair"));
    sc.min_spacing_m = get_or(t, "$.traffic", "min_spacing_m", sc.min_spacing_m);
    if (t.contains("cells")) {
      for (const auto& c : t.at("cells")) {
        check_keys(c, "$.traffic.cells", {"id", "lanes", "lane_width_m", "coverage_m2", "tdd"});
        traffic::TrafficCell cell;
        cell.id = require<std::string>(c, "$.traffic.cells", "id");
        cell.geometry.lanes = get_or(c, "$.traffic.cells", "lanes", 0);
        cell.geometry.lane_width_m = get_or(c, "$.traffic.cells", "lane_width_m", 3.0);
        cell.geometry.coverage_m2 = require<double>(c, "$.traffic.cells", "coverage_m2");
        cell.tdd = c.contains("tdd") ? parse_tdd(c.at("tdd"), "$.traffic.cells.tdd", tdd_defaults)
                                     : tdd_defaults;
        sc.incidence.cells.push_back(std::move(cell));
      }
    }
    if (t.contains("roads")) {
      for (const auto& r : t.at("roads")) {
        check_keys(r, "$.traffic.roads", {"id", "lanes", "cells"});
        traffic::Road road;
        road.id = require<std::string>(r, "$.traffic.roads", "id");
        road.lanes = get_or(r, "$.traffic.roads", "lanes", 1);
        road.cells = require<std::vector<std::string>>(r, "$.traffic.roads", "cells");
        sc.incidence.roads.push_back(std::move(road));
      }
    }
    if (!sc.incidence.cells.empty()) sc.incidence.validate();
  }

  if (doc.contains("comm_requirements")) {
    const json& c = doc.at("comm_requirements");
    check_keys(c, "$.comm_requirements", {"reliability", "rate_mbps", "latency_s"});
    traffic::CommRequirements req;
    req.reliability = get_or(c, "$.comm_requirements", "reliability", req.reliability);
    req.rate_mbps = get_or(c, "$.comm_requirements", "rate_mbps", req.rate_mbps);
    req.latency_s = get_or(c, "$.comm_requirements", "latency_s", req.latency_s);
    req.validate();
    sc.requirements = req;
  }

  sc.trial.validate();
  return sc;
}

Scenario scenario_from_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config parse error: ") + e.what());
  }
  return parse_scenario(doc);
}

std::string Scenario::config_hash() const {
  return out::hash_hex(out::fnv1a64(raw.dump()));
}

json deep_merge(json base, const json& overlay) {
  if (!overlay.is_object() || !base.is_object()) return overlay;
  for (const auto& [key, value] : overlay.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object())
      base[key] = deep_merge(base[key], value);
    else
      base[key] = value;
  }
  return base;
}

namespace {

// Two-cell spectrum fixture and TDD parameters shared by both presets.
constexpr const char* kSharedTail = R"( "tdd_defaults": {
    "t_slot_s": 1e-4, "t_pilot_s": 5e-4, "t_message_s": 5e-3, "message_rate_hz": 50.0,
    "mimo_group_size": 10, "alpha": 2.0, "carrier_frequency_hz": 1e9, "light_speed_mps": 3e8
  },
  "traffic": {
    "channels_total": 10.0,
    "policy": "fair",
    "cells": [
      {"id": "red", "lanes": 2, "lane_width_m": 3.0, "coverage_m2": 12000.0},
      {"id": "green", "lanes": 4, "lane_width_m": 3.0, "coverage_m2": 24000.0}
    ],
    "roads": [
      {"id": "horizontal", "lanes": 2, "cells": ["red", "green"]},
      {"id": "vertical", "lanes": 2, "cells": ["green"]}
    ]
  },
  "sweeps": {
    "gamma_mbps": [120.0, 150.0, 180.0, 210.0],
    "bs_count": [4, 6, 9, 12],
    "fc_hz": [5e8, 1e9, 1.5e9, 2e9, 2.5e9, 3e9],
    "alpha": [2.0, 4.0],
    "lambda_m_t_m": [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85],
    "trials_per_point": 400
  }
})";

const std::string kDeskPreset = std::string(R"({
  "version": 1,
  "seed": 1,
  "grid": {"avenues": 11, "streets": 21, "block_length_m": 250.0, "block_width_m": 100.0},
  "base_stations": {"count": 9, "placement": "lattice", "tx_antennas": 128,
                    "tx_power_dbm": 46.0, "carrier_frequency_hz": 2e9, "channels": 1},
  "channel_model": {"pl_intercept_db": 41.0, "pl_slope_db_per_decade": 22.7,
                    "shadowing_std_db": 4.0, "noise_power_dbm": -94.0, "bandwidth_hz": 2e7,
                    "doppler_penalty_coeff": 1.0, "tau_s": 1e-3},
  "coverage": {"gamma_mbps": 150.0, "epsilon": 0.01, "sample_spacing_m": 5.0,
               "reference_speed_mps": 20.0},
  "routing": {"gamma_floor_mbps": 0.0, "gamma_step_mbps": 5.0, "max_paths": 10000,
              "max_segments": 0},
  "speeds": {"set_mps": [10.0, 20.0, 30.0]},
  "trials": {"count": 1000, "schemes": ["two-layer", "greedy", "greedy-cc", "shortest-time"],
             "endpoints": "corners", "coverage_mode": "quantile", "workers": 0, "tau_s": 1e-3},
)") + kSharedTail;

const std::string kPaperPreset = std::string(R"({
  "version": 1,
  "seed": 1,
  "grid": {"avenues": 11, "streets": 51, "block_length_m": 250.0, "block_width_m": 100.0},
  "base_stations": {"count": 21, "placement": "lattice", "tx_antennas": 128,
                    "tx_power_dbm": 46.0, "carrier_frequency_hz": 2e9, "channels": 1},
  "channel_model": {"pl_intercept_db": 41.0, "pl_slope_db_per_decade": 22.7,
                    "shadowing_std_db": 4.0, "noise_power_dbm": -94.0, "bandwidth_hz": 2e7,
                    "doppler_penalty_coeff": 1.0, "tau_s": 1e-3},
  "coverage": {"gamma_mbps": 55.0, "epsilon": 0.01, "sample_spacing_m": 5.0,
               "reference_speed_mps": 20.0},
  "routing": {"gamma_floor_mbps": 0.0, "gamma_step_mbps": 5.0, "max_paths": 10000,
              "max_segments": 0},
  "speeds": {"set_mps": [10.0, 20.0, 30.0]},
  "trials": {"count": 10000, "schemes": ["two-layer", "greedy", "greedy-cc", "shortest-time"],
             "endpoints": "corners", "coverage_mode": "quantile", "workers": 0, "tau_s": 1e-3},
)") + kSharedTail;

}  // namespace

std::string preset_text(const std::string& name) {
  if (name == "desk") return kDeskPreset;
  if (name == "paper") return kPaperPreset;
  throw ConfigError("$.preset", "unknown preset '" + name + "' (use 'desk' or 'paper')");
}

Scenario scenario_from_preset(const std::string& name,
                              const std::string& overrides_json_or_empty) {
  json doc = json::parse(preset_text(name));
  if (!overrides_json_or_empty.empty()) {
    json overlay;
    try {
      overlay = json::parse(overrides_json_or_empty);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("config parse error: ") + e.what());
    }
    doc = deep_merge(doc, overlay);
  }
  return parse_scenario(doc);
}

}  // namespace ccr::scenario
