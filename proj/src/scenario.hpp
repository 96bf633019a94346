#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sim.hpp"
#include "traffic.hpp"

namespace ccr::scenario {

struct SweepSpec {
  std::vector<double> gamma_mbps;
  std::vector<int> bs_count;
  std::vector<double> fc_hz;
  std::vector<double> alpha;
  std::vector<double> lambda_m_t_m;
  int trials_per_point = 400;
};

/// Parsed, validated configuration document. `raw` keeps the canonical JSON
/// (defaults folded in by the preset merge, not re-serialized) for hashing.
struct Scenario {
  nlohmann::json raw;
  sim::TrialConfig trial;

  traffic::RoadCellIncidence incidence;
  double channels_total = 10.0;
  traffic::AllocationPolicy policy = traffic::AllocationPolicy::kBalancedFair;
  double min_spacing_m = 5.0;

  SweepSpec sweeps;
  std::optional<traffic::CommRequirements> requirements;

  std::string config_hash() const;
};

/// Throws ccr::ConfigError naming the offending key on schema violations.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario scenario_from_text(const std::string& json_text);

/// `desk` (11x21 grid, 9 BSs, 1000 trials) or `paper` (11x51 grid, 21 BSs).
/// Overrides are deep-merged on top of the preset document.
Scenario scenario_from_preset(const std::string& name, const std::string& overrides_json_or_empty);
std::string preset_text(const std::string& name);

nlohmann::json deep_merge(nlohmann::json base, const nlohmann::json& overlay);

}  // namespace ccr::scenario
