#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "net.hpp"
#include "radio.hpp"
#include "routing.hpp"
#include "sim.hpp"
#include "traffic.hpp"

namespace ccr::out {

/// Writes through a temp file + rename so no partial output remains on
/// failure.
void write_file_atomic(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& text);
std::string hash_hex(std::uint64_t value);

nlohmann::json network_json(const net::RoadNetwork& network, const net::EffectiveSpeedMap* esm);
net::RoadNetwork network_from_json(const nlohmann::json& doc);
net::EffectiveSpeedMap esm_from_json(const nlohmann::json& doc, const net::RoadNetwork& network);

nlohmann::json cells_json(const std::vector<radio::GammaRateCell>& cells);
nlohmann::json route_json(const routing::Route& route);
std::string route_csv(const routing::Route& route);

nlohmann::json balance_json(const traffic::RoadCellIncidence& incidence,
                            const traffic::SpectrumAllocation& balanced,
                            const traffic::SpectrumAllocation& equal_split);

struct CsvMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
};

std::string duration_cdf_csv(const sim::MonteCarloResult& result, const CsvMeta& meta);
std::string pc_cdf_csv(const sim::MonteCarloResult& result, const CsvMeta& meta);
std::string routing_sweep_csv(const std::vector<sim::RoutingSweepRow>& rows,
                              const std::string& axis_name, bool with_success, bool with_pc,
                              const CsvMeta& meta);
std::string traffic_sweep_csv(const std::vector<sim::TrafficSweepRow>& rows,
                              const std::string& axis_name, const CsvMeta& meta);
nlohmann::json montecarlo_summary_json(const sim::MonteCarloResult& result, const CsvMeta& meta);

}  // namespace ccr::out
