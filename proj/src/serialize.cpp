#include "serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace ccr::out {

using nlohmann::json;

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) {
      f.close();
      std::remove(tmp.c_str());
      throw Error("failed writing " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("failed to move " + tmp + " into place");
  }
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

json network_json(const net::RoadNetwork& network, const net::EffectiveSpeedMap* esm) {
  json doc;
  doc["intersections"] = json::array();
  for (const auto& n : network.intersections())
    doc["intersections"].push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}});
  doc["segments"] = json::array();
  for (const auto& s : network.segments())
    doc["segments"].push_back(
        {{"id", s.id}, {"a", s.a}, {"b", s.b}, {"length_m", s.length_m}});
  if (network.grid()) {
    const auto& g = *network.grid();
    doc["grid"] = {{"avenues", g.avenues},
                   {"streets", g.streets},
                   {"block_length_m", g.block_length_m},
                   {"block_width_m", g.block_width_m}};
  }
  if (esm != nullptr) {
    json speeds = json::object();
    for (const auto& s : network.segments())
      speeds[std::to_string(s.id)] = esm->speed(s.id);
    doc["esm"] = std::move(speeds);
  }
  return doc;
}

net::RoadNetwork network_from_json(const json& doc) {
  if (!doc.contains("intersections") || !doc.contains("segments"))
    throw ConfigError("network", "document needs 'intersections' and 'segments'");
  std::vector<net::Intersection> nodes;
  for (const auto& n : doc.at("intersections"))
    nodes.push_back({n.at("id").get<net::NodeId>(),
                     {n.at("x").get<double>(), n.at("y").get<double>()}});
  std::vector<net::Segment> segments;
  for (const auto& s : doc.at("segments")) {
    net::Segment seg;
    seg.id = s.at("id").get<net::SegmentId>();
    seg.a = s.at("a").get<net::NodeId>();
    seg.b = s.at("b").get<net::NodeId>();
    seg.length_m = s.at("length_m").get<double>();
    segments.push_back(seg);
  }
  std::optional<net::GridInfo> grid;
  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    grid = net::GridInfo{g.at("avenues").get<int>(), g.at("streets").get<int>(),
                         g.at("block_length_m").get<double>(),
                         g.at("block_width_m").get<double>()};
  }
  net::RoadNetwork network(std::move(nodes), std::move(segments), grid);
  // Midpoints are derived, not stored.
  return network;
}

net::EffectiveSpeedMap esm_from_json(const json& doc, const net::RoadNetwork& network) {
  if (!doc.contains("esm")) throw ConfigError("network.esm", "missing");
  std::vector<double> speeds(network.segment_count(), 0.0);
  for (const auto& [key, value] : doc.at("esm").items()) {
    auto id = static_cast<std::size_t>(std::stol(key));
    if (id >= speeds.size()) throw ConfigError("network.esm", "unknown segment id " + key);
    speeds[id] = value.get<double>();
  }
  for (std::size_t i = 0; i < speeds.size(); ++i)
    if (!(speeds[i] > 0.0))
      throw ConfigError("network.esm", "segment " + std::to_string(i) + " has no speed");
  return net::EffectiveSpeedMap(std::move(speeds));
}

json cells_json(const std::vector<radio::GammaRateCell>& cells) {
  json arr = json::array();
  for (const auto& cell : cells) {
    json c;
    c["bs"] = cell.bs_id;
    c["gamma_mbps"] = cell.gamma_mbps;
    c["epsilon"] = cell.epsilon;
    c["intersections"] = cell.covered_intersections;
    c["segments"] = cell.covered_segments;
    json partial = json::array();
    for (const auto& p : cell.partially_covered_segments)
      partial.push_back(
          {{"segment", p.segment}, {"from", p.interval.lo}, {"to", p.interval.hi}});
    c["partial_segments"] = std::move(partial);
    arr.push_back(std::move(c));
  }
  return arr;
}

json route_json(const routing::Route& route) {
  json doc;
  doc["scheme"] = route.scheme;
  doc["src"] = route.src;
  doc["dst"] = route.dst;
  doc["gamma_used_mbps"] = route.gamma_used_mbps;
  doc["total_time_s"] = route.total_time_s;
  json ts = json::array();
  for (const auto& t : route.traversals)
    ts.push_back({{"segment", t.segment},
                  {"from", t.from_fraction},
                  {"to", t.to_fraction},
                  {"time_s", t.time_s}});
  doc["traversals"] = std::move(ts);
  if (route.cc_switch_index) doc["cc_switch_index"] = *route.cc_switch_index;
  if (!route.cell_walk.empty()) doc["cell_walk"] = route.cell_walk;
  return doc;
}

std::string route_csv(const routing::Route& route) {
  std::ostringstream os;
  os << "scheme,segment,from_fraction,to_fraction,time_s,gamma_used_mbps\n";
  char buf[160];
  for (const auto& t : route.traversals) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.12g,%.12g,%.12g,%.12g\n", route.scheme.c_str(),
                  t.segment, t.from_fraction, t.to_fraction, t.time_s, route.gamma_used_mbps);
    os << buf;
  }
  return os.str();
}

json balance_json(const traffic::RoadCellIncidence& incidence,
                  const traffic::SpectrumAllocation& balanced,
                  const traffic::SpectrumAllocation& equal_split) {
  json doc;
  doc["policy"] = traffic::to_string(balanced.policy);
  doc["feasible"] = balanced.feasible;
  if (!balanced.feasible) {
    doc["infeasible_road"] = balanced.infeasible_road;
    doc["infeasible_cell"] = balanced.infeasible_cell;
    return doc;
  }
  json entries = json::array();
  for (const auto& e : balanced.entries)
    entries.push_back({{"cell", incidence.cells[e.cell].id},
                       {"road", incidence.roads[e.road].id},
                       {"channels", e.channels},
                       {"flow_av_per_min", e.flow_avps * 60.0}});
  doc["allocation"] = std::move(entries);
  json cells = json::object();
  for (std::size_t c = 0; c < incidence.cells.size(); ++c)
    cells[incidence.cells[c].id] = balanced.channels_for_cell(c);
  doc["channels_by_cell"] = std::move(cells);
  json roads = json::object();
  for (std::size_t r = 0; r < incidence.roads.size(); ++r)
    roads[incidence.roads[r].id] = balanced.road_flow_avps[r] * 60.0;
  doc["road_flow_av_per_min"] = std::move(roads);
  doc["total_av_per_min"] = balanced.total_avps * 60.0;
  doc["equal_split_total_av_per_min"] = equal_split.total_avps * 60.0;
  doc["gain_percent"] =
      equal_split.total_avps > 0.0
          ? 100.0 * (balanced.total_avps / equal_split.total_avps - 1.0)
          : 0.0;
  if (!balanced.warnings.empty()) doc["warnings"] = balanced.warnings;
  return doc;
}

namespace {

std::string csv_header(const CsvMeta& meta) {
  std::ostringstream os;
  os << "# config_hash=" << meta.config_hash << " seed=" << meta.seed << "\n";
  return os.str();
}

}  // namespace

std::string duration_cdf_csv(const sim::MonteCarloResult& result, const CsvMeta& meta) {
  std::ostringstream os;
  os << csv_header(meta) << "scheme,duration_s,cdf\n";
  char buf[96];
  for (const auto& cdf : result.duration_cdf)
    for (std::size_t i = 0; i < cdf.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g\n", cdf.label.c_str(), cdf.values[i],
                    cdf.fractions[i]);
      os << buf;
    }
  return os.str();
}

std::string pc_cdf_csv(const sim::MonteCarloResult& result, const CsvMeta& meta) {
  std::ostringstream os;
  os << csv_header(meta) << "scheme,p_c,cdf\n";
  char buf[96];
  for (const auto& cdf : result.pc_cdf)
    for (std::size_t i = 0; i < cdf.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g\n", cdf.label.c_str(), cdf.values[i],
                    cdf.fractions[i]);
      os << buf;
    }
  return os.str();
}

std::string routing_sweep_csv(const std::vector<sim::RoutingSweepRow>& rows,
                              const std::string& axis_name, bool with_success, bool with_pc,
                              const CsvMeta& meta) {
  std::ostringstream os;
  os << csv_header(meta) << axis_name << ",scheme";
  if (with_success) os << ",success_pct";
  if (with_pc) os << ",mean_p_c";
  os << "\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%s", row.axis_value, sim::to_string(row.scheme));
    os << buf;
    if (with_success) {
      std::snprintf(buf, sizeof(buf), ",%.12g", row.success_pct);
      os << buf;
    }
    if (with_pc) {
      std::snprintf(buf, sizeof(buf), ",%.12g", row.mean_p_c);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::string traffic_sweep_csv(const std::vector<sim::TrafficSweepRow>& rows,
                              const std::string& axis_name, const CsvMeta& meta) {
  std::ostringstream os;
  os << csv_header(meta) << axis_name << ",alpha,policy,throughput_av_per_min\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%s,%.12g\n", row.axis_value, row.alpha,
                  row.policy.c_str(), row.throughput_av_per_min);
    os << buf;
  }
  return os.str();
}

json montecarlo_summary_json(const sim::MonteCarloResult& result, const CsvMeta& meta) {
  json doc;
  doc["config_hash"] = meta.config_hash;
  doc["seed"] = meta.seed;
  json schemes = json::array();
  for (const auto& s : result.stats)
    schemes.push_back({{"scheme", sim::to_string(s.scheme)},
                       {"trials", s.trials},
                       {"routed", s.routed},
                       {"succeeded", s.succeeded},
                       {"success_pct", s.success_pct},
                       {"mean_p_c", s.mean_p_c},
                       {"mean_duration_s", s.mean_duration_s}});
  doc["schemes"] = std::move(schemes);
  return doc;
}

}  // namespace ccr::out
