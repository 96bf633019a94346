#pragma once

#include <algorithm>
#include <vector>

#include "net.hpp"
#include "radio.hpp"
#include "routing.hpp"

namespace ccr::testutil {

inline radio::ChannelModel model() {
  radio::ChannelModel m;
  m.pl_intercept_db = 41.0;
  m.pl_slope_db_per_decade = 22.7;
  m.shadowing_std_db = 4.0;
  m.noise_power_dbm = -94.0;
  m.bandwidth_hz = 20e6;
  m.doppler_penalty_coeff = 1.0;
  m.measurement_interval_s = 1e-3;
  return m;
}

inline radio::BaseStation bs_at(double x, double y, int id = 0) {
  radio::BaseStation bs;
  bs.id = id;
  bs.position = {x, y};
  bs.carrier_frequency_hz = 2e9;
  bs.tx_power_dbm = 46.0;
  return bs;
}

/// Gamma whose coverage disc has roughly this radius at the given speed.
inline double gamma_for_radius(const radio::BaseStation& bs, double radius_m, double speed_mps) {
  return radio::rate_quantile_mbps({bs.position.x + radius_m, bs.position.y}, bs, speed_mps,
                                   0.01, model());
}

inline std::vector<radio::GammaRateCell> cells_for(const net::RoadNetwork& g,
                                                   const std::vector<radio::BaseStation>& bss,
                                                   double gamma,
                                                   const net::EffectiveSpeedMap& esm,
                                                   double reference = 20.0) {
  radio::SpeedContext speeds{&esm, reference};
  std::vector<radio::GammaRateCell> cells;
  for (const auto& bs : bss)
    cells.push_back(radio::compute_gamma_cell(g, bs, gamma, 0.01, speeds, 5.0, model()));
  return cells;
}

/// All-pairs shortest travel times over the full network (independent of the
/// Dijkstra implementations under test).
inline std::vector<std::vector<double>> floyd_warshall(const net::RoadNetwork& g,
                                                       const net::EffectiveSpeedMap& esm) {
  const std::size_t n = g.intersection_count();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, routing::kInfTime));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& seg : g.segments()) {
    double t = seg.length_m / esm.speed(seg.id);
    auto a = static_cast<std::size_t>(seg.a), b = static_cast<std::size_t>(seg.b);
    d[a][b] = std::min(d[a][b], t);
    d[b][a] = std::min(d[b][a], t);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline Point position_on(const net::RoadNetwork& g, net::SegmentId sid, double fraction) {
  const auto& seg = g.segment(sid);
  return lerp(g.intersection(seg.a).position, g.intersection(seg.b).position, fraction);
}

/// The traversals must form a connected walk from src to dst and the total
/// must equal the per-traversal sum.
inline bool route_is_valid_walk(const net::RoadNetwork& g, const routing::Route& r) {
  Point cur = g.intersection(r.src).position;
  double sum = 0.0;
  for (const auto& t : r.traversals) {
    Point from = position_on(g, t.segment, t.from_fraction);
    if (distance(cur, from) > 1e-6) return false;
    cur = position_on(g, t.segment, t.to_fraction);
    sum += t.time_s;
  }
  if (distance(cur, g.intersection(r.dst).position) > 1e-6) return false;
  return std::abs(sum - r.total_time_s) <= 1e-9 * std::max(1.0, std::abs(r.total_time_s));
}

/// Post-hoc feasibility: every traversed point (sampled every ~2 m) clears
/// gamma at the ESM speed for at least one base station. Independent of the
/// router's own coverage bookkeeping.
inline bool route_satisfies_gamma(const net::RoadNetwork& g, const net::EffectiveSpeedMap& esm,
                                  const std::vector<radio::BaseStation>& bss,
                                  const routing::Route& r, double gamma) {
  auto m = model();
  for (const auto& t : r.traversals) {
    const auto& seg = g.segment(t.segment);
    double speed = esm.speed(t.segment);
    double lo = std::min(t.from_fraction, t.to_fraction);
    double hi = std::max(t.from_fraction, t.to_fraction);
    int steps = std::max(2, static_cast<int>(seg.length_m * (hi - lo) / 2.0));
    for (int k = 0; k <= steps; ++k) {
      double f = lo + (hi - lo) * k / steps;
      Point p = position_on(g, t.segment, f);
      double best = 0.0;
      for (const auto& bs : bss)
        best = std::max(best, radio::rate_quantile_mbps(p, bs, speed, 0.01, m));
      if (best + 1e-6 < gamma) return false;
    }
  }
  return true;
}

}  // namespace ccr::testutil
