#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "geometry.hpp"
#include "net.hpp"

namespace ccr::radio {

struct BaseStation {
  int id = -1;
  Point position;
  int tx_antennas = 128;
  double carrier_frequency_hz = 2e9;
  double tx_power_dbm = 46.0;
  int channels = 1;
};

/// Simplified downlink rate model: log-distance path loss, log-normal
/// shadowing with an analytic quantile, Shannon rate over the channel
/// bandwidth, and a multiplicative penalty for channel aging at speed
/// (1 / (1 + k * f_D(v) * tau)).
struct ChannelModel {
  double pl_intercept_db = 41.0;
  double pl_slope_db_per_decade = 22.7;
  double shadowing_std_db = 4.0;
  double noise_power_dbm = -94.0;
  double bandwidth_hz = 20e6;
  double doppler_penalty_coeff = 1.0;
  double measurement_interval_s = 1e-3;  // tau
};

struct RateSample {
  Point location;
  double speed_mps = 0.0;
  double rate_mbps = 0.0;
};

/// Rates within this margin of gamma count as covered; absorbs float noise
/// in the sampling pipeline.
inline constexpr double kRateTol = 1e-9;

double inverse_normal_cdf(double p);

/// Log-distance loss; clamped below 1 m so the intercept is the best case.
double path_loss_db(double distance_m, const ChannelModel& model);

/// Rate exceeded with probability 1-epsilon at this location and speed.
/// Monotone non-increasing in distance and speed, non-decreasing in epsilon.
double rate_quantile_mbps(const Point& location, const BaseStation& bs, double speed_mps,
                          double epsilon, const ChannelModel& model);

/// One realized measurement (fresh shadowing draw).
RateSample realized_rate(const Point& location, const BaseStation& bs, double speed_mps,
                         const ChannelModel& model, std::mt19937_64& rng);

/// Fraction interval along a segment (relative to endpoint `a`).
struct CoverageInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Coverage evaluation speeds: segments use their ESM speed when available,
/// otherwise the reference speed. Intersections are evaluated at the highest
/// incident segment speed, so RI coverage holds for every approach.
struct SpeedContext {
  const net::EffectiveSpeedMap* esm = nullptr;
  double reference_mps = 20.0;

  double segment_speed(net::SegmentId id) const {
    return esm != nullptr ? esm->speed(id) : reference_mps;
  }
  double intersection_speed(const net::RoadNetwork& network, net::NodeId id) const;
};

/// One BS's contiguous coverage region at threshold gamma: the covered
/// intersections, the fully covered segments, and the partially covered
/// fraction intervals. `raw_coverage` keeps the per-segment covered interval
/// before the contiguity filter; trip coverage accounting uses it.
struct GammaRateCell {
  int bs_id = -1;
  double gamma_mbps = 0.0;
  double epsilon = 0.0;

  std::vector<net::NodeId> covered_intersections;   // sorted
  std::vector<net::SegmentId> covered_segments;     // sorted, fully covered
  struct PartialSegment {
    net::SegmentId segment = -1;
    CoverageInterval interval;
  };
  std::vector<PartialSegment> partially_covered_segments;  // sorted by segment

  std::vector<std::optional<CoverageInterval>> raw_coverage;  // by segment id
  std::vector<char> raw_node_covered;                         // by node id

  bool covers_intersection(net::NodeId id) const;
  bool covers_segment_fully(net::SegmentId id) const;
  /// Covered interval within the cell (full segments report [0,1]).
  std::optional<CoverageInterval> interval_on(net::SegmentId id) const;
  bool empty() const { return covered_intersections.empty(); }
};

/// Samples the rate quantile along every segment (even spacing no coarser
/// than sample_spacing_m, endpoints included) and returns the connected
/// component of covered samples anchored at the best-rate covered sample.
/// An unreachable gamma yields an empty cell.
GammaRateCell compute_gamma_cell(const net::RoadNetwork& network, const BaseStation& bs,
                                 double gamma_mbps, double epsilon, const SpeedContext& speeds,
                                 double sample_spacing_m, const ChannelModel& model);

/// A point where an AV can hand over between two cells: a common RI, or the
/// midpoint of the coverage overlap on a jointly spanned segment that has no
/// common RI on it.
struct CoreNodeSeed {
  enum class Kind { kIntersection, kMidpoint };
  Kind kind = Kind::kIntersection;
  net::NodeId intersection = -1;     // kind == kIntersection
  net::SegmentId segment = -1;       // kind == kMidpoint
  double offset_fraction = 0.0;      // kind == kMidpoint
  Point location;
};

/// Symmetric; empty result means the cells are not connected.
std::vector<CoreNodeSeed> cell_connectivity(const net::RoadNetwork& network,
                                            const GammaRateCell& a, const GammaRateCell& b);

}  // namespace ccr::radio
