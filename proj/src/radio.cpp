#include "radio.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "error.hpp"

namespace ccr::radio {
namespace {

constexpr double kSpeedOfLight = 3e8;
constexpr double kFracTol = 1e-9;

double doppler_penalty(double speed_mps, double carrier_hz, const ChannelModel& m) {
  double doppler_hz = speed_mps / kSpeedOfLight * carrier_hz;
  return 1.0 / (1.0 + m.doppler_penalty_coeff * doppler_hz * m.measurement_interval_s);
}

double shannon_rate_mbps(double rx_power_dbm, const ChannelModel& m) {
  double snr_db = rx_power_dbm - m.noise_power_dbm;
  double snr = std::pow(10.0, snr_db / 10.0);
  return m.bandwidth_hz * std::log2(1.0 + snr) / 1e6;
}

}  // namespace

// Acklam's rational approximation with one Halley refinement step.
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("inverse_normal_cdf: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double path_loss_db(double distance_m, const ChannelModel& model) {
  double d = std::max(distance_m, 1.0);
  return model.pl_intercept_db + model.pl_slope_db_per_decade * std::log10(d);
}

double rate_quantile_mbps(const Point& location, const BaseStation& bs, double speed_mps,
                          double epsilon, const ChannelModel& model) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ConfigError("coverage.epsilon", "must be in the open interval (0,1)");
  double pl = path_loss_db(distance(location, bs.position), model);
  double rx_dbm = bs.tx_power_dbm - pl + inverse_normal_cdf(epsilon) * model.shadowing_std_db;
  return shannon_rate_mbps(rx_dbm, model) *
         doppler_penalty(speed_mps, bs.carrier_frequency_hz, model);
}

RateSample realized_rate(const Point& location, const BaseStation& bs, double speed_mps,
                         const ChannelModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> shadow(0.0, model.shadowing_std_db);
  double pl = path_loss_db(distance(location, bs.position), model);
  double rx_dbm = bs.tx_power_dbm - pl + shadow(rng);
  double rate = shannon_rate_mbps(rx_dbm, model) *
                doppler_penalty(speed_mps, bs.carrier_frequency_hz, model);
  return {location, speed_mps, rate};
}

double SpeedContext::intersection_speed(const net::RoadNetwork& network, net::NodeId id) const {
  if (esm == nullptr) return reference_mps;
  double worst = 0.0;
  for (net::SegmentId sid : network.incident_segments(id))
    worst = std::max(worst, esm->speed(sid));
  return worst > 0.0 ? worst : reference_mps;
}

bool GammaRateCell::covers_intersection(net::NodeId id) const {
  return std::binary_search(covered_intersections.begin(), covered_intersections.end(), id);
}

bool GammaRateCell::covers_segment_fully(net::SegmentId id) const {
  return std::binary_search(covered_segments.begin(), covered_segments.end(), id);
}

std::optional<CoverageInterval> GammaRateCell::interval_on(net::SegmentId id) const {
  if (covers_segment_fully(id)) return CoverageInterval{0.0, 1.0};
  auto it = std::lower_bound(partially_covered_segments.begin(),
                             partially_covered_segments.end(), id,
                             [](const PartialSegment& p, net::SegmentId s) { return p.segment < s; });
  if (it != partially_covered_segments.end() && it->segment == id) return it->interval;
  return std::nullopt;
}

GammaRateCell compute_gamma_cell(const net::RoadNetwork& network, const BaseStation& bs,
                                 double gamma_mbps, double epsilon, const SpeedContext& speeds,
                                 double sample_spacing_m, const ChannelModel& model) {
  if (!(sample_spacing_m > 0.0))
    throw ConfigError("coverage.sample_spacing_m", "must be > 0");

  const auto& segments = network.segments();
  const std::size_t node_count = network.intersection_count();

  // Sample layout: one sample per intersection plus evenly spaced interior
  // samples per segment. Interior spacing never exceeds sample_spacing_m.
  std::vector<int> interior_count(segments.size());
  std::vector<std::size_t> interior_base(segments.size());
  std::size_t total = node_count;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    int pieces = static_cast<int>(std::ceil(segments[s].length_m / sample_spacing_m));
    interior_count[s] = std::max(0, pieces - 1);
    interior_base[s] = total;
    total += static_cast<std::size_t>(interior_count[s]);
  }

  std::vector<char> covered(total, 0);
  std::vector<double> quantile(total, 0.0);

  for (std::size_t n = 0; n < node_count; ++n) {
    double v = speeds.intersection_speed(network, static_cast<net::NodeId>(n));
    quantile[n] = rate_quantile_mbps(network.intersections()[n].position, bs, v, epsilon, model);
    covered[n] = quantile[n] + kRateTol >= gamma_mbps ? 1 : 0;
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const net::Segment& seg = segments[s];
    double v = speeds.segment_speed(seg.id);
    const Point& pa = network.intersection(seg.a).position;
    const Point& pb = network.intersection(seg.b).position;
    int m = interior_count[s];
    for (int k = 0; k < m; ++k) {
      double f = static_cast<double>(k + 1) / (m + 1);
      std::size_t idx = interior_base[s] + static_cast<std::size_t>(k);
      quantile[idx] = rate_quantile_mbps(lerp(pa, pb, f), bs, v, epsilon, model);
      covered[idx] = quantile[idx] + kRateTol >= gamma_mbps ? 1 : 0;
    }
  }

  GammaRateCell cell;
  cell.bs_id = bs.id;
  cell.gamma_mbps = gamma_mbps;
  cell.epsilon = epsilon;
  cell.raw_coverage.assign(segments.size(), std::nullopt);
  cell.raw_node_covered.assign(node_count, 0);

  // Raw (pre-contiguity) coverage, used by trip coverage accounting.
  for (std::size_t n = 0; n < node_count; ++n) cell.raw_node_covered[n] = covered[n];
  auto sample_fraction = [&](std::size_t s, int k) {
    return static_cast<double>(k + 1) / (interior_count[s] + 1);
  };
  for (std::size_t s = 0; s < segments.size(); ++s) {
    // Covered samples along one segment always form a single run: the rate
    // profile is quasi-concave in the offset and endpoint values can only
    // dip below the interior (they are evaluated at a speed at least as
    // high), so the level set is an interval.
    int m = interior_count[s];
    int first = -1, last = -1;
    auto probe = [&](int pos) {  // pos: 0 = endpoint a, 1..m interior, m+1 = endpoint b
      if (pos == 0) return covered[static_cast<std::size_t>(segments[s].a)] != 0;
      if (pos == m + 1) return covered[static_cast<std::size_t>(segments[s].b)] != 0;
      return covered[interior_base[s] + static_cast<std::size_t>(pos - 1)] != 0;
    };
    for (int pos = 0; pos <= m + 1; ++pos) {
      if (probe(pos)) {
        if (first < 0) first = pos;
        last = pos;
      }
    }
    if (first < 0) continue;
    double lo = first == 0 ? 0.0 : (first == m + 1 ? 1.0 : sample_fraction(s, first - 1));
    double hi = last == m + 1 ? 1.0 : (last == 0 ? 0.0 : sample_fraction(s, last - 1));
    cell.raw_coverage[s] = CoverageInterval{lo, hi};
  }

  // Anchor the cell at the covered sample with the best quantile (ties to
  // the lowest index) so the gamma-nesting property holds by construction.
  std::size_t anchor = total;
  for (std::size_t i = 0; i < total; ++i) {
    if (!covered[i]) continue;
    if (anchor == total || quantile[i] > quantile[anchor]) anchor = i;
  }
  if (anchor == total) return cell;  // nothing covered: empty cell

  // BFS over covered samples; adjacency chains samples along each segment.
  std::vector<char> in_component(total, 0);
  std::vector<std::size_t> stack{anchor};
  in_component[anchor] = 1;
  auto visit = [&](std::size_t idx) {
    if (covered[idx] && !in_component[idx]) {
      in_component[idx] = 1;
      stack.push_back(idx);
    }
  };
  // Neighbor enumeration needs the segment chains; precompute node -> (segment) lists
  // via the network's incidence.
  while (!stack.empty()) {
    std::size_t cur = stack.back();
    stack.pop_back();
    if (cur < node_count) {
      auto node = static_cast<net::NodeId>(cur);
      for (net::SegmentId sid : network.incident_segments(node)) {
        auto s = static_cast<std::size_t>(sid);
        const net::Segment& seg = segments[s];
        int m = interior_count[s];
        if (m == 0) {
          visit(static_cast<std::size_t>(seg.other(node)));
        } else if (node == seg.a) {
          visit(interior_base[s]);
        } else {
          visit(interior_base[s] + static_cast<std::size_t>(m - 1));
        }
      }
    } else {
      // Interior sample: find its segment by binary search over bases.
      std::size_t s = std::upper_bound(interior_base.begin(), interior_base.end(), cur) -
                      interior_base.begin() - 1;
      while (interior_count[s] == 0) --s;  // skip segments without interiors
      int k = static_cast<int>(cur - interior_base[s]);
      const net::Segment& seg = segments[s];
      if (k > 0)
        visit(interior_base[s] + static_cast<std::size_t>(k - 1));
      else
        visit(static_cast<std::size_t>(seg.a));
      if (k + 1 < interior_count[s])
        visit(interior_base[s] + static_cast<std::size_t>(k + 1));
      else
        visit(static_cast<std::size_t>(seg.b));
    }
  }

  for (std::size_t n = 0; n < node_count; ++n)
    if (in_component[n]) cell.covered_intersections.push_back(static_cast<net::NodeId>(n));

  for (std::size_t s = 0; s < segments.size(); ++s) {
    const net::Segment& seg = segments[s];
    int m = interior_count[s];
    int first = -1, last = -1, members = 0;
    auto inside = [&](int pos) {
      if (pos == 0) return in_component[static_cast<std::size_t>(seg.a)] != 0;
      if (pos == m + 1) return in_component[static_cast<std::size_t>(seg.b)] != 0;
      return in_component[interior_base[s] + static_cast<std::size_t>(pos - 1)] != 0;
    };
    for (int pos = 0; pos <= m + 1; ++pos) {
      if (inside(pos)) {
        if (first < 0) first = pos;
        last = pos;
        ++members;
      }
    }
    if (first < 0) continue;
    if (members != last - first + 1)
      throw Error("internal: fragmented coverage run on segment " + std::to_string(seg.id));
    if (members == m + 2) {
      cell.covered_segments.push_back(seg.id);
    } else {
      double lo = first == 0 ? 0.0 : (first == m + 1 ? 1.0 : sample_fraction(s, first - 1));
      double hi = last == m + 1 ? 1.0 : (last == 0 ? 0.0 : sample_fraction(s, last - 1));
      if (hi - lo > kFracTol)
        cell.partially_covered_segments.push_back({seg.id, {lo, hi}});
    }
  }
  return cell;
}

std::vector<CoreNodeSeed> cell_connectivity(const net::RoadNetwork& network,
                                            const GammaRateCell& a, const GammaRateCell& b) {
  std::vector<CoreNodeSeed> out;

  std::vector<net::NodeId> common_nodes;
  std::set_intersection(a.covered_intersections.begin(), a.covered_intersections.end(),
                        b.covered_intersections.begin(), b.covered_intersections.end(),
                        std::back_inserter(common_nodes));
  for (net::NodeId n : common_nodes) {
    CoreNodeSeed seed;
    seed.kind = CoreNodeSeed::Kind::kIntersection;
    seed.intersection = n;
    seed.location = network.intersection(n).position;
    out.push_back(seed);
  }

  auto is_common = [&](net::NodeId n) {
    return std::binary_search(common_nodes.begin(), common_nodes.end(), n);
  };

  // Jointly spanned segments: the union of the two coverage intervals spans
  // the segment and the intervals overlap. The handover point is the overlap
  // midpoint, unless a common RI already sits on the overlap.
  for (const net::Segment& seg : network.segments()) {
    auto ia = a.interval_on(seg.id);
    auto ib = b.interval_on(seg.id);
    if (!ia || !ib) continue;
    double lo = std::max(ia->lo, ib->lo);
    double hi = std::min(ia->hi, ib->hi);
    if (hi < lo - kFracTol) continue;  // no overlap
    bool spans = std::min(ia->lo, ib->lo) <= kFracTol && std::max(ia->hi, ib->hi) >= 1.0 - kFracTol;
    if (!spans) continue;
    bool ri_on_overlap = (lo <= kFracTol && is_common(seg.a)) ||
                         (hi >= 1.0 - kFracTol && is_common(seg.b));
    if (ri_on_overlap) continue;
    CoreNodeSeed seed;
    seed.kind = CoreNodeSeed::Kind::kMidpoint;
    seed.segment = seg.id;
    seed.offset_fraction = 0.5 * (lo + hi);
    seed.location = lerp(network.intersection(seg.a).position,
                         network.intersection(seg.b).position, seed.offset_fraction);
    out.push_back(seed);
  }
  return out;
}

}  // namespace ccr::radio
