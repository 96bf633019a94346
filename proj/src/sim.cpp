#include "sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "error.hpp"

namespace ccr::sim {
namespace {

constexpr double kTickEps = 1e-12;

// Number of tick instants k*tau inside [t0, t1), k restricted to [0, limit).
long long ticks_in(double t0, double t1, double tau, long long limit) {
  if (t1 <= t0) return 0;
  auto first = static_cast<long long>(std::ceil(t0 / tau - kTickEps));
  auto last = static_cast<long long>(std::ceil(t1 / tau - kTickEps)) - 1;
  first = std::max<long long>(first, 0);
  last = std::min(last, limit - 1);
  return std::max<long long>(0, last - first + 1);
}

}  // namespace

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kTwoLayer: return "two-layer";
    case Scheme::kGreedyNoCc: return "greedy";
    case Scheme::kGreedyCc: return "greedy-cc";
    case Scheme::kShortestTime: return "shortest-time";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "two-layer") return Scheme::kTwoLayer;
  if (name == "greedy") return Scheme::kGreedyNoCc;
  if (name == "greedy-cc") return Scheme::kGreedyCc;
  if (name == "shortest-time") return Scheme::kShortestTime;
  throw ConfigError("trials.schemes", "unknown scheme '" + name + "'");
}

Placement placement_from_string(const std::string& name) {
  if (name == "lattice") return Placement::kLattice;
  if (name == "random") return Placement::kRandom;
  if (name == "prefix-random") return Placement::kPrefixRandom;
  throw ConfigError("base_stations.placement", "unknown placement '" + name + "'");
}

const char* to_string(Placement placement) {
  switch (placement) {
    case Placement::kLattice: return "lattice";
    case Placement::kRandom: return "random";
    case Placement::kPrefixRandom: return "prefix-random";
  }
  return "unknown";
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SegmentCoverage SegmentCoverage::from_cells(const net::RoadNetwork& network,
                                            std::span<const radio::GammaRateCell> cells) {
  SegmentCoverage cov;
  cov.segments.resize(network.segment_count());
  cov.node_covered.assign(network.intersection_count(), 0);
  for (const auto& cell : cells) {
    for (std::size_t n = 0; n < cell.raw_node_covered.size(); ++n)
      if (cell.raw_node_covered[n]) cov.node_covered[n] = 1;
    for (std::size_t s = 0; s < cell.raw_coverage.size(); ++s)
      if (cell.raw_coverage[s]) cov.segments[s].push_back(*cell.raw_coverage[s]);
  }
  for (auto& intervals : cov.segments) {
    if (intervals.size() < 2) continue;
    std::sort(intervals.begin(), intervals.end(),
              [](const auto& a, const auto& b) { return a.lo < b.lo; });
    std::vector<radio::CoverageInterval> merged;
    for (const auto& iv : intervals) {
      if (!merged.empty() && iv.lo <= merged.back().hi + 1e-12)
        merged.back().hi = std::max(merged.back().hi, iv.hi);
      else
        merged.push_back(iv);
    }
    intervals = std::move(merged);
  }
  return cov;
}

CdfSeries CdfSeries::from_samples(std::string label, std::vector<double> samples) {
  CdfSeries cdf;
  cdf.label = std::move(label);
  std::sort(samples.begin(), samples.end());
  cdf.values = std::move(samples);
  cdf.fractions.resize(cdf.values.size());
  for (std::size_t i = 0; i < cdf.values.size(); ++i)
    cdf.fractions[i] = static_cast<double>(i + 1) / cdf.values.size();
  return cdf;
}

bool CdfSeries::valid() const {
  if (values.size() != fractions.size()) return false;
  if (values.empty()) return true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[i - 1]) return false;
    if (fractions[i] < fractions[i - 1]) return false;
  }
  return std::abs(fractions.back() - 1.0) < 1e-12;
}

TripMetrics simulate_trip(const routing::Route& route, [[maybe_unused]] const net::RoadNetwork& network,
                          [[maybe_unused]] const net::EffectiveSpeedMap& esm,
                          const SegmentCoverage& coverage, double tau_s) {
  if (!(tau_s > 0.0)) throw ConfigError("trials.tau_s", "must be > 0");
  TripMetrics m;
  m.routed = true;
  m.status = routing::RouteStatus::kOk;
  m.gamma_used_mbps = route.gamma_used_mbps;
  m.trip_duration_s = route.total_time_s;

  if (route.traversals.empty()) {
    bool covered = route.src >= 0 &&
                   coverage.node_covered[static_cast<std::size_t>(route.src)] != 0;
    m.p_c = covered ? 1.0 : 0.0;
    m.covered_duration_s = 0.0;
    m.success = covered;
    return m;
  }

  double total = route.total_time_s;
  auto total_ticks = static_cast<long long>(std::ceil(total / tau_s - kTickEps));
  total_ticks = std::max<long long>(total_ticks, 1);

  long long covered_ticks = 0;
  double t0 = 0.0;
  for (const auto& tr : route.traversals) {
    double lo = std::min(tr.from_fraction, tr.to_fraction);
    double hi = std::max(tr.from_fraction, tr.to_fraction);
    double span = tr.to_fraction - tr.from_fraction;
    for (const auto& iv : coverage.segments[static_cast<std::size_t>(tr.segment)]) {
      double a = std::max(lo, iv.lo);
      double b = std::min(hi, iv.hi);
      if (b <= a) continue;
      // Map the covered fraction window to trip time within this traversal.
      double ta, tb;
      if (span > 0) {
        ta = t0 + (a - tr.from_fraction) / span * tr.time_s;
        tb = t0 + (b - tr.from_fraction) / span * tr.time_s;
      } else {
        ta = t0 + (tr.from_fraction - b) / -span * tr.time_s;
        tb = t0 + (tr.from_fraction - a) / -span * tr.time_s;
      }
      covered_ticks += ticks_in(ta, tb, tau_s, total_ticks);
    }
    t0 += tr.time_s;
  }
  m.p_c = static_cast<double>(covered_ticks) / static_cast<double>(total_ticks);
  m.covered_duration_s = m.p_c * total;
  m.success = covered_ticks == total_ticks;
  return m;
}

TripMetrics simulate_trip(const routing::Route& route, const net::RoadNetwork& network,
                          const net::EffectiveSpeedMap& esm,
                          std::span<const radio::GammaRateCell> cells, double tau_s) {
  return simulate_trip(route, network, esm, SegmentCoverage::from_cells(network, cells), tau_s);
}

TripMetrics simulate_trip_realized(const routing::Route& route, const net::RoadNetwork& network,
                                   const net::EffectiveSpeedMap& esm,
                                   std::span<const radio::BaseStation> bss,
                                   const radio::ChannelModel& model, double gamma_mbps,
                                   double tau_s, std::uint64_t seed) {
  if (!(tau_s > 0.0)) throw ConfigError("trials.tau_s", "must be > 0");
  TripMetrics m;
  m.routed = true;
  m.status = routing::RouteStatus::kOk;
  m.gamma_used_mbps = route.gamma_used_mbps;
  m.trip_duration_s = route.total_time_s;
  std::mt19937_64 rng(seed);

  auto rate_at = [&](const Point& p, double speed) {
    double best = 0.0;
    for (const auto& bs : bss)
      best = std::max(best, radio::realized_rate(p, bs, speed, model, rng).rate_mbps);
    return best;
  };

  if (route.traversals.empty()) {
    bool covered = false;
    if (route.src >= 0)
      covered = rate_at(network.intersection(route.src).position, 0.0) + radio::kRateTol >=
                gamma_mbps;
    m.p_c = covered ? 1.0 : 0.0;
    m.success = covered;
    return m;
  }

  double total = route.total_time_s;
  auto total_ticks = static_cast<long long>(std::ceil(total / tau_s - kTickEps));
  total_ticks = std::max<long long>(total_ticks, 1);

  long long covered_ticks = 0;
  std::size_t cursor = 0;
  double t0 = 0.0;  // start time of traversal at `cursor`
  for (long long k = 0; k < total_ticks; ++k) {
    double t = k * tau_s;
    while (cursor + 1 < route.traversals.size() &&
           t >= t0 + route.traversals[cursor].time_s - kTickEps) {
      t0 += route.traversals[cursor].time_s;
      ++cursor;
    }
    const auto& tr = route.traversals[cursor];
    double frac = tr.time_s > 0
                      ? tr.from_fraction +
                            (tr.to_fraction - tr.from_fraction) * ((t - t0) / tr.time_s)
                      : tr.from_fraction;
    frac = std::clamp(frac, std::min(tr.from_fraction, tr.to_fraction),
                      std::max(tr.from_fraction, tr.to_fraction));
    const net::Segment& seg = network.segment(tr.segment);
    Point p = lerp(network.intersection(seg.a).position, network.intersection(seg.b).position,
                   frac);
    if (rate_at(p, esm.speed(tr.segment)) + radio::kRateTol >= gamma_mbps) ++covered_ticks;
  }
  m.p_c = static_cast<double>(covered_ticks) / static_cast<double>(total_ticks);
  m.covered_duration_s = m.p_c * total;
  m.success = covered_ticks == total_ticks;
  return m;
}

void TrialConfig::validate() const {
  if (trial_count < 1) throw ConfigError("trials.count", "must be >= 1");
  if (bs_count < 1) throw ConfigError("base_stations.count", "must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("coverage.epsilon", "must be in (0,1)");
  if (!(sample_spacing_m > 0.0)) throw ConfigError("coverage.sample_spacing_m", "must be > 0");
  if (!(tau_s > 0.0)) throw ConfigError("trials.tau_s", "must be > 0");
  if (gamma_mbps < 0.0) throw ConfigError("coverage.gamma_mbps", "must be >= 0");
  if (speed_set_mps.empty()) throw ConfigError("speeds.set_mps", "must not be empty");
  if (schemes.empty()) throw ConfigError("trials.schemes", "must not be empty");
}

std::vector<radio::BaseStation> make_bs_layout(const TrialConfig& cfg,
                                               const net::RoadNetwork& network) {
  double width = (cfg.avenues - 1) * cfg.block_length_m;
  double height = (cfg.streets - 1) * cfg.block_width_m;
  (void)network;
  std::vector<radio::BaseStation> bss;
  auto push = [&](double x, double y) {
    radio::BaseStation bs;
    bs.id = static_cast<int>(bss.size());
    bs.position = {x, y};
    bs.tx_antennas = cfg.bs_tx_antennas;
    bs.carrier_frequency_hz = cfg.bs_carrier_frequency_hz;
    bs.tx_power_dbm = cfg.bs_tx_power_dbm;
    bs.channels = cfg.bs_channels;
    bss.push_back(bs);
  };

  if (cfg.placement == Placement::kLattice) {
    // Factor the count into the rows x cols pair whose tiles are squarest.
    int best_cols = 1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int cols = 1; cols <= cfg.bs_count; ++cols) {
      if (cfg.bs_count % cols != 0) continue;
      int rows = cfg.bs_count / cols;
      double score = std::abs(std::log((width / cols) / (height / rows)));
      if (score < best_score) {
        best_score = score;
        best_cols = cols;
      }
    }
    int cols = best_cols, rows = cfg.bs_count / best_cols;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        push(width * (2 * c + 1) / (2.0 * cols), height * (2 * r + 1) / (2.0 * rows));
  } else {
    std::mt19937_64 rng(mix_seed(cfg.seed, 0xB5));
    for (int i = 0; i < cfg.bs_count; ++i) {
      double x = width * (static_cast<double>(rng()) / static_cast<double>(UINT64_MAX));
      double y = height * (static_cast<double>(rng()) / static_cast<double>(UINT64_MAX));
      push(x, y);
    }
  }
  return bss;
}

std::vector<radio::GammaRateCell> compute_cells(const TrialConfig& cfg,
                                                const net::RoadNetwork& network,
                                                std::span<const radio::BaseStation> bss,
                                                const net::EffectiveSpeedMap& esm,
                                                double gamma_mbps) {
  radio::SpeedContext speeds{&esm, cfg.reference_speed_mps};
  std::vector<radio::GammaRateCell> cells;
  cells.reserve(bss.size());
  for (const auto& bs : bss)
    cells.push_back(radio::compute_gamma_cell(network, bs, gamma_mbps, cfg.epsilon, speeds,
                                              cfg.sample_spacing_m, cfg.channel));
  return cells;
}

namespace {

struct TrialOutput {
  std::vector<TripMetrics> by_scheme;
};

TrialOutput run_trial(const TrialConfig& cfg, const net::RoadNetwork& network,
                      std::span<const radio::BaseStation> bss, int trial) {
  std::uint64_t tseed = mix_seed(cfg.seed, static_cast<std::uint64_t>(trial));
  net::EffectiveSpeedMap esm = net::assign_esm(network, cfg.speed_set_mps, mix_seed(tseed, 1));

  net::NodeId src = 0;
  auto dst = static_cast<net::NodeId>(network.intersection_count() - 1);
  if (cfg.endpoints == Endpoints::kRandom) {
    std::mt19937_64 rng(mix_seed(tseed, 2));
    src = static_cast<net::NodeId>(rng() % network.intersection_count());
    do {
      dst = static_cast<net::NodeId>(rng() % network.intersection_count());
    } while (dst == src && network.intersection_count() > 1);
  }

  routing::RoutingContext ctx(network, compute_cells(cfg, network, bss, esm, cfg.gamma_mbps), esm);
  SegmentCoverage coverage = SegmentCoverage::from_cells(network, ctx.cells());

  TrialOutput out;
  for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
    Scheme scheme = cfg.schemes[si];
    routing::RouteResult rr;
    switch (scheme) {
      case Scheme::kTwoLayer: {
        rr = routing::two_layer_route_at(ctx, src, dst, cfg.gamma_mbps);
        double g = cfg.gamma_mbps;
        while (!rr.ok() && g > cfg.gamma_floor_mbps + 1e-12) {
          g = std::max(cfg.gamma_floor_mbps, g - cfg.gamma_step_mbps);
          routing::RoutingContext fb(network, compute_cells(cfg, network, bss, esm, g), esm);
          rr = routing::two_layer_route_at(fb, src, dst, g);
        }
        break;
      }
      case Scheme::kGreedyNoCc:
        rr = routing::greedy_route_no_cc(network, esm, src, dst, mix_seed(tseed, 3));
        break;
      case Scheme::kGreedyCc:
        rr = routing::greedy_route_cc(ctx, src, dst, cfg.effective_max_segments(),
                                      mix_seed(tseed, 3));
        break;
      case Scheme::kShortestTime:
        rr = routing::shortest_time_route(network, esm, src, dst);
        break;
    }
    TripMetrics m;
    m.scheme = scheme;
    if (rr.ok()) {
      if (cfg.coverage_mode == CoverageMode::kQuantile)
        m = simulate_trip(*rr.route, network, esm, coverage, cfg.tau_s);
      else
        m = simulate_trip_realized(*rr.route, network, esm, bss, cfg.channel, cfg.gamma_mbps,
                                   cfg.tau_s, mix_seed(tseed, 100 + si));
      m.scheme = scheme;
    } else {
      m.routed = false;
      m.status = rr.status;
      m.success = false;
    }
    out.by_scheme.push_back(m);
  }
  return out;
}

}  // namespace

MonteCarloResult run_monte_carlo(const TrialConfig& cfg) {
  cfg.validate();
  net::RoadNetwork network =
      net::generate_grid(cfg.avenues, cfg.streets, cfg.block_length_m, cfg.block_width_m);
  std::vector<radio::BaseStation> bss = make_bs_layout(cfg, network);

  MonteCarloResult result;
  result.schemes = cfg.schemes;
  result.metrics.assign(cfg.schemes.size(), std::vector<TripMetrics>(cfg.trial_count));

  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.trial_count));

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      int t = next.fetch_add(1);
      if (t >= cfg.trial_count) return;
      try {
        TrialOutput out = run_trial(cfg, network, bss, t);
        for (std::size_t si = 0; si < cfg.schemes.size(); ++si)
          result.metrics[si][static_cast<std::size_t>(t)] = out.by_scheme[si];
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
    std::vector<double> durations, pcs;
    SchemeStats stats;
    stats.scheme = cfg.schemes[si];
    stats.trials = cfg.trial_count;
    double pc_sum = 0.0, dur_sum = 0.0;
    for (const auto& m : result.metrics[si]) {
      if (m.routed) {
        ++stats.routed;
        durations.push_back(m.trip_duration_s);
        pcs.push_back(m.p_c);
        pc_sum += m.p_c;
        dur_sum += m.trip_duration_s;
      }
      if (m.success) ++stats.succeeded;
    }
    stats.success_pct = 100.0 * stats.succeeded / stats.trials;
    stats.mean_p_c = stats.routed > 0 ? pc_sum / stats.routed : 0.0;
    stats.mean_duration_s = stats.routed > 0 ? dur_sum / stats.routed : 0.0;
    result.duration_cdf.push_back(
        CdfSeries::from_samples(to_string(cfg.schemes[si]), std::move(durations)));
    result.pc_cdf.push_back(CdfSeries::from_samples(to_string(cfg.schemes[si]), std::move(pcs)));
    result.stats.push_back(stats);
  }
  return result;
}

std::vector<RoutingSweepRow> sweep_gamma(const TrialConfig& cfg,
                                         const std::vector<double>& gammas) {
  std::vector<RoutingSweepRow> rows;
  for (double g : gammas) {
    TrialConfig point = cfg;
    point.gamma_mbps = g;
    MonteCarloResult r = run_monte_carlo(point);
    for (const auto& s : r.stats) rows.push_back({g, s.scheme, s.success_pct, s.mean_p_c});
  }
  return rows;
}

std::vector<RoutingSweepRow> sweep_bs_count(const TrialConfig& cfg,
                                            const std::vector<int>& counts) {
  std::vector<RoutingSweepRow> rows;
  for (int k : counts) {
    TrialConfig point = cfg;
    point.bs_count = k;
    point.placement = Placement::kPrefixRandom;
    MonteCarloResult r = run_monte_carlo(point);
    for (const auto& s : r.stats)
      rows.push_back({static_cast<double>(k), s.scheme, s.success_pct, s.mean_p_c});
  }
  return rows;
}

std::vector<TrafficSweepRow> sweep_traffic(const traffic::RoadCellIncidence& incidence,
                                           double channels_total, TrafficAxis axis,
                                           const std::vector<double>& values,
                                           const std::vector<double>& alphas) {
  std::vector<TrafficSweepRow> rows;
  auto emit = [&](double value, double alpha, const traffic::RoadCellIncidence& inc) {
    traffic::PolicyComparison cmp = traffic::compare_policies(inc, channels_total);
    rows.push_back({value, alpha, "naive", cmp.naive_avps * 60.0});
    rows.push_back({value, alpha, "lemma1", cmp.lemma1_avps * 60.0});
    rows.push_back({value, alpha, "lemma1+2", cmp.lemma12_avps * 60.0});
  };
  auto with_alpha = [&](traffic::RoadCellIncidence inc, double alpha) {
    for (auto& cell : inc.cells) cell.tdd.alpha = alpha;
    return inc;
  };

  if (axis == TrafficAxis::kAlpha) {
    for (double a : values) emit(a, a, with_alpha(incidence, a));
    return rows;
  }
  for (double a : alphas) {
    for (double v : values) {
      traffic::RoadCellIncidence inc = with_alpha(incidence, a);
      for (auto& cell : inc.cells) {
        if (axis == TrafficAxis::kCarrierFrequency) {
          cell.tdd.carrier_frequency_hz = v;
        } else {
          cell.tdd.t_message_s = v / cell.tdd.message_rate_hz;
        }
      }
      emit(v, a, inc);
    }
  }
  return rows;
}

}  // namespace ccr::sim
