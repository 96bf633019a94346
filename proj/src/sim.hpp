#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "net.hpp"
#include "radio.hpp"
#include "routing.hpp"
#include "traffic.hpp"

namespace ccr::sim {

enum class Scheme { kTwoLayer, kGreedyNoCc, kGreedyCc, kShortestTime };
const char* to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

enum class CoverageMode { kQuantile, kRealized };

/// Splitmix-style stream splitter for per-trial/per-scheme seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Rate coverage at the requested gamma, merged over all base stations.
/// Built from the cells' raw (pre-contiguity) coverage so that accounting
/// follows the rate field rather than cell bookkeeping.
struct SegmentCoverage {
  std::vector<std::vector<radio::CoverageInterval>> segments;  // sorted, disjoint
  std::vector<char> node_covered;

  static SegmentCoverage from_cells(const net::RoadNetwork& network,
                                    std::span<const radio::GammaRateCell> cells);
};

struct TripMetrics {
  Scheme scheme = Scheme::kTwoLayer;
  bool routed = false;
  routing::RouteStatus status = routing::RouteStatus::kNoRoute;
  double trip_duration_s = 0.0;
  double covered_duration_s = 0.0;
  double p_c = 0.0;
  bool success = false;
  double gamma_used_mbps = 0.0;
};

struct CdfSeries {
  std::string label;
  std::vector<double> values;     // sorted ascending
  std::vector<double> fractions;  // (i+1)/n, ends at 1

  static CdfSeries from_samples(std::string label, std::vector<double> samples);
  bool valid() const;
};

/// Advances the AV along the route at ESM speeds and samples coverage every
/// tau seconds (deterministic quantile accounting). An empty route samples
/// once at the source.
TripMetrics simulate_trip(const routing::Route& route, const net::RoadNetwork& network,
                          const net::EffectiveSpeedMap& esm, const SegmentCoverage& coverage,
                          double tau_s);

TripMetrics simulate_trip(const routing::Route& route, const net::RoadNetwork& network,
                          const net::EffectiveSpeedMap& esm,
                          std::span<const radio::GammaRateCell> cells, double tau_s);

/// Realized-sample accounting: a fresh shadowing draw per base station at
/// every tau tick. Heavier; probes the speed penalty on fast routes.
TripMetrics simulate_trip_realized(const routing::Route& route, const net::RoadNetwork& network,
                                   const net::EffectiveSpeedMap& esm,
                                   std::span<const radio::BaseStation> bss,
                                   const radio::ChannelModel& model, double gamma_mbps,
                                   double tau_s, std::uint64_t seed);

enum class Placement { kLattice, kRandom, kPrefixRandom };
Placement placement_from_string(const std::string& name);
const char* to_string(Placement placement);

enum class Endpoints { kCorners, kRandom };

struct TrialConfig {
  int avenues = 11;
  int streets = 21;
  double block_length_m = 250.0;
  double block_width_m = 100.0;

  int bs_count = 9;
  Placement placement = Placement::kLattice;
  int bs_tx_antennas = 128;
  double bs_tx_power_dbm = 46.0;
  double bs_carrier_frequency_hz = 2e9;
  int bs_channels = 1;
  radio::ChannelModel channel;

  double gamma_mbps = 150.0;
  double epsilon = 0.01;
  double sample_spacing_m = 5.0;
  double reference_speed_mps = 20.0;
  std::vector<double> speed_set_mps{10.0, 20.0, 30.0};

  double gamma_floor_mbps = 0.0;
  double gamma_step_mbps = 5.0;
  std::size_t max_paths = 10000;
  std::size_t max_segments = 0;  // 0 = 4 * (avenues + streets)

  int trial_count = 1000;
  std::uint64_t seed = 1;
  std::vector<Scheme> schemes{Scheme::kTwoLayer, Scheme::kGreedyNoCc, Scheme::kGreedyCc,
                              Scheme::kShortestTime};
  Endpoints endpoints = Endpoints::kCorners;
  CoverageMode coverage_mode = CoverageMode::kQuantile;
  double tau_s = 1e-3;
  int workers = 0;  // 0 = hardware concurrency

  std::size_t effective_max_segments() const {
    return max_segments > 0 ? max_segments
                            : static_cast<std::size_t>(4) * (avenues + streets);
  }
  void validate() const;
};

std::vector<radio::BaseStation> make_bs_layout(const TrialConfig& cfg,
                                               const net::RoadNetwork& network);

std::vector<radio::GammaRateCell> compute_cells(const TrialConfig& cfg,
                                                const net::RoadNetwork& network,
                                                std::span<const radio::BaseStation> bss,
                                                const net::EffectiveSpeedMap& esm,
                                                double gamma_mbps);

struct SchemeStats {
  Scheme scheme = Scheme::kTwoLayer;
  int trials = 0;
  int routed = 0;
  int succeeded = 0;
  double success_pct = 0.0;
  double mean_p_c = 0.0;        // over routed trials
  double mean_duration_s = 0.0;  // over routed trials
};

struct MonteCarloResult {
  std::vector<Scheme> schemes;
  std::vector<std::vector<TripMetrics>> metrics;  // [scheme][trial]
  std::vector<CdfSeries> duration_cdf;            // per scheme, routed trials
  std::vector<CdfSeries> pc_cdf;
  std::vector<SchemeStats> stats;
};

/// Trials are independent work units on a worker pool; per-trial seeds make
/// the result identical for any pool width.
MonteCarloResult run_monte_carlo(const TrialConfig& cfg);

struct RoutingSweepRow {
  double axis_value = 0.0;
  Scheme scheme = Scheme::kTwoLayer;
  double success_pct = 0.0;
  double mean_p_c = 0.0;
};

std::vector<RoutingSweepRow> sweep_gamma(const TrialConfig& cfg, const std::vector<double>& gammas);

/// Base stations are drawn as a seed-fixed random sequence and each count
/// takes a prefix, so coverage grows monotonically with the count.
std::vector<RoutingSweepRow> sweep_bs_count(const TrialConfig& cfg, const std::vector<int>& counts);

enum class TrafficAxis { kCarrierFrequency, kAlpha, kLambdaMTm };

struct TrafficSweepRow {
  double axis_value = 0.0;
  double alpha = 0.0;
  std::string policy;
  double throughput_av_per_min = 0.0;
};

std::vector<TrafficSweepRow> sweep_traffic(const traffic::RoadCellIncidence& incidence,
                                           double channels_total, TrafficAxis axis,
                                           const std::vector<double>& values,
                                           const std::vector<double>& alphas);

}  // namespace ccr::sim
