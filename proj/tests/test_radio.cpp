#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "error.hpp"
#include "net.hpp"
#include "radio.hpp"

using namespace ccr;

namespace {

radio::ChannelModel test_model() {
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

radio::BaseStation bs_at(double x, double y, int id = 0) {
  radio::BaseStation bs;
  bs.id = id;
  bs.position = {x, y};
  bs.carrier_frequency_hz = 2e9;
  bs.tx_power_dbm = 46.0;
  return bs;
}

// Connectivity of the cell at the RI + fully-covered-segment level.
bool cell_subgraph_connected(const net::RoadNetwork& g, const radio::GammaRateCell& cell) {
  if (cell.covered_intersections.empty()) return true;
  std::vector<char> seen(g.intersection_count(), 0);
  std::vector<net::NodeId> stack{cell.covered_intersections.front()};
  seen[static_cast<std::size_t>(stack.front())] = 1;
  while (!stack.empty()) {
    net::NodeId u = stack.back();
    stack.pop_back();
    for (net::SegmentId sid : g.incident_segments(u)) {
      if (!cell.covers_segment_fully(sid)) continue;
      net::NodeId v = g.segment(sid).other(u);
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  for (net::NodeId n : cell.covered_intersections)
    if (!seen[static_cast<std::size_t>(n)]) return false;
  return true;
}

}  // namespace

TEST_CASE("path loss: intercept at the reference distance") {
  auto m = test_model();
  CHECK(radio::path_loss_db(1.0, m) == doctest::Approx(41.0));
  // Clamped below 1 m.
  CHECK(radio::path_loss_db(0.0, m) == doctest::Approx(41.0));
  CHECK(radio::path_loss_db(0.2, m) == doctest::Approx(41.0));
}

TEST_CASE("path loss: one decade adds exactly the slope") {
  auto m = test_model();
  for (double d : {2.0, 17.0, 130.0, 900.0})
    CHECK(radio::path_loss_db(10.0 * d, m) - radio::path_loss_db(d, m) ==
          doctest::Approx(m.pl_slope_db_per_decade));
}

TEST_CASE("path loss: hand evaluation at 100 m") {
  auto m = test_model();
  CHECK(radio::path_loss_db(100.0, m) == doctest::Approx(86.4));
}

TEST_CASE("path loss: monotone non-decreasing in distance") {
  auto m = test_model();
  double prev = radio::path_loss_db(0.5, m);
  for (double d = 1.0; d < 3000.0; d *= 1.3) {
    double cur = radio::path_loss_db(d, m);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("inverse normal cdf sanity") {
  CHECK(radio::inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(radio::inverse_normal_cdf(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
  CHECK(radio::inverse_normal_cdf(0.01) == doctest::Approx(-2.326348).epsilon(1e-5));
  for (double p : {0.001, 0.05, 0.3, 0.7, 0.99})
    CHECK(radio::inverse_normal_cdf(p) == doctest::Approx(-radio::inverse_normal_cdf(1 - p)));
  CHECK_THROWS_AS(radio::inverse_normal_cdf(0.0), Error);
  CHECK_THROWS_AS(radio::inverse_normal_cdf(1.0), Error);
}

TEST_CASE("rate quantile: best case at the base station") {
  auto m = test_model();
  auto bs = bs_at(0, 0);
  // Median at zero distance and zero speed: path loss is the intercept,
  // shadowing quantile 0, no penalty.
  double snr_db = bs.tx_power_dbm - m.pl_intercept_db - m.noise_power_dbm;
  double expected = m.bandwidth_hz * std::log2(1.0 + std::pow(10.0, snr_db / 10.0)) / 1e6;
  CHECK(radio::rate_quantile_mbps({0, 0}, bs, 0.0, 0.5, m) == doctest::Approx(expected));
}

TEST_CASE("rate quantile: non-increasing in speed") {
  auto m = test_model();
  auto bs = bs_at(0, 0);
  Point p{300, 200};
  double r10 = radio::rate_quantile_mbps(p, bs, 10.0, 0.01, m);
  double r30 = radio::rate_quantile_mbps(p, bs, 30.0, 0.01, m);
  CHECK(r30 <= r10);
  double prev = radio::rate_quantile_mbps(p, bs, 0.0, 0.01, m);
  for (double v = 5.0; v <= 60.0; v += 5.0) {
    double cur = radio::rate_quantile_mbps(p, bs, v, 0.01, m);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("rate quantile: non-increasing in distance, non-decreasing in epsilon") {
  auto m = test_model();
  auto bs = bs_at(0, 0);
  double prev = radio::rate_quantile_mbps({1, 0}, bs, 20.0, 0.01, m);
  for (double d = 10.0; d < 2000.0; d *= 1.5) {
    double cur = radio::rate_quantile_mbps({d, 0}, bs, 20.0, 0.01, m);
    CHECK(cur <= prev);
    prev = cur;
  }
  CHECK(radio::rate_quantile_mbps({500, 0}, bs, 20.0, 0.01, m) <=
        radio::rate_quantile_mbps({500, 0}, bs, 20.0, 0.1, m));
  CHECK_THROWS_AS(radio::rate_quantile_mbps({1, 1}, bs, 10.0, 0.0, m), ConfigError);
  CHECK_THROWS_AS(radio::rate_quantile_mbps({1, 1}, bs, 10.0, 1.0, m), ConfigError);
}

TEST_CASE("rate quantile matches the empirical quantile of realized rates") {
  auto m = test_model();
  auto bs = bs_at(0, 0);
  Point p{400, 100};
  double speed = 20.0;
  std::mt19937_64 rng(99);
  const int n = 200000;
  std::vector<double> rates(n);
  for (int i = 0; i < n; ++i) rates[i] = radio::realized_rate(p, bs, speed, m, rng).rate_mbps;
  std::sort(rates.begin(), rates.end());
  for (double eps : {0.01, 0.1}) {
    double empirical = rates[static_cast<std::size_t>(eps * n)];
    double analytic = radio::rate_quantile_mbps(p, bs, speed, eps, m);
    CHECK(analytic == doctest::Approx(empirical).epsilon(0.02));
  }
}

TEST_CASE("gamma cell: zero threshold covers the whole network") {
  auto g = net::generate_grid(4, 4, 100.0, 100.0);
  radio::SpeedContext speeds{nullptr, 20.0};
  auto cell = radio::compute_gamma_cell(g, bs_at(150, 150), 0.0, 0.01, speeds, 5.0, test_model());
  CHECK(cell.covered_intersections.size() == g.intersection_count());
  CHECK(cell.covered_segments.size() == g.segment_count());
  CHECK(cell.partially_covered_segments.empty());
}

TEST_CASE("gamma cell: unreachable threshold yields an empty cell") {
  auto g = net::generate_grid(4, 4, 100.0, 100.0);
  radio::SpeedContext speeds{nullptr, 20.0};
  auto cell =
      radio::compute_gamma_cell(g, bs_at(150, 150), 1e9, 0.01, speeds, 5.0, test_model());
  CHECK(cell.empty());
  CHECK(cell.covered_segments.empty());
  CHECK(cell.partially_covered_segments.empty());
}

TEST_CASE("gamma cell: rejects non-positive sample spacing") {
  auto g = net::generate_grid(2, 2, 100.0, 100.0);
  radio::SpeedContext speeds{nullptr, 20.0};
  CHECK_THROWS_AS(radio::compute_gamma_cell(g, bs_at(0, 0), 10, 0.01, speeds, 0.0, test_model()),
                  ConfigError);
}

TEST_CASE("gamma cell: nesting and contiguity over random instances") {
  auto m = test_model();
  std::mt19937_64 rng(7);
  for (int inst = 0; inst < 25; ++inst) {
    auto g = net::generate_grid(5, 5, 100.0, 100.0);
    auto esm = net::assign_esm(g, {10.0, 20.0, 30.0}, rng());
    radio::SpeedContext speeds{&esm, 20.0};
    auto bs = bs_at(400.0 * (rng() % 1000) / 1000.0, 400.0 * (rng() % 1000) / 1000.0);
    // Pick thresholds around the rate at a mid-range distance so the cells
    // are neither empty nor total.
    double gamma1 = radio::rate_quantile_mbps({bs.position.x + 260, bs.position.y}, bs, 30, 0.01, m);
    double gamma2 = radio::rate_quantile_mbps({bs.position.x + 180, bs.position.y}, bs, 30, 0.01, m);
    REQUIRE(gamma1 < gamma2);
    auto c1 = radio::compute_gamma_cell(g, bs, gamma1, 0.01, speeds, 5.0, m);
    auto c2 = radio::compute_gamma_cell(g, bs, gamma2, 0.01, speeds, 5.0, m);

    CHECK(std::includes(c1.covered_intersections.begin(), c1.covered_intersections.end(),
                        c2.covered_intersections.begin(), c2.covered_intersections.end()));
    CHECK(std::includes(c1.covered_segments.begin(), c1.covered_segments.end(),
                        c2.covered_segments.begin(), c2.covered_segments.end()));
    for (const auto& seg : g.segments()) {
      auto i2 = c2.interval_on(seg.id);
      if (!i2) continue;
      auto i1 = c1.interval_on(seg.id);
      REQUIRE(i1.has_value());
      CHECK(i1->lo <= i2->lo + 1e-9);
      CHECK(i1->hi >= i2->hi - 1e-9);
    }
    CHECK(cell_subgraph_connected(g, c1));
    CHECK(cell_subgraph_connected(g, c2));
    // Partial intervals are sane and attach to the cell, and the raw
    // coverage is a superset of the contiguity-filtered cell.
    for (const auto& cell : {c1, c2}) {
      for (const auto& p : cell.partially_covered_segments) {
        CHECK(p.interval.lo >= 0.0);
        CHECK(p.interval.hi <= 1.0);
        CHECK(p.interval.lo < p.interval.hi);
        const auto& seg = g.segment(p.segment);
        bool touches = (p.interval.lo <= 1e-9 && cell.covers_intersection(seg.a)) ||
                       (p.interval.hi >= 1.0 - 1e-9 && cell.covers_intersection(seg.b));
        CHECK(touches);
      }
      for (auto sid : cell.covered_segments) {
        REQUIRE(cell.raw_coverage[static_cast<std::size_t>(sid)].has_value());
        CHECK(cell.raw_coverage[static_cast<std::size_t>(sid)]->lo == doctest::Approx(0.0));
        CHECK(cell.raw_coverage[static_cast<std::size_t>(sid)]->hi == doctest::Approx(1.0));
      }
    }
  }
}

TEST_CASE("cell connectivity: identity lists every covered RI") {
  auto g = net::generate_grid(4, 4, 100.0, 100.0);
  radio::SpeedContext speeds{nullptr, 20.0};
  auto cell = radio::compute_gamma_cell(g, bs_at(150, 150), 0.0, 0.01, speeds, 5.0, test_model());
  auto seeds = radio::cell_connectivity(g, cell, cell);
  std::size_t ri_count = 0;
  for (const auto& s : seeds)
    if (s.kind == radio::CoreNodeSeed::Kind::kIntersection) ++ri_count;
  CHECK(ri_count == cell.covered_intersections.size());
}

TEST_CASE("cell connectivity: disjoint cells share nothing") {
  auto g = net::generate_grid(9, 2, 100.0, 100.0);
  radio::SpeedContext speeds{nullptr, 20.0};
  auto m = test_model();
  auto bs1 = bs_at(0, 0, 0);
  auto bs2 = bs_at(800, 0, 1);
  double gamma = radio::rate_quantile_mbps({150, 0}, bs1, 20, 0.01, m);  // radius ~150 m
  auto c1 = radio::compute_gamma_cell(g, bs1, gamma, 0.01, speeds, 5.0, m);
  auto c2 = radio::compute_gamma_cell(g, bs2, gamma, 0.01, speeds, 5.0, m);
  CHECK(!c1.empty());
  CHECK(!c2.empty());
  CHECK(radio::cell_connectivity(g, c1, c2).empty());
}

TEST_CASE("cell connectivity: exactly one common RI") {
  auto g = net::generate_grid(5, 3, 100.0, 100.0);
  radio::SpeedContext speeds{nullptr, 20.0};
  auto m = test_model();
  auto bs1 = bs_at(100, 100, 0);
  auto bs2 = bs_at(300, 100, 1);
  // Radius 120 m: each covers its own cross of neighbors; the only point
  // within both radii on the lattice is the middle RI at (200,100).
  double gamma = radio::rate_quantile_mbps({bs1.position.x + 120, 100}, bs1, 20, 0.01, m);
  auto c1 = radio::compute_gamma_cell(g, bs1, gamma, 0.01, speeds, 5.0, m);
  auto c2 = radio::compute_gamma_cell(g, bs2, gamma, 0.01, speeds, 5.0, m);
  auto seeds = radio::cell_connectivity(g, c1, c2);
  // Exhaustive check of lattice points against both radii.
  int expected_common = 0;
  for (const auto& n : g.intersections())
    if (distance(n.position, bs1.position) <= 120.0 + 1e-6 &&
        distance(n.position, bs2.position) <= 120.0 + 1e-6)
      ++expected_common;
  CHECK(expected_common == 1);
  REQUIRE(seeds.size() == 1);
  CHECK(seeds[0].kind == radio::CoreNodeSeed::Kind::kIntersection);
  CHECK(g.intersection(seeds[0].intersection).position.x == doctest::Approx(200.0));
  CHECK(g.intersection(seeds[0].intersection).position.y == doctest::Approx(100.0));
}

TEST_CASE("cell connectivity: jointly spanned segment gets a midpoint core node") {
  // One 400 m segment; each BS covers one end past the middle.
  std::vector<net::Intersection> nodes{{0, {0, 0}}, {1, {400, 0}}};
  std::vector<net::Segment> segs(1);
  segs[0].id = 0;
  segs[0].a = 0;
  segs[0].b = 1;
  segs[0].length_m = 400.0;
  segs[0].midpoint = {200, 0};
  net::RoadNetwork g(nodes, segs);
  radio::SpeedContext speeds{nullptr, 20.0};
  auto m = test_model();
  auto bs1 = bs_at(0, 0, 0);
  auto bs2 = bs_at(400, 0, 1);
  double gamma = radio::rate_quantile_mbps({250, 0}, bs1, 20, 0.01, m);  // radius 250 m
  auto c1 = radio::compute_gamma_cell(g, bs1, gamma, 0.01, speeds, 5.0, m);
  auto c2 = radio::compute_gamma_cell(g, bs2, gamma, 0.01, speeds, 5.0, m);
  CHECK(c1.covers_intersection(0));
  CHECK(!c1.covers_intersection(1));
  auto i1 = c1.interval_on(0);
  REQUIRE(i1.has_value());
  CHECK(i1->lo == doctest::Approx(0.0));
  CHECK(i1->hi == doctest::Approx(0.625).epsilon(0.05));
  auto seeds = radio::cell_connectivity(g, c1, c2);
  REQUIRE(seeds.size() == 1);
  CHECK(seeds[0].kind == radio::CoreNodeSeed::Kind::kMidpoint);
  CHECK(seeds[0].offset_fraction == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("cell connectivity is symmetric") {
  auto g = net::generate_grid(6, 4, 100.0, 100.0);
  auto m = test_model();
  std::mt19937_64 rng(3);
  for (int inst = 0; inst < 10; ++inst) {
    auto esm = net::assign_esm(g, {10.0, 20.0, 30.0}, rng());
    radio::SpeedContext speeds{&esm, 20.0};
    auto bs1 = bs_at(100.0 + (rng() % 300), 100.0 + (rng() % 200), 0);
    auto bs2 = bs_at(100.0 + (rng() % 300), 100.0 + (rng() % 200), 1);
    double gamma = radio::rate_quantile_mbps({bs1.position.x + 200, bs1.position.y}, bs1, 30,
                                             0.01, m);
    auto c1 = radio::compute_gamma_cell(g, bs1, gamma, 0.01, speeds, 5.0, m);
    auto c2 = radio::compute_gamma_cell(g, bs2, gamma, 0.01, speeds, 5.0, m);
    auto ab = radio::cell_connectivity(g, c1, c2);
    auto ba = radio::cell_connectivity(g, c2, c1);
    REQUIRE(ab.size() == ba.size());
    for (std::size_t i = 0; i < ab.size(); ++i) {
      CHECK(ab[i].kind == ba[i].kind);
      CHECK(ab[i].intersection == ba[i].intersection);
      CHECK(ab[i].segment == ba[i].segment);
      CHECK(ab[i].offset_fraction == doctest::Approx(ba[i].offset_fraction));
    }
  }
}

TEST_CASE("adding a base station never shrinks the covered union") {
  auto g = net::generate_grid(6, 4, 100.0, 100.0);
  auto esm = net::assign_esm(g, {10.0, 20.0, 30.0}, 11);
  radio::SpeedContext speeds{&esm, 20.0};
  auto m = test_model();
  double gamma = 150.0;
  std::vector<radio::GammaRateCell> cells;
  std::set<net::SegmentId> prev_union;
  for (int k = 0; k < 4; ++k) {
    cells.push_back(radio::compute_gamma_cell(g, bs_at(80.0 + 120.0 * k, 150.0, k), gamma, 0.01,
                                              speeds, 5.0, m));
    std::set<net::SegmentId> cur_union;
    for (const auto& c : cells)
      cur_union.insert(c.covered_segments.begin(), c.covered_segments.end());
    CHECK(std::includes(cur_union.begin(), cur_union.end(), prev_union.begin(),
                        prev_union.end()));
    prev_union = std::move(cur_union);
  }
}
