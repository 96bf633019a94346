#include <doctest.h>

#include <algorithm>
#include <set>

#include "error.hpp"
#include "net.hpp"
#include "serialize.hpp"

using namespace ccr;

TEST_CASE("grid generator: paper-scale dimensions") {
  auto g = net::generate_grid(11, 51, 250.0, 100.0);
  CHECK(g.intersection_count() == 561);
  CHECK(g.segment_count() == 1060);
  CHECK(g.is_connected());
}

TEST_CASE("grid generator: smallest grid") {
  auto g = net::generate_grid(2, 2, 1.0, 1.0);
  CHECK(g.intersection_count() == 4);
  CHECK(g.segment_count() == 4);
}

TEST_CASE("grid generator: 3x2 lattice enumerated by hand") {
  // streets y=0 and y=100 with 3 avenues: 2+2 along-street edges, 3 verticals.
  auto g = net::generate_grid(3, 2, 250.0, 100.0);
  CHECK(g.intersection_count() == 6);
  CHECK(g.segment_count() == 7);
  CHECK(g.intersection(4).position.x == doctest::Approx(250.0));
  CHECK(g.intersection(4).position.y == doctest::Approx(100.0));
}

TEST_CASE("grid generator: argument validation") {
  CHECK_THROWS_AS(net::generate_grid(1, 5, 10, 10), ConfigError);
  CHECK_THROWS_AS(net::generate_grid(5, 1, 10, 10), ConfigError);
  CHECK_THROWS_AS(net::generate_grid(3, 3, 0, 10), ConfigError);
  CHECK_THROWS_AS(net::generate_grid(3, 3, 10, -1), ConfigError);
}

TEST_CASE("grid generator: counts and connectivity over a size range") {
  for (int a = 2; a <= 7; ++a) {
    for (int s = 2; s <= 7; ++s) {
      auto g = net::generate_grid(a, s, 50.0, 80.0);
      CHECK(g.intersection_count() == static_cast<std::size_t>(a * s));
      CHECK(g.segment_count() == static_cast<std::size_t>((a - 1) * s + a * (s - 1)));
      CHECK(g.is_connected());
      for (const auto& seg : g.segments()) {
        double d = distance(g.intersection(seg.a).position, g.intersection(seg.b).position);
        CHECK(seg.length_m == doctest::Approx(d));
      }
    }
  }
}

TEST_CASE("esm: totality, membership and determinism") {
  auto g = net::generate_grid(5, 4, 100.0, 100.0);
  std::vector<double> speeds{10.0, 20.0, 30.0};
  auto esm1 = net::assign_esm(g, speeds, 42);
  auto esm2 = net::assign_esm(g, speeds, 42);
  auto esm3 = net::assign_esm(g, speeds, 43);
  CHECK(esm1.size() == g.segment_count());
  bool all_match = true;
  bool any_differ = false;
  for (const auto& seg : g.segments()) {
    double v = esm1.speed(seg.id);
    CHECK(std::count(speeds.begin(), speeds.end(), v) == 1);
    all_match = all_match && v == esm2.speed(seg.id);
    any_differ = any_differ || v != esm3.speed(seg.id);
  }
  CHECK(all_match);
  CHECK(any_differ);
}

TEST_CASE("esm: singleton speed set gives a constant map") {
  auto g = net::generate_grid(3, 3, 100.0, 100.0);
  auto esm = net::assign_esm(g, {17.5}, 7);
  for (const auto& seg : g.segments()) CHECK(esm.speed(seg.id) == 17.5);
}

TEST_CASE("esm: rejects bad speed sets") {
  auto g = net::generate_grid(2, 2, 1.0, 1.0);
  CHECK_THROWS_AS(net::assign_esm(g, {}, 1), ConfigError);
  CHECK_THROWS_AS(net::assign_esm(g, {10.0, 0.0}, 1), ConfigError);
}

TEST_CASE("edge travel time") {
  auto g = net::generate_grid(2, 2, 250.0, 100.0);
  net::EffectiveSpeedMap esm({10.0, 30.0, 20.0, 20.0});
  CHECK(net::edge_travel_time(g.segment(0), esm) == doctest::Approx(25.0));
  CHECK(net::edge_travel_time(g.segment(1), esm) == doctest::Approx(250.0 / 30.0));
  CHECK(net::edge_travel_time(g.segment(2), esm) == doctest::Approx(5.0));
  for (const auto& seg : g.segments()) CHECK(net::edge_travel_time(seg, esm) > 0.0);
}

TEST_CASE("edge travel time: missing segment entry") {
  auto g = net::generate_grid(2, 2, 250.0, 100.0);
  net::EffectiveSpeedMap short_map({10.0, 10.0});  // only two entries
  CHECK_THROWS_AS(net::edge_travel_time(g.segment(3), short_map), Error);
}

TEST_CASE("network json round trip") {
  auto g = net::generate_grid(4, 3, 120.0, 60.0);
  auto esm = net::assign_esm(g, {10.0, 20.0, 30.0}, 5);
  auto doc = out::network_json(g, &esm);
  auto g2 = out::network_from_json(doc);
  auto esm2 = out::esm_from_json(doc, g2);
  REQUIRE(g2.intersection_count() == g.intersection_count());
  REQUIRE(g2.segment_count() == g.segment_count());
  CHECK(g2.grid().has_value());
  for (const auto& seg : g.segments()) {
    CHECK(g2.segment(seg.id).a == seg.a);
    CHECK(g2.segment(seg.id).b == seg.b);
    CHECK(esm2.speed(seg.id) == esm.speed(seg.id));
  }
}

TEST_CASE("network construction validates segments") {
  std::vector<net::Intersection> nodes{{0, {0, 0}}, {1, {1, 0}}};
  {
    std::vector<net::Segment> segs(1);
    segs[0].id = 0;
    segs[0].a = 0;
    segs[0].b = 5;  // unknown endpoint
    segs[0].length_m = 1.0;
    CHECK_THROWS_AS(net::RoadNetwork(nodes, segs), Error);
  }
  {
    std::vector<net::Segment> segs(1);
    segs[0].id = 0;
    segs[0].a = 0;
    segs[0].b = 1;
    segs[0].length_m = 0.0;  // degenerate
    CHECK_THROWS_AS(net::RoadNetwork(nodes, segs), Error);
  }
}
