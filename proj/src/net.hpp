#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace ccr::net {

using NodeId = std::int32_t;
using SegmentId = std::int32_t;

/// A road intersection (RI).
struct Intersection {
  NodeId id = -1;
  Point position;
};

/// A road segment (RS) between two intersections. Segments are undirected;
/// all streets carry bidirectional traffic.
struct Segment {
  SegmentId id = -1;
  NodeId a = -1;
  NodeId b = -1;
  double length_m = 0.0;
  Point midpoint;

  NodeId other(NodeId n) const { return n == a ? b : a; }
};

/// Present when the network was produced by the grid generator; greedy
/// routing relies on the lattice indexing.
struct GridInfo {
  int avenues = 0;        // lattice columns (x direction)
  int streets = 0;        // lattice rows (y direction)
  double block_length_m = 0.0;  // avenue spacing
  double block_width_m = 0.0;   // street spacing

  int col(NodeId n) const { return static_cast<int>(n) % avenues; }
  int row(NodeId n) const { return static_cast<int>(n) / avenues; }
  int lattice_distance(NodeId u, NodeId v) const {
    return std::abs(col(u) - col(v)) + std::abs(row(u) - row(v));
  }
};

/// Planar road graph. Immutable after construction; safe to share across
/// threads.
class RoadNetwork {
 public:
  RoadNetwork(std::vector<Intersection> intersections, std::vector<Segment> segments,
              std::optional<GridInfo> grid = std::nullopt);

  const std::vector<Intersection>& intersections() const { return intersections_; }
  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t intersection_count() const { return intersections_.size(); }
  std::size_t segment_count() const { return segments_.size(); }

  const Intersection& intersection(NodeId id) const;
  const Segment& segment(SegmentId id) const;
  std::span<const SegmentId> incident_segments(NodeId id) const;

  const std::optional<GridInfo>& grid() const { return grid_; }
  bool is_connected() const;

 private:
  std::vector<Intersection> intersections_;
  std::vector<Segment> segments_;
  std::vector<std::vector<SegmentId>> incident_;
  std::optional<GridInfo> grid_;
};

/// Per-segment effective speeds; frozen for the whole trip being routed.
class EffectiveSpeedMap {
 public:
  EffectiveSpeedMap() = default;
  explicit EffectiveSpeedMap(std::vector<double> speeds_by_segment)
      : speeds_(std::move(speeds_by_segment)) {}

  double speed(SegmentId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= speeds_.size())
      throw Error("segment " + std::to_string(id) + " missing from effective speed map");
    return speeds_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const { return speeds_.size(); }
  const std::vector<double>& values() const { return speeds_; }

 private:
  std::vector<double> speeds_;
};

/// Builds an avenues x streets lattice. Intersection ids are assigned in
/// row-major order (streets outermost); segment ids enumerate the
/// along-street edges first, then the along-avenue edges.
RoadNetwork generate_grid(int avenues, int streets, double block_length_m,
                          double block_width_m);

/// Draws one speed per segment, uniformly from speed_set. Deterministic for
/// a fixed seed.
EffectiveSpeedMap assign_esm(const RoadNetwork& network, const std::vector<double>& speed_set,
                             std::uint64_t seed);

double edge_travel_time(const Segment& segment, const EffectiveSpeedMap& esm);

}  // namespace ccr::net
