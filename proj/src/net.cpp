#include "net.hpp"

#include <algorithm>
#include <queue>
#include <random>

namespace ccr::net {

RoadNetwork::RoadNetwork(std::vector<Intersection> intersections, std::vector<Segment> segments,
                         std::optional<GridInfo> grid)
    : intersections_(std::move(intersections)),
      segments_(std::move(segments)),
      grid_(std::move(grid)) {
  for (std::size_t i = 0; i < intersections_.size(); ++i) {
    if (intersections_[i].id != static_cast<NodeId>(i))
      throw Error("intersection ids must be dense and ordered");
  }
  incident_.resize(intersections_.size());
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (s.id != static_cast<SegmentId>(i)) throw Error("segment ids must be dense and ordered");
    if (s.a < 0 || s.b < 0 || static_cast<std::size_t>(s.a) >= intersections_.size() ||
        static_cast<std::size_t>(s.b) >= intersections_.size())
      throw Error("segment " + std::to_string(s.id) + " references unknown intersection");
    if (s.a == s.b) throw Error("segment endpoints must differ");
    if (!(s.length_m > 0.0)) throw Error("segment length must be positive");
    incident_[static_cast<std::size_t>(s.a)].push_back(s.id);
    incident_[static_cast<std::size_t>(s.b)].push_back(s.id);
  }
}

const Intersection& RoadNetwork::intersection(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= intersections_.size())
    throw Error("unknown intersection id " + std::to_string(id));
  return intersections_[static_cast<std::size_t>(id)];
}

const Segment& RoadNetwork::segment(SegmentId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= segments_.size())
    throw Error("unknown segment id " + std::to_string(id));
  return segments_[static_cast<std::size_t>(id)];
}

std::span<const SegmentId> RoadNetwork::incident_segments(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= intersections_.size())
    throw Error("unknown intersection id " + std::to_string(id));
  return incident_[static_cast<std::size_t>(id)];
}

bool RoadNetwork::is_connected() const {
  if (intersections_.empty()) return true;
  std::vector<char> seen(intersections_.size(), 0);
  std::queue<NodeId> queue;
  queue.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop();
    for (SegmentId sid : incident_[static_cast<std::size_t>(u)]) {
      NodeId v = segments_[static_cast<std::size_t>(sid)].other(u);
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        queue.push(v);
      }
    }
  }
  return reached == intersections_.size();
}

RoadNetwork generate_grid(int avenues, int streets, double block_length_m,
                          double block_width_m) {
  if (avenues < 2) throw ConfigError("grid.avenues", "must be >= 2");
  if (streets < 2) throw ConfigError("grid.streets", "must be >= 2");
  if (!(block_length_m > 0.0)) throw ConfigError("grid.block_length_m", "must be > 0");
  if (!(block_width_m > 0.0)) throw ConfigError("grid.block_width_m", "must be > 0");

  std::vector<Intersection> nodes;
  nodes.reserve(static_cast<std::size_t>(avenues) * static_cast<std::size_t>(streets));
  for (int j = 0; j < streets; ++j)
    for (int i = 0; i < avenues; ++i)
      nodes.push_back({static_cast<NodeId>(j * avenues + i),
                       {i * block_length_m, j * block_width_m}});

  std::vector<Segment> segments;
  segments.reserve(static_cast<std::size_t>(avenues - 1) * streets +
                   static_cast<std::size_t>(avenues) * (streets - 1));
  SegmentId next = 0;
  auto add = [&](NodeId a, NodeId b, double len) {
    Segment s;
    s.id = next++;
    s.a = a;
    s.b = b;
    s.length_m = len;
    s.midpoint = lerp(nodes[static_cast<std::size_t>(a)].position,
                      nodes[static_cast<std::size_t>(b)].position, 0.5);
    segments.push_back(s);
  };
  // Along-street edges first, then along-avenue edges.
  for (int j = 0; j < streets; ++j)
    for (int i = 0; i + 1 < avenues; ++i)
      add(static_cast<NodeId>(j * avenues + i), static_cast<NodeId>(j * avenues + i + 1),
          block_length_m);
  for (int j = 0; j + 1 < streets; ++j)
    for (int i = 0; i < avenues; ++i)
      add(static_cast<NodeId>(j * avenues + i), static_cast<NodeId>((j + 1) * avenues + i),
          block_width_m);

  return RoadNetwork(std::move(nodes), std::move(segments),
                     GridInfo{avenues, streets, block_length_m, block_width_m});
}

EffectiveSpeedMap assign_esm(const RoadNetwork& network, const std::vector<double>& speed_set,
                             std::uint64_t seed) {
  if (speed_set.empty()) throw ConfigError("speeds.set_mps", "must not be empty");
  for (double v : speed_set)
    if (!(v > 0.0)) throw ConfigError("speeds.set_mps", "speeds must be > 0");

  std::mt19937_64 rng(seed);
  std::vector<double> speeds(network.segment_count());
  for (std::size_t i = 0; i < speeds.size(); ++i)
    speeds[i] = speed_set[rng() % speed_set.size()];
  return EffectiveSpeedMap(std::move(speeds));
}

double edge_travel_time(const Segment& segment, const EffectiveSpeedMap& esm) {
  return segment.length_m / esm.speed(segment.id);
}

}  // namespace ccr::net
