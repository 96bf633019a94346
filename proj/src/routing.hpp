#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "net.hpp"
#include "radio.hpp"

namespace ccr::routing {

inline constexpr double kInfTime = std::numeric_limits<double>::infinity();

enum class RouteStatus { kOk, kNoRoute, kSourceUncovered, kDestinationUncovered };
const char* to_string(RouteStatus status);

/// One directed pass over (part of) a segment. Fractions are offsets along
/// the segment's a->b orientation; from > to means the segment is traveled
/// against that orientation.
struct Traversal {
  net::SegmentId segment = -1;
  double from_fraction = 0.0;
  double to_fraction = 1.0;
  double time_s = 0.0;
};

struct Route {
  std::string scheme;
  net::NodeId src = -1;
  net::NodeId dst = -1;
  std::vector<Traversal> traversals;
  double total_time_s = 0.0;
  double gamma_used_mbps = 0.0;
  /// greedy-cc only: index of the first traversal after the switch to
  /// unconstrained greedy behavior.
  std::optional<std::size_t> cc_switch_index;
  /// two-layer only: the sequence of cells the dynamic program stitched
  /// through.
  std::vector<int> cell_walk;
};

struct RouteResult {
  RouteStatus status = RouteStatus::kNoRoute;
  std::optional<Route> route;
  bool ok() const { return status == RouteStatus::kOk; }
};

/// A stitching point between two gamma-rate cells.
struct CoreNode {
  int id = -1;
  radio::CoreNodeSeed::Kind kind = radio::CoreNodeSeed::Kind::kIntersection;
  net::NodeId intersection = -1;  // kind == kIntersection
  net::SegmentId segment = -1;    // kind == kMidpoint
  double offset_fraction = 0.0;   // kind == kMidpoint
  Point location;
  std::pair<int, int> cells{-1, -1};  // cell indexes, first < second
};

/// Connectivity among gamma-rate cells; an edge exists exactly when the two
/// cells share at least one core node.
struct TopLayerGraph {
  struct Edge {
    int cell_a = -1;
    int cell_b = -1;
    std::vector<int> core_ids;
  };

  std::size_t cell_count = 0;
  std::vector<Edge> edges;
  std::vector<CoreNode> core_nodes;
  std::vector<std::vector<int>> neighbors;      // cell -> sorted neighbor cells
  std::vector<std::vector<int>> cores_by_cell;  // cell -> core ids on its boundary

  const Edge* edge_between(int a, int b) const;
};

TopLayerGraph build_top_layer(const net::RoadNetwork& network,
                              const std::vector<radio::GammaRateCell>& cells);

using TopPath = std::vector<int>;

/// All simple top-layer paths from src_cell to dst_cell in shortest-hop-first
/// order, truncated at max_paths (a truncation warning is printed once).
/// src_cell == dst_cell yields the single length-1 path.
std::vector<TopPath> enumerate_top_paths(const TopLayerGraph& top, int src_cell, int dst_cell,
                                         std::size_t max_paths, bool* truncated = nullptr);

/// Reference to a routing endpoint inside one cell.
struct LocalRef {
  enum class Kind { kIntersection, kCore };
  Kind kind = Kind::kIntersection;
  int id = -1;  // NodeId or core id

  static LocalRef at_intersection(net::NodeId n) { return {Kind::kIntersection, n}; }
  static LocalRef at_core(int core_id) { return {Kind::kCore, core_id}; }
};

/// Result of intra-cell routing between two endpoint sets: a time matrix
/// (+inf where unreachable inside the cell) with recorded bottom-layer paths.
class IntraCellResult {
 public:
  const std::vector<std::vector<double>>& times() const { return times_; }
  /// Bottom-layer path for a finite entry (empty for a zero-time self pair).
  std::vector<Traversal> path(std::size_t from_index, std::size_t to_index) const;

 private:
  friend class RoutingContext;
  std::vector<std::vector<double>> times_;
  std::vector<int> to_vertices_;
  struct Tree {
    std::vector<double> dist;
    std::vector<int> pred_vertex;
    std::vector<int> pred_edge;
  };
  std::vector<Tree> trees_;
  const void* graph_ = nullptr;  // owning context's cell graph
};

/// Per-path dynamic-programming table: best arrival time and predecessor at
/// every core node of every boundary along one top-layer path.
struct DpTable {
  TopPath path;
  std::vector<std::vector<int>> boundary_cores;  // boundary j -> core ids
  std::vector<std::vector<double>> best;         // boundary j -> time per core
  std::vector<std::vector<int>> pred;            // index into boundary j-1 (-1 = source)
  double total = kInfTime;                       // source -> destination via this path
};

/// Immutable routing substrate for one (network, cells, ESM) triple: the top
/// layer with its core nodes plus each cell's covered local graph. Queries
/// are pure; build one context per concurrent worker.
class RoutingContext {
 public:
  RoutingContext(const net::RoadNetwork& network, std::vector<radio::GammaRateCell> cells,
                 net::EffectiveSpeedMap esm);

  const net::RoadNetwork& network() const { return *network_; }
  const net::EffectiveSpeedMap& esm() const { return esm_; }
  const std::vector<radio::GammaRateCell>& cells() const { return cells_; }
  const TopLayerGraph& top() const { return top_; }

  std::vector<int> cells_containing(net::NodeId node) const;
  /// Fully covered by at least one single cell.
  bool segment_usable(net::SegmentId id) const;

  IntraCellResult intra_cell_times(int cell, std::span<const LocalRef> from,
                                   std::span<const LocalRef> to) const;

  DpTable dp_over_path(const TopPath& path, net::NodeId src, net::NodeId dst) const;

  // Internal local graph (exposed for the oracle and tests).
  struct LocalVertex {
    bool is_midpoint = false;
    net::NodeId node = -1;
    int core_id = -1;
    net::SegmentId segment = -1;
    double offset_fraction = 0.0;
  };
  struct LocalEdge {
    int to = -1;
    double time = 0.0;
    net::SegmentId segment = -1;
    double f_from = 0.0;
    double f_to = 0.0;
  };
  struct CellGraph {
    std::vector<LocalVertex> verts;
    std::vector<std::vector<LocalEdge>> adj;
    std::unordered_map<net::NodeId, int> vertex_of_node;
    std::unordered_map<int, int> vertex_of_core;
  };
  const CellGraph& cell_graph(int cell) const { return cell_graphs_[static_cast<std::size_t>(cell)]; }

 private:
  int local_vertex(int cell, const LocalRef& ref) const;

  const net::RoadNetwork* network_;
  net::EffectiveSpeedMap esm_;
  std::vector<radio::GammaRateCell> cells_;
  TopLayerGraph top_;
  std::vector<CellGraph> cell_graphs_;
  std::vector<char> segment_usable_;
};

using CellProvider = std::function<std::vector<radio::GammaRateCell>(double gamma_mbps)>;

/// Steps 1-3 at a fixed gamma on a prebuilt context. The dynamic program
/// relaxes over core nodes and allows the cell walk to revisit a cell, which
/// keeps the result optimal even when a neighboring cell bridges a coverage
/// hole of the current one.
RouteResult two_layer_route_at(const RoutingContext& ctx, net::NodeId src, net::NodeId dst,
                               double gamma_mbps);

/// Full scheme with the rate-threshold fallback: on failure gamma is lowered
/// by gamma_step (recomputing cells through `provider`) down to gamma_floor.
RouteResult two_layer_route(const net::RoadNetwork& network, const net::EffectiveSpeedMap& esm,
                            const CellProvider& provider, net::NodeId src, net::NodeId dst,
                            double gamma_mbps, double gamma_floor_mbps, double gamma_step_mbps);

/// Test oracle: flat Dijkstra over the union of all covered subgraphs,
/// built directly from the cells (independent of the two-layer machinery).
RouteResult oracle_constrained_shortest(const RoutingContext& ctx, net::NodeId src,
                                        net::NodeId dst);

/// Random walk that always moves strictly closer to dst on the lattice.
/// Grid networks only.
RouteResult greedy_route_no_cc(const net::RoadNetwork& network, const net::EffectiveSpeedMap& esm,
                               net::NodeId src, net::NodeId dst, std::uint64_t seed);

/// Depth-first greedy walk over covered segments with U-turn backtracking;
/// switches permanently to the unconstrained greedy after max_segments
/// traversals (or when the covered component is exhausted).
RouteResult greedy_route_cc(const RoutingContext& ctx, net::NodeId src, net::NodeId dst,
                            std::size_t max_segments, std::uint64_t seed);

/// Unconstrained minimum-time route (plain Dijkstra; lowest-id tie-break).
RouteResult shortest_time_route(const net::RoadNetwork& network,
                                const net::EffectiveSpeedMap& esm, net::NodeId src,
                                net::NodeId dst);

}  // namespace ccr::routing
