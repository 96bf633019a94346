#include "routing.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <map>
#include <queue>
#include <set>

#include "error.hpp"

namespace ccr::routing {
namespace {

constexpr double kFracTol = 1e-9;

using MinQueue = std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                                     std::greater<>>;

struct Tree {
  std::vector<double> dist;
  std::vector<int> pred_vertex;
  std::vector<int> pred_edge;
};

// Deterministic Dijkstra over a cell graph; on a distance tie the lower
// predecessor vertex id wins.
Tree dijkstra_local(const RoutingContext::CellGraph& g, int src) {
  Tree t;
  t.dist.assign(g.verts.size(), kInfTime);
  t.pred_vertex.assign(g.verts.size(), -1);
  t.pred_edge.assign(g.verts.size(), -1);
  MinQueue pq;
  t.dist[static_cast<std::size_t>(src)] = 0.0;
  pq.emplace(0.0, src);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > t.dist[static_cast<std::size_t>(u)]) continue;
    const auto& edges = g.adj[static_cast<std::size_t>(u)];
    for (std::size_t ei = 0; ei < edges.size(); ++ei) {
      const auto& e = edges[ei];
      double nd = d + e.time;
      auto v = static_cast<std::size_t>(e.to);
      if (nd < t.dist[v]) {
        t.dist[v] = nd;
        t.pred_vertex[v] = u;
        t.pred_edge[v] = static_cast<int>(ei);
        pq.emplace(nd, e.to);
      } else if (nd == t.dist[v] && t.pred_vertex[v] >= 0 && u < t.pred_vertex[v]) {
        t.pred_vertex[v] = u;
        t.pred_edge[v] = static_cast<int>(ei);
      }
    }
  }
  return t;
}

std::vector<Traversal> unwind(const RoutingContext::CellGraph& g,
                              const std::vector<int>& pred_vertex,
                              const std::vector<int>& pred_edge, int to) {
  std::vector<Traversal> out;
  int cur = to;
  while (pred_vertex[static_cast<std::size_t>(cur)] >= 0) {
    int pv = pred_vertex[static_cast<std::size_t>(cur)];
    const auto& e = g.adj[static_cast<std::size_t>(pv)][static_cast<std::size_t>(
        pred_edge[static_cast<std::size_t>(cur)])];
    out.push_back({e.segment, e.f_from, e.f_to, e.time});
    cur = pv;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double sum_times(const std::vector<Traversal>& ts) {
  double total = 0.0;
  for (const auto& t : ts) total += t.time_s;
  return total;
}

}  // namespace

const char* to_string(RouteStatus status) {
  switch (status) {
    case RouteStatus::kOk: return "ok";
    case RouteStatus::kNoRoute: return "no-route";
    case RouteStatus::kSourceUncovered: return "source-uncovered";
    case RouteStatus::kDestinationUncovered: return "destination-uncovered";
  }
  return "unknown";
}

const TopLayerGraph::Edge* TopLayerGraph::edge_between(int a, int b) const {
  for (const Edge& e : edges)
    if ((e.cell_a == a && e.cell_b == b) || (e.cell_a == b && e.cell_b == a)) return &e;
  return nullptr;
}

TopLayerGraph build_top_layer(const net::RoadNetwork& network,
                              const std::vector<radio::GammaRateCell>& cells) {
  TopLayerGraph top;
  top.cell_count = cells.size();
  top.neighbors.resize(cells.size());
  top.cores_by_cell.resize(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      auto seeds = radio::cell_connectivity(network, cells[i], cells[j]);
      if (seeds.empty()) continue;
      TopLayerGraph::Edge edge;
      edge.cell_a = static_cast<int>(i);
      edge.cell_b = static_cast<int>(j);
      for (const auto& seed : seeds) {
        CoreNode k;
        k.id = static_cast<int>(top.core_nodes.size());
        k.kind = seed.kind;
        k.intersection = seed.intersection;
        k.segment = seed.segment;
        k.offset_fraction = seed.offset_fraction;
        k.location = seed.location;
        k.cells = {static_cast<int>(i), static_cast<int>(j)};
        edge.core_ids.push_back(k.id);
        top.core_nodes.push_back(k);
        top.cores_by_cell[i].push_back(k.id);
        top.cores_by_cell[j].push_back(k.id);
      }
      top.neighbors[i].push_back(static_cast<int>(j));
      top.neighbors[j].push_back(static_cast<int>(i));
      top.edges.push_back(std::move(edge));
    }
  }
  for (auto& nbrs : top.neighbors) std::sort(nbrs.begin(), nbrs.end());
  return top;
}

std::vector<TopPath> enumerate_top_paths(const TopLayerGraph& top, int src_cell, int dst_cell,
                                         std::size_t max_paths, bool* truncated) {
  if (src_cell < 0 || static_cast<std::size_t>(src_cell) >= top.cell_count ||
      dst_cell < 0 || static_cast<std::size_t>(dst_cell) >= top.cell_count)
    throw Error("enumerate_top_paths: cell index out of range");
  if (truncated != nullptr) *truncated = false;

  std::vector<TopPath> out;
  std::deque<TopPath> frontier;
  frontier.push_back({src_cell});
  constexpr std::size_t kExpansionCap = 500'000;
  std::size_t expansions = 0;
  bool cut = false;
  while (!frontier.empty() && !cut) {
    TopPath p = std::move(frontier.front());
    frontier.pop_front();
    if (p.back() == dst_cell) {
      out.push_back(std::move(p));
      if (out.size() >= max_paths) {
        cut = !frontier.empty();
        break;
      }
      continue;
    }
    for (int nb : top.neighbors[static_cast<std::size_t>(p.back())]) {
      if (std::find(p.begin(), p.end(), nb) != p.end()) continue;
      if (++expansions > kExpansionCap) {
        cut = true;
        break;
      }
      TopPath q = p;
      q.push_back(nb);
      frontier.push_back(std::move(q));
    }
  }
  if (cut) {
    std::fprintf(stderr, "warning: top-layer path enumeration truncated after %zu paths\n",
                 out.size());
    if (truncated != nullptr) *truncated = true;
  }
  return out;
}

RoutingContext::RoutingContext(const net::RoadNetwork& network,
                               std::vector<radio::GammaRateCell> cells,
                               net::EffectiveSpeedMap esm)
    : network_(&network), esm_(std::move(esm)), cells_(std::move(cells)) {
  top_ = build_top_layer(network, cells_);

  segment_usable_.assign(network.segment_count(), 0);
  for (const auto& cell : cells_)
    for (net::SegmentId sid : cell.covered_segments)
      segment_usable_[static_cast<std::size_t>(sid)] = 1;

  // Midpoint core nodes grouped by (cell, segment) for anchor construction.
  std::map<std::pair<int, net::SegmentId>, std::vector<int>> midpoints;
  for (const CoreNode& k : top_.core_nodes) {
    if (k.kind != radio::CoreNodeSeed::Kind::kMidpoint) continue;
    midpoints[{k.cells.first, k.segment}].push_back(k.id);
    midpoints[{k.cells.second, k.segment}].push_back(k.id);
  }

  cell_graphs_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    CellGraph& g = cell_graphs_[c];
    const auto& cell = cells_[c];
    for (net::NodeId n : cell.covered_intersections) {
      g.vertex_of_node[n] = static_cast<int>(g.verts.size());
      LocalVertex v;
      v.node = n;
      g.verts.push_back(v);
    }
    for (const CoreNode& k : top_.core_nodes) {
      if (k.cells.first != static_cast<int>(c) && k.cells.second != static_cast<int>(c)) continue;
      if (k.kind == radio::CoreNodeSeed::Kind::kIntersection) {
        g.vertex_of_core[k.id] = g.vertex_of_node.at(k.intersection);
      } else {
        g.vertex_of_core[k.id] = static_cast<int>(g.verts.size());
        LocalVertex v;
        v.is_midpoint = true;
        v.core_id = k.id;
        v.segment = k.segment;
        v.offset_fraction = k.offset_fraction;
        g.verts.push_back(v);
      }
    }
    g.adj.resize(g.verts.size());

    // Anchor chain per segment: endpoints plus midpoint core nodes, joined
    // where the connecting sub-interval lies inside the cell's coverage.
    for (const net::Segment& seg : network.segments()) {
      auto interval = cell.interval_on(seg.id);
      if (!interval) continue;
      std::vector<std::pair<double, int>> anchors;  // (fraction, vertex)
      auto it_a = g.vertex_of_node.find(seg.a);
      if (it_a != g.vertex_of_node.end()) anchors.emplace_back(0.0, it_a->second);
      auto it_b = g.vertex_of_node.find(seg.b);
      if (it_b != g.vertex_of_node.end()) anchors.emplace_back(1.0, it_b->second);
      auto mit = midpoints.find({static_cast<int>(c), seg.id});
      if (mit != midpoints.end())
        for (int core_id : mit->second)
          anchors.emplace_back(top_.core_nodes[static_cast<std::size_t>(core_id)].offset_fraction,
                               g.vertex_of_core.at(core_id));
      if (anchors.size() < 2) continue;
      std::sort(anchors.begin(), anchors.end());
      double speed = esm_.speed(seg.id);
      for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
        auto [f1, v1] = anchors[i];
        auto [f2, v2] = anchors[i + 1];
        if (f1 < interval->lo - kFracTol || f2 > interval->hi + kFracTol) continue;
        double time = (f2 - f1) * seg.length_m / speed;
        g.adj[static_cast<std::size_t>(v1)].push_back({v2, time, seg.id, f1, f2});
        g.adj[static_cast<std::size_t>(v2)].push_back({v1, time, seg.id, f2, f1});
      }
    }
  }
}

std::vector<int> RoutingContext::cells_containing(net::NodeId node) const {
  std::vector<int> out;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    if (cells_[c].covers_intersection(node)) out.push_back(static_cast<int>(c));
  return out;
}

bool RoutingContext::segment_usable(net::SegmentId id) const {
  return segment_usable_[static_cast<std::size_t>(id)] != 0;
}

int RoutingContext::local_vertex(int cell, const LocalRef& ref) const {
  const CellGraph& g = cell_graph(cell);
  if (ref.kind == LocalRef::Kind::kIntersection) {
    auto it = g.vertex_of_node.find(ref.id);
    if (it == g.vertex_of_node.end())
      throw Error("intersection " + std::to_string(ref.id) + " is not inside cell " +
                  std::to_string(cell));
    return it->second;
  }
  auto it = g.vertex_of_core.find(ref.id);
  if (it == g.vertex_of_core.end())
    throw Error("core node " + std::to_string(ref.id) + " does not border cell " +
                std::to_string(cell));
  return it->second;
}

IntraCellResult RoutingContext::intra_cell_times(int cell, std::span<const LocalRef> from,
                                                 std::span<const LocalRef> to) const {
  const CellGraph& g = cell_graph(cell);
  IntraCellResult res;
  res.graph_ = &g;
  for (const LocalRef& r : to) res.to_vertices_.push_back(local_vertex(cell, r));
  res.times_.resize(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    Tree t = dijkstra_local(g, local_vertex(cell, from[i]));
    auto& row = res.times_[i];
    row.reserve(to.size());
    for (int tv : res.to_vertices_) row.push_back(t.dist[static_cast<std::size_t>(tv)]);
    res.trees_.push_back({std::move(t.dist), std::move(t.pred_vertex), std::move(t.pred_edge)});
  }
  return res;
}

std::vector<Traversal> IntraCellResult::path(std::size_t from_index, std::size_t to_index) const {
  const auto& tree = trees_.at(from_index);
  int to_vertex = to_vertices_.at(to_index);
  if (tree.dist[static_cast<std::size_t>(to_vertex)] == kInfTime)
    throw Error("no intra-cell path recorded for an unreachable pair");
  const auto* g = static_cast<const RoutingContext::CellGraph*>(graph_);
  return unwind(*g, tree.pred_vertex, tree.pred_edge, to_vertex);
}

DpTable RoutingContext::dp_over_path(const TopPath& path, net::NodeId src, net::NodeId dst) const {
  if (path.empty()) throw Error("dp_over_path: empty top path");
  for (std::size_t j = 0; j + 1 < path.size(); ++j)
    if (top_.edge_between(path[j], path[j + 1]) == nullptr)
      throw Error("dp_over_path: cells " + std::to_string(path[j]) + " and " +
                  std::to_string(path[j + 1]) + " are not adjacent");

  DpTable dp;
  dp.path = path;
  std::vector<LocalRef> prev_refs{LocalRef::at_intersection(src)};
  std::vector<double> prev_best{0.0};

  for (std::size_t j = 0; j + 1 < path.size(); ++j) {
    const auto* edge = top_.edge_between(path[j], path[j + 1]);
    std::vector<LocalRef> cur_refs;
    for (int k : edge->core_ids) cur_refs.push_back(LocalRef::at_core(k));
    IntraCellResult legs = intra_cell_times(path[j], prev_refs, cur_refs);
    std::vector<double> cur_best(cur_refs.size(), kInfTime);
    std::vector<int> cur_pred(cur_refs.size(), -1);
    for (std::size_t m = 0; m < cur_refs.size(); ++m) {
      for (std::size_t n = 0; n < prev_refs.size(); ++n) {
        double t = prev_best[n] + legs.times()[n][m];
        if (t < cur_best[m]) {
          cur_best[m] = t;
          cur_pred[m] = static_cast<int>(n) - (j == 0 ? 1 : 0);  // -1 marks the source
        }
      }
    }
    dp.boundary_cores.push_back(edge->core_ids);
    dp.best.push_back(cur_best);
    dp.pred.push_back(std::move(cur_pred));
    prev_refs = std::move(cur_refs);
    prev_best = std::move(dp.best.back());
  }

  std::vector<LocalRef> dst_ref{LocalRef::at_intersection(dst)};
  IntraCellResult last = intra_cell_times(path.back(), prev_refs, dst_ref);
  dp.total = kInfTime;
  for (std::size_t n = 0; n < prev_refs.size(); ++n)
    dp.total = std::min(dp.total, prev_best[n] + last.times()[n][0]);
  return dp;
}

RouteResult two_layer_route_at(const RoutingContext& ctx, net::NodeId src, net::NodeId dst,
                               double gamma_mbps) {
  std::vector<int> src_cells = ctx.cells_containing(src);
  if (src_cells.empty()) return {RouteStatus::kSourceUncovered, std::nullopt};
  std::vector<int> dst_cells = ctx.cells_containing(dst);
  if (dst_cells.empty()) return {RouteStatus::kDestinationUncovered, std::nullopt};

  Route route;
  route.scheme = "two-layer";
  route.src = src;
  route.dst = dst;
  route.gamma_used_mbps = gamma_mbps;

  if (src == dst) {
    route.cell_walk = {src_cells.front()};
    return {RouteStatus::kOk, std::move(route)};
  }

  const TopLayerGraph& top = ctx.top();

  // Step 2 legs, computed per (cell, start vertex) on demand.
  std::unordered_map<std::int64_t, Tree> leg_cache;
  auto tree_for = [&](int cell, int vertex) -> const Tree& {
    std::int64_t key = (static_cast<std::int64_t>(cell) << 32) | static_cast<std::uint32_t>(vertex);
    auto it = leg_cache.find(key);
    if (it == leg_cache.end())
      it = leg_cache.emplace(key, dijkstra_local(ctx.cell_graph(cell), vertex)).first;
    return it->second;
  };

  // Step 3: relax over core nodes. States carry the core node only; a leg
  // from core k through cell c is allowed whenever c touches k, so the cell
  // walk may revisit cells when that is the faster stitch.
  const std::size_t n_cores = top.core_nodes.size();
  std::vector<double> dist(n_cores, kInfTime);
  std::vector<int> pred_core(n_cores, -2);
  std::vector<int> pred_cell(n_cores, -1);
  MinQueue pq;
  double best_total = kInfTime;
  int end_core = -2, end_cell = -1;

  auto try_finish = [&](double total, int via_core, int via_cell) {
    if (total < best_total) {
      best_total = total;
      end_core = via_core;
      end_cell = via_cell;
    }
  };
  auto relax = [&](int core, double t, int from_core, int via_cell) {
    if (t < dist[static_cast<std::size_t>(core)]) {
      dist[static_cast<std::size_t>(core)] = t;
      pred_core[static_cast<std::size_t>(core)] = from_core;
      pred_cell[static_cast<std::size_t>(core)] = via_cell;
      pq.emplace(t, core);
    }
  };
  auto expand_cell = [&](int cell, int from_vertex, double t0, int from_core) {
    const auto& g = ctx.cell_graph(cell);
    const Tree& tree = tree_for(cell, from_vertex);
    auto dv = g.vertex_of_node.find(dst);
    if (dv != g.vertex_of_node.end()) {
      double d = tree.dist[static_cast<std::size_t>(dv->second)];
      if (d < kInfTime) try_finish(t0 + d, from_core, cell);
    }
    for (int k : top.cores_by_cell[static_cast<std::size_t>(cell)]) {
      double d = tree.dist[static_cast<std::size_t>(g.vertex_of_core.at(k))];
      if (d < kInfTime) relax(k, t0 + d, from_core, cell);
    }
  };

  for (int c : src_cells)
    expand_cell(c, ctx.cell_graph(c).vertex_of_node.at(src), 0.0, -1);

  while (!pq.empty()) {
    auto [t, k] = pq.top();
    pq.pop();
    if (t > dist[static_cast<std::size_t>(k)]) continue;
    if (t >= best_total) continue;  // cannot improve the finish
    const CoreNode& core = top.core_nodes[static_cast<std::size_t>(k)];
    for (int c : {core.cells.first, core.cells.second})
      expand_cell(c, ctx.cell_graph(c).vertex_of_core.at(k), t, k);
  }

  if (best_total == kInfTime) return {RouteStatus::kNoRoute, std::nullopt};

  // Reconstruct legs backwards: src -> k1 -> ... -> dst.
  struct Leg {
    int cell;
    int from_vertex;
    int to_vertex;
  };
  std::vector<Leg> legs;
  {
    const auto& gend = ctx.cell_graph(end_cell);
    int from_v = end_core >= 0 ? gend.vertex_of_core.at(end_core)
                               : gend.vertex_of_node.at(src);
    legs.push_back({end_cell, from_v, gend.vertex_of_node.at(dst)});
    int cur = end_core;
    while (cur >= 0) {
      int prev = pred_core[static_cast<std::size_t>(cur)];
      int cell = pred_cell[static_cast<std::size_t>(cur)];
      const auto& g = ctx.cell_graph(cell);
      int fv = prev >= 0 ? g.vertex_of_core.at(prev) : g.vertex_of_node.at(src);
      legs.push_back({cell, fv, g.vertex_of_core.at(cur)});
      cur = prev;
    }
    std::reverse(legs.begin(), legs.end());
  }
  for (const Leg& leg : legs) {
    route.cell_walk.push_back(leg.cell);
    const Tree& tree = tree_for(leg.cell, leg.from_vertex);
    auto part = unwind(ctx.cell_graph(leg.cell), tree.pred_vertex, tree.pred_edge, leg.to_vertex);
    route.traversals.insert(route.traversals.end(), part.begin(), part.end());
  }
  route.total_time_s = sum_times(route.traversals);
  return {RouteStatus::kOk, std::move(route)};
}

RouteResult two_layer_route(const net::RoadNetwork& network, const net::EffectiveSpeedMap& esm,
                            const CellProvider& provider, net::NodeId src, net::NodeId dst,
                            double gamma_mbps, double gamma_floor_mbps, double gamma_step_mbps) {
  if (gamma_floor_mbps > gamma_mbps)
    throw ConfigError("routing.gamma_floor_mbps", "must not exceed gamma");
  if (gamma_step_mbps <= 0.0 && gamma_mbps > gamma_floor_mbps)
    throw ConfigError("routing.gamma_step_mbps", "must be > 0 when a fallback range exists");

  double g = gamma_mbps;
  while (true) {
    RoutingContext ctx(network, provider(g), esm);
    RouteResult result = two_layer_route_at(ctx, src, dst, g);
    if (result.ok()) return result;
    if (g <= gamma_floor_mbps + 1e-12) return result;
    g = std::max(gamma_floor_mbps, g - gamma_step_mbps);
  }
}

RouteResult oracle_constrained_shortest(const RoutingContext& ctx, net::NodeId src,
                                        net::NodeId dst) {
  const net::RoadNetwork& network = ctx.network();
  const auto& cells = ctx.cells();
  const std::size_t node_count = network.intersection_count();

  std::vector<char> node_covered(node_count, 0);
  for (const auto& cell : cells)
    for (net::NodeId n : cell.covered_intersections) node_covered[static_cast<std::size_t>(n)] = 1;
  if (!node_covered[static_cast<std::size_t>(src)])
    return {RouteStatus::kSourceUncovered, std::nullopt};
  if (!node_covered[static_cast<std::size_t>(dst)])
    return {RouteStatus::kDestinationUncovered, std::nullopt};

  // Union graph: covered RIs plus midpoint core nodes; edges contributed by
  // every cell's covered (sub)intervals.
  const auto& top = ctx.top();
  std::vector<int> core_vertex(top.core_nodes.size(), -1);
  std::size_t n_vertices = node_count;
  for (const CoreNode& k : top.core_nodes)
    if (k.kind == radio::CoreNodeSeed::Kind::kMidpoint)
      core_vertex[static_cast<std::size_t>(k.id)] = static_cast<int>(n_vertices++);

  struct UEdge {
    int to;
    double time;
    net::SegmentId seg;
    double f_from, f_to;
  };
  std::vector<std::vector<UEdge>> adj(n_vertices);
  std::set<std::tuple<int, int, net::SegmentId, double>> seen;
  auto add_edge = [&](int u, int v, net::SegmentId seg, double f1, double f2, double time) {
    if (!seen.insert({std::min(u, v), std::max(u, v), seg, std::min(f1, f2)}).second) return;
    adj[static_cast<std::size_t>(u)].push_back({v, time, seg, f1, f2});
    adj[static_cast<std::size_t>(v)].push_back({u, time, seg, f2, f1});
  };

  // Midpoint cores per segment, sorted by offset.
  std::vector<std::vector<int>> seg_cores(network.segment_count());
  for (const CoreNode& k : top.core_nodes)
    if (k.kind == radio::CoreNodeSeed::Kind::kMidpoint)
      seg_cores[static_cast<std::size_t>(k.segment)].push_back(k.id);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    for (const net::Segment& seg : network.segments()) {
      auto interval = cell.interval_on(seg.id);
      if (!interval) continue;
      std::vector<std::pair<double, int>> anchors;
      if (cell.covers_intersection(seg.a)) anchors.emplace_back(0.0, static_cast<int>(seg.a));
      if (cell.covers_intersection(seg.b)) anchors.emplace_back(1.0, static_cast<int>(seg.b));
      for (int kid : seg_cores[static_cast<std::size_t>(seg.id)]) {
        const CoreNode& k = top.core_nodes[static_cast<std::size_t>(kid)];
        if (k.cells.first != static_cast<int>(c) && k.cells.second != static_cast<int>(c))
          continue;
        anchors.emplace_back(k.offset_fraction, core_vertex[static_cast<std::size_t>(kid)]);
      }
      if (anchors.size() < 2) continue;
      std::sort(anchors.begin(), anchors.end());
      double speed = ctx.esm().speed(seg.id);
      for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
        auto [f1, v1] = anchors[i];
        auto [f2, v2] = anchors[i + 1];
        if (f1 < interval->lo - kFracTol || f2 > interval->hi + kFracTol) continue;
        add_edge(v1, v2, seg.id, f1, f2, (f2 - f1) * seg.length_m / speed);
      }
    }
  }

  std::vector<double> dist(n_vertices, kInfTime);
  std::vector<int> pred_vertex(n_vertices, -1);
  std::vector<int> pred_edge(n_vertices, -1);
  MinQueue pq;
  dist[static_cast<std::size_t>(src)] = 0.0;
  pq.emplace(0.0, static_cast<int>(src));
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    const auto& edges = adj[static_cast<std::size_t>(u)];
    for (std::size_t ei = 0; ei < edges.size(); ++ei) {
      const auto& e = edges[ei];
      double nd = d + e.time;
      auto v = static_cast<std::size_t>(e.to);
      if (nd < dist[v]) {
        dist[v] = nd;
        pred_vertex[v] = u;
        pred_edge[v] = static_cast<int>(ei);
        pq.emplace(nd, e.to);
      } else if (nd == dist[v] && pred_vertex[v] >= 0 && u < pred_vertex[v]) {
        pred_vertex[v] = u;
        pred_edge[v] = static_cast<int>(ei);
      }
    }
  }

  if (dist[static_cast<std::size_t>(dst)] == kInfTime)
    return {RouteStatus::kNoRoute, std::nullopt};

  Route route;
  route.scheme = "oracle";
  route.src = src;
  route.dst = dst;
  int cur = static_cast<int>(dst);
  std::vector<Traversal> rev;
  while (pred_vertex[static_cast<std::size_t>(cur)] >= 0) {
    int pv = pred_vertex[static_cast<std::size_t>(cur)];
    const auto& e = adj[static_cast<std::size_t>(pv)][static_cast<std::size_t>(
        pred_edge[static_cast<std::size_t>(cur)])];
    rev.push_back({e.seg, e.f_from, e.f_to, e.time});
    cur = pv;
  }
  std::reverse(rev.begin(), rev.end());
  route.traversals = std::move(rev);
  route.total_time_s = sum_times(route.traversals);
  return {RouteStatus::kOk, std::move(route)};
}

namespace {

// Ranks candidate segments by the lattice distance of their far endpoint and
// picks uniformly among the closest group. Both greedy schemes share this so
// that they draw identically from the generator when their candidate sets
// coincide.
net::SegmentId pick_greedy_segment(const std::vector<std::pair<net::SegmentId, int>>& ranked,
                                   std::mt19937_64& rng) {
  int best = ranked.front().second;
  for (const auto& [sid, d] : ranked) best = std::min(best, d);
  std::vector<net::SegmentId> group;
  for (const auto& [sid, d] : ranked)
    if (d == best) group.push_back(sid);
  return group[rng() % group.size()];
}

void append_full_traversal(Route& route, const net::RoadNetwork& network,
                           const net::EffectiveSpeedMap& esm, net::SegmentId sid,
                           net::NodeId from) {
  const net::Segment& seg = network.segment(sid);
  double time = seg.length_m / esm.speed(sid);
  if (seg.a == from)
    route.traversals.push_back({sid, 0.0, 1.0, time});
  else
    route.traversals.push_back({sid, 1.0, 0.0, time});
}

}  // namespace

RouteResult greedy_route_no_cc(const net::RoadNetwork& network, const net::EffectiveSpeedMap& esm,
                               net::NodeId src, net::NodeId dst, std::uint64_t seed) {
  const auto& grid = network.grid();
  if (!grid) throw ConfigError("network", "greedy routing requires a grid network");
  network.intersection(src);
  network.intersection(dst);

  std::mt19937_64 rng(seed);
  Route route;
  route.scheme = "greedy";
  route.src = src;
  route.dst = dst;

  net::NodeId cur = src;
  while (cur != dst) {
    std::vector<std::pair<net::SegmentId, int>> ranked;
    int here = grid->lattice_distance(cur, dst);
    std::vector<net::SegmentId> incident(network.incident_segments(cur).begin(),
                                         network.incident_segments(cur).end());
    std::sort(incident.begin(), incident.end());
    for (net::SegmentId sid : incident) {
      net::NodeId far = network.segment(sid).other(cur);
      int d = grid->lattice_distance(far, dst);
      if (d < here) ranked.emplace_back(sid, d);
    }
    net::SegmentId sid = pick_greedy_segment(ranked, rng);
    append_full_traversal(route, network, esm, sid, cur);
    cur = network.segment(sid).other(cur);
  }
  route.total_time_s = sum_times(route.traversals);
  return {RouteStatus::kOk, std::move(route)};
}

RouteResult greedy_route_cc(const RoutingContext& ctx, net::NodeId src, net::NodeId dst,
                            std::size_t max_segments, std::uint64_t seed) {
  const net::RoadNetwork& network = ctx.network();
  const auto& grid = network.grid();
  if (!grid) throw ConfigError("network", "greedy routing requires a grid network");
  network.intersection(src);
  network.intersection(dst);

  std::mt19937_64 rng(seed);
  Route route;
  route.scheme = "greedy-cc";
  route.src = src;
  route.dst = dst;

  net::NodeId cur = src;
  std::size_t traveled = 0;
  std::vector<net::SegmentId> arrival;  // DFS stack of segments behind us
  std::set<std::pair<net::NodeId, net::SegmentId>> tried;
  bool switched = false;

  while (cur != dst) {
    if (!switched && traveled >= max_segments) {
      switched = true;
      route.cc_switch_index = route.traversals.size();
    }
    if (switched) {
      // Unconstrained greedy from here on.
      std::vector<std::pair<net::SegmentId, int>> ranked;
      int here = grid->lattice_distance(cur, dst);
      std::vector<net::SegmentId> incident(network.incident_segments(cur).begin(),
                                           network.incident_segments(cur).end());
      std::sort(incident.begin(), incident.end());
      for (net::SegmentId sid : incident) {
        int d = grid->lattice_distance(network.segment(sid).other(cur), dst);
        if (d < here) ranked.emplace_back(sid, d);
      }
      net::SegmentId sid = pick_greedy_segment(ranked, rng);
      append_full_traversal(route, network, ctx.esm(), sid, cur);
      cur = network.segment(sid).other(cur);
      continue;
    }

    std::vector<std::pair<net::SegmentId, int>> ranked;
    std::vector<net::SegmentId> incident(network.incident_segments(cur).begin(),
                                         network.incident_segments(cur).end());
    std::sort(incident.begin(), incident.end());
    for (net::SegmentId sid : incident) {
      if (!ctx.segment_usable(sid)) continue;
      if (!arrival.empty() && sid == arrival.back()) continue;
      if (tried.contains({cur, sid})) continue;
      ranked.emplace_back(sid, grid->lattice_distance(network.segment(sid).other(cur), dst));
    }
    if (ranked.empty()) {
      if (!arrival.empty()) {  // U-turn to the previous RI
        net::SegmentId back = arrival.back();
        arrival.pop_back();
        append_full_traversal(route, network, ctx.esm(), back, cur);
        cur = network.segment(back).other(cur);
        ++traveled;
      } else {  // covered component exhausted
        switched = true;
        route.cc_switch_index = route.traversals.size();
      }
      continue;
    }
    net::SegmentId sid = pick_greedy_segment(ranked, rng);
    tried.insert({cur, sid});
    append_full_traversal(route, network, ctx.esm(), sid, cur);
    arrival.push_back(sid);
    cur = network.segment(sid).other(cur);
    ++traveled;
  }
  route.total_time_s = sum_times(route.traversals);
  return {RouteStatus::kOk, std::move(route)};
}

RouteResult shortest_time_route(const net::RoadNetwork& network,
                                const net::EffectiveSpeedMap& esm, net::NodeId src,
                                net::NodeId dst) {
  network.intersection(src);
  network.intersection(dst);
  const std::size_t n = network.intersection_count();
  std::vector<double> dist(n, kInfTime);
  std::vector<net::NodeId> pred_node(n, -1);
  std::vector<net::SegmentId> pred_seg(n, -1);
  MinQueue pq;
  dist[static_cast<std::size_t>(src)] = 0.0;
  pq.emplace(0.0, static_cast<int>(src));
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (net::SegmentId sid : network.incident_segments(static_cast<net::NodeId>(u))) {
      const net::Segment& seg = network.segment(sid);
      auto v = static_cast<std::size_t>(seg.other(static_cast<net::NodeId>(u)));
      double nd = d + seg.length_m / esm.speed(sid);
      if (nd < dist[v]) {
        dist[v] = nd;
        pred_node[v] = static_cast<net::NodeId>(u);
        pred_seg[v] = sid;
        pq.emplace(nd, static_cast<int>(v));
      } else if (nd == dist[v] && pred_node[v] >= 0 && static_cast<net::NodeId>(u) < pred_node[v]) {
        pred_node[v] = static_cast<net::NodeId>(u);
        pred_seg[v] = sid;
      }
    }
  }
  if (dist[static_cast<std::size_t>(dst)] == kInfTime)
    return {RouteStatus::kNoRoute, std::nullopt};

  Route route;
  route.scheme = "shortest-time";
  route.src = src;
  route.dst = dst;
  std::vector<Traversal> rev;
  net::NodeId cur = dst;
  while (cur != src) {
    net::NodeId pv = pred_node[static_cast<std::size_t>(cur)];
    net::SegmentId sid = pred_seg[static_cast<std::size_t>(cur)];
    const net::Segment& seg = network.segment(sid);
    double time = seg.length_m / esm.speed(sid);
    if (seg.a == pv)
      rev.push_back({sid, 0.0, 1.0, time});
    else
      rev.push_back({sid, 1.0, 0.0, time});
    cur = pv;
  }
  std::reverse(rev.begin(), rev.end());
  route.traversals = std::move(rev);
  route.total_time_s = sum_times(route.traversals);
  return {RouteStatus::kOk, std::move(route)};
}

}  // namespace ccr::routing
