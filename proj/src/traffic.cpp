#include "traffic.hpp"

#include <algorithm>
#include <cmath>

namespace ccr::traffic {

void CommRequirements::validate() const {
  if (!(reliability > 0.0 && reliability <= 1.0))
    throw ConfigError("comm_requirements.reliability", "must be in (0,1]");
  if (!(rate_mbps > 0.0)) throw ConfigError("comm_requirements.rate_mbps", "must be > 0");
  if (!(latency_s > 0.0)) throw ConfigError("comm_requirements.latency_s", "must be > 0");
}

void TddConfig::validate() const {
  if (!(t_slot_s > 0.0)) throw ConfigError("tdd.t_slot_s", "must be > 0");
  if (!(t_pilot_s > 0.0)) throw ConfigError("tdd.t_pilot_s", "must be > 0");
  if (!(t_message_s > 0.0)) throw ConfigError("tdd.t_message_s", "must be > 0");
  if (!(message_rate_hz > 0.0)) throw ConfigError("tdd.message_rate_hz", "must be > 0");
  if (mimo_group_size < 1) throw ConfigError("tdd.mimo_group_size", "must be >= 1");
  if (!(alpha > 1.0)) throw ConfigError("tdd.alpha", "must be > 1");
  if (!(carrier_frequency_hz > 0.0)) throw ConfigError("tdd.carrier_frequency_hz", "must be > 0");
  if (!(light_speed_mps > 0.0)) throw ConfigError("tdd.light_speed_mps", "must be > 0");
  if (!(speed_limit_mps > 0.0)) throw ConfigError("tdd.speed_limit_mps", "must be > 0");
  if (!(lambda_m_t_m() < 1.0))
    throw ConfigError("tdd.message_rate_hz",
                      "message inter-arrival time must exceed the message duration "
                      "(lambda_m * T_m < 1)");
  double slots = t_message_s / t_slot_s;
  if (std::abs(slots - std::round(slots)) > 1e-6 * slots)
    throw ConfigError("tdd.t_message_s", "must be an integer multiple of t_slot_s");
}

double pilot_time_fraction(double speed_mps, const TddConfig& tdd) {
  // T_v = c / (alpha * v * f_c); the fraction degenerates to 0 at v = 0.
  return tdd.t_pilot_s * tdd.alpha * speed_mps * tdd.carrier_frequency_hz / tdd.light_speed_mps;
}

int n_controllable_one_channel(double speed_mps, const TddConfig& tdd) {
  tdd.validate();
  if (speed_mps < 0.0) throw ConfigError("speed_mps", "must be >= 0");
  double pilot = pilot_time_fraction(speed_mps, tdd);
  double messages = tdd.lambda_m_t_m();
  int cap = tdd.cap();
  int best = 0;
  for (int n = 1; n <= cap; ++n) {
    double groups = std::ceil(static_cast<double>(n) / tdd.mimo_group_size);
    double budget = n * pilot + groups * messages;
    if (budget <= 1.0 + kSlotBudgetTol)
      best = n;
    else
      break;  // the budget is non-decreasing in n
  }
  return best;
}

long long n_controllable(double speed_mps, double channels, const TddConfig& tdd) {
  if (channels < 0.0) throw ConfigError("channels", "must be >= 0");
  double n = channels * n_controllable_one_channel(speed_mps, tdd);
  return static_cast<long long>(std::floor(n + 1e-9));
}

void CellGeometry::validate() const {
  if (lanes < 0) throw ConfigError("cell.lanes", "must be >= 0");
  if (!(lane_width_m > 0.0)) throw ConfigError("cell.lane_width_m", "must be > 0");
  if (!(coverage_m2 > 0.0)) throw ConfigError("cell.coverage_m2", "must be > 0");
}

double cell_sum_flow_avps(const CellGeometry& geom, double n_avs, double speed_mps) {
  geom.validate();
  return geom.lanes * geom.lane_width_m / geom.coverage_m2 * n_avs * speed_mps;
}

OptimalSpeed optimal_speed(const TddConfig& tdd) {
  tdd.validate();
  double x = tdd.lambda_m_t_m();
  double unclamped = tdd.light_speed_mps * (1.0 - x) /
                     (tdd.alpha * tdd.carrier_frequency_hz * tdd.t_pilot_s * tdd.mimo_group_size);
  OptimalSpeed out;
  out.clamped_by_limit = tdd.speed_limit_mps < unclamped;
  out.v_star_mps = out.clamped_by_limit ? tdd.speed_limit_mps : unclamped;
  out.n_star = n_controllable_one_channel(out.v_star_mps, tdd);
  out.flow_per_channel = out.n_star * out.v_star_mps;
  return out;
}

Lemma1GridCheck lemma1_grid_check(const TddConfig& tdd, double step_mps, double span_factor) {
  if (!(step_mps > 0.0)) throw ConfigError("step_mps", "must be > 0");
  OptimalSpeed opt = optimal_speed(tdd);
  Lemma1GridCheck out;
  out.v_star_mps = opt.v_star_mps;
  out.step_mps = step_mps;

  double v_max = std::min(span_factor * opt.v_star_mps, tdd.speed_limit_mps);
  auto steps = static_cast<long long>(std::floor(v_max / step_mps + 1e-9));
  std::vector<double> flow(static_cast<std::size_t>(steps) + 1, 0.0);
  double max_flow = 0.0;
  for (long long k = 1; k <= steps; ++k) {
    double v = k * step_mps;
    double f = n_controllable_one_channel(v, tdd) * v;
    flow[static_cast<std::size_t>(k)] = f;
    max_flow = std::max(max_flow, f);
  }
  out.grid_max_flow = max_flow;

  // Every N <= L yields an equally high budget edge, so the exact peak is a
  // plateau. A grid point can miss its nearest edge by at most one step,
  // costing at most L * step flow; take the smallest speed inside that band.
  double slack = tdd.mimo_group_size * step_mps + 1e-9 * std::max(1.0, max_flow);
  for (long long k = 1; k <= steps; ++k) {
    if (flow[static_cast<std::size_t>(k)] >= max_flow - slack) {
      out.grid_argmax_mps = k * step_mps;
      break;
    }
  }
  out.within_one_step = std::abs(out.grid_argmax_mps - opt.v_star_mps) <= step_mps + 1e-9;
  return out;
}

void RoadCellIncidence::validate() const {
  if (cells.empty()) throw ConfigError("traffic.cells", "must not be empty");
  if (roads.empty()) throw ConfigError("traffic.roads", "must not be empty");
  for (const auto& cell : cells) {
    cell.geometry.validate();
    cell.tdd.validate();
  }
  for (const auto& road : roads) {
    if (road.cells.empty())
      throw ConfigError("traffic.roads", "road '" + road.id + "' crosses no cells");
    if (road.lanes < 1)
      throw ConfigError("traffic.roads", "road '" + road.id + "' must have >= 1 lanes");
    for (const auto& cid : road.cells) cell_index(cid);
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    int derived = cell_lanes(c);
    if (cells[c].geometry.lanes != 0 && cells[c].geometry.lanes != derived)
      throw ConfigError("traffic.cells",
                        "cell '" + cells[c].id + "' declares " +
                            std::to_string(cells[c].geometry.lanes) + " lanes but its roads sum to " +
                            std::to_string(derived));
  }
}

std::size_t RoadCellIncidence::cell_index(const std::string& id) const {
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].id == id) return i;
  throw ConfigError("traffic.roads", "unknown cell id '" + id + "'");
}

int RoadCellIncidence::cell_lanes(std::size_t cell) const {
  int lanes = 0;
  for (const auto& road : roads)
    for (const auto& cid : road.cells)
      if (cells[cell].id == cid) lanes += road.lanes;
  return lanes;
}

const char* to_string(AllocationPolicy policy) {
  switch (policy) {
    case AllocationPolicy::kBalancedFair: return "fair";
    case AllocationPolicy::kMaxTotal: return "max-total";
    case AllocationPolicy::kEqualSplit: return "equal-split";
  }
  return "unknown";
}

AllocationPolicy allocation_policy_from_string(const std::string& name) {
  if (name == "fair") return AllocationPolicy::kBalancedFair;
  if (name == "max-total") return AllocationPolicy::kMaxTotal;
  if (name == "equal-split") return AllocationPolicy::kEqualSplit;
  throw ConfigError("traffic.policy", "unknown policy '" + name + "'");
}

double SpectrumAllocation::channels_for_cell(std::size_t cell) const {
  double total = 0.0;
  for (const auto& e : entries)
    if (e.cell == cell) total += e.channels;
  return total;
}

double flow_per_channel_avps(const TrafficCell& cell, int total_lanes, double speed_scale) {
  OptimalSpeed opt = optimal_speed(cell.tdd);
  double v = opt.v_star_mps * speed_scale;
  double n = n_controllable_one_channel(v, cell.tdd);
  CellGeometry geom = cell.geometry;
  geom.lanes = total_lanes;
  return cell_sum_flow_avps(geom, n, v);
}

SpectrumAllocation balance_spectrum(const RoadCellIncidence& incidence, double channels_total,
                                    AllocationPolicy policy, double speed_scale,
                                    double min_spacing_m) {
  incidence.validate();
  if (!(channels_total > 0.0)) throw ConfigError("traffic.channels_total", "must be > 0");

  SpectrumAllocation alloc;
  alloc.policy = policy;
  alloc.channels_total = channels_total;
  alloc.speed_scale = speed_scale;

  // Per-channel cell sum flow phi_i; the share of it a road receives is
  // proportional to the channels assigned against that road.
  std::vector<double> phi(incidence.cells.size(), 0.0);
  for (std::size_t c = 0; c < incidence.cells.size(); ++c)
    phi[c] = flow_per_channel_avps(incidence.cells[c], incidence.cell_lanes(c), speed_scale);

  for (std::size_t r = 0; r < incidence.roads.size(); ++r) {
    for (const auto& cid : incidence.roads[r].cells) {
      std::size_t c = incidence.cell_index(cid);
      if (!(phi[c] > 0.0)) {
        alloc.feasible = false;
        alloc.infeasible_road = incidence.roads[r].id;
        alloc.infeasible_cell = incidence.cells[c].id;
        return alloc;
      }
    }
  }

  auto road_cost = [&](std::size_t r) {  // channels per unit flow, balanced across cells
    double cost = 0.0;
    for (const auto& cid : incidence.roads[r].cells) cost += 1.0 / phi[incidence.cell_index(cid)];
    return cost;
  };

  std::vector<double> road_flow(incidence.roads.size(), 0.0);
  switch (policy) {
    case AllocationPolicy::kBalancedFair: {
      // Equalize per-lane road flows: F_j = lanes_j * t, budget-tight.
      double denom = 0.0;
      for (std::size_t r = 0; r < incidence.roads.size(); ++r)
        denom += incidence.roads[r].lanes * road_cost(r);
      double t = channels_total / denom;
      for (std::size_t r = 0; r < incidence.roads.size(); ++r)
        road_flow[r] = incidence.roads[r].lanes * t;
      break;
    }
    case AllocationPolicy::kMaxTotal: {
      // Linear objective: the whole budget goes to the most efficient road.
      std::size_t best = 0;
      for (std::size_t r = 1; r < incidence.roads.size(); ++r)
        if (road_cost(r) < road_cost(best)) best = r;
      road_flow[best] = channels_total / road_cost(best);
      break;
    }
    case AllocationPolicy::kEqualSplit: {
      // B_0 / cells per cell, split within a cell proportionally to lanes.
      // Within-road balance does not hold here; this is the benchmark.
      for (std::size_t c = 0; c < incidence.cells.size(); ++c) {
        double b_cell = channels_total / incidence.cells.size();
        int lanes = incidence.cell_lanes(c);
        if (lanes == 0) continue;  // no road crosses this cell; its share is wasted
        for (std::size_t r = 0; r < incidence.roads.size(); ++r) {
          for (const auto& cid : incidence.roads[r].cells) {
            if (incidence.cells[c].id != cid) continue;
            double b = b_cell * incidence.roads[r].lanes / lanes;
            alloc.entries.push_back({c, r, b, phi[c] * b});
          }
        }
      }
      ThroughputReport rep = road_throughput(alloc, incidence);
      alloc.road_flow_avps = rep.road_flow_avps;
      alloc.total_avps = rep.total_avps;
      return alloc;
    }
  }

  // Turn target road flows into balanced per-cell channel shares:
  // B_ij = F_j / phi_i makes F_ij identical along road j.
  for (std::size_t r = 0; r < incidence.roads.size(); ++r) {
    for (const auto& cid : incidence.roads[r].cells) {
      std::size_t c = incidence.cell_index(cid);
      double b = road_flow[r] / phi[c];
      alloc.entries.push_back({c, r, b, phi[c] * b});
    }
  }

  ThroughputReport rep = road_throughput(alloc, incidence);
  alloc.road_flow_avps = rep.road_flow_avps;
  alloc.total_avps = rep.total_avps;

  // Eq. (1) spacing guard: warn when the implied inter-AV distance falls
  // below the physical minimum.
  for (std::size_t c = 0; c < incidence.cells.size(); ++c) {
    OptimalSpeed opt = optimal_speed(incidence.cells[c].tdd);
    double v = opt.v_star_mps * speed_scale;
    double n1 = n_controllable_one_channel(v, incidence.cells[c].tdd);
    double n_total = alloc.channels_for_cell(c) * n1;
    if (n_total <= 0.0) continue;
    double spacing = incidence.cells[c].geometry.coverage_m2 /
                     (incidence.cells[c].geometry.lane_width_m * n_total);
    if (spacing < min_spacing_m)
      alloc.warnings.push_back("cell '" + incidence.cells[c].id + "': implied AV spacing " +
                               std::to_string(spacing) + " m is below the minimum " +
                               std::to_string(min_spacing_m) + " m");
  }
  return alloc;
}

ThroughputReport road_throughput(const SpectrumAllocation& alloc,
                                 const RoadCellIncidence& incidence) {
  ThroughputReport rep;
  rep.road_flow_avps.assign(incidence.roads.size(), 0.0);
  rep.bottleneck_cell.assign(incidence.roads.size(), 0);
  for (std::size_t r = 0; r < incidence.roads.size(); ++r) {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t worst_cell = 0;
    for (const auto& cid : incidence.roads[r].cells) {
      std::size_t c = incidence.cell_index(cid);
      double flow = 0.0;
      for (const auto& e : alloc.entries)
        if (e.cell == c && e.road == r) flow += e.flow_avps;
      if (flow < worst) {
        worst = flow;
        worst_cell = c;
      }
    }
    rep.road_flow_avps[r] = worst == std::numeric_limits<double>::infinity() ? 0.0 : worst;
    rep.bottleneck_cell[r] = worst_cell;
    rep.total_avps += rep.road_flow_avps[r];
  }
  return rep;
}

PolicyComparison compare_policies(const RoadCellIncidence& incidence, double channels_total) {
  PolicyComparison out;
  out.naive_avps =
      balance_spectrum(incidence, channels_total, AllocationPolicy::kEqualSplit, 0.5).total_avps;
  out.lemma1_avps =
      balance_spectrum(incidence, channels_total, AllocationPolicy::kEqualSplit, 1.0).total_avps;
  out.lemma12_avps =
      balance_spectrum(incidence, channels_total, AllocationPolicy::kBalancedFair, 1.0).total_avps;
  return out;
}

}  // namespace ccr::traffic
