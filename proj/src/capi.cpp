#include "ccr/ccr.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "error.hpp"
#include "net.hpp"
#include "radio.hpp"
#include "routing.hpp"
#include "scenario.hpp"
#include "serialize.hpp"
#include "sim.hpp"
#include "traffic.hpp"

using nlohmann::json;

struct ccr_scenario {
  ccr::scenario::Scenario sc;
};

namespace {

thread_local std::string g_last_error = "ok";

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

ccr_status fail(ccr_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
ccr_status wrap(Fn&& fn) {
  try {
    return fn();
  } catch (const ccr::ParseError& e) {
    return fail(CCR_ERROR_PARSE, e.what());
  } catch (const ccr::ConfigError& e) {
    return fail(CCR_ERROR_CONFIG, e.what());
  } catch (const ccr::Error& e) {
    return fail(CCR_ERROR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(CCR_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(CCR_ERROR_INTERNAL, "unknown error");
  }
}

ccr_status status_for(ccr::routing::RouteStatus status) {
  switch (status) {
    case ccr::routing::RouteStatus::kOk: return CCR_OK;
    case ccr::routing::RouteStatus::kNoRoute: return CCR_ERROR_NO_ROUTE;
    case ccr::routing::RouteStatus::kSourceUncovered: return CCR_ERROR_SOURCE_UNCOVERED;
    case ccr::routing::RouteStatus::kDestinationUncovered:
      return CCR_ERROR_DESTINATION_UNCOVERED;
  }
  return CCR_ERROR_INTERNAL;
}

struct Substrate {
  ccr::net::RoadNetwork network;
  std::vector<ccr::radio::BaseStation> bss;
  ccr::net::EffectiveSpeedMap esm;
};

// Matches trial 0 of the Monte-Carlo batch so one-off commands reproduce it.
Substrate build_substrate(const ccr::scenario::Scenario& sc) {
  const auto& t = sc.trial;
  ccr::net::RoadNetwork network =
      ccr::net::generate_grid(t.avenues, t.streets, t.block_length_m, t.block_width_m);
  std::vector<ccr::radio::BaseStation> bss = ccr::sim::make_bs_layout(t, network);
  std::uint64_t tseed = ccr::sim::mix_seed(t.seed, 0);
  ccr::net::EffectiveSpeedMap esm =
      ccr::net::assign_esm(network, t.speed_set_mps, ccr::sim::mix_seed(tseed, 1));
  return {std::move(network), std::move(bss), std::move(esm)};
}

void write_outputs(const std::string& out_dir,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ccr::Error("cannot create output directory " + out_dir + ": " + ec.message());
  for (const auto& [name, content] : files)
    ccr::out::write_file_atomic((std::filesystem::path(out_dir) / name).string(), content);
}

}  // namespace

extern "C" {

const char* ccr_version(void) { return "0.1.0"; }

const char* ccr_status_name(ccr_status status) {
  switch (status) {
    case CCR_OK: return "ok";
    case CCR_ERROR_INVALID_ARGUMENT: return "invalid-argument";
    case CCR_ERROR_PARSE: return "parse-error";
    case CCR_ERROR_CONFIG: return "config-error";
    case CCR_ERROR_NO_ROUTE: return "no-route";
    case CCR_ERROR_SOURCE_UNCOVERED: return "source-uncovered";
    case CCR_ERROR_DESTINATION_UNCOVERED: return "destination-uncovered";
    case CCR_ERROR_INFEASIBLE: return "infeasible";
    case CCR_ERROR_IO: return "io-error";
    case CCR_ERROR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* ccr_last_error(void) { return g_last_error.c_str(); }

ccr_status ccr_scenario_from_json(const char* json_text, ccr_scenario** out) {
  if (json_text == nullptr || out == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "json_text and out must not be NULL");
  return wrap([&] {
    auto handle = new ccr_scenario{ccr::scenario::scenario_from_text(json_text)};
    *out = handle;
    return CCR_OK;
  });
}

ccr_status ccr_scenario_from_file(const char* path, ccr_scenario** out) {
  if (path == nullptr || out == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "path and out must not be NULL");
  std::ifstream f(path, std::ios::binary);
  if (!f) return fail(CCR_ERROR_IO, std::string("cannot read ") + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return ccr_scenario_from_json(buf.str().c_str(), out);
}

ccr_status ccr_scenario_from_preset(const char* name, const char* overrides_json,
                                    ccr_scenario** out) {
  if (name == nullptr || out == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "name and out must not be NULL");
  return wrap([&] {
    auto handle = new ccr_scenario{ccr::scenario::scenario_from_preset(
        name, overrides_json != nullptr ? overrides_json : "")};
    *out = handle;
    return CCR_OK;
  });
}

void ccr_scenario_free(ccr_scenario* scenario) { delete scenario; }

ccr_status ccr_scenario_set_seed(ccr_scenario* scenario, unsigned long long seed) {
  if (scenario == nullptr) return fail(CCR_ERROR_INVALID_ARGUMENT, "scenario must not be NULL");
  scenario->sc.trial.seed = seed;
  scenario->sc.raw["seed"] = seed;
  return CCR_OK;
}

ccr_status ccr_scenario_set_gamma(ccr_scenario* scenario, double gamma_mbps) {
  if (scenario == nullptr) return fail(CCR_ERROR_INVALID_ARGUMENT, "scenario must not be NULL");
  if (gamma_mbps < 0) return fail(CCR_ERROR_INVALID_ARGUMENT, "gamma_mbps must be >= 0");
  scenario->sc.trial.gamma_mbps = gamma_mbps;
  scenario->sc.raw["coverage"]["gamma_mbps"] = gamma_mbps;
  return CCR_OK;
}

ccr_status ccr_scenario_hash(const ccr_scenario* scenario, char** out) {
  if (scenario == nullptr || out == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "scenario and out must not be NULL");
  return wrap([&] {
    *out = dup_string(scenario->sc.config_hash());
    return CCR_OK;
  });
}

ccr_status ccr_compute_cells(const ccr_scenario* scenario, char** json_out) {
  if (scenario == nullptr || json_out == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "scenario and json_out must not be NULL");
  return wrap([&] {
    const auto& sc = scenario->sc;
    Substrate sub = build_substrate(sc);
    auto cells =
        ccr::sim::compute_cells(sc.trial, sub.network, sub.bss, sub.esm, sc.trial.gamma_mbps);

    std::vector<char> covered(sub.network.segment_count(), 0);
    for (const auto& cell : cells)
      for (auto sid : cell.covered_segments) covered[static_cast<std::size_t>(sid)] = 1;
    std::size_t union_count = 0;
    for (char c : covered) union_count += c != 0 ? 1 : 0;

    json doc;
    doc["config_hash"] = sc.config_hash();
    doc["seed"] = sc.trial.seed;
    doc["gamma_mbps"] = sc.trial.gamma_mbps;
    doc["cells"] = ccr::out::cells_json(cells);
    json per_bs = json::array();
    for (const auto& cell : cells)
      per_bs.push_back({{"bs", cell.bs_id},
                        {"covered_intersections", cell.covered_intersections.size()},
                        {"covered_segments", cell.covered_segments.size()},
                        {"partial_segments", cell.partially_covered_segments.size()}});
    doc["summary"] = {
        {"segments_total", sub.network.segment_count()},
        {"segments_covered_by_any_cell", union_count},
        {"coverage_percent", 100.0 * union_count / sub.network.segment_count()},
        {"per_bs", std::move(per_bs)}};
    *json_out = dup_string(doc.dump(2) + "\n");
    return CCR_OK;
  });
}

ccr_status ccr_route(const ccr_scenario* scenario, const char* scheme, int src, int dst,
                     double gamma_mbps, const char* format, char** out) {
  if (scenario == nullptr || scheme == nullptr || out == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "scenario, scheme and out must not be NULL");
  return wrap([&] {
    const auto& sc = scenario->sc;
    std::string fmt = format != nullptr ? format : "json";
    if (fmt != "json" && fmt != "csv")
      return fail(CCR_ERROR_INVALID_ARGUMENT, "format must be 'json' or 'csv'");
    ccr::sim::Scheme which = ccr::sim::scheme_from_string(scheme);
    double gamma = gamma_mbps >= 0 ? gamma_mbps : sc.trial.gamma_mbps;

    Substrate sub = build_substrate(sc);
    auto src_id = static_cast<ccr::net::NodeId>(src);
    auto dst_id = static_cast<ccr::net::NodeId>(dst);
    sub.network.intersection(src_id);
    sub.network.intersection(dst_id);

    ccr::routing::RouteResult rr;
    switch (which) {
      case ccr::sim::Scheme::kTwoLayer: {
        auto provider = [&](double g) {
          return ccr::sim::compute_cells(sc.trial, sub.network, sub.bss, sub.esm, g);
        };
        rr = ccr::routing::two_layer_route(sub.network, sub.esm, provider, src_id, dst_id, gamma,
                                           sc.trial.gamma_floor_mbps, sc.trial.gamma_step_mbps);
        break;
      }
      case ccr::sim::Scheme::kGreedyNoCc:
        rr = ccr::routing::greedy_route_no_cc(sub.network, sub.esm, src_id, dst_id,
                                              ccr::sim::mix_seed(sc.trial.seed, 3));
        break;
      case ccr::sim::Scheme::kGreedyCc: {
        ccr::routing::RoutingContext ctx(
            sub.network, ccr::sim::compute_cells(sc.trial, sub.network, sub.bss, sub.esm, gamma),
            sub.esm);
        rr = ccr::routing::greedy_route_cc(ctx, src_id, dst_id,
                                           sc.trial.effective_max_segments(),
                                           ccr::sim::mix_seed(sc.trial.seed, 3));
        break;
      }
      case ccr::sim::Scheme::kShortestTime:
        rr = ccr::routing::shortest_time_route(sub.network, sub.esm, src_id, dst_id);
        break;
    }
    if (!rr.ok())
      return fail(status_for(rr.status),
                  std::string("routing failed: ") + ccr::routing::to_string(rr.status));
    if (fmt == "csv") {
      *out = dup_string(ccr::out::route_csv(*rr.route));
    } else {
      *out = dup_string(ccr::out::route_json(*rr.route).dump(2) + "\n");
    }
    return CCR_OK;
  });
}

ccr_status ccr_montecarlo(const ccr_scenario* scenario, const char* out_dir, char** summary_out) {
  if (scenario == nullptr || out_dir == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "scenario and out_dir must not be NULL");
  return wrap([&] {
    const auto& sc = scenario->sc;
    ccr::sim::MonteCarloResult result = ccr::sim::run_monte_carlo(sc.trial);
    ccr::out::CsvMeta meta{sc.config_hash(), sc.trial.seed};
    json summary = ccr::out::montecarlo_summary_json(result, meta);
    write_outputs(out_dir, {{"fig4_duration_cdf.csv", ccr::out::duration_cdf_csv(result, meta)},
                            {"fig5_pc_cdf.csv", ccr::out::pc_cdf_csv(result, meta)},
                            {"summary.json", summary.dump(2) + "\n"}});
    if (summary_out != nullptr) *summary_out = dup_string(summary.dump(2) + "\n");
    return CCR_OK;
  });
}

ccr_status ccr_sweep(const ccr_scenario* scenario, const char* axis, const char* out_dir,
                     char** summary_out) {
  if (scenario == nullptr || axis == nullptr || out_dir == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "scenario, axis and out_dir must not be NULL");
  return wrap([&] {
    const auto& sc = scenario->sc;
    ccr::out::CsvMeta meta{sc.config_hash(), sc.trial.seed};
    std::string ax = axis;
    json summary;
    summary["axis"] = ax;
    summary["config_hash"] = meta.config_hash;
    summary["seed"] = meta.seed;

    ccr::sim::TrialConfig point = sc.trial;
    point.trial_count = sc.sweeps.trials_per_point;

    if (ax == "gamma") {
      if (sc.sweeps.gamma_mbps.empty()) throw ccr::ConfigError("$.sweeps.gamma_mbps", "empty");
      auto rows = ccr::sim::sweep_gamma(point, sc.sweeps.gamma_mbps);
      write_outputs(out_dir, {{"fig6_success_vs_gamma.csv",
                               ccr::out::routing_sweep_csv(rows, "gamma_mbps", true, true, meta)}});
      summary["rows"] = rows.size();
      summary["files"] = {"fig6_success_vs_gamma.csv"};
    } else if (ax == "bs_count") {
      if (sc.sweeps.bs_count.empty()) throw ccr::ConfigError("$.sweeps.bs_count", "empty");
      auto rows = ccr::sim::sweep_bs_count(point, sc.sweeps.bs_count);
      write_outputs(
          out_dir,
          {{"fig7_pc_vs_bs.csv", ccr::out::routing_sweep_csv(rows, "bs_count", false, true, meta)},
           {"fig8_success_vs_bs.csv",
            ccr::out::routing_sweep_csv(rows, "bs_count", true, false, meta)}});
      summary["rows"] = rows.size();
      summary["files"] = {"fig7_pc_vs_bs.csv", "fig8_success_vs_bs.csv"};
    } else if (ax == "fc" || ax == "alpha" || ax == "lambda_m_t_m") {
      if (sc.incidence.cells.empty())
        throw ccr::ConfigError("$.traffic.cells", "traffic sweeps need an incidence");
      ccr::sim::TrafficAxis taxis;
      std::vector<double> values;
      std::string file;
      std::string column;
      if (ax == "fc") {
        taxis = ccr::sim::TrafficAxis::kCarrierFrequency;
        values = sc.sweeps.fc_hz;
        file = "fig9_throughput_vs_fc.csv";
        column = "fc_hz";
      } else if (ax == "alpha") {
        taxis = ccr::sim::TrafficAxis::kAlpha;
        values = sc.sweeps.alpha;
        file = "alpha_sweep.csv";
        column = "alpha";
      } else {
        taxis = ccr::sim::TrafficAxis::kLambdaMTm;
        values = sc.sweeps.lambda_m_t_m;
        file = "fig10_throughput_vs_lmtm.csv";
        column = "lambda_m_t_m";
      }
      if (values.empty()) throw ccr::ConfigError("$.sweeps." + ax, "empty");
      auto rows = ccr::sim::sweep_traffic(sc.incidence, sc.channels_total, taxis, values,
                                          sc.sweeps.alpha.empty() ? std::vector<double>{2.0, 4.0}
                                                                  : sc.sweeps.alpha);
      write_outputs(out_dir, {{file, ccr::out::traffic_sweep_csv(rows, column, meta)}});
      summary["rows"] = rows.size();
      summary["files"] = {file};
    } else {
      return fail(CCR_ERROR_INVALID_ARGUMENT,
                  "axis must be gamma, bs_count, fc, alpha or lambda_m_t_m");
    }
    if (summary_out != nullptr) *summary_out = dup_string(summary.dump(2) + "\n");
    return CCR_OK;
  });
}

ccr_status ccr_balance(const ccr_scenario* scenario, char** report_json_out) {
  if (scenario == nullptr || report_json_out == nullptr)
    return fail(CCR_ERROR_INVALID_ARGUMENT, "scenario and report_json_out must not be NULL");
  return wrap([&] {
    const auto& sc = scenario->sc;
    if (sc.incidence.cells.empty())
      throw ccr::ConfigError("$.traffic.cells", "balance needs a traffic incidence");
    auto balanced = ccr::traffic::balance_spectrum(sc.incidence, sc.channels_total, sc.policy,
                                                   1.0, sc.min_spacing_m);
    auto equal = ccr::traffic::balance_spectrum(
        sc.incidence, sc.channels_total, ccr::traffic::AllocationPolicy::kEqualSplit, 1.0,
        sc.min_spacing_m);
    json doc = ccr::out::balance_json(sc.incidence, balanced, equal);
    doc["config_hash"] = sc.config_hash();
    *report_json_out = dup_string(doc.dump(2) + "\n");
    return CCR_OK;
  });
}

void ccr_string_free(char* text) { std::free(text); }

}  // extern "C"
