// ccroute: communication-constrained routing and traffic control front-end.
// Thin driver over the C API in ccr/ccr.h; all computation lives in libccr.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccr/ccr.h"

namespace {

int exit_code_for(ccr_status status) {
  switch (status) {
    case CCR_OK: return 0;
    case CCR_ERROR_INVALID_ARGUMENT:
    case CCR_ERROR_PARSE:
    case CCR_ERROR_CONFIG: return 2;
    case CCR_ERROR_NO_ROUTE:
    case CCR_ERROR_SOURCE_UNCOVERED:
    case CCR_ERROR_DESTINATION_UNCOVERED: return 3;
    case CCR_ERROR_IO: return 4;
    case CCR_ERROR_INFEASIBLE: return 5;
    case CCR_ERROR_INTERNAL: return 1;
  }
  return 1;
}

int report_failure(ccr_status status) {
  std::cerr << "error (" << ccr_status_name(status) << "): " << ccr_last_error() << "\n";
  return exit_code_for(status);
}

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { ccr_string_free(ptr); }
  std::string str() const { return ptr != nullptr ? ptr : ""; }
};

bool read_file(const std::string& path, std::string& out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  std::ostringstream buf;
  buf << f.rdbuf();
  out = buf.str();
  return true;
}

// Write-to-temp-then-rename so a failed command leaves no partial file.
bool write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) return false;
    f << content;
    if (!f) {
      std::remove(tmp.c_str());
      return false;
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    return false;
  }
  return true;
}

struct GlobalOpts {
  std::string preset;
  std::string config_path;
  long long seed = -1;
  std::string out_dir;
  std::string format = "json";
};

int open_scenario(const GlobalOpts& g, ccr_scenario** out) {
  ccr_status status;
  if (!g.preset.empty()) {
    std::string overrides;
    if (!g.config_path.empty() && !read_file(g.config_path, overrides)) {
      std::cerr << "error (io-error): cannot read " << g.config_path << "\n";
      return 4;
    }
    status = ccr_scenario_from_preset(g.preset.c_str(),
                                      overrides.empty() ? nullptr : overrides.c_str(), out);
  } else if (!g.config_path.empty()) {
    status = ccr_scenario_from_file(g.config_path.c_str(), out);
  } else {
    status = ccr_scenario_from_preset("desk", nullptr, out);
  }
  if (status != CCR_OK) return report_failure(status);
  if (g.seed >= 0) ccr_scenario_set_seed(*out, static_cast<unsigned long long>(g.seed));
  return 0;
}

int emit(const GlobalOpts& g, const std::string& filename, const std::string& content) {
  if (g.out_dir.empty()) {
    std::cout << content;
    return 0;
  }
  std::error_code ec;
  std::filesystem::create_directories(g.out_dir, ec);
  std::string path = (std::filesystem::path(g.out_dir) / filename).string();
  if (ec || !write_file_atomic(path, content)) {
    std::cerr << "error (io-error): cannot write " << path << "\n";
    return 4;
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication-constrained AV routing and traffic control"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--preset", g.preset, "Scenario preset: desk or paper");
  app.add_option("--config", g.config_path,
                 "Scenario JSON (full document, or overrides when --preset is given)");
  app.add_option("--seed", g.seed, "Override the scenario seed");
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--format", g.format, "Output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* cells = app.add_subcommand("cells", "Compute all gamma-rate cells");

  auto* route = app.add_subcommand("route", "Route one AV between two intersections");
  int src = 0, dst = -1;
  std::string scheme = "two-layer";
  double gamma = -1.0;
  route->add_option("--src", src, "Source intersection id")->required();
  route->add_option("--dst", dst, "Destination intersection id")->required();
  route->add_option("--scheme", scheme, "two-layer, greedy, greedy-cc or shortest-time")
      ->check(CLI::IsMember({"two-layer", "greedy", "greedy-cc", "shortest-time"}));
  route->add_option("--gamma", gamma, "Rate threshold in Mbps (default: scenario gamma)");

  auto* mc = app.add_subcommand("montecarlo", "Run the Monte-Carlo batch (fig4/fig5 CSVs)");

  auto* sweep = app.add_subcommand("sweep", "Sweep one axis (fig6-fig10 CSVs)");
  std::string axis;
  sweep->add_option("--axis", axis, "gamma, bs_count, fc, alpha or lambda_m_t_m")
      ->required()
      ->check(CLI::IsMember({"gamma", "bs_count", "fc", "alpha", "lambda_m_t_m"}));

  auto* balance = app.add_subcommand("balance", "Pareto-optimal spectrum allocation report");

  CLI11_PARSE(app, argc, argv);

  ccr_scenario* sc = nullptr;
  int rc = open_scenario(g, &sc);
  if (rc != 0) return rc;
  struct Closer {
    ccr_scenario* sc;
    ~Closer() { ccr_scenario_free(sc); }
  } closer{sc};

  if (cells->parsed()) {
    OwnedString out;
    ccr_status status = ccr_compute_cells(sc, &out.ptr);
    if (status != CCR_OK) return report_failure(status);
    return emit(g, "cells.json", out.str());
  }

  if (route->parsed()) {
    if (scheme == "shortest-time" && gamma >= 0) {
      std::cerr << "warning: --gamma is ignored by the shortest-time scheme\n";
      gamma = -1.0;
    }
    OwnedString out;
    ccr_status status = ccr_route(sc, scheme.c_str(), src, dst, gamma, g.format.c_str(), &out.ptr);
    if (status != CCR_OK) return report_failure(status);
    return emit(g, g.format == "csv" ? "route.csv" : "route.json", out.str());
  }

  if (mc->parsed()) {
    std::string out_dir = g.out_dir.empty() ? "out" : g.out_dir;
    OwnedString summary;
    ccr_status status = ccr_montecarlo(sc, out_dir.c_str(), &summary.ptr);
    if (status != CCR_OK) return report_failure(status);
    std::cout << summary.str();
    std::cout << "wrote " << out_dir << "/fig4_duration_cdf.csv, " << out_dir
              << "/fig5_pc_cdf.csv, " << out_dir << "/summary.json\n";
    return 0;
  }

  if (sweep->parsed()) {
    std::string out_dir = g.out_dir.empty() ? "out" : g.out_dir;
    OwnedString summary;
    ccr_status status = ccr_sweep(sc, axis.c_str(), out_dir.c_str(), &summary.ptr);
    if (status != CCR_OK) return report_failure(status);
    std::cout << summary.str();
    return 0;
  }

  if (balance->parsed()) {
    OwnedString out;
    ccr_status status = ccr_balance(sc, &out.ptr);
    if (status != CCR_OK) return report_failure(status);
    std::cout << out.str();
    auto doc = nlohmann::json::parse(out.str(), nullptr, false);
    if (doc.is_object() && doc.value("feasible", false)) {
      std::printf("total throughput: %.4f AV/min (%+.2f%% vs equal split)\n",
                  doc.value("total_av_per_min", 0.0), doc.value("gain_percent", 0.0));
    } else if (doc.is_object() && doc.contains("infeasible_road")) {
      std::printf("infeasible: road '%s' crosses cell '%s' with zero flow per channel\n",
                  doc.value("infeasible_road", "").c_str(),
                  doc.value("infeasible_cell", "").c_str());
    }
    if (!g.out_dir.empty()) return emit(g, "balance.json", out.str());
    return 0;
  }
  return 1;
}
