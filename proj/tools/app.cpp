// Copyright 2026 The micronip Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <sstream>
#include <string_view>

#include "CLI11.hpp"
#include "json.hpp"
#include "micronip/errors.hpp"
#include "micronip/io.hpp"
#include "micronip/kbkz.hpp"
#include "micronip/polyfit.hpp"

namespace micronip::cli {

namespace {

using nlohmann::ordered_json;

// Setup failures are usage errors unless a file could not be read; compute
// failures are numerical unless a file could not be written.
template <class F>
int guard(Console& io, int fallback, F&& f) {
  try {
    return f();
  } catch (const IoError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return fallback;
  }
}

std::string path_string(const fs::path& p) { return p.generic_string(); }

const char* bc_name(OutletCondition bc) { return to_string(bc); }

OutletCondition parse_bc(const std::string& s) {
  if (s == "sommerfeld") return OutletCondition::Sommerfeld;
  if (s == "swift-stieber") return OutletCondition::SwiftStieber;
  throw UsageError("unknown boundary condition '" + s +
                   "' (expected sommerfeld or swift-stieber)");
}

void check_quad_tol(double tol) {
  if (!(tol >= kMinQuadTol && tol <= kMaxQuadTol)) {
    throw UsageError("--quad-tol must lie in [1e-13, 1e-6], got " + io::format_human(tol));
  }
}

void check_distinct(const std::vector<fs::path>& paths) {
  std::set<fs::path> seen;
  for (const auto& p : paths) {
    if (p.empty()) continue;
    const auto key = fs::weakly_canonical(fs::absolute(p));
    if (!seen.insert(key).second) {
      throw UsageError("path '" + path_string(p) + "' is used more than once");
    }
  }
}

void check_output_dir(const fs::path& file) {
  const auto dir = fs::absolute(file).parent_path();
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("output directory '" + path_string(dir) + "' does not exist");
  }
}

void check_label(const std::string& label) {
  if (label.empty() || label == "." || label == "..") {
    throw UsageError("invalid sweep label '" + label + "'");
  }
  for (char c : label) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) throw UsageError("sweep label '" + label + "' may only use [A-Za-z0-9_.-]");
  }
}

ordered_json geometry_json(const NipGeometry& g) {
  return {{"radius1", g.radius1}, {"radius2", g.radius2}, {"gap0", g.gap0},
          {"speed1", g.speed1},   {"speed2", g.speed2}, {"domain_half_width", g.domain_half_width}};
}

std::string config_hash(const ordered_json& j) { return io::content_hash(j.dump()); }

// JSON config helpers -----------------------------------------------------------

ordered_json load_json_object(const fs::path& path) {
  const auto text = io::read_file(path);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config '" + path_string(path) + "': " + e.what());
  }
  if (!j.is_object()) throw UsageError("config '" + path_string(path) + "' must be an object");
  return j;
}

void reject_unknown(const ordered_json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw UsageError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

double get_number(const ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw UsageError(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_count(const ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw UsageError(std::string("config key '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string get_string(const ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw UsageError(std::string("config key '") + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw UsageError(std::string("config key '") + key + "' must be a boolean");
  return v.get<bool>();
}

fs::path get_path(const ordered_json& j, const char* key, const fs::path& base) {
  fs::path p = get_string(j, key);
  return p.is_relative() ? base / p : p;
}

NipGeometry geometry_from_json(const ordered_json& j) {
  if (!j.is_object()) throw UsageError("config key 'geometry' must be an object");
  reject_unknown(j, {"radius1", "radius2", "gap0", "speed1", "speed2", "omega1", "omega2",
                     "domain_half_width"},
                 "geometry");
  NipGeometry g;
  if (j.contains("radius1")) g.radius1 = get_number(j, "radius1");
  if (j.contains("radius2")) g.radius2 = get_number(j, "radius2");
  if (j.contains("gap0")) g.gap0 = get_number(j, "gap0");
  if (j.contains("speed1")) g.speed1 = get_number(j, "speed1");
  if (j.contains("speed2")) g.speed2 = get_number(j, "speed2");
  if (j.contains("domain_half_width")) g.domain_half_width = get_number(j, "domain_half_width");
  if (j.contains("omega1")) {
    if (j.contains("speed1")) throw UsageError("geometry: give speed1 or omega1, not both");
    g.speed1 = surface_speed(get_number(j, "omega1"), g.radius1);
  }
  if (j.contains("omega2")) {
    if (j.contains("speed2")) throw UsageError("geometry: give speed2 or omega2, not both");
    g.speed2 = surface_speed(get_number(j, "omega2"), g.radius2);
  }
  return g;
}

void validate_geometry(const NipGeometry& g) {
  try {
    g.validate();
  } catch (const std::exception& e) {
    throw UsageError(std::string("geometry: ") + e.what());
  }
}

// Reports ---------------------------------------------------------------------

struct Style {
  bool color;
  std::string bold(const std::string& s) const { return color ? "\033[1m" + s + "\033[0m" : s; }
  std::string good(const std::string& s) const { return color ? "\033[32m" + s + "\033[0m" : s; }
  std::string bad(const std::string& s) const { return color ? "\033[31m" + s + "\033[0m" : s; }
};

std::string fit_report_text(const FitReport& r, const RheoDataset& data,
                            const std::string& data_hash, std::size_t modes, Style st) {
  using io::format_human;
  std::ostringstream os;
  os << st.bold("micronip fit report") << "\n";
  os << "tool version: " << io::tool_version() << "\n";
  os << "dataset: " << (data.label.empty() ? "(unnamed)" : data.label) << ", "
     << data.points.size() << " points, " << data_hash << "\n";
  os << "modes: " << modes << "\n";
  std::string status = r.converged ? st.good("converged") : st.bad("not converged");
  if (r.alpha_capped) status += " (alpha at cap: effectively Newtonian)";
  os << "status: " << status << "\n";
  os << "loss: " << format_human(r.loss) << "\n";
  os << "rms log residual: " << format_human(r.rms_log_residual) << "\n";
  os << "gradient norm: " << format_human(r.gradient_norm) << "\n";
  os << "iterations: " << r.iterations << "\n";
  os << "starts converged: " << r.starts_converged << " of " << r.starts_tried << "\n";
  os << "\n" << st.bold("parameters") << "\n";
  os << "alpha: " << format_human(r.params.alpha) << "\n";
  for (std::size_t i = 0; i < r.params.modes.size(); ++i) {
    os << "mode " << i + 1 << ": eta = " << format_human(r.params.modes[i].eta)
       << " Pa s, lambda = " << format_human(r.params.modes[i].lambda) << " s\n";
  }
  os << "total viscosity: " << format_human(r.params.total_viscosity()) << " Pa s\n";
  os << "\n" << st.bold("residuals") << "\n";
  os << "rate,measured,model,log_residual\n";
  for (std::size_t k = 0; k < data.points.size(); ++k) {
    const auto& pt = data.points[k];
    const double res = k < r.per_point_residuals.size() ? r.per_point_residuals[k] : std::nan("");
    os << format_human(pt.rate) << "," << format_human(pt.viscosity) << ","
       << format_human(pt.viscosity * std::exp(res)) << "," << format_human(res) << "\n";
  }
  return os.str();
}

// Nip case shared by run_nip and run_sweep ----------------------------------------

struct NipCase {
  NipSolution sol;
  NipMetrics metrics;
  std::vector<double> reversed;
};

NipCase solve_case(const NipGeometry& g, const FluidModel& fluid, OutletCondition bc,
                   std::size_t grid_n, double quad_tol) {
  SolverOptions opts;
  opts.engine.rel_tol = quad_tol;
  NipCase c;
  c.sol = solve_reynolds(g, fluid, bc, grid_n, opts);
  c.metrics = nip_metrics(c.sol, fluid, g, opts.engine);
  c.reversed = io::node_reversed_fractions(c.sol, fluid, g);
  return c;
}

std::string failure_json(const std::string& message, OutletCondition bc, std::size_t grid_n,
                         const io::Provenance& prov) {
  ordered_json j;
  j["error"] = message;
  j["bc_requested"] = bc_name(bc);
  j["grid_n"] = grid_n;
  ordered_json p;
  p["tool"] = "micronip";
  p["tool_version"] = io::tool_version();
  p["config_hash"] = prov.config_hash;
  ordered_json inputs = ordered_json::object();
  for (const auto& [name, hash] : prov.inputs) inputs[name] = hash;
  p["inputs"] = inputs;
  j["provenance"] = p;
  return j.dump(2) + "\n";
}

std::string pressure_svg(const NipSolution& sol, const std::string& title) {
  io::Series s{"pressure", {}, {}};
  for (std::size_t j = 0; j < sol.x.size(); ++j) {
    s.x.push_back(sol.x[j] * 1e3);
    s.y.push_back(sol.pressure[j]);
  }
  return io::line_chart_svg({title, "x (mm)", "pressure (Pa)", false, false}, {s});
}

}  // namespace

// Validation ----------------------------------------------------------------------

void validate(const FitConfig& cfg) {
  if (cfg.data.empty()) throw UsageError("fit: --data is required");
  if (cfg.out_params.empty()) throw UsageError("fit: --out is required");
  if (cfg.modes < 1 || cfg.modes > 8) throw UsageError("fit: --modes must be in 1..8");
  check_quad_tol(cfg.quad_tol);
  check_distinct({cfg.data, cfg.out_params, cfg.out_report.value_or(fs::path())});
}

void validate(const PredictConfig& cfg) {
  if (cfg.params.empty()) throw UsageError("predict: --params is required");
  if (cfg.out_csv.empty()) throw UsageError("predict: --out is required");
  if (cfg.grid.empty()) throw UsageError("predict: --grid is required");
  io::parse_grid_spec(cfg.grid);
  check_quad_tol(cfg.quad_tol);
  check_distinct({cfg.params, cfg.out_csv, cfg.svg.value_or(fs::path())});
}

void validate(const NipConfig& cfg) {
  validate_geometry(cfg.geometry);
  if (cfg.mu.has_value() == cfg.params.has_value()) {
    throw UsageError("nip: give exactly one of --mu and --params");
  }
  if (cfg.mu && !(*cfg.mu > 0.0 && std::isfinite(*cfg.mu))) {
    throw UsageError("nip: --mu must be positive");
  }
  if (cfg.grid_n < 200) throw UsageError("nip: --grid-n must be at least 200");
  if (cfg.out_csv.empty() || cfg.out_metrics.empty()) {
    throw UsageError("nip: --out and --metrics are required");
  }
  check_quad_tol(cfg.quad_tol);
  check_distinct({cfg.params.value_or(fs::path()), cfg.out_csv, cfg.out_metrics,
                  cfg.svg.value_or(fs::path())});
}

void validate(const SweepConfig& cfg) {
  validate_geometry(cfg.geometry);
  if (cfg.entries.empty()) throw UsageError("sweep: at least one entry is required");
  if (cfg.output_dir.empty()) throw UsageError("sweep: output_dir is required");
  if (cfg.grid_n < 200) throw UsageError("sweep: grid_n must be at least 200");
  check_quad_tol(cfg.quad_tol);
  std::set<std::string> labels;
  std::vector<fs::path> inputs;
  for (const auto& e : cfg.entries) {
    check_label(e.label);
    if (!labels.insert(e.label).second) throw UsageError("sweep: duplicate label '" + e.label + "'");
    if (e.params.has_value() == e.dataset.has_value()) {
      throw UsageError("sweep entry '" + e.label + "': give exactly one of params and dataset");
    }
    if (e.modes < 1 || e.modes > 8) throw UsageError("sweep entry '" + e.label + "': bad modes");
  }
}

// Config loaders --------------------------------------------------------------------

FitConfig load_fit_config(const fs::path& path) {
  const auto j = load_json_object(path);
  const auto base = path.parent_path();
  reject_unknown(j, {"data", "modes", "out_params", "out_report", "label", "quad_tol"}, "fit config");
  FitConfig c;
  if (j.contains("data")) c.data = get_path(j, "data", base);
  if (j.contains("modes")) c.modes = get_count(j, "modes");
  if (j.contains("out_params")) c.out_params = get_path(j, "out_params", base);
  if (j.contains("out_report")) c.out_report = get_path(j, "out_report", base);
  if (j.contains("label")) c.label = get_string(j, "label");
  if (j.contains("quad_tol")) c.quad_tol = get_number(j, "quad_tol");
  return c;
}

PredictConfig load_predict_config(const fs::path& path) {
  const auto j = load_json_object(path);
  const auto base = path.parent_path();
  reject_unknown(j, {"params", "grid", "out_csv", "svg", "extensional", "moduli", "quad_tol"},
                 "predict config");
  PredictConfig c;
  if (j.contains("params")) c.params = get_path(j, "params", base);
  if (j.contains("grid")) c.grid = get_string(j, "grid");
  if (j.contains("out_csv")) c.out_csv = get_path(j, "out_csv", base);
  if (j.contains("svg")) c.svg = get_path(j, "svg", base);
  if (j.contains("extensional")) c.extensional = get_bool(j, "extensional");
  if (j.contains("moduli")) c.moduli = get_bool(j, "moduli");
  if (j.contains("quad_tol")) c.quad_tol = get_number(j, "quad_tol");
  return c;
}

NipConfig load_nip_config(const fs::path& path) {
  const auto j = load_json_object(path);
  const auto base = path.parent_path();
  reject_unknown(j, {"geometry", "mu", "params", "bc", "grid_n", "out_csv", "out_metrics", "svg",
                     "quad_tol"},
                 "nip config");
  NipConfig c;
  if (j.contains("geometry")) c.geometry = geometry_from_json(j["geometry"]);
  if (j.contains("mu")) c.mu = get_number(j, "mu");
  if (j.contains("params")) c.params = get_path(j, "params", base);
  if (j.contains("bc")) c.bc = parse_bc(get_string(j, "bc"));
  if (j.contains("grid_n")) c.grid_n = get_count(j, "grid_n");
  if (j.contains("out_csv")) c.out_csv = get_path(j, "out_csv", base);
  if (j.contains("out_metrics")) c.out_metrics = get_path(j, "out_metrics", base);
  if (j.contains("svg")) c.svg = get_path(j, "svg", base);
  if (j.contains("quad_tol")) c.quad_tol = get_number(j, "quad_tol");
  return c;
}

SweepConfig load_sweep_config(const fs::path& path) {
  const auto j = load_json_object(path);
  const auto base = path.parent_path();
  reject_unknown(j, {"geometry", "bc", "grid_n", "output_dir", "entries", "quad_tol"},
                 "sweep config");
  SweepConfig c;
  if (j.contains("geometry")) c.geometry = geometry_from_json(j["geometry"]);
  if (j.contains("bc")) c.bc = parse_bc(get_string(j, "bc"));
  if (j.contains("grid_n")) c.grid_n = get_count(j, "grid_n");
  if (j.contains("output_dir")) c.output_dir = get_path(j, "output_dir", base);
  if (j.contains("quad_tol")) c.quad_tol = get_number(j, "quad_tol");
  if (j.contains("entries")) {
    if (!j["entries"].is_array()) throw UsageError("sweep config: 'entries' must be an array");
    for (const auto& e : j["entries"]) {
      if (!e.is_object()) throw UsageError("sweep config: entry must be an object");
      reject_unknown(e, {"label", "params", "dataset", "modes"}, "sweep entry");
      SweepEntry s;
      if (!e.contains("label")) throw UsageError("sweep entry without label");
      s.label = get_string(e, "label");
      if (e.contains("params")) s.params = get_path(e, "params", base);
      if (e.contains("dataset")) s.dataset = get_path(e, "dataset", base);
      if (e.contains("modes")) s.modes = get_count(e, "modes");
      c.entries.push_back(std::move(s));
    }
  }
  return c;
}

// Commands ----------------------------------------------------------------------------

int run_fit(const FitConfig& cfg, Console& io) {
  RheoDataset data;
  io::Provenance prov;
  int rc = guard(io, kExitUsage, [&] {
    validate(cfg);
    check_output_dir(cfg.out_params);
    if (cfg.out_report) check_output_dir(*cfg.out_report);
    const auto text = io::read_file(cfg.data);
    data = io::parse_rheo_csv_text(text, cfg.label.empty() ? cfg.data.stem().string() : cfg.label);
    ordered_json cj = {{"command", "fit"},
                       {"data", path_string(cfg.data)},
                       {"modes", cfg.modes},
                       {"label", data.label},
                       {"quad_tol", cfg.quad_tol}};
    prov.config_hash = config_hash(cj);
    prov.inputs.push_back({"dataset", io::content_hash(text)});
    return kExitOk;
  });
  if (rc != kExitOk) return rc;

  FitReport report;
  bool have_report = false;
  rc = guard(io, kExitNumerical, [&] {
    FitOptions opts;
    opts.engine.rel_tol = cfg.quad_tol;
    try {
      report = fit_steady_shear(data, cfg.modes, opts);
      have_report = true;
      return report.converged ? kExitOk : kExitNumerical;
    } catch (const FitNoConvergence& e) {
      io.err << "error: " << e.what() << " (writing best-effort parameters)\n";
      report = e.best_effort();
      have_report = true;
      return kExitNumerical;
    }
  });
  if (!have_report) return rc;

  const int wrc = guard(io, kExitIo, [&] {
    io::write_file(cfg.out_params, io::params_json(report.params, prov, data.label));
    const auto& hash = prov.inputs.front().second;
    if (cfg.out_report) {
      io::write_file(*cfg.out_report, fit_report_text(report, data, hash, cfg.modes, Style{false}));
    }
    io.out << fit_report_text(report, data, hash, cfg.modes, Style{io.color});
    return kExitOk;
  });
  return wrc != kExitOk ? wrc : rc;
}

int run_predict(const PredictConfig& cfg, Console& io) {
  KbkzParams params;
  std::vector<double> grid;
  io::Provenance prov;
  int rc = guard(io, kExitUsage, [&] {
    validate(cfg);
    check_output_dir(cfg.out_csv);
    if (cfg.svg) check_output_dir(*cfg.svg);
    grid = io::parse_grid_spec(cfg.grid);
    const auto text = io::read_file(cfg.params);
    params = io::params_from_json_text(text);
    ordered_json cj = {{"command", "predict"},        {"params", path_string(cfg.params)},
                       {"grid", cfg.grid},            {"extensional", cfg.extensional},
                       {"moduli", cfg.moduli},        {"quad_tol", cfg.quad_tol}};
    prov.config_hash = config_hash(cj);
    prov.inputs.push_back({"params", io::content_hash(text)});
    return kExitOk;
  });
  if (rc != kExitOk) return rc;

  MaterialFunctions table;
  rc = guard(io, kExitNumerical, [&] {
    EngineOptions opts;
    opts.rel_tol = cfg.quad_tol;
    table = material_function_table(params, grid, {cfg.extensional, cfg.moduli}, opts);
    return kExitOk;
  });
  if (rc != kExitOk) return rc;

  return guard(io, kExitIo, [&] {
    io::write_file(cfg.out_csv, io::material_functions_csv(table, prov));
    if (cfg.svg) {
      std::vector<io::Series> series(1);
      series[0].name = "viscosity";
      for (const auto& r : table.rows) {
        series[0].x.push_back(r.rate);
        series[0].y.push_back(r.viscosity);
      }
      if (table.has_extensional) {
        io::Series e{"extensional viscosity", {}, {}};
        for (const auto& r : table.rows) {
          e.x.push_back(r.rate);
          e.y.push_back(r.eta_e.value_or(std::nan("")));
        }
        series.push_back(std::move(e));
      }
      io::write_file(*cfg.svg, io::line_chart_svg({"Material functions", "rate (1/s)",
                                                   "viscosity (Pa s)", true, true},
                                                  series));
    }
    io.out << "wrote " << table.rows.size() << " rows to " << path_string(cfg.out_csv) << "\n";
    return kExitOk;
  });
}

int run_nip(const NipConfig& cfg, Console& io) {
  FluidModel fluid = Newtonian{0.0};
  io::Provenance prov;
  int rc = guard(io, kExitUsage, [&] {
    validate(cfg);
    check_output_dir(cfg.out_csv);
    check_output_dir(cfg.out_metrics);
    if (cfg.svg) check_output_dir(*cfg.svg);
    ordered_json cj = {{"command", "nip"},
                       {"geometry", geometry_json(cfg.geometry)},
                       {"bc", bc_name(cfg.bc)},
                       {"grid_n", cfg.grid_n},
                       {"quad_tol", cfg.quad_tol}};
    if (cfg.mu) {
      fluid = Newtonian{*cfg.mu};
      cj["mu"] = *cfg.mu;
    } else {
      const auto text = io::read_file(*cfg.params);
      fluid = GeneralizedNewtonian{io::params_from_json_text(text)};
      cj["params"] = path_string(*cfg.params);
      prov.inputs.push_back({"params", io::content_hash(text)});
    }
    prov.config_hash = config_hash(cj);
    return kExitOk;
  });
  if (rc != kExitOk) return rc;

  NipCase result;
  std::string failure;
  rc = guard(io, kExitNumerical, [&] {
    try {
      result = solve_case(cfg.geometry, fluid, cfg.bc, cfg.grid_n, cfg.quad_tol);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      failure = e.what();
      throw;
    }
    return kExitOk;
  });
  if (rc != kExitOk) {
    if (rc == kExitNumerical) {
      const int wrc = guard(io, kExitIo, [&] {
        io::write_file(cfg.out_metrics, failure_json(failure, cfg.bc, cfg.grid_n, prov));
        return kExitOk;
      });
      if (wrc != kExitOk) return wrc;
    }
    return rc;
  }

  return guard(io, kExitIo, [&] {
    io::write_file(cfg.out_csv, io::nip_csv(result.sol, result.reversed, prov));
    io::write_file(cfg.out_metrics, io::metrics_json(result.metrics, result.sol, prov));
    if (cfg.svg) io::write_file(*cfg.svg, pressure_svg(result.sol, "Nip pressure"));
    const auto& m = result.metrics;
    io.out << "bc " << bc_name(result.sol.bc_used) << ", load " << io::format_human(m.load)
           << " N/m, peak pressure " << io::format_human(m.peak_pressure) << " Pa, q "
           << io::format_human(m.q) << " m^2/s\n";
    return kExitOk;
  });
}

int run_sweep(const SweepConfig& cfg, Console& io) {
  io::Provenance prov;
  std::vector<std::string> input_text(cfg.entries.size());
  int rc = guard(io, kExitUsage, [&] {
    validate(cfg);
    ordered_json entries = ordered_json::array();
    for (std::size_t i = 0; i < cfg.entries.size(); ++i) {
      const auto& e = cfg.entries[i];
      ordered_json ej = {{"label", e.label}};
      const auto& path = e.params ? *e.params : *e.dataset;
      ej[e.params ? "params" : "dataset"] = path_string(path);
      if (e.dataset) ej["modes"] = e.modes;
      entries.push_back(ej);
      input_text[i] = io::read_file(path);
      prov.inputs.push_back({e.label, io::content_hash(input_text[i])});
    }
    ordered_json cj = {{"command", "sweep"},
                       {"geometry", geometry_json(cfg.geometry)},
                       {"bc", bc_name(cfg.bc)},
                       {"grid_n", cfg.grid_n},
                       {"quad_tol", cfg.quad_tol},
                       {"entries", entries}};
    prov.config_hash = config_hash(cj);
    return kExitOk;
  });
  if (rc != kExitOk) return rc;

  rc = guard(io, kExitIo, [&] {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (!fs::is_directory(cfg.output_dir)) {
      throw IoError("cannot create output directory '" + path_string(cfg.output_dir) + "'");
    }
    for (const auto& e : cfg.entries) {
      fs::create_directories(cfg.output_dir / e.label, ec);
      if (!fs::is_directory(cfg.output_dir / e.label)) {
        throw IoError("cannot create member directory for '" + e.label + "'");
      }
    }
    return kExitOk;
  });
  if (rc != kExitOk) return rc;

  struct Outcome {
    io::ComparisonRow row;
    std::string error;
    bool io_failure = false;
  };

  auto member = [&](std::size_t i) {
    const auto& e = cfg.entries[i];
    const auto dir = cfg.output_dir / e.label;
    io::Provenance mprov{prov.config_hash, {prov.inputs[i]}};
    Outcome out;
    out.row.label = e.label;
    out.row.total_viscosity = std::nan("");
    out.row.alpha = std::nan("");
    try {
      KbkzParams params;
      if (e.params) {
        params = io::params_from_json_text(input_text[i]);
      } else {
        const auto data = io::parse_rheo_csv_text(input_text[i], e.label);
        FitOptions fopts;
        fopts.engine.rel_tol = cfg.quad_tol;
        // The sweep already runs members concurrently.
        fopts.parallel = false;
        params = fit_steady_shear(data, e.modes, fopts).params;
        io::write_file(dir / "params.json", io::params_json(params, mprov, e.label));
      }
      out.row.total_viscosity = params.total_viscosity();
      out.row.alpha = params.alpha;
      const FluidModel fluid = GeneralizedNewtonian{params};
      const auto c = solve_case(cfg.geometry, fluid, cfg.bc, cfg.grid_n, cfg.quad_tol);
      io::write_file(dir / "nip.csv", io::nip_csv(c.sol, c.reversed, mprov));
      io::write_file(dir / "metrics.json", io::metrics_json(c.metrics, c.sol, mprov));
      out.row.load = c.metrics.load;
      out.row.peak_pressure = c.metrics.peak_pressure;
      out.row.n1_proxy = c.metrics.n1_proxy;
      out.row.recirculation_extent = c.metrics.recirculation_extent();
    } catch (const std::exception& ex) {
      out.row.failed = true;
      out.error = ex.what();
      out.io_failure = dynamic_cast<const IoError*>(&ex) != nullptr;
      try {
        io::write_file(dir / "metrics.json", failure_json(out.error, cfg.bc, cfg.grid_n, mprov));
      } catch (const std::exception&) {
        out.io_failure = true;
      }
    }
    return out;
  };

  std::vector<std::future<Outcome>> futures;
  futures.reserve(cfg.entries.size());
  for (std::size_t i = 0; i < cfg.entries.size(); ++i) {
    futures.push_back(std::async(std::launch::async, member, i));
  }
  std::vector<io::ComparisonRow> rows;
  bool any_failed = false;
  bool any_io = false;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    auto o = futures[i].get();
    if (o.row.failed) {
      any_failed = true;
      any_io = any_io || o.io_failure;
      io.err << "error: sweep member '" << o.row.label << "': " << o.error << "\n";
    }
    rows.push_back(std::move(o.row));
  }

  rc = guard(io, kExitIo, [&] {
    io::write_file(cfg.output_dir / "comparison.csv", io::comparison_csv(rows, prov));
    Style st{io.color};
    io.out << st.bold("label, load (N/m), peak pressure (Pa), n1 proxy (N/m)") << "\n";
    for (const auto& r : rows) {
      io.out << r.label << ", " << io::format_human(r.failed ? std::nan("") : r.load) << ", "
             << io::format_human(r.failed ? std::nan("") : r.peak_pressure) << ", "
             << io::format_human(r.failed ? std::nan("") : r.n1_proxy)
             << (r.failed ? " " + st.bad("failed") : "") << "\n";
    }
    return kExitOk;
  });
  if (rc != kExitOk) return rc;
  if (any_io) return kExitIo;
  return any_failed ? kExitNumerical : kExitOk;
}

// Command line ------------------------------------------------------------------------

int run(const std::vector<std::string>& args, Console& io) {
  CLI::App app{"micronip: KBKZ rheology fitting and roll-nip lubrication"};
  app.set_version_flag("--version", std::string(io::tool_version()));
  app.require_subcommand(1);

  double quad_tol = 1e-10;
  std::string config;

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a KBKZ/PSM model to steady-shear viscosity data");
  std::string fit_data, fit_out, fit_report, fit_label;
  std::size_t fit_modes = 1;
  fit->add_option("--config", config, "JSON config file (flags override its values)");
  auto* o_fit_data = fit->add_option("--data", fit_data, "Rheometry CSV (shear_rate,viscosity)");
  auto* o_fit_modes = fit->add_option("--modes", fit_modes, "Number of relaxation modes (1-8)");
  auto* o_fit_out = fit->add_option("-o,--out", fit_out, "Output params JSON");
  auto* o_fit_report = fit->add_option("--report", fit_report, "Output human-readable report");
  auto* o_fit_label = fit->add_option("--label", fit_label, "Dataset label");
  auto* o_fit_tol = fit->add_option("--quad-tol", quad_tol, "Quadrature relative tolerance [1e-13, 1e-6]");

  // predict
  auto* pred = app.add_subcommand("predict", "Tabulate material functions for a parameter set");
  std::string p_params, p_grid, p_out, p_svg;
  bool p_ext = false, p_mod = false;
  pred->add_option("--config", config, "JSON config file (flags override its values)");
  auto* o_p_params = pred->add_option("--params", p_params, "Params JSON");
  auto* o_p_grid = pred->add_option("--grid", p_grid, "Rate grid start:stop:points:log|lin");
  auto* o_p_out = pred->add_option("-o,--out", p_out, "Output CSV");
  auto* o_p_svg = pred->add_option("--svg", p_svg, "Optional log-log SVG chart");
  auto* o_p_ext = pred->add_flag("--extensional", p_ext, "Add the eta_e column");
  auto* o_p_mod = pred->add_flag("--moduli", p_mod, "Add g_storage and g_loss at omega = rate");
  auto* o_p_tol = pred->add_option("--quad-tol", quad_tol, "Quadrature relative tolerance [1e-13, 1e-6]");

  // nip
  auto* nip = app.add_subcommand("nip", "Solve the lubrication flow through a roll nip");
  NipGeometry geo;
  double omega1 = 0.0, omega2 = 0.0, mu = 0.0;
  std::string n_params, n_bc, n_out, n_metrics, n_svg;
  std::size_t grid_n = 801;
  nip->add_option("--config", config, "JSON config file (flags override its values)");
  auto* o_r1 = nip->add_option("--radius1", geo.radius1, "Roll 1 radius (m)");
  auto* o_r2 = nip->add_option("--radius2", geo.radius2, "Roll 2 radius (m)");
  auto* o_gap = nip->add_option("--gap", geo.gap0, "Minimum gap (m)");
  auto* o_u1 = nip->add_option("--speed1", geo.speed1, "Roll 1 surface speed (m/s)");
  auto* o_u2 = nip->add_option("--speed2", geo.speed2, "Roll 2 surface speed (m/s)");
  auto* o_w1 = nip->add_option("--omega1", omega1, "Roll 1 angular speed (rad/s)")->excludes(o_u1);
  auto* o_w2 = nip->add_option("--omega2", omega2, "Roll 2 angular speed (rad/s)")->excludes(o_u2);
  auto* o_half = nip->add_option("--half-width", geo.domain_half_width,
                                 "Domain half-width override (m); 0 derives it from the gap");
  auto* o_mu = nip->add_option("--mu", mu, "Newtonian viscosity (Pa s)");
  auto* o_n_params = nip->add_option("--params", n_params, "Params JSON for a KBKZ fluid");
  auto* o_bc = nip->add_option("--bc", n_bc, "Outlet condition: sommerfeld or swift-stieber");
  auto* o_grid_n = nip->add_option("--grid-n", grid_n, "Grid nodes (>= 200)");
  auto* o_n_out = nip->add_option("-o,--out", n_out, "Output nip CSV");
  auto* o_n_metrics = nip->add_option("--metrics", n_metrics, "Output metrics JSON");
  auto* o_n_svg = nip->add_option("--svg", n_svg, "Optional pressure SVG chart");
  auto* o_n_tol = nip->add_option("--quad-tol", quad_tol, "Quadrature relative tolerance [1e-13, 1e-6]");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the nip for several formulations concurrently");
  std::string s_out;
  sweep->add_option("--config", config, "JSON sweep config")->required();
  auto* o_s_out = sweep->add_option("--out-dir", s_out, "Override the output directory");
  auto* o_s_tol = sweep->add_option("--quad-tol", quad_tol, "Quadrature relative tolerance [1e-13, 1e-6]");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    io.out << io::tool_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const auto given = [](const CLI::Option* o) { return o->count() > 0; };

  if (fit->parsed()) {
    FitConfig cfg;
    int rc = guard(io, kExitUsage, [&] {
      if (!config.empty()) cfg = load_fit_config(config);
      if (given(o_fit_data)) cfg.data = fit_data;
      if (given(o_fit_modes)) cfg.modes = fit_modes;
      if (given(o_fit_out)) cfg.out_params = fit_out;
      if (given(o_fit_report)) cfg.out_report = fs::path(fit_report);
      if (given(o_fit_label)) cfg.label = fit_label;
      if (given(o_fit_tol)) cfg.quad_tol = quad_tol;
      return kExitOk;
    });
    return rc != kExitOk ? rc : run_fit(cfg, io);
  }
  if (pred->parsed()) {
    PredictConfig cfg;
    int rc = guard(io, kExitUsage, [&] {
      if (!config.empty()) cfg = load_predict_config(config);
      if (given(o_p_params)) cfg.params = p_params;
      if (given(o_p_grid)) cfg.grid = p_grid;
      if (given(o_p_out)) cfg.out_csv = p_out;
      if (given(o_p_svg)) cfg.svg = fs::path(p_svg);
      if (given(o_p_ext)) cfg.extensional = p_ext;
      if (given(o_p_mod)) cfg.moduli = p_mod;
      if (given(o_p_tol)) cfg.quad_tol = quad_tol;
      return kExitOk;
    });
    return rc != kExitOk ? rc : run_predict(cfg, io);
  }
  if (nip->parsed()) {
    NipConfig cfg;
    int rc = guard(io, kExitUsage, [&] {
      if (!config.empty()) cfg = load_nip_config(config);
      auto& g = cfg.geometry;
      if (given(o_r1)) g.radius1 = geo.radius1;
      if (given(o_r2)) g.radius2 = geo.radius2;
      if (given(o_gap)) g.gap0 = geo.gap0;
      if (given(o_u1)) g.speed1 = geo.speed1;
      if (given(o_u2)) g.speed2 = geo.speed2;
      if (given(o_half)) g.domain_half_width = geo.domain_half_width;
      if (given(o_w1)) g.speed1 = surface_speed(omega1, g.radius1);
      if (given(o_w2)) g.speed2 = surface_speed(omega2, g.radius2);
      if (given(o_mu)) {
        cfg.mu = mu;
        cfg.params.reset();
      }
      if (given(o_n_params)) {
        cfg.params = fs::path(n_params);
        cfg.mu.reset();
      }
      if (given(o_mu) && given(o_n_params)) throw UsageError("nip: --mu and --params conflict");
      if (given(o_bc)) cfg.bc = parse_bc(n_bc);
      if (given(o_grid_n)) cfg.grid_n = grid_n;
      if (given(o_n_out)) cfg.out_csv = n_out;
      if (given(o_n_metrics)) cfg.out_metrics = n_metrics;
      if (given(o_n_svg)) cfg.svg = fs::path(n_svg);
      if (given(o_n_tol)) cfg.quad_tol = quad_tol;
      return kExitOk;
    });
    return rc != kExitOk ? rc : run_nip(cfg, io);
  }
  SweepConfig cfg;
  int rc = guard(io, kExitUsage, [&] {
    cfg = load_sweep_config(config);
    if (given(o_s_out)) cfg.output_dir = s_out;
    if (given(o_s_tol)) cfg.quad_tol = quad_tol;
    return kExitOk;
  });
  return rc != kExitOk ? rc : run_sweep(cfg, io);
}

}  // namespace micronip::cli
