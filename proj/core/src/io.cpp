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

#include "micronip/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "micronip/errors.hpp"

namespace micronip::io {

namespace {

using nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::string provenance_comment(const Provenance& prov) {
  std::string out = "# micronip ";
  out += tool_version();
  out += "\n# config_hash: " + prov.config_hash + "\n";
  for (const auto& [name, hash] : prov.inputs) {
    out += "# input " + name + ": " + hash + "\n";
  }
  return out;
}

ordered_json provenance_json(const Provenance& prov) {
  ordered_json j;
  j["tool"] = "micronip";
  j["tool_version"] = tool_version();
  j["config_hash"] = prov.config_hash;
  ordered_json inputs = ordered_json::object();
  for (const auto& [name, hash] : prov.inputs) inputs[name] = hash;
  j["inputs"] = inputs;
  return j;
}

// Non-finite values are not representable in JSON.
ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

double require_number(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

const char* tool_version() { return MICRONIP_VERSION; }

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_human(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return text;
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

// Rheometry CSV ---------------------------------------------------------------

RheoDataset parse_rheo_csv_text(std::string_view text, std::string label) {
  struct Row {
    RheoPoint pt;
    std::size_t line;
  };
  std::vector<Row> rows;
  bool have_header = false;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line != kRheoHeader) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                             std::string(kRheoHeader) + "'",
                         line_no);
      }
      have_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    RheoPoint pt{};
    if (fields.size() != 2 || !parse_double(fields[0], pt.rate) ||
        !parse_double(fields[1], pt.viscosity)) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed row", line_no);
    }
    if (!std::isfinite(pt.rate) || !std::isfinite(pt.viscosity)) {
      throw ValidationError("line " + std::to_string(line_no) + ": non-finite value",
                            line_no);
    }
    if (!(pt.rate > 0.0) || !(pt.viscosity > 0.0)) {
      throw ValidationError("line " + std::to_string(line_no) + ": values must be positive",
                            line_no);
    }
    rows.push_back({pt, line_no});
  }
  if (!have_header) throw ParseError("missing header '" + std::string(kRheoHeader) + "'", 0);

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.pt.rate < b.pt.rate; });
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].pt.rate == rows[k - 1].pt.rate) {
      const std::size_t dup = std::max(rows[k].line, rows[k - 1].line);
      throw ValidationError("line " + std::to_string(dup) + ": duplicate shear rate " +
                                format_human(rows[k].pt.rate),
                            dup);
    }
  }
  RheoDataset data;
  data.label = std::move(label);
  for (const auto& r : rows) data.points.push_back(r.pt);
  data.validate();
  return data;
}

RheoDataset parse_rheo_csv(const std::filesystem::path& path) {
  return parse_rheo_csv_text(read_file(path), path.stem().string());
}

std::string rheo_csv(const RheoDataset& data, const Provenance* prov) {
  std::string out;
  if (prov) out += provenance_comment(*prov);
  out += std::string(kRheoHeader) + "\n";
  for (const auto& pt : data.points) {
    out += format_number(pt.rate) + "," + format_number(pt.viscosity) + "\n";
  }
  return out;
}

// Params JSON -----------------------------------------------------------------

KbkzParams params_from_json_text(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("params JSON: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ValidationError("params JSON must be an object");
  static const std::set<std::string> known = {"modes", "alpha", "beta",     "theta",
                                              "r_eta", "damping", "provenance", "label"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw ValidationError("params JSON: unknown key '" + item.key() + "'");
    }
  }
  KbkzParams p;
  if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty()) {
    throw ValidationError("params JSON: 'modes' must be a non-empty array");
  }
  for (const auto& m : j["modes"]) {
    if (!m.is_object()) throw ValidationError("params JSON: mode must be an object");
    p.modes.push_back({require_number(m, "eta"), require_number(m, "lambda")});
  }
  p.alpha = require_number(j, "alpha");
  if (j.contains("beta")) p.beta = require_number(j, "beta");
  if (j.contains("theta")) p.theta = require_number(j, "theta");
  if (j.contains("r_eta")) p.r_eta = require_number(j, "r_eta");
  if (j.contains("damping")) {
    const auto& d = j["damping"];
    if (d == "reversible") {
      p.damping = Damping::Reversible;
    } else if (d == "irreversible") {
      p.damping = Damping::Irreversible;
    } else {
      throw ValidationError("params JSON: damping must be 'reversible' or 'irreversible'");
    }
  }
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ValidationError(std::string("params JSON: ") + e.what());
  }
  return p;
}

KbkzParams parse_params_json(const std::filesystem::path& path) {
  return params_from_json_text(read_file(path));
}

std::string params_json(const KbkzParams& p, const Provenance& prov,
                        const std::string& label) {
  ordered_json j;
  if (!label.empty()) j["label"] = label;
  ordered_json modes = ordered_json::array();
  for (const auto& m : p.modes) modes.push_back({{"eta", m.eta}, {"lambda", m.lambda}});
  j["modes"] = modes;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["theta"] = p.theta;
  j["r_eta"] = p.r_eta;
  j["damping"] = p.damping == Damping::Reversible ? "reversible" : "irreversible";
  j["provenance"] = provenance_json(prov);
  return dump(j);
}

// Material functions ------------------------------------------------------------

std::vector<double> parse_grid_spec(std::string_view spec) {
  const auto bad = [&](const std::string& why) {
    return UsageError("invalid grid spec '" + std::string(spec) + "': " + why);
  };
  const auto parts = split(spec, ':');
  if (parts.size() != 4) throw bad("expected start:stop:points:log|lin");
  double start = 0.0;
  double stop = 0.0;
  if (!parse_double(parts[0], start) || !parse_double(parts[1], stop)) {
    throw bad("start and stop must be numbers");
  }
  std::size_t n = 0;
  const auto cnt = trim(parts[2]);
  const auto res = std::from_chars(cnt.data(), cnt.data() + cnt.size(), n);
  if (res.ec != std::errc() || res.ptr != cnt.data() + cnt.size() || n == 0) {
    throw bad("points must be a positive integer");
  }
  if (n > 1000000) throw bad("too many points");
  const auto kind = trim(parts[3]);
  if (kind != "log" && kind != "lin") throw bad("spacing must be 'log' or 'lin'");
  if (!std::isfinite(start) || !std::isfinite(stop) || !(start > 0.0)) {
    throw bad("start must be positive and finite");
  }
  if (n == 1) {
    if (stop != start) throw bad("a single-point grid needs start == stop");
    return {start};
  }
  if (!(stop > start)) throw bad("stop must exceed start");
  if (kind == "log") return log_grid(start, stop, n);
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = start + (stop - start) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  g.back() = stop;
  return g;
}

std::string material_functions_csv(const MaterialFunctions& table,
                                   const Provenance& prov) {
  std::string out = provenance_comment(prov);
  out += "rate,viscosity,n1,n2";
  if (table.has_extensional) out += ",eta_e";
  if (table.has_moduli) out += ",g_storage,g_loss";
  out += "\n";
  for (const auto& r : table.rows) {
    out += format_number(r.rate) + "," + format_number(r.viscosity) + "," +
           format_number(r.n1) + "," + format_number(r.n2);
    if (table.has_extensional) {
      out += "," + format_number(r.eta_e.value_or(std::nan("")));
    }
    if (table.has_moduli) {
      out += "," + format_number(r.g_storage.value_or(std::nan(""))) + "," +
             format_number(r.g_loss.value_or(std::nan("")));
    }
    out += "\n";
  }
  return out;
}

// Nip ---------------------------------------------------------------------------

std::vector<double> node_reversed_fractions(const NipSolution& sol, const FluidModel& f,
                                            const NipGeometry& g) {
  std::vector<double> frac(sol.x.size(), 0.0);
  const double sign = sol.speed1 + sol.speed2 >= 0.0 ? 1.0 : -1.0;
  for (std::size_t j = 0; j < sol.active_nodes; ++j) {
    frac[j] = reversed_fraction(velocity_profile(sol, f, g, sol.x[j]), sign);
  }
  return frac;
}

std::string nip_csv(const NipSolution& sol, const std::vector<double>& reversed,
                    const Provenance& prov) {
  if (reversed.size() != sol.x.size()) {
    throw InvalidArgument("nip_csv: reversed fraction count does not match the grid");
  }
  std::string out = provenance_comment(prov);
  out += std::string(kNipHeader) + "\n";
  for (std::size_t j = 0; j < sol.x.size(); ++j) {
    out += format_number(sol.x[j]) + "," + format_number(sol.h[j]) + "," +
           format_number(sol.pressure[j]) + "," + format_number(reversed[j]) + "\n";
  }
  return out;
}

double pressure_parity(const NipSolution& sol) {
  const std::size_t n = sol.x.size();
  double peak = 0.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    peak = std::max(peak, std::abs(sol.pressure[j]));
    worst = std::max(worst, std::abs(sol.pressure[j] + sol.pressure[n - 1 - j]));
  }
  return peak > 0.0 ? worst / peak : 0.0;
}

std::string metrics_json(const NipMetrics& m, const NipSolution& sol,
                         const Provenance& prov) {
  ordered_json j;
  j["load"] = json_number(m.load);
  j["peak_pressure"] = json_number(m.peak_pressure);
  j["q"] = json_number(m.q);
  j["films"] = {{"film1", json_number(m.film1)}, {"film2", json_number(m.film2)}};
  j["n1_proxy"] = json_number(m.n1_proxy);
  ordered_json regions = ordered_json::array();
  for (const auto& r : m.recirculation) {
    regions.push_back({{"x_start", json_number(r.x_start)},
                       {"x_end", json_number(r.x_end)},
                       {"max_reversed_fraction", json_number(r.max_reversed_fraction)}});
  }
  j["recirculation"] = regions;
  j["recirculation_extent"] = json_number(m.recirculation_extent());
  j["bc_used"] = to_string(sol.bc_used);
  j["grid_n"] = sol.x.size();
  j["h_star"] = json_number(sol.h_star);
  j["cavitation_x"] = sol.cavitation_x ? json_number(*sol.cavitation_x) : ordered_json();
  ordered_json flux_iterates = ordered_json::array();
  for (double r : sol.flux_residuals) flux_iterates.push_back(json_number(r));
  j["convergence"] = {{"outlet_pressure_residual", json_number(sol.outlet_pressure_residual)},
                      {"outlet_gradient_residual", json_number(sol.outlet_gradient_residual)},
                      {"pressure_parity", json_number(pressure_parity(sol))},
                      {"flux_residuals", flux_iterates}};
  j["provenance"] = provenance_json(prov);
  return dump(j);
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows, const Provenance& prov) {
  std::string out = provenance_comment(prov);
  out += std::string(kComparisonHeader) + "\n";
  const double nan = std::nan("");
  for (const auto& r : rows) {
    out += r.label + "," + format_number(r.total_viscosity) + "," + format_number(r.alpha) +
           "," + format_number(r.failed ? nan : r.load) + "," +
           format_number(r.failed ? nan : r.peak_pressure) + "," +
           format_number(r.failed ? nan : r.n1_proxy) + "," +
           format_number(r.failed ? nan : r.recirculation_extent) + "\n";
  }
  return out;
}

std::vector<ComparisonRow> parse_comparison_csv_text(std::string_view text) {
  std::vector<ComparisonRow> rows;
  bool have_header = false;
  std::size_t line_no = 0;
  const auto num = [&](std::string_view s, double& v) {
    s = trim(s);
    if (s == "nan") {
      v = std::nan("");
      return true;
    }
    return parse_double(s, v);
  };
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line != kComparisonHeader) throw ParseError("unexpected comparison header", line_no);
      have_header = true;
      continue;
    }
    const auto f = split(line, ',');
    ComparisonRow r;
    if (f.size() != 7 || !num(f[1], r.total_viscosity) || !num(f[2], r.alpha) ||
        !num(f[3], r.load) || !num(f[4], r.peak_pressure) || !num(f[5], r.n1_proxy) ||
        !num(f[6], r.recirculation_extent)) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed row", line_no);
    }
    r.label = std::string(trim(f[0]));
    r.failed = std::isnan(r.load);
    rows.push_back(std::move(r));
  }
  if (!have_header) throw ParseError("missing comparison header", 0);
  return rows;
}

}  // namespace micronip::io
