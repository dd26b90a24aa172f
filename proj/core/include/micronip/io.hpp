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

/**
 * @file io.hpp
 * @brief File formats: rheometry CSV, params JSON, material-function CSV,
 *        nip CSV, metrics JSON and the sweep comparison CSV.
 *
 * Machine-readable numbers use 17 significant digits so every double
 * round-trips. CSV files may start with '#' comment lines; the provenance
 * block is written there. Writers return the file text; callers own I/O.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "micronip/kbkz.hpp"
#include "micronip/nip.hpp"
#include "micronip/polyfit.hpp"

namespace micronip::io {

inline constexpr std::string_view kRheoHeader = "shear_rate,viscosity";
inline constexpr std::string_view kNipHeader = "x,h,pressure,reversed_fraction";
inline constexpr std::string_view kComparisonHeader =
    "label,total_viscosity,alpha,load,peak_pressure,n1_proxy,recirculation_extent";

const char* tool_version();

struct Provenance {
  std::string config_hash;
  /// (name, hash) pairs in caller order.
  std::vector<std::pair<std::string, std::string>> inputs;
};

/// 64-bit FNV-1a digest rendered as "fnv1a64:<16 hex digits>".
std::string content_hash(std::string_view bytes);

/// 17 significant digits; "nan"/"inf" for non-finite values.
std::string format_number(double v);
/// 6 significant digits for human-readable reports.
std::string format_human(double v);

/// Throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Truncates and writes; throws IoError when the file cannot be written.
void write_file(const std::filesystem::path& path, std::string_view text);

// Rheometry CSV ---------------------------------------------------------------

RheoDataset parse_rheo_csv_text(std::string_view text, std::string label = {});
RheoDataset parse_rheo_csv(const std::filesystem::path& path);
std::string rheo_csv(const RheoDataset& data, const Provenance* prov = nullptr);

// Params JSON -----------------------------------------------------------------

KbkzParams params_from_json_text(std::string_view text);
KbkzParams parse_params_json(const std::filesystem::path& path);
std::string params_json(const KbkzParams& p, const Provenance& prov,
                        const std::string& label = {});

// Material functions ------------------------------------------------------------

/// "start:stop:points:log|lin"; throws UsageError.
std::vector<double> parse_grid_spec(std::string_view spec);

std::string material_functions_csv(const MaterialFunctions& table,
                                   const Provenance& prov);

// Nip ---------------------------------------------------------------------------

/// One reversed-flow fraction per grid node (zero past the film rupture).
std::vector<double> node_reversed_fractions(const NipSolution& sol,
                                            const FluidModel& f,
                                            const NipGeometry& g);

std::string nip_csv(const NipSolution& sol, const std::vector<double>& reversed,
                    const Provenance& prov);

/// max |P(x) + P(-x)| / max |P| over mirrored node pairs.
double pressure_parity(const NipSolution& sol);

std::string metrics_json(const NipMetrics& m, const NipSolution& sol,
                         const Provenance& prov);

struct ComparisonRow {
  std::string label;
  double total_viscosity = 0.0;
  double alpha = 0.0;
  double load = 0.0;
  double peak_pressure = 0.0;
  double n1_proxy = 0.0;
  double recirculation_extent = 0.0;
  bool failed = false;
};

std::string comparison_csv(const std::vector<ComparisonRow>& rows,
                           const Provenance& prov);
std::vector<ComparisonRow> parse_comparison_csv_text(std::string_view text);

// SVG -----------------------------------------------------------------------------

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Static line chart with an 800x600 viewBox and the data embedded as
/// comments. Byte-identical for identical input.
std::string line_chart_svg(const ChartSpec& spec, const std::vector<Series>& series);

}  // namespace micronip::io
