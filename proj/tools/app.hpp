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

// Command implementations behind the micronip executable. Every run_* call
// returns a process exit code: 0 success, 1 I/O, 2 numerical, 64 usage.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "micronip/nip.hpp"

namespace micronip::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitUsage = 64;

inline constexpr double kMinQuadTol = 1e-13;
inline constexpr double kMaxQuadTol = 1e-6;

struct Console {
  std::ostream& out;
  std::ostream& err;
  bool color = false;
};

namespace fs = std::filesystem;

struct FitConfig {
  fs::path data;
  std::size_t modes = 1;
  fs::path out_params;
  std::optional<fs::path> out_report;
  std::string label;
  double quad_tol = 1e-10;
};

struct PredictConfig {
  fs::path params;
  std::string grid;
  fs::path out_csv;
  std::optional<fs::path> svg;
  bool extensional = false;
  bool moduli = false;
  double quad_tol = 1e-10;
};

struct NipConfig {
  NipGeometry geometry;
  std::optional<double> mu;
  std::optional<fs::path> params;
  OutletCondition bc = OutletCondition::SwiftStieber;
  std::size_t grid_n = 801;
  fs::path out_csv;
  fs::path out_metrics;
  std::optional<fs::path> svg;
  double quad_tol = 1e-10;
};

struct SweepEntry {
  std::string label;
  std::optional<fs::path> params;
  std::optional<fs::path> dataset;
  std::size_t modes = 1;
};

struct SweepConfig {
  NipGeometry geometry;
  OutletCondition bc = OutletCondition::SwiftStieber;
  std::size_t grid_n = 801;
  fs::path output_dir;
  std::vector<SweepEntry> entries;
  double quad_tol = 1e-10;
};

/// Throws UsageError for bad values, duplicate paths or bad labels.
void validate(const FitConfig& cfg);
void validate(const PredictConfig& cfg);
void validate(const NipConfig& cfg);
void validate(const SweepConfig& cfg);

/// JSON config loaders; relative paths resolve against the config file's
/// directory. Unknown keys are rejected.
FitConfig load_fit_config(const fs::path& path);
PredictConfig load_predict_config(const fs::path& path);
NipConfig load_nip_config(const fs::path& path);
SweepConfig load_sweep_config(const fs::path& path);

int run_fit(const FitConfig& cfg, Console& io);
int run_predict(const PredictConfig& cfg, Console& io);
int run_nip(const NipConfig& cfg, Console& io);
int run_sweep(const SweepConfig& cfg, Console& io);

/// Full command line without the program name.
int run(const std::vector<std::string>& args, Console& io);

}  // namespace micronip::cli
