// Copyright 2026 The spare Authors
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

#ifndef SPARE_ANALYTICS_HPP_
#define SPARE_ANALYTICS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spare/sim.hpp"

namespace spare {

// Turns record logs and sweep outputs into the evaluation artifacts: count
// tables, first-error distributions, grid CSVs, regression fits, and the
// closed-form oracles the sweeps are checked against.

struct GridRow {
  int users = 0;
  int devices = 0;
  int threshold = 0;
  std::int64_t total = 0;
  std::int64_t successful = 0;
  std::int64_t failed = 0;

  double failed_fraction() const {
    return total > 0 ? static_cast<double>(failed) / static_cast<double>(total) : 0.0;
  }
};

struct SummaryCounts {
  std::int64_t total = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  double failed_fraction = 0.0;  // 0 when total is 0
};

SummaryCounts summarize(const std::vector<SimulationRecord>& records);

struct FirstErrorRow {
  std::string user_id;
  bool is_malicious = false;
  int total_requests = 0;
  std::optional<int> first_error_index;  // absent when every request passed
};

/// Per-user first rejected request_index, sorted by user_id.
std::vector<FirstErrorRow> first_error_positions(
    const std::vector<SimulationRecord>& records);

/// One run_scenario per (U, D, R) cell of the Cartesian product, with the
/// malicious population, device pool, harvesters, and threshold rebound per
/// cell and a per-cell seed derived from the base scenario seed. The base
/// scenario must carry a malicious workload.
std::vector<GridRow> sweep_grid(const std::vector<int>& users_set,
                                const std::vector<int>& devices_set,
                                const std::vector<int>& thresholds_set,
                                const Scenario& base);

/// Benign counterpart over (U, R); the devices column records U since each
/// user owns one device.
std::vector<GridRow> sweep_benign_grid(const std::vector<int>& users_set,
                                       const std::vector<int>& thresholds_set,
                                       const Scenario& base);

enum class Model { linear, poly2 };

const char* to_string(Model m);
std::optional<Model> model_from_string(std::string_view name);

struct RegressionFit {
  Model model = Model::linear;
  // linear: [1, U, D, T]; poly2: [1, U, D, T, U^2, U*D, U*T, D^2, D*T, T^2]
  std::vector<double> coefficients;
  double r_squared = 0.0;
};

/// Ordinary least squares of failed_fraction on the design above, solved by
/// column-pivoted QR. Throws SingularDesign on fewer than 5 rows or a
/// rank-deficient design. R-squared uses the zero-variance convention:
/// when the target has (numerically) no variance the fit is exact and
/// r_squared is 1.
RegressionFit fit_linear(const std::vector<GridRow>& rows);
RegressionFit fit_poly2(const std::vector<GridRow>& rows);

double predict(const RegressionFit& fit, double users, double devices,
               double threshold);

/// E[max(0, n - R)] / E[n] for n uniform on [req_min, req_max], by exact
/// enumeration.
double analytic_benign_failed_fraction(int threshold, int req_min, int req_max);

/// max(0, 1 - D*R / (U * mean_req)): the acceptance-ceiling prediction.
double analytic_malicious_failed_fraction(double users, double devices,
                                          double threshold, double mean_req);

/// Grid CSV with header "users,devices,threshold,total,successful,failed".
/// read validates the header and that successful + failed = total.
void write_grid_csv(const std::vector<GridRow>& rows, const std::filesystem::path& path);
std::vector<GridRow> read_grid_csv(const std::filesystem::path& path);

/// Long-form heatmap slice at one threshold:
/// "users,devices,threshold,failed_fraction", one row per (U, D).
void write_heatmap_csv(const std::vector<GridRow>& rows, int threshold,
                       const std::filesystem::path& path);

/// "user_id,is_malicious,total_requests,first_error_index" (blank if none).
void write_first_errors_csv(const std::vector<FirstErrorRow>& rows,
                            const std::filesystem::path& path);

}  // namespace spare

#endif  // SPARE_ANALYTICS_HPP_
