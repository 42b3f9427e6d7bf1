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

#include "spare/analytics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include "spare/errors.hpp"
#include "spare/rng.hpp"

namespace spare {

namespace {

constexpr char kGridHeader[] = "users,devices,threshold,total,successful,failed";

// Treat the target as constant when its variance is at rounding-noise scale
// relative to its magnitude.
constexpr double kZeroVarianceTol = 1e-12;

std::uint64_t cell_seed(std::uint64_t base, int u, int d, int r) {
  std::uint64_t s = SplitMix64::mix(base, static_cast<std::uint64_t>(u));
  s = SplitMix64::mix(s, static_cast<std::uint64_t>(d));
  return SplitMix64::mix(s, static_cast<std::uint64_t>(r));
}

void fill_design_row(Eigen::MatrixXd& x, Eigen::Index i, Model model, double u,
                     double d, double t) {
  x(i, 0) = 1.0;
  x(i, 1) = u;
  x(i, 2) = d;
  x(i, 3) = t;
  if (model == Model::poly2) {
    x(i, 4) = u * u;
    x(i, 5) = u * d;
    x(i, 6) = u * t;
    x(i, 7) = d * d;
    x(i, 8) = d * t;
    x(i, 9) = t * t;
  }
}

RegressionFit fit_model(const std::vector<GridRow>& rows, Model model) {
  const Eigen::Index k = model == Model::linear ? 4 : 10;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n < 5) throw SingularDesign("regression needs at least 5 rows");

  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const GridRow& row = rows[static_cast<std::size_t>(i)];
    fill_design_row(x, i, model, row.users, row.devices, row.threshold);
    y(i) = row.failed_fraction();
  }

  auto qr = x.colPivHouseholderQr();
  if (qr.rank() < k) throw SingularDesign("design matrix is rank deficient");
  Eigen::VectorXd beta = qr.solve(y);

  const double ss_res = (y - x * beta).squaredNorm();
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).matrix().squaredNorm();

  RegressionFit fit;
  fit.model = model;
  fit.coefficients.assign(beta.data(), beta.data() + k);
  if (ss_tot <= kZeroVarianceTol * std::max(1.0, y.squaredNorm())) {
    fit.r_squared = 1.0;
  } else {
    fit.r_squared = 1.0 - ss_res / ss_tot;
  }
  return fit;
}

std::int64_t parse_int_cell(std::string_view s, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SchemaError(std::string("grid field is not an integer: ") + what);
  }
  return v;
}

}  // namespace

SummaryCounts summarize(const std::vector<SimulationRecord>& records) {
  SummaryCounts s;
  s.total = static_cast<std::int64_t>(records.size());
  for (const SimulationRecord& rec : records) {
    if (rec.verdict.accepted()) {
      s.accepted += 1;
    } else {
      s.rejected += 1;
    }
  }
  s.failed_fraction =
      s.total > 0 ? static_cast<double>(s.rejected) / static_cast<double>(s.total) : 0.0;
  return s;
}

std::vector<FirstErrorRow> first_error_positions(
    const std::vector<SimulationRecord>& records) {
  std::map<std::string, FirstErrorRow> by_user;
  for (const SimulationRecord& rec : records) {
    auto [it, inserted] = by_user.try_emplace(rec.event.user_id);
    FirstErrorRow& row = it->second;
    if (inserted) {
      row.user_id = rec.event.user_id;
      row.is_malicious = rec.is_malicious;
    }
    row.total_requests += 1;
    if (!rec.verdict.accepted() &&
        (!row.first_error_index || rec.event.request_index < *row.first_error_index)) {
      row.first_error_index = rec.event.request_index;
    }
  }
  std::vector<FirstErrorRow> out;
  out.reserve(by_user.size());
  for (auto& [id, row] : by_user) out.push_back(std::move(row));
  return out;
}

std::vector<GridRow> sweep_grid(const std::vector<int>& users_set,
                                const std::vector<int>& devices_set,
                                const std::vector<int>& thresholds_set,
                                const Scenario& base) {
  if (users_set.empty() || devices_set.empty() || thresholds_set.empty()) {
    throw ConfigError("sweep sets must be non-empty");
  }
  if (!base.malicious) {
    throw ConfigError("malicious sweep needs a scenario with a malicious workload");
  }
  std::vector<GridRow> rows;
  rows.reserve(users_set.size() * devices_set.size() * thresholds_set.size());
  for (int u : users_set) {
    for (int d : devices_set) {
      for (int r : thresholds_set) {
        Scenario cell = base;
        cell.seed = cell_seed(base.seed, u, d, r);
        cell.malicious->n_users = u;
        cell.malicious->n_devices = d;
        if (cell.adversary) cell.adversary->n_harvesters = d;
        cell.firewall.daily_threshold = r;
        SimulationResult res = run_scenario(cell);
        rows.push_back(GridRow{u, d, r, res.report.requests, res.report.accepted,
                               res.report.rejected});
      }
    }
  }
  return rows;
}

std::vector<GridRow> sweep_benign_grid(const std::vector<int>& users_set,
                                       const std::vector<int>& thresholds_set,
                                       const Scenario& base) {
  if (users_set.empty() || thresholds_set.empty()) {
    throw ConfigError("sweep sets must be non-empty");
  }
  if (!base.benign) {
    throw ConfigError("benign sweep needs a scenario with a benign workload");
  }
  std::vector<GridRow> rows;
  rows.reserve(users_set.size() * thresholds_set.size());
  for (int u : users_set) {
    for (int r : thresholds_set) {
      Scenario cell = base;
      cell.seed = cell_seed(base.seed, u, 0, r);
      cell.benign->n_users = u;
      cell.firewall.daily_threshold = r;
      SimulationResult res = run_scenario(cell);
      rows.push_back(
          GridRow{u, u, r, res.report.requests, res.report.accepted, res.report.rejected});
    }
  }
  return rows;
}

const char* to_string(Model m) { return m == Model::linear ? "linear" : "poly2"; }

std::optional<Model> model_from_string(std::string_view name) {
  if (name == "linear") return Model::linear;
  if (name == "poly2") return Model::poly2;
  return std::nullopt;
}

RegressionFit fit_linear(const std::vector<GridRow>& rows) {
  return fit_model(rows, Model::linear);
}

RegressionFit fit_poly2(const std::vector<GridRow>& rows) {
  return fit_model(rows, Model::poly2);
}

double predict(const RegressionFit& fit, double users, double devices,
               double threshold) {
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(fit.coefficients.size()));
  fill_design_row(x, 0, fit.model, users, devices, threshold);
  double out = 0.0;
  for (std::size_t i = 0; i < fit.coefficients.size(); ++i) {
    out += fit.coefficients[i] * x(0, static_cast<Eigen::Index>(i));
  }
  return out;
}

double analytic_benign_failed_fraction(int threshold, int req_min, int req_max) {
  std::int64_t overflow = 0;
  std::int64_t demand = 0;
  for (int n = req_min; n <= req_max; ++n) {
    overflow += std::max(0, n - threshold);
    demand += n;
  }
  return demand > 0 ? static_cast<double>(overflow) / static_cast<double>(demand) : 0.0;
}

double analytic_malicious_failed_fraction(double users, double devices,
                                          double threshold, double mean_req) {
  double demand = users * mean_req;
  if (demand <= 0.0) return 0.0;
  return std::max(0.0, 1.0 - devices * threshold / demand);
}

void write_grid_csv(const std::vector<GridRow>& rows,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open grid file for writing: " + path.string());
  out << kGridHeader << '\n';
  for (const GridRow& row : rows) {
    out << row.users << ',' << row.devices << ',' << row.threshold << ',' << row.total
        << ',' << row.successful << ',' << row.failed << '\n';
  }
  if (!out.flush()) throw IoError("failed writing grid file: " + path.string());
}

std::vector<GridRow> read_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open grid file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kGridHeader) {
    throw SchemaError("grid header mismatch in " + path.string());
  }
  std::vector<GridRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      std::size_t comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (fields.size() != 6) {
      throw SchemaError("grid row does not have 6 fields in " + path.string());
    }
    GridRow row;
    row.users = static_cast<int>(parse_int_cell(fields[0], "users"));
    row.devices = static_cast<int>(parse_int_cell(fields[1], "devices"));
    row.threshold = static_cast<int>(parse_int_cell(fields[2], "threshold"));
    row.total = parse_int_cell(fields[3], "total");
    row.successful = parse_int_cell(fields[4], "successful");
    row.failed = parse_int_cell(fields[5], "failed");
    if (row.successful + row.failed != row.total) {
      throw SchemaError("grid row violates successful + failed = total");
    }
    rows.push_back(row);
  }
  return rows;
}

void write_heatmap_csv(const std::vector<GridRow>& rows, int threshold,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open heatmap file for writing: " + path.string());
  out << "users,devices,threshold,failed_fraction\n";
  char buf[32];
  for (const GridRow& row : rows) {
    if (row.threshold != threshold) continue;
    std::snprintf(buf, sizeof(buf), "%.6f", row.failed_fraction());
    out << row.users << ',' << row.devices << ',' << row.threshold << ',' << buf << '\n';
  }
  if (!out.flush()) throw IoError("failed writing heatmap file: " + path.string());
}

void write_first_errors_csv(const std::vector<FirstErrorRow>& rows,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open first-error file for writing: " + path.string());
  out << "user_id,is_malicious,total_requests,first_error_index\n";
  for (const FirstErrorRow& row : rows) {
    out << row.user_id << ',' << (row.is_malicious ? "true" : "false") << ','
        << row.total_requests << ',';
    if (row.first_error_index) out << *row.first_error_index;
    out << '\n';
  }
  if (!out.flush()) throw IoError("failed writing first-error file: " + path.string());
}

}  // namespace spare
