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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spare/analytics.hpp"
#include "spare/errors.hpp"
#include "spare/sim.hpp"

using namespace spare;

namespace {

const std::filesystem::path kFixtures = SPARE_FIXTURE_DIR;

KeyMaterial demo_keys() {
  return KeyMaterial::from_hex("000102030405060708090a0b0c0d0e0f",
                               "101112131415161718191a1b1c1d1e1f");
}

SimulationRecord record(const std::string& user, const std::string& device,
                        std::int64_t at, int index, Reason reason, bool malicious) {
  SimulationRecord rec;
  rec.event.user_id = user;
  rec.event.device_id = device;
  rec.event.send_time = at;
  rec.event.request_index = index;
  rec.is_malicious = malicious;
  rec.verdict.reason = reason;
  return rec;
}

// Rows whose failed fraction is exactly (100 + U + 2D + 3T) / 10000, an
// affine function a perfect linear fit must recover. Three levels per
// factor keep the quadratic design full rank as well.
std::vector<GridRow> exact_affine_rows() {
  std::vector<GridRow> rows;
  for (int u : {10, 20, 30}) {
    for (int d : {10, 20, 30}) {
      for (int t : {10, 20, 30}) {
        GridRow r;
        r.users = u;
        r.devices = d;
        r.threshold = t;
        r.total = 10000;
        r.failed = 100 + u + 2 * d + 3 * t;
        r.successful = r.total - r.failed;
        rows.push_back(r);
      }
    }
  }
  return rows;
}

}  // namespace

TEST_CASE("summarize recounts a record stream") {
  std::vector<SimulationRecord> records;
  records.push_back(record("u1", "d1", 100, 1, Reason::Ok, false));
  records.push_back(record("u1", "d1", 200, 2, Reason::ThresholdExceeded, false));
  records.push_back(record("u2", "d2", 150, 1, Reason::Ok, false));
  records.push_back(record("u2", "d2", 250, 2, Reason::StaleToken, true));

  const SummaryCounts s = summarize(records);
  CHECK(s.total == 4);
  CHECK(s.accepted == 2);
  CHECK(s.rejected == 2);
  CHECK(s.failed_fraction == doctest::Approx(0.5));

  CHECK(summarize({}).total == 0);
  CHECK(summarize({}).failed_fraction == 0.0);
}

TEST_CASE("first error positions report the earliest reject per user") {
  std::vector<SimulationRecord> records;
  records.push_back(record("alice", "d1", 100, 1, Reason::Ok, false));
  records.push_back(record("alice", "d1", 200, 2, Reason::ThresholdExceeded, false));
  records.push_back(record("alice", "d1", 300, 3, Reason::DeviceBlocked, false));
  records.push_back(record("bob", "d2", 150, 1, Reason::Ok, false));
  records.push_back(record("carol", "d3", 120, 1, Reason::MissingToken, true));

  const auto rows = first_error_positions(records);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].user_id == "alice");
  CHECK(rows[0].total_requests == 3);
  CHECK(rows[0].first_error_index == 2);
  CHECK_FALSE(rows[0].is_malicious);
  CHECK(rows[1].user_id == "bob");
  CHECK_FALSE(rows[1].first_error_index.has_value());
  CHECK(rows[2].user_id == "carol");
  CHECK(rows[2].first_error_index == 1);
  CHECK(rows[2].is_malicious);
}

TEST_CASE("the published grid regression is reproduced to full precision") {
  const std::vector<GridRow> rows = read_grid_csv(kFixtures / "table3.csv");
  REQUIRE(rows.size() == 27);
  CHECK(rows.front().users == 100);
  CHECK(rows.front().total == 3524);
  CHECK(rows.back().failed == 9131);

  const RegressionFit linear = fit_linear(rows);
  REQUIRE(linear.coefficients.size() == 4);
  CHECK(linear.coefficients[0] == doctest::Approx(0.990568412199).epsilon(1e-6));
  CHECK(linear.coefficients[1] == doctest::Approx(0.000639855646).epsilon(1e-6));
  CHECK(linear.coefficients[2] == doctest::Approx(-0.005983839691).epsilon(1e-6));
  CHECK(linear.coefficients[3] == doctest::Approx(-0.003430378316).epsilon(1e-6));
  CHECK(linear.r_squared == doctest::Approx(0.875282437602).epsilon(1e-9));

  const RegressionFit poly = fit_poly2(rows);
  REQUIRE(poly.coefficients.size() == 10);
  CHECK(poly.coefficients[0] == doctest::Approx(1.02768531604).epsilon(1e-6));
  CHECK(poly.coefficients[4] == doctest::Approx(-3.09883423267e-06).epsilon(1e-5));
  CHECK(poly.coefficients[8] == doctest::Approx(-0.000166935331617).epsilon(1e-6));
  CHECK(poly.r_squared == doctest::Approx(0.992375973601).epsilon(1e-9));

  CHECK(poly.r_squared >= linear.r_squared);
}

TEST_CASE("fit residuals are orthogonal to the design") {
  const std::vector<GridRow> rows = read_grid_csv(kFixtures / "table3.csv");
  const RegressionFit fit = fit_linear(rows);

  double dot[4] = {0, 0, 0, 0};
  for (const GridRow& r : rows) {
    const double y = r.failed_fraction();
    const double hat = predict(fit, r.users, r.devices, r.threshold);
    const double resid = y - hat;
    dot[0] += resid;
    dot[1] += resid * r.users;
    dot[2] += resid * r.devices;
    dot[3] += resid * r.threshold;
  }
  // Columns reach magnitude 300 over 27 rows; 1e-8 is far below any real
  // violation and far above double noise.
  for (double v : dot) CHECK(std::abs(v) < 1e-8);
}

TEST_CASE("an exactly affine target is recovered exactly") {
  const std::vector<GridRow> rows = exact_affine_rows();
  const RegressionFit fit = fit_linear(rows);
  CHECK(fit.coefficients[0] == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(fit.coefficients[1] == doctest::Approx(1e-4).epsilon(1e-9));
  CHECK(fit.coefficients[2] == doctest::Approx(2e-4).epsilon(1e-9));
  CHECK(fit.coefficients[3] == doctest::Approx(3e-4).epsilon(1e-9));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  for (const GridRow& r : rows) {
    CHECK(predict(fit, r.users, r.devices, r.threshold) ==
          doctest::Approx(r.failed_fraction()).epsilon(1e-12));
  }

  // The quadratic model nests the linear one and is exact here too.
  CHECK(fit_poly2(rows).r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a constant target follows the zero-variance convention") {
  const int triples[][3] = {{10, 5, 31}, {10, 10, 7},  {20, 5, 15},
                            {20, 10, 29}, {30, 5, 3},  {30, 10, 23}};
  std::vector<GridRow> rows;
  for (const auto& t : triples) {
    GridRow r;
    r.users = t[0];
    r.devices = t[1];
    r.threshold = t[2];
    r.total = 100;
    r.failed = 25;
    r.successful = 75;
    rows.push_back(r);
  }
  const RegressionFit fit = fit_linear(rows);
  CHECK(fit.r_squared == 1.0);
  CHECK(fit.coefficients[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(fit.coefficients[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("degenerate designs are refused") {
  std::vector<GridRow> rows = exact_affine_rows();
  rows.resize(4);  // fewer rows than linear parameters plus one
  CHECK_THROWS_AS(fit_linear(rows), SingularDesign);

  // Only U varies: the D and T columns are multiples of the intercept.
  std::vector<GridRow> flat;
  for (int u : {10, 20, 30, 40, 50, 60}) {
    GridRow r;
    r.users = u;
    r.devices = 10;
    r.threshold = 30;
    r.total = 100;
    r.failed = u;
    r.successful = 100 - u;
    flat.push_back(r);
  }
  CHECK_THROWS_AS(fit_linear(flat), SingularDesign);
  CHECK_THROWS_AS(fit_poly2(flat), SingularDesign);

  // Nine parameters need more than nine rows.
  std::vector<GridRow> nine = exact_affine_rows();
  nine.resize(9);
  CHECK_THROWS_AS(fit_poly2(nine), SingularDesign);
}

TEST_CASE("closed-form benign failure fractions") {
  CHECK(analytic_benign_failed_fraction(30, 25, 45) ==
        doctest::Approx(0.163265306122).epsilon(1e-12));
  CHECK(analytic_benign_failed_fraction(35, 25, 45) ==
        doctest::Approx(0.074829931973).epsilon(1e-12));
  CHECK(analytic_benign_failed_fraction(40, 25, 45) ==
        doctest::Approx(0.020408163265).epsilon(1e-12));
  CHECK(analytic_benign_failed_fraction(45, 25, 45) == 0.0);
  CHECK(analytic_benign_failed_fraction(25, 25, 45) ==
        doctest::Approx(210.0 / 735.0).epsilon(1e-12));
  CHECK(analytic_benign_failed_fraction(24, 25, 45) ==
        doctest::Approx(231.0 / 735.0).epsilon(1e-12));
  CHECK(analytic_benign_failed_fraction(30, 40, 40) == doctest::Approx(0.25));

  for (int r = 25; r < 45; ++r) {
    CHECK(analytic_benign_failed_fraction(r, 25, 45) >
          analytic_benign_failed_fraction(r + 1, 25, 45));
  }
}

TEST_CASE("closed-form malicious failure fractions") {
  CHECK(analytic_malicious_failed_fraction(300, 10, 30, 35.0) ==
        doctest::Approx(0.971428571429).epsilon(1e-12));
  CHECK(analytic_malicious_failed_fraction(100, 30, 40, 35.0) ==
        doctest::Approx(0.657142857143).epsilon(1e-12));
  CHECK(analytic_malicious_failed_fraction(200, 20, 35, 35.0) ==
        doctest::Approx(0.9).epsilon(1e-12));
  // When the ceiling exceeds demand nobody has to fail.
  CHECK(analytic_malicious_failed_fraction(10, 30, 40, 35.0) == 0.0);
}

TEST_CASE("benign sweeps saturate and relax with the threshold") {
  Scenario base;
  base.name = "sweep_base";
  base.seed = 11;
  base.benign = WorkloadSpec{};
  base.benign->kind = WorkloadSpec::Kind::benign;
  base.benign->n_users = 10;
  base.firewall.keys = demo_keys();

  const std::vector<GridRow> rows = sweep_benign_grid({10}, {30, 45}, base);
  REQUIRE(rows.size() == 2);
  for (const GridRow& r : rows) {
    CHECK(r.users == 10);
    CHECK(r.devices == 10);
    CHECK(r.successful + r.failed == r.total);
  }
  CHECK(rows[0].threshold == 30);
  CHECK(rows[1].threshold == 45);
  CHECK(rows[1].failed == 0);
  CHECK(rows[0].failed >= rows[1].failed);
}

TEST_CASE("malicious sweeps respect the acceptance ceiling in every cell") {
  Scenario base;
  base.name = "sweep_attack";
  base.seed = 13;
  base.malicious = WorkloadSpec{};
  base.malicious->kind = WorkloadSpec::Kind::malicious;
  base.malicious->n_users = 10;
  base.malicious->n_devices = 2;
  base.adversary = AdversarySpec{};
  base.adversary->strategy = Strategy::round_robin;
  base.adversary->n_harvesters = 2;
  base.adversary->harvest_interval_seconds = 60;
  base.firewall.keys = demo_keys();

  const std::vector<GridRow> rows = sweep_grid({10}, {2}, {28, 40}, base);
  REQUIRE(rows.size() == 2);
  for (const GridRow& r : rows) {
    CHECK(r.successful == static_cast<std::int64_t>(r.devices) * r.threshold);
    CHECK(r.successful + r.failed == r.total);
  }

  // Sweeps are deterministic in the base seed.
  const std::vector<GridRow> again = sweep_grid({10}, {2}, {28, 40}, base);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].total == again[i].total);
    CHECK(rows[i].successful == again[i].successful);
  }
}

TEST_CASE("grid csv files round trip and are validated on read") {
  const auto path = std::filesystem::temp_directory_path() / "spare_grid.csv";
  const std::vector<GridRow> rows = exact_affine_rows();
  write_grid_csv(rows, path);

  const std::vector<GridRow> back = read_grid_csv(path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].users == rows[i].users);
    CHECK(back[i].devices == rows[i].devices);
    CHECK(back[i].threshold == rows[i].threshold);
    CHECK(back[i].total == rows[i].total);
    CHECK(back[i].successful == rows[i].successful);
    CHECK(back[i].failed == rows[i].failed);
  }

  SUBCASE("header mismatch") {
    std::ofstream(path) << "a,b,c,d,e,f\n1,2,3,4,5,6\n";
    CHECK_THROWS_AS(read_grid_csv(path), SchemaError);
  }
  SUBCASE("counts that do not add up") {
    std::ofstream(path) << "users,devices,threshold,total,successful,failed\n"
                        << "100,10,30,100,60,50\n";
    CHECK_THROWS_AS(read_grid_csv(path), SchemaError);
  }
  SUBCASE("non-numeric field") {
    std::ofstream(path) << "users,devices,threshold,total,successful,failed\n"
                        << "100,ten,30,100,60,40\n";
    CHECK_THROWS_AS(read_grid_csv(path), SchemaError);
  }
  SUBCASE("missing file") {
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_grid_csv(path), IoError);
  }
}

TEST_CASE("heatmap export slices one threshold in long form") {
  const auto path = std::filesystem::temp_directory_path() / "spare_heatmap.csv";
  write_heatmap_csv(exact_affine_rows(), 10, path);

  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "users,devices,threshold,failed_fraction");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(line.find(",10,") != std::string::npos);  // threshold column
  }
  CHECK(rows == 9);  // the 3x3 (U, D) cells at T=10
}

TEST_CASE("first error export writes blanks for clean users") {
  std::vector<SimulationRecord> records;
  records.push_back(record("alice", "d1", 100, 1, Reason::Ok, false));
  records.push_back(record("alice", "d1", 200, 2, Reason::ThresholdExceeded, false));
  records.push_back(record("bob", "d2", 150, 1, Reason::Ok, false));

  const auto path = std::filesystem::temp_directory_path() / "spare_first_errors.csv";
  write_first_errors_csv(first_error_positions(records), path);

  std::ifstream in(path);
  std::string header;
  std::string alice;
  std::string bob;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, alice));
  REQUIRE(std::getline(in, bob));
  CHECK(header == "user_id,is_malicious,total_requests,first_error_index");
  CHECK(alice == "alice,false,2,2");
  CHECK(bob == "bob,false,1,");
}

TEST_CASE("model names round trip") {
  CHECK(model_from_string("linear") == Model::linear);
  CHECK(model_from_string("poly2") == Model::poly2);
  CHECK(std::string(to_string(Model::linear)) == "linear");
  CHECK(std::string(to_string(Model::poly2)) == "poly2");
  CHECK_FALSE(model_from_string("cubic").has_value());
}
