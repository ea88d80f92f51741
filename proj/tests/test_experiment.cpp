// Copyright 2026 The rxopt Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "rxopt/error.hpp"
#include "rxopt/theory.hpp"
#include "rxopt/tools/experiment.hpp"

namespace rxopt::tools {
namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("rxopt_test_" + name);
  std::ofstream(path) << contents;
  return path;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_csv(rows, out);
  return out.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// ---- configuration ---------------------------------------------------------

TEST(ParseConfig, ExpandsGrids) {
  const ExperimentConfig c = parse(R"(# ridge sweep
mode = simulate
signal = fk
k = 0, 0.5
k = 1
sigma2 = 0.01
model = ols, ridge
lambda = 1, 10
seed = 42
num_runs = 100
n_train = 50
plan = kfold:4
)");
  EXPECT_EQ(c.mode, Mode::Simulate);
  ASSERT_EQ(c.signals.size(), 3u);
  EXPECT_EQ(c.signals[2].params, std::vector<double>{1.0});
  ASSERT_EQ(c.models.size(), 3u);
  EXPECT_FALSE(c.models[0].lambda.has_value());
  EXPECT_EQ(*c.models[2].lambda, 10.0);
  EXPECT_EQ(c.num_runs, 100);
  EXPECT_EQ(c.n_train, 50);
  EXPECT_EQ(*c.seed, 42u);
  ASSERT_TRUE(std::holds_alternative<KFold>(c.plan));
  EXPECT_EQ(std::get<KFold>(c.plan).k, 4);
}

TEST(ParseConfig, VectorValuedKeys) {
  const ExperimentConfig c = parse(R"(mode = theory
signal = poly, linear
coeffs = 0 0 0 1
coeffs = 1 0 1
beta = 1 1 1
design_cov_diag = 4 1 0.25
model = lowrank
rank = 1, 2
widths = 8 4
seed = 1
plan = holdout:0.3:nobootstrap
)");
  ASSERT_EQ(c.signals.size(), 3u);
  EXPECT_EQ(c.signals[1].params, (std::vector<double>{1, 0, 1}));
  EXPECT_EQ(c.signals[2].kind, "linear");
  EXPECT_EQ(c.design_cov_diag, (std::vector<double>{4, 1, 0.25}));
  ASSERT_EQ(c.models.size(), 2u);
  EXPECT_EQ(*c.models[1].rank, 2);
  EXPECT_EQ(c.widths, (std::vector<Eigen::Index>{8, 4}));
  const HoldOut& h = std::get<HoldOut>(c.plan);
  EXPECT_DOUBLE_EQ(h.test_fraction, 0.3);
  EXPECT_FALSE(h.bootstrap);
}

TEST(ParseConfig, RejectsMalformedInput) {
  EXPECT_EQ(kind_of([] { parse("mode simulate\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { parse("mode = sideways\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { parse("n_train = 5\nn_train = 6\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { parse("model = perceptron\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { parse("signal = fk\nk = 0,,1\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { parse("signal = fk\n"); }), ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { parse("plan = bootstrap\n"); }), ErrorKind::ConfigError);
}

TEST(ValidateConfig, RequiresSeedAndGrids) {
  ExperimentConfig c = parse("mode = simulate\nsignal = fk\nk = 0\nsigma2 = 0.1\nmodel = ols\n");
  EXPECT_EQ(kind_of([&] { validate_config(c); }), ErrorKind::ConfigError);
  c.seed = 3;
  EXPECT_NO_THROW(validate_config(c));
  c.models.clear();
  EXPECT_EQ(kind_of([&] { validate_config(c); }), ErrorKind::ConfigError);
}

// ---- dataset ingestion -----------------------------------------------------

TEST(LoadDatasetCsv, SmallFile) {
  const auto path = temp_file("small.csv", "x,y\n1,10\n2,20\n3,30\n");
  const Dataset d = load_dataset_csv(path.string(), "y");
  EXPECT_EQ(d.size(), 3);
  EXPECT_EQ(d.dimension(), 1);
  EXPECT_FALSE(d.noise_var.has_value());
  EXPECT_NEAR(d.x.col(0).mean(), 0.0, 1e-15);
  EXPECT_NEAR(d.x.col(0).squaredNorm() / 3.0, 1.0, 1e-14);
  EXPECT_EQ(d.y(2), 30.0);
  std::filesystem::remove(path);
}

TEST(LoadDatasetCsv, ErrorsNameTheirLocation) {
  const auto blank = temp_file("blank.csv", "a,b,y\n1,2,3\n4,,6\n");
  try {
    load_dataset_csv(blank.string(), "y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonNumericCell);
    const std::string msg = e.what();
    EXPECT_NE(msg.find('3'), std::string::npos) << msg;
    EXPECT_NE(msg.find('b'), std::string::npos) << msg;
  }
  const auto missing = temp_file("missing.csv", "a,b\n1,2\n");
  EXPECT_EQ(kind_of([&] { load_dataset_csv(missing.string(), "y"); }), ErrorKind::MissingColumn);
  const auto empty = temp_file("empty.csv", "");
  EXPECT_EQ(kind_of([&] { load_dataset_csv(empty.string(), "y"); }), ErrorKind::EmptyFile);
  for (const auto& p : {blank, missing, empty}) std::filesystem::remove(p);
}

TEST(LoadDatasetCsv, DiabetesShapeWhenAvailable) {
  const char* env = std::getenv("RXOPT_DIABETES_CSV");
  if (env == nullptr) GTEST_SKIP() << "set RXOPT_DIABETES_CSV to a local copy of the diabetes data";
  const Dataset d = load_dataset_csv(env, "target");
  EXPECT_EQ(d.size(), 442);
  EXPECT_EQ(d.dimension(), 10);
}

// ---- grid runner -----------------------------------------------------------

ExperimentConfig small_grid(Mode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.signals = {{"fk", {0.0}}, {"fk", {0.5}}, {"fk", {1.0}}};
  c.sigma2 = {0.05};
  c.models = {{"ols", std::nullopt, std::nullopt}, {"bended", std::nullopt, std::nullopt}};
  c.n_train = 100;
  c.n_test = 100;
  c.num_runs = 200;
  c.eval_budget = 20000;
  c.seed = 2024;
  return c;
}

TEST(RunGrid, SimulateNearLinearSignal) {
  ExperimentConfig c = small_grid(Mode::Simulate);
  c.signals = {{"fk", {0.5}}};
  c.sigma2 = {0.01};
  c.models = {{"ols", std::nullopt, std::nullopt}};
  c.n_train = 1000;
  c.n_test = 1000;
  c.num_runs = 2000;
  const auto rows = run_grid(c);
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_TRUE(rows[0].ok()) << rows[0].status;
  EXPECT_LE(std::abs(*rows[0].opt_scaled - 1.0), std::max(3.0 * *rows[0].stderr_, 0.05));
}

TEST(RunGrid, TheoryDelegatesToClosedForm) {
  ExperimentConfig c = small_grid(Mode::Theory);
  c.signals.clear();
  for (int i = 0; i <= 10; ++i) c.signals.push_back({"fk", {i / 10.0}});
  c.models = {{"ols", std::nullopt, std::nullopt}};
  const auto rows = run_grid(c);
  ASSERT_EQ(rows.size(), 11u);
  for (int i = 0; i <= 10; ++i) {
    ASSERT_TRUE(rows[static_cast<std::size_t>(i)].theory_value);
    const double want = fk_closed_form(i / 10.0, 0.05);
    EXPECT_NEAR(*rows[static_cast<std::size_t>(i)].theory_value, want, 1e-13 * want);
    EXPECT_FALSE(rows[static_cast<std::size_t>(i)].opt_raw.has_value());
  }
}

TEST(RunGrid, CompareAgreesWithTheory) {
  ExperimentConfig c = small_grid(Mode::Compare);
  c.signals = {{"fk", {0.25}}};
  c.models = {{"ols", std::nullopt, std::nullopt}};
  c.n_train = 1000;
  c.n_test = 1000;
  c.num_runs = 2000;
  const auto rows = run_grid(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(*rows[0].theory_value, 4.75);
  EXPECT_LE(std::abs(*rows[0].opt_scaled - 4.75), std::max(3.0 * *rows[0].stderr_, 0.05 * 4.75));
}

TEST(RunGrid, CellFailuresAreIsolated) {
  ExperimentConfig c = small_grid(Mode::Simulate);
  c.signals = {{"fk", {0.0}}};
  c.models = {{"ols", std::nullopt, std::nullopt}, {"lowrank", std::nullopt, Eigen::Index{3}}};
  const auto rows = run_grid(c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].ok());
  EXPECT_FALSE(rows[1].ok());
  EXPECT_EQ(rows[1].status.rfind("error", 0), 0u) << rows[1].status;
}

TEST(RunGrid, DeletingCellLeavesOthersUnchanged) {
  const ExperimentConfig full = small_grid(Mode::Simulate);
  ExperimentConfig reduced = full;
  reduced.signals.erase(reduced.signals.begin() + 1);
  const auto a = run_grid(full);
  const auto b = run_grid(reduced);
  ASSERT_EQ(a.size(), 6u);
  ASSERT_EQ(b.size(), 4u);
  const std::vector<std::pair<std::size_t, std::size_t>> same{{0, 0}, {1, 1}, {4, 2}, {5, 3}};
  for (auto [i, j] : same) EXPECT_EQ(to_csv({a[i]}), to_csv({b[j]}));
}

TEST(RunGrid, OutputIndependentOfThreads) {
  const ExperimentConfig c = small_grid(Mode::Compare);
  EXPECT_EQ(to_csv(run_grid(c, 1)), to_csv(run_grid(c, 4)));
}

TEST(RunGrid, RealDataRowsCarryPerSampleOptimism) {
  SeedStream rng(5, 0);
  std::ostringstream csv;
  csv << "x1,x2,y\n";
  for (int i = 0; i < 60; ++i) {
    const double a = rng.normal();
    const double b = rng.normal();
    csv << a << ',' << b << ',' << 2 * a - b + 0.3 * rng.normal() << '\n';
  }
  const auto path = temp_file("real.csv", csv.str());
  ExperimentConfig c;
  c.mode = Mode::RealData;
  c.dataset_path = path.string();
  c.models = {{"ols_intercept", std::nullopt, std::nullopt}};
  c.num_runs = 50;
  c.seed = 9;
  const auto rows = run_grid(c);
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_TRUE(rows[0].ok()) << rows[0].status;
  EXPECT_FALSE(rows[0].opt_scaled.has_value());
  EXPECT_NE(rows[0].k_or_coeffs.find("standardized"), std::string::npos);
  EXPECT_DOUBLE_EQ(*rows[0].opt_per_n, *rows[0].opt_raw / static_cast<double>(rows[0].n_train));
  std::filesystem::remove(path);
}

// ---- CSV -------------------------------------------------------------------

TEST(Csv, HeaderOnlyAndLineCount) {
  EXPECT_EQ(count_lines(to_csv({})), 1u);
  const auto rows = run_grid([] {
    ExperimentConfig c = small_grid(Mode::Theory);
    c.signals.resize(2);
    c.models.resize(1);
    return c;
  }());
  const std::string text = to_csv(rows);
  EXPECT_EQ(count_lines(text), 3u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Csv, RoundTripIsBitExact) {
  ResultRow r;
  r.mode = "simulate";
  r.signal_kind = "poly";
  r.k_or_coeffs = "0 1.5 -2";
  r.sigma2 = 0.1;
  r.model = "ridge";
  r.lambda = 1.0 / 3.0;
  r.n_train = 1000;
  r.num_runs = 2000;
  r.err_train_mean = std::nextafter(1.0, 2.0);
  r.err_test_mean = 5e-324;
  r.opt_raw = -0.1;
  r.opt_scaled = 1.2345678901234567e300;
  r.stderr_ = std::numeric_limits<double>::min();
  r.seed = std::numeric_limits<std::uint64_t>::max();
  ResultRow e;
  e.mode = "theory";
  e.signal_kind = "fk";
  e.k_or_coeffs = "0.5";
  e.model = "mlp";
  e.status = "error: something failed";
  const std::string text = to_csv({r, e});
  std::istringstream in(text);
  const auto back = read_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(to_csv(back), text);
  EXPECT_EQ(*back[0].lambda, 1.0 / 3.0);
  EXPECT_EQ(*back[0].err_test_mean, 5e-324);
  EXPECT_EQ(*back[0].opt_scaled, 1.2345678901234567e300);
  EXPECT_EQ(back[0].seed, std::numeric_limits<std::uint64_t>::max());
  EXPECT_FALSE(back[1].sigma2.has_value());
  EXPECT_EQ(back[1].status, e.status);
}

TEST(Csv, EmitFailsOnUnwritablePath) {
  EXPECT_EQ(kind_of([] { emit_csv({}, "/nonexistent-dir/out.csv"); }), ErrorKind::IoFailure);
}

// ---- summary ---------------------------------------------------------------

ResultRow summary_row(double k, double lambda, double value) {
  ResultRow r;
  r.mode = "simulate";
  r.signal_kind = "fk";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", k);
  r.k_or_coeffs = buf;
  r.sigma2 = 0.01;
  r.model = "ridge";
  r.lambda = lambda;
  r.opt_scaled = value;
  return r;
}

TEST(ReportSummary, PivotShape) {
  std::vector<ResultRow> rows;
  for (double k : {0.0, 0.5, 1.0})
    for (double l : {0.0, 1.0}) rows.push_back(summary_row(k, l, k + l));
  const std::string table = report_summary(rows);
  EXPECT_EQ(count_lines(table), 4u);
  std::istringstream in(table);
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("lambda=0"), std::string::npos);
  EXPECT_NE(header.find("lambda=1"), std::string::npos);
}

TEST(ReportSummary, SingleCell) {
  const std::string table = report_summary({summary_row(0.5, 0.0, 0.021075)});
  EXPECT_EQ(count_lines(table), 2u);
  EXPECT_NE(table.find("0.021075"), std::string::npos);
}

TEST(ReportSummary, MixedModes) {
  ResultRow a = summary_row(0, 0, 1);
  ResultRow b = a;
  b.mode = "theory";
  EXPECT_EQ(kind_of([&] { report_summary({a, b}); }), ErrorKind::MixedModes);
}

}  // namespace
}  // namespace rxopt::tools
