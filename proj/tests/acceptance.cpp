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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and seeds are
// fixed below; run with --criterion N to evaluate a single criterion.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"
#include "rxopt/error.hpp"
#include "rxopt/estimators.hpp"
#include "rxopt/models.hpp"
#include "rxopt/theory.hpp"
#include "rxopt/tools/experiment.hpp"

namespace {

using namespace rxopt;
using rxopt::tools::ExperimentConfig;
using rxopt::tools::ModelEntry;
using rxopt::tools::ResultRow;

constexpr std::uint64_t kSeed = 20240917;
constexpr double kSigmaBand = 3.0;           // multiples of the reported standard error
constexpr double kRelativeBand = 0.05;       // criterion 1 relative floor
constexpr double kIdentityTol = 1e-12;       // criterion 4
constexpr double kReductionTol = 1e-10;      // criterion 5
constexpr double kDecaySpread = 3.0;         // criterion 6
constexpr double kLinearRowCeiling = 0.1;    // criterion 8
constexpr double kGradientTol = 1e-4;        // criterion 9
constexpr double kRealizableMse = 1e-2;      // criterion 9
constexpr double kPsdTol = 1e-8;             // criterion 9
constexpr Eigen::Index kRuns = 2000;
constexpr Eigen::Index kBudget = 200000;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    details.push_back((ok ? "ok    " : "FAIL  ") + what);
  }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

unsigned g_threads = 1;

// ---- shared grids ----------------------------------------------------------

ExperimentConfig fk_grid(const std::vector<ModelEntry>& models) {
  ExperimentConfig c;
  c.mode = rxopt::tools::Mode::Compare;
  for (int i = 0; i <= 10; ++i) c.signals.push_back({"fk", {i / 10.0}});
  c.sigma2 = {0.01, 0.05, 0.1};
  c.models = models;
  c.n_train = 1000;
  c.n_test = 1000;
  c.num_runs = kRuns;
  c.eval_budget = kBudget;
  c.seed = kSeed;
  return c;
}

ExperimentConfig criterion1_config() { return fk_grid({{"ols", std::nullopt, std::nullopt}}); }

ExperimentConfig criterion8_config() {
  ExperimentConfig c;
  c.mode = rxopt::tools::Mode::Simulate;
  for (double k : {0.0, 0.25, 0.5, 0.75, 1.0}) c.signals.push_back({"fk", {k}});
  c.sigma2 = {0.01};
  for (double l : {0.0, 1.0, 10.0}) c.models.push_back({"ridge", l, std::nullopt});
  c.n_train = 1000;
  c.n_test = 1000;
  c.num_runs = kRuns;
  c.seed = kSeed;
  return c;
}

std::string csv_of(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  rxopt::tools::write_csv(rows, out);
  return out.str();
}

bool all_ok(Outcome& o, const std::vector<ResultRow>& rows) {
  for (const auto& r : rows) {
    if (!r.ok()) {
      o.check(false, r.signal_kind + " " + r.k_or_coeffs + " " + r.model + ": " + r.status);
      return false;
    }
  }
  return true;
}

// ---- criteria --------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const auto rows = rxopt::tools::run_grid(criterion1_config(), g_threads);
  if (!all_ok(o, rows)) return o;
  for (const auto& r : rows) {
    const double theory = fk_closed_form(std::stod(r.k_or_coeffs), *r.sigma2);
    const double tol = std::max(kSigmaBand * *r.stderr_, kRelativeBand * std::max(theory, 1.0));
    o.check(std::abs(*r.opt_scaled - theory) <= tol,
            fmt("k=%s sigma2=%g: mc %.4f +- %.4f vs closed form %.4f (tol %.4f)", r.k_or_coeffs.c_str(),
                *r.sigma2, *r.opt_scaled, *r.stderr_, theory, tol));
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  for (Eigen::Index d : {1, 3, 5}) {
    const SignalSpec s = SignalSpec::linear_map(Vector::Ones(d), 0.1);
    const OptimismEstimate e = mc_optimism(s, DesignSpec::standard(d), Ols{false}, 2000, 2000, kRuns,
                                           mix_seed(kSeed, static_cast<std::uint64_t>(d)), g_threads);
    const double se = scale_optimism(e.stderr_opt, e.n_train, 0.1);
    o.check(std::abs(*e.opt_scaled - static_cast<double>(d)) <= kSigmaBand * se,
            fmt("d=%ld: mc %.4f +- %.4f", static_cast<long>(d), *e.opt_scaled, se));
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto rows = rxopt::tools::run_grid(
      fk_grid({{"ols", std::nullopt, std::nullopt}, {"bended", std::nullopt, std::nullopt}}), g_threads);
  if (!all_ok(o, rows)) return o;
  int worst_index = -1;
  double worst_z = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double raw_se = r.stderr_.value() * 2.0 * *r.sigma2 / static_cast<double>(r.n_train);
    const double z = *r.opt_raw / raw_se;
    if (*r.opt_raw < -kSigmaBand * raw_se) ++violations;
    if (z < worst_z) {
      worst_z = z;
      worst_index = static_cast<int>(i);
    }
  }
  o.check(violations == 0, fmt("%d of %zu cells below -3 stderr", violations, rows.size()));
  const auto& w = rows[static_cast<std::size_t>(worst_index)];
  o.details.push_back(fmt("      smallest opt_raw/stderr %.2f at k=%s sigma2=%g model=%s", worst_z,
                          w.k_or_coeffs.c_str(), *w.sigma2, w.model.c_str()));
  return o;
}

Outcome criterion4() {
  Outcome o;
  double worst = 0.0;
  for (int a0 = -1; a0 <= 1; ++a0)
    for (int a1 = -1; a1 <= 1; ++a1)
      for (int a2 = -1; a2 <= 1; ++a2)
        for (int a3 = -1; a3 <= 1; ++a3) {
          const double c = cor5_quadratic_form({double(a0), double(a1), double(a2), double(a3)}, 1.0);
          const double p = poly_closed_form(a0, a1, a2, a3, 1.0);
          worst = std::max(worst, std::abs(c - p));
        }
  o.check(worst <= kIdentityTol, fmt("81-point grid: max |cor5 - poly| = %.3g", worst));

  double spread = 0.0;
  const double base = cor5_quadratic_form({0.7, 0.0, -0.4, 0.9}, 1.0);
  for (double t : {-100.0, -3.0, -1.0, 0.5, 2.0, 50.0}) {
    spread = std::max(spread, std::abs(cor5_quadratic_form({0.7, t, -0.4, 0.9}, 1.0) - base));
  }
  o.check(spread <= kIdentityTol, fmt("linear-coefficient invariance: max deviation %.3g", spread));

  const SignalSpec cube = SignalSpec::polynomial({0, 0, 0, 1}, 1.0);
  const Moments1d m = moments_1d(cube);
  const double closed = cor4_scaled_1d(m.m1, m.m2, m.m3, 1.0);
  o.check(std::abs(closed - 43.0) <= kIdentityTol * 43.0, fmt("z^3 closed form %.15g", closed));

  const OptimismEstimate e =
      mc_optimism(cube, DesignSpec::standard(1), Ols{false}, 1000, 1000, kRuns, mix_seed(kSeed, 4), g_threads);
  const double se = scale_optimism(e.stderr_opt, e.n_train, 1.0);
  o.check(std::abs(*e.opt_scaled - 43.0) <= kSigmaBand * se, fmt("z^3 mc %.3f +- %.3f vs 43", *e.opt_scaled, se));
  return o;
}

Outcome criterion5() {
  Outcome o;
  SeedStream rng(mix_seed(kSeed, 5), 0);
  Matrix cov(3, 3);
  cov << 2.0, 0.4, 0.1, 0.4, 1.0, -0.2, 0.1, -0.2, 0.6;
  const DesignSpec design = DesignSpec::gaussian(cov);
  const std::vector<SignalSpec> signals{SignalSpec::linear_map((Vector(3) << 1, -0.5, 2).finished(), 0.2),
                                        SignalSpec::piecewise_k(0.2, 0.05)};
  for (const auto& s : signals) {
    const DesignSpec d = s.input_dimension() == 1 ? DesignSpec::standard(1) : design;
    const PopulationMoments pm = population_moments(s, d, preferred_method(s), kBudget, rng);
    const EvalSample sample = s.input_dimension() == 1 ? quadrature_sample(s, d)
                                                       : monte_carlo_sample(s, d, 50000, rng);
    const double t1 = thm1_optimism(pm, 500, sample).raw_optimism;
    const double t3 = thm3_ridge_optimism(pm, 0.0, 500, sample).raw_optimism;
    const double t2 = thm2_lowrank_bound(pm, pm.dimension(), 500, sample).raw_optimism;
    o.check(std::abs(t3 - t1) <= kReductionTol * std::abs(t1),
            fmt("%s: thm3(lambda=0) %.15g vs thm1 %.15g", s.kind().c_str(), t3, t1));
    o.check(std::abs(t2 - t1) <= kReductionTol * std::abs(t1),
            fmt("%s: thm2(k=d) %.15g vs thm1 %.15g", s.kind().c_str(), t2, t1));
    for (double lambda : {0.0, 0.5, 5.0}) {
      const double r3 = thm3_ridge_optimism(pm, lambda, 500, sample).raw_optimism;
      const double r4 = thm4_kernel_optimism(FeatureMoments{pm.sigma, pm.eta, 0.0},
                                             design_features(pm.design, sample.x), sample, lambda, 500,
                                             s.noise_var())
                            .raw_optimism;
      o.check(std::abs(r4 - r3) <= kReductionTol * std::abs(r3),
              fmt("%s: thm4(identity, lambda=%g) %.15g vs thm3 %.15g", s.kind().c_str(), lambda, r4, r3));
    }
  }
  const Dataset data = sample_dataset(signals[0], design, 200, rng);
  const Vector ridge = std::get<LinearFit>(fit_ridge(data, 0.0).payload).coef;
  const Vector ols = std::get<LinearFit>(fit_ols(data).payload).coef;
  const double diff = (ridge - ols).cwiseAbs().maxCoeff();
  o.check(diff <= kReductionTol, fmt("fit_ridge(lambda=0) vs fit_ols: max coefficient gap %.3g", diff));
  return o;
}

Outcome criterion6() {
  Outcome o;
  const SignalSpec s = SignalSpec::piecewise_k(0.0, 0.01);
  SeedStream rng(mix_seed(kSeed, 6), 0);
  const PopulationMoments pm = population_moments(s, DesignSpec::standard(1), EvalMethod::Quadrature, kBudget, rng);
  const EvalSample q = quadrature_sample(s, DesignSpec::standard(1));
  std::vector<double> values;
  std::vector<double> products;
  for (double lambda : {1e2, 1e3, 1e4}) {
    values.push_back(thm3_ridge_optimism(pm, lambda, 1000, q).raw_optimism);
    products.push_back(values.back() * lambda);
    o.details.push_back(fmt("      lambda=%g: value %.6g, lambda*value %.6g", lambda, values.back(), products.back()));
  }
  o.check(std::all_of(values.begin(), values.end(), [](double v) { return v > 0.0; }), "all values positive");
  o.check(values[0] > values[1] && values[1] > values[2], "strictly decreasing in lambda");
  const auto [lo, hi] = std::minmax_element(products.begin(), products.end());
  o.check(*hi / *lo < kDecaySpread, fmt("lambda*value spread factor %.4f", *hi / *lo));
  return o;
}

Outcome criterion7() {
  Outcome o;
  Matrix cov = Matrix::Zero(3, 3);
  cov.diagonal() << 4.0, 1.0, 0.25;
  const DesignSpec design = DesignSpec::gaussian(cov);
  const SignalSpec s = SignalSpec::linear_map(Vector::Ones(3), 0.1);
  SeedStream rng(mix_seed(kSeed, 7), 0);
  const PopulationMoments pm = population_moments(s, design, EvalMethod::InnerMc, kBudget, rng);
  for (Eigen::Index k : {1, 2}) {
    const OptimismEstimate e =
        mc_optimism(s, design, LowRank{k}, 1000, 1000, kRuns, mix_seed(kSeed, 70 + static_cast<std::uint64_t>(k)),
                    g_threads);
    const TheoryValue bound = thm2_lowrank_bound(pm, k, 1000, kBudget, rng);
    const double combined = std::hypot(e.stderr_opt, bound.eval_stderr);
    o.check(e.opt_raw <= bound.raw_optimism + kSigmaBand * combined,
            fmt("k=%ld: mc %.6g +- %.2g <= bound %.6g +- %.2g", static_cast<long>(k), e.opt_raw, e.stderr_opt,
                bound.raw_optimism, bound.eval_stderr));
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto rows = rxopt::tools::run_grid(criterion8_config(), g_threads);
  if (!all_ok(o, rows)) return o;
  std::map<std::string, std::vector<const ResultRow*>> by_k;
  for (const auto& r : rows) by_k[r.k_or_coeffs].push_back(&r);
  for (const auto& [k, cells] : by_k) {
    std::string line = "      k=" + k + ":";
    for (const auto* c : cells) line += fmt(" lambda=%g %.4g +- %.2g;", *c->lambda, *c->opt_scaled, *c->stderr_);
    o.details.push_back(line);
  }
  for (const auto* c : by_k.at("0.5")) {
    o.check(*c->opt_scaled < kLinearRowCeiling,
            fmt("k=0.5 lambda=%g: %.4g < %.1f", *c->lambda, *c->opt_scaled, kLinearRowCeiling));
  }
  const auto& row1 = by_k.at("1");
  const double v0 = *row1[0]->opt_scaled;
  const double v1 = *row1[1]->opt_scaled;
  const double v10 = *row1[2]->opt_scaled;
  o.check(std::abs(v0 - 1.0) <= std::max(kSigmaBand * *row1[0]->stderr_, kRelativeBand),
          fmt("k=1 lambda=0: %.4g near 1", v0));
  o.check(v1 > v0 && v1 > v10, fmt("k=1 row peaks at lambda=1 (%.4g, %.4g, %.4g)", v0, v1, v10));
  return o;
}

Outcome criterion9() {
  Outcome o;
  SeedStream rng(mix_seed(kSeed, 9), 0);

  Matrix x5(5, 2);
  Vector y5(5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    x5(i, 0) = rng.normal();
    x5(i, 1) = rng.normal();
    y5(i) = rng.normal();
  }
  MlpParams p = mlp_init(2, {50, 50}, rng);
  for (auto& b : p.biases) b.setConstant(0.01);
  const Vector grad = mlp_gradient(p, x5, y5);
  const Vector flat = p.flatten();
  double worst = 0.0;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    MlpParams pp = p;
    MlpParams pm = p;
    Vector plus = flat;
    Vector minus = flat;
    plus(i) += h;
    minus(i) -= h;
    pp.assign(plus);
    pm.assign(minus);
    const double fd = (mlp_loss(pp, x5, y5) - mlp_loss(pm, x5, y5)) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad(i)) / std::max(1.0, std::abs(fd)));
  }
  o.check(worst <= kGradientTol, fmt("MLP gradient vs central differences over %ld parameters: max rel err %.3g",
                                     static_cast<long>(flat.size()), worst));

  const Dataset line = sample_dataset(SignalSpec::polynomial({0, 2}, 0.0), DesignSpec::standard(1), 100, rng);
  Mlp spec;
  spec.epochs = 2000;
  const FittedModel net = fit_mlp(line, spec, rng);
  const double train_mse = mse(net, line);
  o.check(train_mse < kRealizableMse, fmt("MLP on noiseless y=2x after 2000 Adam epochs: mse %.3g", train_mse));

  const NtkKernel kernel = random_ntk_kernel(3, 50, rng);
  const Dataset pts = sample_dataset(SignalSpec::linear_map(Vector::Ones(3), 0.0), DesignSpec::standard(3), 100, rng);
  const Matrix gram = kernel_matrix(kernel, pts.x, pts.x);
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().minCoeff();
  o.check(min_eig >= -kPsdTol * gram.trace(),
          fmt("NTK Gram on 100 points: min eigenvalue %.3g, trace %.3g", min_eig, gram.trace()));

  const double noise = 1.0;
  const Dataset data =
      sample_dataset(SignalSpec::piecewise_k(0.2, noise), DesignSpec::standard(1), 400, rng);
  const Eigen::Index runs = 200;
  const OptimismEstimate hold =
      holdout_optimism(data, Ols{true}, HoldOut{0.2, runs, true}, mix_seed(kSeed, 90), g_threads);
  o.check(hold.opt_raw >= -kSigmaBand * hold.stderr_opt,
          fmt("hold-out: scaled %.3f +- %.3f", *hold.opt_scaled, scale_optimism(hold.stderr_opt, hold.n_train, noise)));
  for (Eigen::Index k : {2, 4}) {
    const OptimismEstimate kf =
        kfold_optimism(data, Ols{true}, KFold{k, runs}, mix_seed(kSeed, 90 + static_cast<std::uint64_t>(k)), g_threads);
    const double se_h = scale_optimism(hold.stderr_opt, hold.n_train, noise);
    const double se_k = scale_optimism(kf.stderr_opt, kf.n_train, noise);
    o.check(kf.opt_raw >= -kSigmaBand * kf.stderr_opt,
            fmt("%ld-fold: scaled %.3f +- %.3f", static_cast<long>(k), *kf.opt_scaled, se_k));
    o.check(std::abs(*hold.opt_scaled - *kf.opt_scaled) <= kSigmaBand * std::hypot(se_h, se_k),
            fmt("hold-out vs %ld-fold scaled gap %.3f (tol %.3f)", static_cast<long>(k),
                std::abs(*hold.opt_scaled - *kf.opt_scaled), kSigmaBand * std::hypot(se_h, se_k)));
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  const std::pair<const char*, ExperimentConfig> grids[] = {{"criterion 1 grid", criterion1_config()},
                                                            {"criterion 8 grid", criterion8_config()}};
  for (const auto& [name, cfg] : grids) {
    const std::string serial = csv_of(rxopt::tools::run_grid(cfg, 1));
    const std::string parallel = csv_of(rxopt::tools::run_grid(cfg, 8));
    const std::string again = csv_of(rxopt::tools::run_grid(cfg, 1));
    o.check(serial == parallel && serial == again,
            fmt("%s: %zu bytes, 1 vs 8 threads %s, repeat %s", name, serial.size(),
                serial == parallel ? "identical" : "DIFFER", serial == again ? "identical" : "DIFFER"));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the rxopt library"};
  std::vector<int> selected;
  bool verbose = true;
  app.add_option("--criterion,-c", selected, "Criterion number(s) to run (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--threads", g_threads, "Worker threads for Monte-Carlo runs");
  app.add_flag("!--quiet", verbose, "Print only the PASS/FAIL lines");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10};
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
  }
  int failed = 0;
  for (int id : selected) {
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %d: %s\n", id, o.pass ? "PASS" : "FAIL");
    if (verbose || !o.pass) {
      for (const auto& d : o.details) std::printf("  %s\n", d.c_str());
    }
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
