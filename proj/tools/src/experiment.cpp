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

#include "rxopt/tools/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rxopt/error.hpp"
#include "rxopt/theory.hpp"

namespace rxopt::tools {
namespace {

constexpr std::uint64_t kTheoryStreamTag = 0x7468656f7279ULL;
constexpr std::uint64_t kKernelStreamTag = 0x6b65726e656cULL;

const std::vector<std::string> kLambdaFamilies{"ridge", "ridge_intercept", "krr_linear", "krr_ntk",
                                               "ntk_layerwise"};
const std::vector<std::string> kFamilies{"ols",        "ols_intercept", "ridge",   "ridge_intercept",
                                         "bended",     "lowrank",       "krr_linear", "krr_ntk",
                                         "mlp",        "ntk_layerwise", "mean"};

[[noreturn]] void config_error(std::size_t line, const std::string& what) {
  fail(ErrorKind::ConfigError, (line ? "line " + std::to_string(line) + ": " : std::string()) + what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

double parse_real(const std::string& s, std::size_t line) {
  const auto v = to_double(s);
  if (!v) config_error(line, "expected a number, got '" + s + "'");
  return *v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) config_error(line, "expected an unsigned integer, got '" + s + "'");
  return v;
}

Eigen::Index parse_count(const std::string& s, std::size_t line) {
  const std::uint64_t v = parse_u64(s, line);
  if (v < 1) config_error(line, "expected a positive integer");
  return static_cast<Eigen::Index>(v);
}

std::vector<double> parse_reals(const std::vector<std::string>& items, std::size_t line) {
  std::vector<double> out;
  for (const auto& item : items) out.push_back(parse_real(item, line));
  return out;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest %g form that round-trips; used in labels and cell keys.
std::string short_real(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string join_reals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += short_real(values[i]);
  }
  return out;
}

bool contains(const std::vector<std::string>& list, const std::string& s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

struct RawConfig {
  std::vector<std::pair<std::string, std::size_t>> signal_kinds;
  std::vector<double> ks;
  std::vector<std::vector<double>> coeffs;
  std::vector<std::vector<double>> exps;
  std::vector<std::vector<double>> betas;
  std::vector<std::pair<std::string, std::size_t>> models;
  std::vector<double> lambdas;
  std::vector<Eigen::Index> ranks;
};

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Simulate:
      return "simulate";
    case Mode::Theory:
      return "theory";
    case Mode::Compare:
      return "compare";
    case Mode::RealData:
      return "realdata";
  }
  return "simulate";
}

Mode parse_mode(const std::string& text) {
  if (text == "simulate") return Mode::Simulate;
  if (text == "theory") return Mode::Theory;
  if (text == "compare") return Mode::Compare;
  if (text == "realdata") return Mode::RealData;
  fail(ErrorKind::ConfigError, "unknown mode '" + text + "'");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  RawConfig raw;
  std::map<std::string, std::size_t> seen_scalar;
  std::string text;
  std::size_t line = 0;

  const auto once = [&](const std::string& key) {
    if (seen_scalar.count(key)) config_error(line, "key '" + key + "' may appear only once");
    seen_scalar[key] = line;
  };

  while (std::getline(in, text)) {
    ++line;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) config_error(line, "expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) config_error(line, "missing key");
    if (value.empty()) config_error(line, "missing value for '" + key + "'");
    const auto list = split(value, ',');
    for (const auto& item : list) {
      if (item.empty()) config_error(line, "empty list item for '" + key + "'");
    }

    if (key == "mode") {
      once(key);
      try {
        cfg.mode = parse_mode(value);
      } catch (const Error&) {
        config_error(line, "unknown mode '" + value + "'");
      }
    } else if (key == "signal") {
      for (const auto& item : list) {
        if (item != "fk" && item != "poly" && item != "exp" && item != "linear") {
          config_error(line, "unknown signal '" + item + "'");
        }
        raw.signal_kinds.emplace_back(item, line);
      }
    } else if (key == "k") {
      for (double k : parse_reals(list, line)) raw.ks.push_back(k);
    } else if (key == "coeffs") {
      raw.coeffs.push_back(parse_reals(split_ws(value), line));
    } else if (key == "exp") {
      auto v = parse_reals(split_ws(value), line);
      if (v.size() != 2) config_error(line, "exp expects 'a b'");
      raw.exps.push_back(std::move(v));
    } else if (key == "beta") {
      raw.betas.push_back(parse_reals(split_ws(value), line));
    } else if (key == "sigma2") {
      for (double s : parse_reals(list, line)) cfg.sigma2.push_back(s);
    } else if (key == "model") {
      for (const auto& item : list) {
        if (!contains(kFamilies, item)) config_error(line, "unknown model '" + item + "'");
        raw.models.emplace_back(item, line);
      }
    } else if (key == "lambda") {
      for (double l : parse_reals(list, line)) raw.lambdas.push_back(l);
    } else if (key == "rank") {
      for (const auto& item : list) raw.ranks.push_back(parse_count(item, line));
    } else if (key == "design_cov_diag") {
      once(key);
      cfg.design_cov_diag = parse_reals(split_ws(value), line);
    } else if (key == "widths") {
      once(key);
      cfg.widths.clear();
      for (const auto& item : split_ws(value)) cfg.widths.push_back(parse_count(item, line));
    } else if (key == "n_train") {
      once(key);
      cfg.n_train = parse_count(value, line);
    } else if (key == "n_test") {
      once(key);
      cfg.n_test = parse_count(value, line);
    } else if (key == "num_runs") {
      once(key);
      cfg.num_runs = parse_count(value, line);
    } else if (key == "eval_budget") {
      once(key);
      cfg.eval_budget = parse_count(value, line);
    } else if (key == "seed") {
      once(key);
      cfg.seed = parse_u64(value, line);
    } else if (key == "output") {
      once(key);
      cfg.output_path = value;
    } else if (key == "dataset") {
      once(key);
      cfg.dataset_path = value;
    } else if (key == "target") {
      once(key);
      cfg.target = value;
    } else if (key == "plan") {
      once(key);
      const auto parts = split(value, ':');
      if (parts.size() >= 2 && parts[0] == "holdout" && parts.size() <= 3) {
        HoldOut h;
        h.test_fraction = parse_real(parts[1], line);
        if (parts.size() == 3) {
          if (parts[2] != "nobootstrap") config_error(line, "unknown hold-out option '" + parts[2] + "'");
          h.bootstrap = false;
        }
        cfg.plan = h;
      } else if (parts.size() == 2 && parts[0] == "kfold") {
        cfg.plan = KFold{parse_count(parts[1], line), kDefaultNumRuns};
      } else {
        config_error(line, "plan must be 'holdout:FRACTION[:nobootstrap]' or 'kfold:K'");
      }
    } else if (key == "epochs") {
      once(key);
      cfg.epochs = static_cast<int>(parse_count(value, line));
    } else if (key == "learning_rate") {
      once(key);
      cfg.learning_rate = parse_real(value, line);
    } else if (key == "optimizer") {
      once(key);
      if (value == "adam") {
        cfg.optimizer = OptimizerKind::Adam;
      } else if (value == "sgd") {
        cfg.optimizer = OptimizerKind::Sgd;
      } else {
        config_error(line, "optimizer must be 'adam' or 'sgd'");
      }
    } else if (key == "momentum") {
      once(key);
      cfg.momentum = parse_real(value, line);
    } else if (key == "ntk_width") {
      once(key);
      cfg.ntk_width = parse_count(value, line);
    } else {
      config_error(line, "unknown key '" + key + "'");
    }
  }

  for (const auto& [kind, at] : raw.signal_kinds) {
    const auto expand = [&](const std::vector<std::vector<double>>& sets, const char* key) {
      if (sets.empty()) config_error(at, std::string("signal '") + kind + "' needs at least one '" + key + "' line");
      for (const auto& params : sets) cfg.signals.push_back({kind, params});
    };
    if (kind == "fk") {
      if (raw.ks.empty()) config_error(at, "signal 'fk' needs 'k' values");
      for (double k : raw.ks) cfg.signals.push_back({kind, {k}});
    } else if (kind == "poly") {
      expand(raw.coeffs, "coeffs");
    } else if (kind == "exp") {
      expand(raw.exps, "exp");
    } else {
      expand(raw.betas, "beta");
    }
  }

  for (const auto& [family, at] : raw.models) {
    if (contains(kLambdaFamilies, family)) {
      const std::vector<double> lambdas = raw.lambdas.empty() ? std::vector<double>{0.0} : raw.lambdas;
      for (double l : lambdas) cfg.models.push_back({family, l, std::nullopt});
    } else if (family == "lowrank") {
      if (raw.ranks.empty()) config_error(at, "model 'lowrank' needs 'rank' values");
      for (auto r : raw.ranks) cfg.models.push_back({family, std::nullopt, r});
    } else {
      cfg.models.push_back({family, std::nullopt, std::nullopt});
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot open config file '" + path + "'");
  return parse_config(in);
}

void validate_config(const ExperimentConfig& cfg) {
  if (!cfg.mode) fail(ErrorKind::ConfigError, "mode is not set");
  if (!cfg.seed) fail(ErrorKind::ConfigError, "seed is not set");
  if (cfg.models.empty()) fail(ErrorKind::ConfigError, "model grid is empty");
  for (const auto& m : cfg.models) {
    if (m.lambda && !(*m.lambda >= 0.0)) fail(ErrorKind::ConfigError, "lambda must be non-negative");
  }
  for (double s : cfg.sigma2) {
    if (!(s >= 0.0)) fail(ErrorKind::ConfigError, "sigma2 must be non-negative");
  }
  for (double c : cfg.design_cov_diag) {
    if (!(c > 0.0)) fail(ErrorKind::ConfigError, "design_cov_diag entries must be positive");
  }
  if (*cfg.mode == Mode::RealData) {
    if (cfg.dataset_path.empty()) fail(ErrorKind::ConfigError, "realdata mode needs 'dataset'");
    return;
  }
  if (cfg.signals.empty()) fail(ErrorKind::ConfigError, "signal grid is empty");
  if (cfg.sigma2.empty()) fail(ErrorKind::ConfigError, "sigma2 grid is empty");
  if (*cfg.mode != Mode::Theory && cfg.num_runs < 2) fail(ErrorKind::ConfigError, "num_runs must be at least 2");
}

Dataset load_dataset_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoFailure, "cannot open dataset '" + path + "'");
  std::string text;
  std::size_t line = 0;
  std::vector<std::string> header;
  while (std::getline(in, text)) {
    ++line;
    if (!trim(text).empty()) {
      header = split(trim(text), ',');
      break;
    }
  }
  if (header.empty()) fail(ErrorKind::EmptyFile, "'" + path + "' has no header row");
  for (auto& h : header) {
    if (h.size() >= 2 && h.front() == '"' && h.back() == '"') h = h.substr(1, h.size() - 2);
  }
  const auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end()) {
    fail(ErrorKind::MissingColumn, "column '" + target_column + "' not found in '" + path + "'");
  }
  const auto target = static_cast<std::size_t>(target_it - header.begin());

  std::vector<std::vector<double>> rows;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    const auto cells = split(trim(text), ',');
    if (cells.size() != header.size()) {
      fail(ErrorKind::NonNumericCell, "row " + std::to_string(line) + " has " + std::to_string(cells.size()) +
                                          " cells, expected " + std::to_string(header.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = to_double(cells[c]);
      if (!v) {
        fail(ErrorKind::NonNumericCell, "row " + std::to_string(line) + ", column " + std::to_string(c + 1) +
                                            " ('" + header[c] + "'): '" + cells[c] + "' is not numeric");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::EmptyFile, "'" + path + "' has no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size()) - 1;
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const double v = rows[static_cast<std::size_t>(i)][c];
      if (c == target) {
        data.y(i) = v;
      } else {
        data.x(i, col++) = v;
      }
    }
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = data.x.col(j).mean();
    data.x.col(j).array() -= mean;
    const double sd = std::sqrt(data.x.col(j).squaredNorm() / static_cast<double>(n));
    if (sd > 0.0) {
      data.x.col(j) /= sd;
    } else {
      data.x.col(j).setZero();
    }
  }
  return data;
}

SignalSpec make_signal(const SignalEntry& e, double noise_var) {
  if (e.kind == "fk") return SignalSpec::piecewise_k(e.params.at(0), noise_var);
  if (e.kind == "poly") return SignalSpec::polynomial(e.params, noise_var);
  if (e.kind == "exp") return SignalSpec::exp_bump(e.params.at(0), e.params.at(1), noise_var);
  if (e.kind == "linear") {
    return SignalSpec::linear_map(Eigen::Map<const Vector>(e.params.data(), static_cast<Eigen::Index>(e.params.size())),
                                  noise_var);
  }
  fail(ErrorKind::ConfigError, "unknown signal '" + e.kind + "'");
}

DesignSpec make_design(const ExperimentConfig& cfg, Eigen::Index dimension) {
  if (cfg.design_cov_diag.empty()) return DesignSpec::standard(dimension);
  if (static_cast<Eigen::Index>(cfg.design_cov_diag.size()) != dimension) {
    fail(ErrorKind::DimensionMismatch, "design_cov_diag has " + std::to_string(cfg.design_cov_diag.size()) +
                                           " entries for a " + std::to_string(dimension) + "-dimensional signal");
  }
  const Vector diag = Eigen::Map<const Vector>(cfg.design_cov_diag.data(), dimension);
  return DesignSpec::gaussian(diag.asDiagonal().toDenseMatrix());
}

ModelSpec make_model(const ModelEntry& e, const ExperimentConfig& cfg, Eigen::Index dimension,
                     std::uint64_t kernel_seed) {
  const double lambda = e.lambda.value_or(0.0);
  const OptimizerSpec opt{cfg.optimizer, cfg.learning_rate, cfg.momentum};
  if (e.family == "ols") return Ols{false};
  if (e.family == "ols_intercept") return Ols{true};
  if (e.family == "ridge") return Ridge{lambda, false};
  if (e.family == "ridge_intercept") return Ridge{lambda, true};
  if (e.family == "bended") return Bended{};
  if (e.family == "lowrank") return LowRank{e.rank.value_or(1)};
  if (e.family == "krr_linear") return Krr{LinearKernel{}, lambda};
  if (e.family == "krr_ntk") {
    SeedStream rng(mix_seed(kernel_seed, kKernelStreamTag), 0);
    return Krr{random_ntk_kernel(dimension, cfg.ntk_width, rng), lambda};
  }
  if (e.family == "mlp") return Mlp{cfg.widths, cfg.epochs, opt};
  if (e.family == "ntk_layerwise") return NtkLayerwise{cfg.ntk_width, lambda, cfg.epochs, opt};
  if (e.family == "mean") return ConstantMean{};
  fail(ErrorKind::ConfigError, "unknown model '" + e.family + "'");
}

std::string model_label(const ModelEntry& e) {
  if (e.rank) return e.family + "(rank=" + std::to_string(*e.rank) + ")";
  return e.family;
}

std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& cell_key) {
  return mix_seed(master_seed, stable_hash(cell_key.data(), cell_key.size()));
}

namespace {

std::string cell_key(const SignalEntry& s, std::optional<double> sigma2, const ModelEntry& m) {
  std::string key = s.kind + "|" + join_reals(s.params) + "|";
  if (sigma2) key += short_real(*sigma2);
  key += "|" + m.family + "|";
  if (m.lambda) key += short_real(*m.lambda);
  key += "|";
  if (m.rank) key += std::to_string(*m.rank);
  return key;
}

// Asymptotic optimism of the cell's model, in raw units, or nullopt for
// models without a closed-form target.
std::optional<Estimate> theory_raw(const ModelEntry& entry, const ModelSpec& spec, const SignalSpec& signal,
                                   const DesignSpec& design, const ExperimentConfig& cfg, std::uint64_t seed) {
  const Eigen::Index n = cfg.n_train;
  const double nd = static_cast<double>(n);
  const double noise = signal.noise_var();
  const EvalMethod method = preferred_method(signal);
  SeedStream rng = derive_stream(mix_seed(seed, kTheoryStreamTag), 0);
  const auto to_estimate = [](const TheoryValue& v) { return Estimate{v.raw_optimism, v.eval_stderr}; };
  const auto& f = entry.family;
  const double lambda = entry.lambda.value_or(0.0);

  if (f == "mlp" || f == "ntk_layerwise") return std::nullopt;
  if (f == "ols" && signal.kind() == "fk" && noise > 0.0) {
    const double k = std::get<PiecewiseK>(signal.variant()).k;
    return Estimate{fk_closed_form(k, noise) * 2.0 * noise / nd, 0.0};
  }
  const bool with_intercept = f == "ols_intercept" || f == "ridge_intercept";
  const DesignSpec ds = design.with_intercept(with_intercept);

  if (f == "ols" || f == "ols_intercept" || f == "ridge" || f == "ridge_intercept" || f == "krr_linear" ||
      f == "lowrank") {
    const PopulationMoments pm = population_moments(signal, ds, method, cfg.eval_budget, rng);
    const EvalSample sample = eval_sample(signal, ds, method, cfg.eval_budget, rng);
    if (f == "ols" || f == "ols_intercept") return to_estimate(thm1_optimism(pm, n, sample));
    if (f == "lowrank") return to_estimate(thm2_lowrank_bound(pm, entry.rank.value_or(1), n, sample));
    const double pen = f == "krr_linear" ? lambda / nd : lambda;
    return to_estimate(thm3_ridge_optimism(pm, pen, n, sample));
  }

  FeatureMap phi;
  double pen = 0.0;
  if (f == "bended") {
    phi = [](const Matrix& x) { return linear_features(LinearFeatures::Bended, x); };
  } else if (f == "mean") {
    phi = [](const Matrix& x) { return linear_features(LinearFeatures::Constant, x); };
  } else {
    const auto kernel = std::get<NtkKernel>(std::get<Krr>(spec).kernel);
    phi = [kernel](const Matrix& x) { return ntk_features(kernel, x); };
    pen = lambda / nd;
  }
  if (method == EvalMethod::Quadrature) {
    const EvalSample sample = quadrature_sample(signal, design);
    const Matrix features = phi(sample.x);
    const FeatureMoments moments = feature_moments(features, sample.y, sample.weights);
    return to_estimate(thm4_kernel_optimism(moments, features, sample, pen, n, noise));
  }
  return to_estimate(thm4_kernel_optimism(phi, signal, design, pen, n, cfg.eval_budget, rng));
}

std::string describe_failure(const std::exception& e) {
  std::string s = std::string("error: ") + e.what();
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

void fill_estimate(ResultRow& row, const OptimismEstimate& est) {
  row.n_train = est.n_train;
  row.num_runs = est.num_runs;
  row.err_train_mean = est.err_train_mean;
  row.err_test_mean = est.err_test_mean;
  row.opt_raw = est.opt_raw;
  row.opt_scaled = est.opt_scaled;
  row.stderr_ = est.stderr_opt;
  if (est.opt_scaled) row.stderr_ = scale_optimism(est.stderr_opt, est.n_train, *row.sigma2);
}

std::vector<ResultRow> run_realdata(const ExperimentConfig& cfg, unsigned threads) {
  Dataset data = load_dataset_csv(cfg.dataset_path, cfg.target);
  const std::string label =
      std::filesystem::path(cfg.dataset_path).stem().string() + ":" + cfg.target + ":standardized";
  std::vector<std::optional<double>> noise_grid;
  for (double s : cfg.sigma2) noise_grid.emplace_back(s);
  if (noise_grid.empty()) noise_grid.emplace_back(std::nullopt);

  ResamplingPlan plan = cfg.plan;
  std::visit([&](auto& p) { p.num_runs = cfg.num_runs; }, plan);
  const SignalEntry dataset_entry{"dataset", {}};

  std::vector<ResultRow> rows;
  for (const auto& noise : noise_grid) {
    data.noise_var = noise;
    for (const auto& m : cfg.models) {
      ResultRow row;
      row.mode = to_string(Mode::RealData);
      row.signal_kind = "dataset";
      row.k_or_coeffs = label;
      row.sigma2 = noise;
      row.model = model_label(m);
      row.lambda = m.lambda;
      row.seed = cell_seed(*cfg.seed, label + "|" + cell_key(dataset_entry, noise, m));
      try {
        const ModelSpec spec = make_model(m, cfg, data.dimension(), row.seed);
        const OptimismEstimate est = resample_optimism(data, spec, plan, row.seed, threads);
        fill_estimate(row, est);
        row.opt_per_n = est.opt_raw / static_cast<double>(est.n_train);
      } catch (const std::exception& e) {
        row.status = describe_failure(e);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> run_grid(const ExperimentConfig& cfg, unsigned threads) {
  validate_config(cfg);
  const Mode mode = *cfg.mode;
  if (mode == Mode::RealData) return run_realdata(cfg, threads);

  std::vector<ResultRow> rows;
  for (const auto& s : cfg.signals) {
    for (double sigma2 : cfg.sigma2) {
      for (const auto& m : cfg.models) {
        ResultRow row;
        row.mode = to_string(mode);
        row.signal_kind = s.kind;
        row.k_or_coeffs = join_reals(s.params);
        row.sigma2 = sigma2;
        row.model = model_label(m);
        row.lambda = m.lambda;
        row.n_train = cfg.n_train;
        row.seed = cell_seed(*cfg.seed, cell_key(s, sigma2, m));
        try {
          const SignalSpec signal = make_signal(s, sigma2);
          const DesignSpec design = make_design(cfg, signal.input_dimension());
          const ModelSpec spec = make_model(m, cfg, signal.input_dimension(), row.seed);
          if (mode != Mode::Theory) {
            fill_estimate(row, mc_optimism(signal, design, spec, cfg.n_train, cfg.n_test, cfg.num_runs,
                                           row.seed, threads));
          }
          if (mode != Mode::Simulate) {
            if (const auto raw = theory_raw(m, spec, signal, design, cfg, row.seed)) {
              const double factor = sigma2 > 0.0 ? static_cast<double>(cfg.n_train) / (2.0 * sigma2) : 1.0;
              row.theory_value = raw->value * factor;
              row.theory_stderr = raw->stderr_ * factor;
            }
          }
        } catch (const std::exception& e) {
          row.status = describe_failure(e);
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

namespace {

const std::vector<std::string> kColumns{
    "mode",          "signal_kind", "k_or_coeffs", "sigma2",       "model",          "lambda",
    "n_train",       "num_runs",    "err_train_mean", "err_test_mean", "opt_raw",     "opt_scaled",
    "stderr",        "theory_value", "theory_stderr", "seed",         "status",         "opt_per_n"};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::optional<double> read_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto v = to_double(s);
  if (!v) fail(ErrorKind::NonNumericCell, "'" + s + "' is not numeric");
  return v;
}

}  // namespace

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.mode) << ',' << csv_field(r.signal_kind) << ',' << csv_field(r.k_or_coeffs) << ','
        << opt_real(r.sigma2) << ',' << csv_field(r.model) << ',' << opt_real(r.lambda) << ',' << r.n_train << ','
        << (r.num_runs ? std::to_string(*r.num_runs) : std::string()) << ',' << opt_real(r.err_train_mean) << ','
        << opt_real(r.err_test_mean) << ',' << opt_real(r.opt_raw) << ',' << opt_real(r.opt_scaled) << ','
        << opt_real(r.stderr_) << ',' << opt_real(r.theory_value) << ',' << opt_real(r.theory_stderr) << ','
        << r.seed << ',' << csv_field(r.status) << ',' << opt_real(r.opt_per_n) << '\n';
  }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot open '" + path + "' for writing");
  write_csv(rows, out);
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "failed writing '" + path + "'");
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::EmptyFile, "results file is empty");
  if (parse_csv_line(line) != kColumns) fail(ErrorKind::MissingColumn, "unexpected results header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = parse_csv_line(line);
    if (f.size() != kColumns.size()) fail(ErrorKind::NonNumericCell, "malformed results row");
    ResultRow r;
    r.mode = f[0];
    r.signal_kind = f[1];
    r.k_or_coeffs = f[2];
    r.sigma2 = read_opt(f[3]);
    r.model = f[4];
    r.lambda = read_opt(f[5]);
    r.n_train = static_cast<Eigen::Index>(parse_u64(f[6], 0));
    if (!f[7].empty()) r.num_runs = static_cast<Eigen::Index>(parse_u64(f[7], 0));
    r.err_train_mean = read_opt(f[8]);
    r.err_test_mean = read_opt(f[9]);
    r.opt_raw = read_opt(f[10]);
    r.opt_scaled = read_opt(f[11]);
    r.stderr_ = read_opt(f[12]);
    r.theory_value = read_opt(f[13]);
    r.theory_stderr = read_opt(f[14]);
    r.seed = parse_u64(f[15], 0);
    r.status = f[16];
    r.opt_per_n = read_opt(f[17]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string report_summary(const std::vector<ResultRow>& rows) {
  for (const auto& r : rows) {
    if (r.mode != rows.front().mode) fail(ErrorKind::MixedModes, "rows mix modes '" + rows.front().mode +
                                                                     "' and '" + r.mode + "'");
  }
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::map<std::pair<std::string, std::string>, std::string> cells;
  const auto index_of = [](std::vector<std::string>& labels, const std::string& s) {
    if (std::find(labels.begin(), labels.end(), s) == labels.end()) labels.push_back(s);
  };
  for (const auto& r : rows) {
    std::string rl = r.signal_kind + " " + r.k_or_coeffs;
    if (r.sigma2) rl += " (sigma2=" + short_real(*r.sigma2) + ")";
    std::string cl = r.model;
    if (r.lambda) cl += " lambda=" + short_real(*r.lambda);
    index_of(row_labels, rl);
    index_of(col_labels, cl);
    std::optional<double> v = r.opt_scaled;
    if (!v) v = r.mode == "theory" ? r.theory_value : r.opt_raw;
    char buf[32] = "-";
    if (!r.ok()) {
      std::snprintf(buf, sizeof buf, "error");
    } else if (v) {
      std::snprintf(buf, sizeof buf, "%.6g", *v);
    }
    cells[{rl, cl}] = buf;
  }
  std::size_t w0 = 6;
  for (const auto& l : row_labels) w0 = std::max(w0, l.size());
  std::vector<std::size_t> widths;
  for (const auto& c : col_labels) widths.push_back(std::max<std::size_t>(c.size(), 12));

  std::ostringstream out;
  const auto pad = [&](const std::string& s, std::size_t w) { out << s << std::string(w - std::min(w, s.size()) + 2, ' '); };
  pad("signal", w0);
  for (std::size_t j = 0; j < col_labels.size(); ++j) pad(col_labels[j], widths[j]);
  out << '\n';
  for (const auto& rl : row_labels) {
    pad(rl, w0);
    for (std::size_t j = 0; j < col_labels.size(); ++j) {
      const auto it = cells.find({rl, col_labels[j]});
      pad(it == cells.end() ? "-" : it->second, widths[j]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace rxopt::tools
