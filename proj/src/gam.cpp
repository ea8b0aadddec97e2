#include "tokenscope/gam.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "tokenscope/bspline.hpp"
#include "tokenscope/error.hpp"
#include "tokenscope/support.hpp"

namespace tokenscope {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Inverse empirical CDF at i / (interior + 1). Unlike interpolating
// quantiles this is unchanged when every value is repeated the same number of
// times, which keeps the fit invariant under row duplication.
std::vector<double> quantile_breakpoints(std::vector<double> values, std::size_t interior) {
  std::sort(values.begin(), values.end());
  const double lo = values.front();
  const double hi = values.back();
  std::vector<double> out{lo};
  const std::size_t n = values.size();
  for (std::size_t i = 1; i <= interior; ++i) {
    // 1-based rank ceil(i * n / (interior + 1)).
    const std::size_t rank = (i * n + interior) / (interior + 1);
    const double q = values[std::max<std::size_t>(rank, 1) - 1];
    if (q > out.back() && q < hi) out.push_back(q);
  }
  out.push_back(hi);
  return out;
}

MatrixXd second_difference(Index k) {
  MatrixXd d = MatrixXd::Zero(std::max<Index>(k - 2, 0), k);
  for (Index r = 0; r + 2 < k; ++r) {
    d(r, r) = 1.0;
    d(r, r + 1) = -2.0;
    d(r, r + 2) = 1.0;
  }
  return d;
}

// Per-term design pieces, reparameterized so the term sums to zero over the
// training rows: coefficients = null_space * theta.
struct TermDesign {
  std::vector<double> breakpoints;
  MatrixXd null_space;  // K x (K - 1)
  MatrixXd penalty;     // (K - 1) x (K - 1)
  Index offset = 0;     // first column in the full design
  Index width = 0;
  double feature_min = 0.0;
  double feature_max = 0.0;
};

struct FoldStats {
  MatrixXd gram;
  VectorXd xty;
  double yty = 0.0;
  double rows = 0.0;
};

std::vector<std::size_t> assign_folds(const std::vector<FeatureRow>& rows, std::size_t folds,
                                      std::uint64_t seed, std::size_t& group_count) {
  std::vector<std::size_t> groups;
  groups.reserve(rows.size());
  for (const auto& r : rows) groups.push_back(r.group);
  std::vector<std::size_t> unique = groups;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  group_count = unique.size();
  bool by_row = false;
  if (unique.size() < folds) {
    logger().warn("only {} row groups for {} folds; splitting folds by row", unique.size(),
                  folds);
    by_row = true;
    unique.resize(rows.size());
    std::iota(unique.begin(), unique.end(), std::size_t{0});
    std::iota(groups.begin(), groups.end(), std::size_t{0});
  }
  std::mt19937_64 rng(seed);
  std::shuffle(unique.begin(), unique.end(), rng);
  std::map<std::size_t, std::size_t> fold_of;
  for (std::size_t i = 0; i < unique.size(); ++i) fold_of[unique[i]] = i % folds;
  std::vector<std::size_t> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = fold_of.at(by_row ? i : groups[i]);
  return out;
}

// Solves (gram / rows + penalty) theta = xty / rows.
VectorXd solve_penalized(const MatrixXd& gram, const VectorXd& xty, double rows,
                         const std::vector<TermDesign>& terms,
                         const std::array<double, kFeatureCount>& lambda) {
  MatrixXd a = gram / rows;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    a.block(terms[t].offset, terms[t].offset, terms[t].width, terms[t].width) +=
        lambda[t] * terms[t].penalty;
  }
  const Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw DataError("penalized normal equations are rank deficient");
  }
  VectorXd theta = llt.solve(xty / rows);
  if (!theta.allFinite()) throw DataError("penalized normal equations are rank deficient");
  return theta;
}

double sse(const FoldStats& s, const VectorXd& theta) {
  return s.yty - 2.0 * theta.dot(s.xty) + theta.dot(s.gram * theta);
}

void check_rows(const std::vector<FeatureRow>& rows) {
  if (rows.empty()) throw DataError("no training rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = "row " + std::to_string(i);
    for (double v : r.features()) {
      if (!std::isfinite(v)) throw DataError(where + ": non-finite feature");
    }
    if (!r.target) throw DataError(where + ": missing target percentile");
    if (!std::isfinite(*r.target)) throw DataError(where + ": non-finite target");
  }
}

}  // namespace

const char* feature_name(std::size_t term_index) {
  static constexpr const char* kNames[kFeatureCount] = {"angular", "magnitude",
                                                        "dimensional", "position"};
  if (term_index >= kFeatureCount) throw Error(ErrorKind::kUsage, "term index out of range");
  return kNames[term_index];
}

double position_percentile(std::size_t index, std::size_t n) {
  if (n == 0 || index >= n) {
    throw Error(ErrorKind::kUsage, "token index " + std::to_string(index) +
                                       " out of range for prompt of " + std::to_string(n));
  }
  if (n == 1) return 50.0;
  return 100.0 * static_cast<double>(index) / static_cast<double>(n - 1);
}

std::vector<double> target_percentiles(const std::vector<double>& composites) {
  const std::size_t n = composites.size();
  if (n == 0) throw DataError("percentiles of an empty sequence");
  if (n == 1) return {100.0};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return composites[a] < composites[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && composites[order[j + 1]] == composites[order[i]]) ++j;
    // 1-based ranks i+1 .. j+1 share their mean.
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    const double pct = 100.0 * (mean_rank - 1.0) / static_cast<double>(n - 1);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = pct;
    i = j + 1;
  }
  return out;
}

std::vector<FeatureRow> feature_rows(const PromptAnalysis& analysis, std::size_t group) {
  const std::size_t n = analysis.breakdowns.size();
  std::vector<double> composites;
  composites.reserve(n);
  for (const auto& b : analysis.breakdowns) composites.push_back(b.composite);
  const auto targets = target_percentiles(composites);
  std::vector<FeatureRow> rows;
  rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& b = analysis.breakdowns[k];
    rows.push_back({b.angular, b.magnitude, b.dimensional, position_percentile(k, n),
                    targets[k], group});
  }
  return rows;
}

std::vector<FeatureRow> generate_training_data(const std::vector<std::string>& corpus,
                                               const EmbeddingTable& table,
                                               const AnalysisOptions& options) {
  if (corpus.empty()) throw DataError("training corpus is empty");
  std::vector<FeatureRow> rows;
  for (std::size_t p = 0; p < corpus.size(); ++p) {
    try {
      const auto analysis = analyze_prompt(corpus[p], table, options.preprocess,
                                           options.scoring, options.oov);
      const auto prompt_rows = feature_rows(analysis, p);
      rows.insert(rows.end(), prompt_rows.begin(), prompt_rows.end());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kUsage) throw;
      logger().warn("skipping corpus prompt {}: {}", p + 1, e.what());
    }
  }
  if (rows.empty()) throw DataError("no corpus prompt could be analyzed");
  return rows;
}

double SmoothTerm::evaluate(double x) const {
  const CubicBSplineBasis basis(knots);
  if (coefficients.size() != basis.size()) {
    throw InvariantError("smooth term has " + std::to_string(coefficients.size()) +
                         " coefficients for " + std::to_string(basis.size()) + " basis functions");
  }
  std::vector<double> row(basis.size());
  basis.evaluate(x, row);
  double sum = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) sum += row[k] * coefficients[k];
  return sum;
}

double GamModel::predict(double angular, double magnitude, double dimensional,
                         double position) const {
  return beta0 + terms[0].evaluate(angular) + terms[1].evaluate(magnitude) +
         terms[2].evaluate(dimensional) + terms[3].evaluate(position);
}

double GamModel::predict(const FeatureRow& row) const {
  return predict(row.angular, row.magnitude, row.dimensional, row.position);
}

GamModel fit_gam(const std::vector<FeatureRow>& rows, const FitOptions& options) {
  check_rows(rows);
  if (options.cv_folds < 2 && !options.fixed_lambda) {
    throw Error(ErrorKind::kUsage, "cross-validation needs at least 2 folds");
  }
  if (options.lambda_grid.empty() && !options.fixed_lambda) {
    throw Error(ErrorKind::kUsage, "empty smoothing parameter grid");
  }
  for (double l : options.lambda_grid) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw Error(ErrorKind::kUsage, "smoothing parameters must be positive");
    }
  }

  const auto n = static_cast<Index>(rows.size());
  std::vector<TermDesign> terms(kFeatureCount);
  std::vector<MatrixXd> term_columns(kFeatureCount);
  Index width = 1;
  Index basis_total = 1;
  for (std::size_t t = 0; t < kFeatureCount; ++t) {
    std::vector<double> values(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) values[i] = rows[i].features()[t];
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) {
      throw DataError(std::string("feature '") + feature_name(t) +
                      "' is constant across training rows");
    }
    TermDesign& term = terms[t];
    term.feature_min = *lo;
    term.feature_max = *hi;
    term.breakpoints = quantile_breakpoints(values, options.knots);
    const MatrixXd basis = build_spline_basis(values, term.breakpoints);
    const Index k = basis.cols();
    basis_total += k;

    const VectorXd means = basis.colwise().mean().transpose();
    const Eigen::HouseholderQR<MatrixXd> qr(means);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(k, k);
    term.null_space = q.rightCols(k - 1);
    const MatrixXd d = second_difference(k) * term.null_space;
    term.penalty = d.transpose() * d;
    term.offset = width;
    term.width = k - 1;
    width += k - 1;
    term_columns[t] = basis * term.null_space;
  }
  if (static_cast<Index>(rows.size()) < 10 * basis_total) {
    throw DataError("too few training rows: " + std::to_string(rows.size()) + " rows for " +
                    std::to_string(basis_total) + " basis functions (need at least " +
                    std::to_string(10 * basis_total) + ")");
  }

  MatrixXd x(n, width);
  x.col(0).setOnes();
  for (std::size_t t = 0; t < kFeatureCount; ++t) {
    x.block(0, terms[t].offset, n, terms[t].width) = term_columns[t];
  }
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) y(i) = *rows[static_cast<std::size_t>(i)].target;

  GamModel model;
  model.training.rows = rows.size();
  model.training.seed = options.seed;

  std::array<double, kFeatureCount> best_lambda{};
  FoldStats total{x.transpose() * x, x.transpose() * y, y.squaredNorm(),
                  static_cast<double>(n)};

  if (options.fixed_lambda) {
    best_lambda = *options.fixed_lambda;
    std::vector<std::size_t> groups;
    for (const auto& r : rows) groups.push_back(r.group);
    std::sort(groups.begin(), groups.end());
    model.training.groups =
        static_cast<std::size_t>(std::unique(groups.begin(), groups.end()) - groups.begin());
  } else {
    const std::size_t folds = options.cv_folds;
    if (rows.size() < folds) throw DataError("fewer training rows than CV folds");
    std::size_t group_count = 0;
    const auto fold_of = assign_folds(rows, folds, options.seed, group_count);
    model.training.groups = group_count;
    model.training.cv_folds = folds;

    std::vector<FoldStats> held(folds);
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<Index> idx;
      for (Index i = 0; i < n; ++i) {
        if (fold_of[static_cast<std::size_t>(i)] == f) idx.push_back(i);
      }
      MatrixXd xf(static_cast<Index>(idx.size()), width);
      VectorXd yf(static_cast<Index>(idx.size()));
      for (std::size_t r = 0; r < idx.size(); ++r) {
        xf.row(static_cast<Index>(r)) = x.row(idx[r]);
        yf(static_cast<Index>(r)) = y(idx[r]);
      }
      held[f] = {xf.transpose() * xf, xf.transpose() * yf, yf.squaredNorm(),
                 static_cast<double>(idx.size())};
    }

    const std::size_t grid = options.lambda_grid.size();
    std::size_t combos = 1;
    for (std::size_t t = 0; t < kFeatureCount; ++t) combos *= grid;
    double best_mse = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < combos; ++c) {
      std::array<double, kFeatureCount> lambda{};
      std::size_t rest = c;
      for (std::size_t t = 0; t < kFeatureCount; ++t) {
        lambda[t] = options.lambda_grid[rest % grid];
        rest /= grid;
      }
      double total_sse = 0.0;
      for (std::size_t f = 0; f < folds; ++f) {
        const FoldStats& h = held[f];
        if (h.rows == 0.0) continue;
        const VectorXd theta = solve_penalized(total.gram - h.gram, total.xty - h.xty,
                                               total.rows - h.rows, terms, lambda);
        total_sse += sse(h, theta);
      }
      const double mse = total_sse / total.rows;
      if (mse < best_mse) {
        best_mse = mse;
        best_lambda = lambda;
      }
    }
    model.training.cv_rmse = std::sqrt(std::max(best_mse, 0.0));
  }

  const VectorXd theta = solve_penalized(total.gram, total.xty, total.rows, terms, best_lambda);
  model.training.train_rmse = std::sqrt(std::max(sse(total, theta), 0.0) / total.rows);
  model.beta0 = theta(0);
  for (std::size_t t = 0; t < kFeatureCount; ++t) {
    const TermDesign& term = terms[t];
    VectorXd beta = term.null_space * theta.segment(term.offset, term.width);
    // Recenter against roundoff; partition of unity moves the shift into beta0.
    const double shift = term_columns[t].size() == 0
                             ? 0.0
                             : (term_columns[t] * theta.segment(term.offset, term.width)).mean();
    beta.array() -= shift;
    model.beta0 += shift;
    SmoothTerm& out = model.terms[t];
    out.knots = term.breakpoints;
    out.coefficients.assign(beta.data(), beta.data() + beta.size());
    out.feature_min = term.feature_min;
    out.feature_max = term.feature_max;
    out.lambda = best_lambda[t];
  }
  return model;
}

std::vector<std::pair<double, double>> export_partial_dependence(const GamModel& model,
                                                                 std::size_t term_index,
                                                                 std::size_t grid_size) {
  if (term_index >= kFeatureCount) {
    throw Error(ErrorKind::kUsage, "term index " + std::to_string(term_index) +
                                       " out of range (model has 4 terms)");
  }
  if (grid_size == 0) throw Error(ErrorKind::kUsage, "grid size must be positive");
  const SmoothTerm& term = model.terms[term_index];
  std::vector<std::pair<double, double>> out;
  out.reserve(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    double x = term.feature_min;
    if (grid_size > 1) {
      x = i + 1 == grid_size ? term.feature_max
                             : term.feature_min + (term.feature_max - term.feature_min) *
                                                      static_cast<double>(i) /
                                                      static_cast<double>(grid_size - 1);
    }
    out.emplace_back(x, term.evaluate(x));
  }
  return out;
}

double roughness(const SmoothTerm& term) {
  double sum = 0.0;
  const auto& c = term.coefficients;
  for (std::size_t k = 0; k + 2 < c.size(); ++k) {
    const double d = c[k + 2] - 2.0 * c[k + 1] + c[k];
    sum += d * d;
  }
  return sum;
}

}  // namespace tokenscope
