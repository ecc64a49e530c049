#pragma once

// Panel estimators: random-effects GLS with Swamy-Arora variance components,
// and pooled OLS with cluster-robust inference. Inference is normal-based
// (z statistics) throughout.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "promises/distributions.hpp"
#include "promises/econometrics/design.hpp"
#include "promises/econometrics/least_squares.hpp"

namespace promises::econometrics {

inline constexpr double kCiMultiplier = 1.959964;

enum class Method { ReGls, PooledCluster, SimpleOls };

inline std::string method_tag(Method m) {
  switch (m) {
    case Method::ReGls: return "re_gls";
    case Method::PooledCluster: return "pooled_cluster";
    case Method::SimpleOls: return "simple_ols";
  }
  return "unknown";
}

struct WaldTest {
  std::vector<std::string> subset;
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
};

struct RSquared {
  std::optional<double> within;
  std::optional<double> between;
  std::optional<double> overall;
};

struct VarianceComponents {
  double sigma_u2 = 0.0;
  double sigma_e2 = 0.0;
  std::vector<double> theta;  // aligned with DesignMatrix::groups
  bool degenerate = false;    // sigma_e2 == 0: RE reduces to the within estimator
  bool truncated = false;     // negative sigma_u2 estimate set to 0
  Eigen::Index within_rank = 0;
  Eigen::Index between_rank = 0;
  double harmonic_mean_group_size = 0.0;

  double rho() const {
    const double total = sigma_u2 + sigma_e2;
    return total > 0 ? sigma_u2 / total : std::numeric_limits<double>::quiet_NaN();
  }
};

struct RegressionResult {
  Method method = Method::ReGls;
  std::string dependent;
  std::vector<std::string> labels;
  std::vector<double> coef, se, z, p, ci_low, ci_high;
  Eigen::MatrixXd vcov;
  std::size_t n_obs = 0;
  std::size_t n_groups = 0;
  std::size_t group_min = 0;
  std::size_t group_max = 0;
  double group_avg = 0.0;
  RSquared r2;
  WaldTest wald;                          // all non-constant regressors
  std::optional<WaldTest> wald_signal;    // w_t alone, chi2(1)
  std::optional<VarianceComponents> components;  // re_gls only
  std::vector<std::string> notes;

  std::optional<std::size_t> index_of(std::string_view label) const {
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (labels[k] == label) return k;
    }
    return std::nullopt;
  }
};

namespace detail {

// Sum of squared deviations is treated as zero below this relative size.
inline bool has_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return false;
  const double scale = v.cwiseAbs().maxCoeff();
  if (!(scale > 0)) return false;
  const double ssd = (v.array() - v.mean()).square().sum();
  return ssd > static_cast<double>(v.size()) * std::pow(1e-13 * scale, 2);
}

inline std::optional<double> squared_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (!has_variance(a) || !has_variance(b)) return std::nullopt;
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double sab = (da * db).sum();
  return (sab * sab) / ((da * da).sum() * (db * db).sum());
}

inline Eigen::MatrixXd group_means(const Eigen::MatrixXd& m, const std::vector<GroupSpan>& groups) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(groups.size()), m.cols());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out.row(static_cast<Eigen::Index>(g)) =
        m.middleRows(groups[g].begin, groups[g].size).colwise().mean();
  }
  return out;
}

// m - theta_g * mean_g(m), row block by row block.
inline Eigen::MatrixXd quasi_demean(const Eigen::MatrixXd& m, const std::vector<GroupSpan>& groups,
                                    const std::vector<double>& theta) {
  Eigen::MatrixXd out = m;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Eigen::RowVectorXd mean = m.middleRows(groups[g].begin, groups[g].size).colwise().mean();
    out.middleRows(groups[g].begin, groups[g].size).rowwise() -= theta[g] * mean;
  }
  return out;
}

inline void check_rows(const DesignMatrix& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw EstimationError("X and y row counts differ");
  Eigen::Index covered = 0;
  for (const auto& g : X.groups) covered += g.size;
  if (covered != X.rows()) throw EstimationError("group spans do not cover the design rows");
}

inline void fill_group_stats(RegressionResult& r, const std::vector<GroupSpan>& groups) {
  r.n_groups = groups.size();
  if (groups.empty()) return;
  r.group_min = std::numeric_limits<std::size_t>::max();
  for (const auto& g : groups) {
    r.group_min = std::min(r.group_min, static_cast<std::size_t>(g.size));
    r.group_max = std::max(r.group_max, static_cast<std::size_t>(g.size));
  }
  r.group_avg = static_cast<double>(r.n_obs) / static_cast<double>(groups.size());
}

}  // namespace detail

// theta = 1 - sqrt(sigma_e2 / (T sigma_u2 + sigma_e2)).
inline double theta_for(double sigma_u2, double sigma_e2, Eigen::Index group_size) {
  const double denom = static_cast<double>(group_size) * sigma_u2 + sigma_e2;
  if (!(denom > 0)) return 1.0;
  return 1.0 - std::sqrt(sigma_e2 / denom);
}

// Components with the per-group theta filled in. sigma_e2 == 0 is the
// degenerate case: theta = 1 everywhere, i.e. the within transformation.
inline VarianceComponents make_components(const DesignMatrix& X, double sigma_u2, double sigma_e2) {
  if (sigma_u2 < 0 || sigma_e2 < 0) throw EstimationError("variance components must be >= 0");
  VarianceComponents vc;
  vc.sigma_u2 = sigma_u2;
  vc.sigma_e2 = sigma_e2;
  vc.degenerate = sigma_e2 == 0.0;
  double inv_sum = 0.0;
  for (const auto& g : X.groups) {
    vc.theta.push_back(vc.degenerate ? 1.0 : theta_for(sigma_u2, sigma_e2, g.size));
    inv_sum += 1.0 / static_cast<double>(g.size);
  }
  vc.harmonic_mean_group_size = inv_sum > 0 ? static_cast<double>(X.groups.size()) / inv_sum : 0.0;
  return vc;
}

// Swamy-Arora: sigma_e2 from the within regression, RSS / (N - G - K_w),
// where K_w counts independent time-varying columns; sigma_u2 from the
// between regression on group means, RSS_b / (G - K_b) - sigma_e2 / T_h with
// T_h the harmonic mean group size, truncated at zero.
inline VarianceComponents swamy_arora(const DesignMatrix& X, const Eigen::VectorXd& y) {
  detail::check_rows(X, y);
  const auto n = X.rows();
  const auto g = static_cast<Eigen::Index>(X.groups.size());
  if (g < 2) throw EstimationError("swamy-arora: need >=2 groups");

  const std::vector<double> ones(X.groups.size(), 1.0);
  const Eigen::MatrixXd xw = detail::quasi_demean(X.values, X.groups, ones);
  const Eigen::VectorXd yw = detail::quasi_demean(y, X.groups, ones);
  const SubsetFit within = ols_independent_columns(xw, yw);
  const Eigen::Index within_dof = n - g - within.rank();
  if (within_dof <= 0) {
    throw EstimationError("swamy-arora: within regression infeasible (" + std::to_string(n) +
                          " obs, " + std::to_string(g) + " groups, " +
                          std::to_string(within.rank()) + " time-varying columns)");
  }
  const double ssr_w = within.residuals.squaredNorm();
  const double yw_norm2 = yw.squaredNorm();
  const bool exact_within = ssr_w <= kRankTolerance * kRankTolerance * yw_norm2 || yw_norm2 == 0.0;
  const double sigma_e2 = exact_within ? 0.0 : ssr_w / static_cast<double>(within_dof);

  const Eigen::MatrixXd xb = detail::group_means(X.values, X.groups);
  const Eigen::VectorXd yb = detail::group_means(y, X.groups);
  const SubsetFit between = ols_independent_columns(xb, yb);
  const Eigen::Index between_dof = g - between.rank();
  if (between_dof <= 0) {
    throw EstimationError("swamy-arora: between regression infeasible (" + std::to_string(g) +
                          " groups, " + std::to_string(between.rank()) + " columns)");
  }
  const double sigma_b2 = between.residuals.squaredNorm() / static_cast<double>(between_dof);

  VarianceComponents probe = make_components(X, 0.0, 1.0);
  const double raw_u2 = sigma_b2 - sigma_e2 / probe.harmonic_mean_group_size;
  VarianceComponents vc = make_components(X, std::max(0.0, raw_u2), sigma_e2);
  vc.truncated = raw_u2 < 0;
  vc.within_rank = within.rank();
  vc.between_rank = between.rank();
  return vc;
}

inline RSquared r_squared_triple(const DesignMatrix& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& beta) {
  detail::check_rows(X, y);
  const Eigen::VectorXd fitted = X.values * beta;
  RSquared r2;
  r2.overall = detail::squared_correlation(y, fitted);
  const std::vector<double> ones(X.groups.size(), 1.0);
  r2.within = detail::squared_correlation(detail::quasi_demean(y, X.groups, ones),
                                          detail::quasi_demean(fitted, X.groups, ones));
  r2.between = detail::squared_correlation(detail::group_means(y, X.groups),
                                           detail::group_means(fitted, X.groups));
  return r2;
}

// chi2 = b_s' V_s^{-1} b_s on the named subset.
inline WaldTest wald_joint(const Eigen::VectorXd& beta, const Eigen::MatrixXd& V,
                           const std::vector<std::string>& labels,
                           const std::vector<std::string>& subset) {
  if (subset.empty()) throw EstimationError("wald: empty coefficient subset");
  std::vector<Eigen::Index> idx;
  for (const auto& name : subset) {
    auto it = std::find(labels.begin(), labels.end(), name);
    if (it == labels.end()) throw EstimationError("wald: unknown coefficient '" + name + "'");
    idx.push_back(it - labels.begin());
  }
  const Eigen::VectorXd b = beta(idx);
  const Eigen::MatrixXd v = V(idx, idx);
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success || !b.allFinite()) {
    throw EstimationError("wald: covariance singular on the tested subset");
  }
  WaldTest w;
  w.subset = subset;
  w.chi2 = b.dot(llt.solve(b));
  if (w.chi2 < 0) w.chi2 = 0;
  w.df = static_cast<int>(subset.size());
  w.p = dist::chi2_sf(w.chi2, w.df);
  return w;
}

inline std::vector<std::string> non_constant_labels(const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) {
    if (l != kConstLabel) out.push_back(l);
  }
  return out;
}

namespace detail {

// z, p and CI from coef and vcov.
inline void fill_inference(RegressionResult& r) {
  const auto k = r.coef.size();
  r.se.assign(k, 0.0);
  r.z.assign(k, 0.0);
  r.p.assign(k, 0.0);
  r.ci_low.assign(k, 0.0);
  r.ci_high.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    r.se[j] = std::sqrt(std::max(0.0, r.vcov(jj, jj)));
    if (std::isnan(r.vcov(jj, jj))) r.se[j] = std::numeric_limits<double>::quiet_NaN();
    r.z[j] = r.coef[j] / r.se[j];
    r.p[j] = dist::normal_two_sided_p(r.z[j]);
    r.ci_low[j] = r.coef[j] - kCiMultiplier * r.se[j];
    r.ci_high[j] = r.coef[j] + kCiMultiplier * r.se[j];
  }
}

inline void fill_wald(RegressionResult& r, const Eigen::VectorXd& beta) {
  auto subset = non_constant_labels(r.labels);
  try {
    r.wald = wald_joint(beta, r.vcov, r.labels, subset);
  } catch (const EstimationError& e) {
    r.wald = WaldTest{subset, std::numeric_limits<double>::quiet_NaN(),
                      static_cast<int>(subset.size()), std::numeric_limits<double>::quiet_NaN()};
    r.notes.push_back(std::string("joint Wald test unavailable: ") + e.what());
  }
  if (r.index_of(kSignalLabel)) {
    try {
      r.wald_signal = wald_joint(beta, r.vcov, r.labels, {std::string(kSignalLabel)});
    } catch (const EstimationError& e) {
      r.notes.push_back(std::string("w_t Wald test unavailable: ") + e.what());
    }
  }
}

}  // namespace detail

// Random-effects GLS with the given variance components: OLS on the
// quasi-demeaned data, conventional standard errors s^2 (X*'X*)^{-1}.
inline RegressionResult re_gls(const DesignMatrix& X, const Eigen::VectorXd& y,
                               const VarianceComponents& vc) {
  detail::check_rows(X, y);
  if (vc.theta.size() != X.groups.size()) {
    throw EstimationError("re_gls: variance components do not match the design's groups");
  }
  RegressionResult r;
  r.method = Method::ReGls;
  r.labels = X.column_labels;
  r.n_obs = static_cast<std::size_t>(X.rows());
  detail::fill_group_stats(r, X.groups);
  r.components = vc;

  const Eigen::MatrixXd xs = detail::quasi_demean(X.values, X.groups, vc.theta);
  const Eigen::VectorXd ys = detail::quasi_demean(y, X.groups, vc.theta);
  const auto k = X.cols();
  Eigen::VectorXd beta(k);

  if (!vc.degenerate) {
    const OlsFit fit = ols(xs, ys, X.column_labels);
    beta = fit.beta;
    r.vcov = conventional_vcov(xs, fit.residuals);
  } else {
    // Within estimator: columns that vanish under demeaning are not
    // identified; the constant is recovered from the grand means.
    r.notes.push_back(
        "sigma_e^2 = 0: within fit is exact, estimator reduces to the within estimator");
    const SubsetFit fit = ols_independent_columns(xs, ys);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    beta.setConstant(nan);
    r.vcov = Eigen::MatrixXd::Constant(k, k, nan);
    for (Eigen::Index j = 0; j < fit.rank(); ++j) beta(fit.kept[static_cast<std::size_t>(j)]) = fit.beta(j);
    const Eigen::Index dof = X.rows() - static_cast<Eigen::Index>(X.groups.size()) - fit.rank();
    if (fit.rank() > 0 && dof > 0) {
      Eigen::MatrixXd sub = xs(Eigen::all, fit.kept);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(sub);
      Eigen::MatrixXd v = (fit.residuals.squaredNorm() / static_cast<double>(dof)) *
                          detail::inverse_gram(qr.matrixQR());
      r.vcov(fit.kept, fit.kept) = v;
    }
    if (auto c = X.find_column(kConstLabel); c && std::isnan(beta(*c))) {
      Eigen::VectorXd partial = y;
      for (auto j : fit.kept) partial -= X.values.col(j) * beta(j);
      beta(*c) = partial.mean();
    }
  }
  r.coef.assign(beta.data(), beta.data() + beta.size());
  detail::fill_inference(r);
  Eigen::VectorXd beta_fit = beta.unaryExpr([](double b) { return std::isnan(b) ? 0.0 : b; });
  r.r2 = r_squared_triple(X, y, beta_fit);
  detail::fill_wald(r, beta);
  return r;
}

inline RegressionResult re_gls(const DesignMatrix& X, const Eigen::VectorXd& y) {
  VarianceComponents vc = swamy_arora(X, y);
  RegressionResult r = re_gls(X, y, vc);
  if (vc.truncated) r.notes.push_back("negative sigma_u^2 estimate truncated to 0");
  return r;
}

// Pooled OLS with cluster-robust (by group id) standard errors.
inline RegressionResult pooled_cluster(const DesignMatrix& X, const Eigen::VectorXd& y) {
  detail::check_rows(X, y);
  RegressionResult r;
  r.method = Method::PooledCluster;
  r.labels = X.column_labels;
  r.n_obs = static_cast<std::size_t>(X.rows());
  detail::fill_group_stats(r, X.groups);
  const OlsFit fit = ols(X, y);
  r.vcov = cluster_robust_vcov(X, fit.residuals);
  r.coef.assign(fit.beta.data(), fit.beta.data() + fit.beta.size());
  detail::fill_inference(r);
  r.r2.overall = detail::squared_correlation(y, X.values * fit.beta);
  detail::fill_wald(r, fit.beta);
  return r;
}

inline RegressionResult estimate(const Design& design, Method method) {
  if (design.X.cols() >= design.X.rows()) {
    throw EstimationError("design has " + std::to_string(design.X.cols()) +
                          " columns but only " + std::to_string(design.X.rows()) +
                          " rows; need more rows than columns");
  }
  RegressionResult r = method == Method::ReGls ? re_gls(design.X, design.y)
                                               : pooled_cluster(design.X, design.y);
  r.dependent = dependent_label(design.dependent);
  for (const auto& w : design.warnings) r.notes.push_back(w);
  return r;
}

}  // namespace promises::econometrics
