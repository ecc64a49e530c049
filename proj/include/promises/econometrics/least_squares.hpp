#pragma once

// Least squares via Householder QR, the cluster-robust sandwich, and the
// bivariate fit used for the wills-on-shalls regression.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "promises/econometrics/design.hpp"

namespace promises::econometrics {

// A column is dependent when its diagonal entry of R falls below this
// fraction of the largest diagonal entry.
inline constexpr double kRankTolerance = 1e-10;

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
};

namespace detail {

inline std::vector<Eigen::Index> dependent_columns(const Eigen::MatrixXd& qr_matrix) {
  const Eigen::Index k = qr_matrix.cols();
  double largest = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) largest = std::max(largest, std::fabs(qr_matrix(j, j)));
  std::vector<Eigen::Index> bad;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(std::fabs(qr_matrix(j, j)) > kRankTolerance * largest)) bad.push_back(j);
  }
  return bad;
}

inline std::string column_name(const std::vector<std::string>& labels, Eigen::Index j) {
  if (static_cast<std::size_t>(j) < labels.size()) return labels[static_cast<std::size_t>(j)];
  return "column " + std::to_string(j);
}

// (X'X)^{-1} = R^{-1} R^{-T} from the upper triangle of a QR factorization.
inline Eigen::MatrixXd inverse_gram(const Eigen::MatrixXd& qr_matrix) {
  const Eigen::Index k = qr_matrix.cols();
  Eigen::MatrixXd r_inv = qr_matrix.topRows(k).triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(k, k));
  return r_inv * r_inv.transpose();
}

}  // namespace detail

// Minimizes ||y - X b||^2. Throws on rank deficiency, naming the columns that
// depend on earlier ones.
inline OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<std::string>& labels = {}) {
  if (X.rows() != y.size()) throw EstimationError("ols: X and y row counts differ");
  if (X.cols() == 0 || X.rows() < X.cols()) {
    throw EstimationError("ols: need at least as many rows as columns");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  auto bad = detail::dependent_columns(qr.matrixQR());
  if (!bad.empty()) {
    std::string names;
    for (auto j : bad) {
      if (!names.empty()) names += ", ";
      names += detail::column_name(labels, j);
    }
    throw EstimationError("rank-deficient design: linearly dependent column(s): " + names);
  }
  OlsFit fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - X * fit.beta;
  return fit;
}

inline OlsFit ols(const DesignMatrix& X, const Eigen::VectorXd& y) {
  return ols(X.values, y, X.column_labels);
}

// Least squares on a maximal set of linearly independent columns, chosen
// greedily left to right. Used for the auxiliary within and between
// regressions, where demeaning or averaging makes some columns collinear.
struct SubsetFit {
  std::vector<Eigen::Index> kept;
  Eigen::VectorXd beta;  // aligned with `kept`
  Eigen::VectorXd residuals;

  Eigen::Index rank() const { return static_cast<Eigen::Index>(kept.size()); }
};

inline SubsetFit ols_independent_columns(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  SubsetFit fit;
  double largest = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::vector<Eigen::Index> trial = fit.kept;
    trial.push_back(j);
    if (static_cast<Eigen::Index>(trial.size()) > X.rows()) break;
    Eigen::MatrixXd sub = X(Eigen::all, trial);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(sub);
    const auto last = static_cast<Eigen::Index>(trial.size()) - 1;
    const double diag = std::fabs(qr.matrixQR()(last, last));
    const double scale = std::max(largest, X.col(j).norm());
    if (diag > kRankTolerance * scale) {
      fit.kept = std::move(trial);
      largest = std::max(largest, diag);
    }
  }
  if (fit.kept.empty()) {
    fit.beta.resize(0);
    fit.residuals = y;
    return fit;
  }
  Eigen::MatrixXd sub = X(Eigen::all, fit.kept);
  fit.beta = sub.householderQr().solve(y);
  fit.residuals = y - sub * fit.beta;
  return fit;
}

// s^2 (X'X)^{-1} with s^2 = RSS / (N - K).
inline Eigen::MatrixXd conventional_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals) {
  const double dof = static_cast<double>(X.rows() - X.cols());
  if (!(dof > 0)) throw EstimationError("conventional vcov: no residual degrees of freedom");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  return (residuals.squaredNorm() / dof) * detail::inverse_gram(qr.matrixQR());
}

// c (X'X)^{-1} (sum_g X_g' u_g u_g' X_g) (X'X)^{-1} with
// c = G/(G-1) * (N-1)/(N-K).
inline Eigen::MatrixXd cluster_robust_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                           const std::vector<std::string>& clusters) {
  const Eigen::Index n = X.rows(), k = X.cols();
  if (residuals.size() != n || static_cast<Eigen::Index>(clusters.size()) != n) {
    throw EstimationError("cluster vcov: X, residuals and cluster ids differ in length");
  }
  std::map<std::string, Eigen::VectorXd> scores;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [it, inserted] = scores.try_emplace(clusters[static_cast<std::size_t>(i)]);
    if (inserted) it->second = Eigen::VectorXd::Zero(k);
    it->second.noalias() += X.row(i).transpose() * residuals(i);
  }
  const auto g = static_cast<double>(scores.size());
  if (scores.size() < 2) throw EstimationError("cluster vcov: need >=2 clusters");
  if (n <= k) throw EstimationError("cluster vcov: need N > K");
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [id, s] : scores) meat.noalias() += s * s.transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd bread = detail::inverse_gram(qr.matrixQR());
  const double c = (g / (g - 1.0)) * (static_cast<double>(n - 1) / static_cast<double>(n - k));
  Eigen::MatrixXd v = c * bread * meat * bread;
  return 0.5 * (v + v.transpose());
}

inline Eigen::MatrixXd cluster_robust_vcov(const DesignMatrix& X, const Eigen::VectorXd& residuals) {
  return cluster_robust_vcov(X.values, residuals, X.cluster_ids);
}

struct SimpleFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

// Bivariate least squares y = intercept + slope * x.
inline SimpleFit simple_ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw EstimationError("simple ols: x and y differ in length");
  if (x.size() < 3) throw EstimationError("simple ols: need at least 3 observations");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw EstimationError("simple ols: x has zero variance");
  SimpleFit fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // Constant y leaves the correlation undefined.
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

}  // namespace promises::econometrics
