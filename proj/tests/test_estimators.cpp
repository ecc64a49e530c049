#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "promises/econometrics/estimators.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace promises::econometrics;
using promises::returns::PanelDataset;
using promises::returns::PanelRow;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Balanced panel with G groups of T rows and design (x, cons).
struct Balanced {
  DesignMatrix X;
  Eigen::VectorXd y;
  std::vector<int> sizes;
};

Balanced balanced_panel(int groups, int periods, double sigma_u, double sigma_e, std::mt19937_64& rng,
                        int extra_columns = 1) {
  std::normal_distribution<double> nd;
  const int n = groups * periods;
  const int k = extra_columns + 1;
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  std::vector<std::string> ids;
  for (int g = 0; g < groups; ++g) {
    const double u = sigma_u * nd(rng);
    for (int t = 0; t < periods; ++t) {
      const int i = g * periods + t;
      for (int j = 0; j < extra_columns; ++j) x(i, j) = nd(rng) + 0.5 * g;
      x(i, k - 1) = 1.0;
      y(i) = 1.0 + 0.5 * x(i, 0) + u + sigma_e * nd(rng);
      ids.push_back(synthetic::entity_name(g));
    }
  }
  std::vector<std::string> labels;
  for (int j = 0; j < extra_columns; ++j) labels.push_back("x" + std::to_string(j));
  labels.emplace_back("cons");
  return {make_design(x, labels, ids), y, std::vector<int>(groups, periods)};
}

void expect_result_invariants(const RegressionResult& r) {
  for (std::size_t k = 0; k < r.coef.size(); ++k) {
    if (std::isnan(r.se[k])) continue;
    EXPECT_EQ(r.z[k], r.coef[k] / r.se[k]);
    EXPECT_NEAR(r.z[k] * r.se[k], r.coef[k], 1e-12 * std::fabs(r.coef[k]) + 1e-300);
    EXPECT_LE(r.ci_low[k], r.coef[k]);
    EXPECT_GE(r.ci_high[k], r.coef[k]);
    EXPECT_GT(r.p[k], 0.0);
    EXPECT_LE(r.p[k], 1.0);
    EXPECT_NEAR(r.p[k], 2.0 * (1.0 - promises::dist::normal_cdf(std::fabs(r.z[k]))), 1e-12);
  }
}

PanelDataset three_year_panel() {
  PanelDataset p;
  p.rows = {{"AAA", 1993, 3, 0.1, 0.0}, {"AAA", 1994, 5, 0.2, 0.0}, {"BBB", 1995, 4, -0.1, 0.0}};
  return p;
}

}  // namespace

TEST(BuildDesign, DummyPerNonBaseYear) {
  auto d = build_design(three_year_panel(), Dependent::Return);
  EXPECT_EQ(d.X.column_labels, (std::vector<std::string>{"w_t", "dum1994", "dum1995", "cons"}));
  EXPECT_EQ(d.X.cols(), 4);
  Eigen::MatrixXd expected(3, 4);
  expected << 3, 0, 0, 1, 5, 1, 0, 1, 4, 0, 1, 1;
  EXPECT_EQ(d.X.values, expected);
  EXPECT_EQ(d.X.groups.size(), 2u);
  // Too few rows for four columns: estimation refuses.
  EXPECT_THROW(estimate(d, Method::PooledCluster), EstimationError);
}

TEST(BuildDesign, ExcessWithZeroRiskFreeEqualsReturn) {
  auto a = build_design(three_year_panel(), Dependent::Return);
  auto b = build_design(three_year_panel(), Dependent::Excess);
  EXPECT_EQ(a.y, b.y);
}

TEST(BuildDesign, ExcessDropsRowsWithoutRiskFreeAndWarnsOnLostYear) {
  auto p = three_year_panel();
  p.rows[2].rf_next.reset();
  auto d = build_design(p, Dependent::Excess);
  EXPECT_EQ(d.dropped_missing_riskfree, 1u);
  EXPECT_EQ(d.X.column_labels, (std::vector<std::string>{"w_t", "dum1994", "cons"}));
  ASSERT_EQ(d.warnings.size(), 2u);
  EXPECT_NE(d.warnings[1].find("year 1995"), std::string::npos);
}

TEST(BuildDesign, MissingBaseYear) {
  auto p = three_year_panel();
  p.base_year = 1990;
  try {
    build_design(p, Dependent::Return);
    FAIL();
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("omitted category absent"), std::string::npos);
  }
}

TEST(Theta, ZeroGroupVarianceGivesZeroTheta) {
  std::mt19937_64 rng(50);
  auto b = balanced_panel(5, 3, 1, 1, rng);
  auto vc = make_components(b.X, 0.0, 2.0);
  for (double t : vc.theta) EXPECT_EQ(t, 0.0);
  auto vc2 = make_components(b.X, 1.0, 1.0);
  for (double t : vc2.theta) EXPECT_NEAR(t, 1.0 - std::sqrt(1.0 / 4.0), 1e-15);
}

// Oracle: beta = (X' Omega^-1 X)^-1 X' Omega^-1 y with Omega built and inverted
// explicitly.
TEST(ReGls, MatchesFullCovarianceGls) {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> gd(2, 20), td(2, 5);
  std::uniform_real_distribution<double> var(0.1, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto b = balanced_panel(gd(rng), td(rng), 1.0, 1.0, rng, 2);
    const double su2 = var(rng), se2 = var(rng);
    auto r = re_gls(b.X, b.y, make_components(b.X, su2, se2));
    Eigen::VectorXd expected = oracle::full_gls_beta(b.X.values, b.y, b.sizes, su2, se2);
    for (Eigen::Index k = 0; k < expected.size(); ++k) {
      ASSERT_NEAR(r.coef[static_cast<std::size_t>(k)], expected(k), 1e-8);
    }
  }
}

TEST(ReGls, ZeroGroupVarianceEqualsPooledOlsConventional) {
  std::mt19937_64 rng(52);
  auto b = balanced_panel(8, 4, 1.0, 1.0, rng, 2);
  auto r = re_gls(b.X, b.y, make_components(b.X, 0.0, 1.7));
  auto fit = ols(b.X, b.y);
  Eigen::MatrixXd v = conventional_vcov(b.X.values, fit.residuals);
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
    EXPECT_NEAR(r.coef[k], fit.beta(k), 1e-12);
    EXPECT_NEAR(r.se[k], std::sqrt(v(k, k)), 1e-12);
  }
}

TEST(ReGls, ResultInvariants) {
  std::mt19937_64 rng(53);
  synthetic::PanelSpec spec;
  spec.groups = 30;
  spec.slope = -2e-4;
  spec.sigma_u = 0.1;
  spec.sigma_e = 0.3;
  auto panel = synthetic::make_panel(spec, rng);
  for (auto m : {Method::ReGls, Method::PooledCluster}) {
    auto r = estimate(build_design(panel, Dependent::Return), m);
    expect_result_invariants(r);
    ASSERT_TRUE(r.wald_signal);
    EXPECT_NEAR(r.wald_signal->chi2, r.z[0] * r.z[0], 1e-9 * r.z[0] * r.z[0]);
    EXPECT_EQ(r.wald.df, static_cast<int>(r.labels.size()) - 1);
  }
}

TEST(SwamyArora, TruncatesWhenGroupMeansCarryNoVariance) {
  // y is demeaned within each group, so every group mean is zero, the
  // between regression fits perfectly and the raw sigma_u2 is negative.
  std::mt19937_64 rng(54);
  std::normal_distribution<double> nd;
  const int g = 10, t = 4;
  Eigen::MatrixXd x(g * t, 2);
  Eigen::VectorXd y(g * t);
  std::vector<std::string> ids;
  for (int i = 0; i < g; ++i) {
    double sum = 0;
    for (int j = 0; j < t; ++j) {
      y(i * t + j) = nd(rng);
      sum += y(i * t + j);
      x(i * t + j, 0) = nd(rng);
      x(i * t + j, 1) = 1.0;
      ids.push_back(synthetic::entity_name(i));
    }
    for (int j = 0; j < t; ++j) y(i * t + j) -= sum / t;
  }
  auto vc = swamy_arora(make_design(x, {"x", "cons"}, ids), y);
  EXPECT_TRUE(vc.truncated);
  EXPECT_EQ(vc.sigma_u2, 0.0);
  EXPECT_GT(vc.sigma_e2, 0.0);
  for (double th : vc.theta) EXPECT_EQ(th, 0.0);
}

TEST(SwamyArora, TruncationConsistencyOnNoEffectData) {
  int truncated = 0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto b = balanced_panel(50, 5, 0.0, 1.0, rng);
    auto vc = swamy_arora(b.X, b.y);
    if (vc.truncated) {
      ++truncated;
      EXPECT_EQ(vc.sigma_u2, 0.0);
      for (double th : vc.theta) EXPECT_EQ(th, 0.0);
    } else {
      EXPECT_LT(vc.sigma_u2, 0.2);
    }
  }
  EXPECT_GT(truncated, 0);
}

TEST(SwamyArora, ExactWithinFitIsDegenerate) {
  // y = x exactly: no noise and no effects.
  Eigen::MatrixXd x(9, 2);
  x << 1, 1, 2, 1, 4, 1, 3, 1, 7, 1, 5, 1, 0, 1, 9, 1, 2, 1;
  Eigen::VectorXd y = x.col(0);
  auto X = make_design(x, {"x", "cons"}, {"A", "A", "A", "B", "B", "B", "C", "C", "C"});
  auto vc = swamy_arora(X, y);
  EXPECT_TRUE(vc.degenerate);
  EXPECT_EQ(vc.sigma_e2, 0.0);
  auto r = re_gls(X, y);
  EXPECT_NEAR(r.coef[0], 1.0, 1e-12);
  EXPECT_NEAR(r.coef[1], 0.0, 1e-12);
  EXPECT_FALSE(r.notes.empty());
}

TEST(SwamyArora, AllSingletonGroupsIsAnError) {
  std::mt19937_64 rng(55);
  auto b = balanced_panel(10, 1, 1, 1, rng);
  EXPECT_THROW(swamy_arora(b.X, b.y), EstimationError);
}

TEST(RSquared, MatchesCorrelationOracle) {
  std::mt19937_64 rng(56);
  synthetic::PanelSpec spec;
  spec.groups = 25;
  spec.sigma_u = 0.2;
  spec.sigma_e = 0.2;
  spec.slope = 0.001;
  auto d = build_design(synthetic::make_panel(spec, rng), Dependent::Return);
  auto fit = ols(d.X, d.y);
  auto r2 = r_squared_triple(d.X, d.y, fit.beta);
  Eigen::VectorXd xb = d.X.values * fit.beta;
  EXPECT_NEAR(*r2.overall, *oracle::squared_correlation(to_std(d.y), to_std(xb)), 1e-10);
  std::vector<double> yw, fw, ym, fm;
  for (const auto& g : d.X.groups) {
    const double my = d.y.segment(g.begin, g.size).mean(), mf = xb.segment(g.begin, g.size).mean();
    ym.push_back(my);
    fm.push_back(mf);
    for (Eigen::Index i = g.begin; i < g.begin + g.size; ++i) {
      yw.push_back(d.y(i) - my);
      fw.push_back(xb(i) - mf);
    }
  }
  EXPECT_NEAR(*r2.within, *oracle::squared_correlation(yw, fw), 1e-10);
  EXPECT_NEAR(*r2.between, *oracle::squared_correlation(ym, fm), 1e-10);
}

TEST(RSquared, PerfectFitAndConstantFit) {
  std::mt19937_64 rng(57);
  auto b = balanced_panel(6, 3, 1, 1, rng);
  Eigen::VectorXd beta(2);
  beta << 0.7, -0.2;
  Eigen::VectorXd y = b.X.values * beta;
  auto r2 = r_squared_triple(b.X, y, beta);
  EXPECT_NEAR(*r2.overall, 1.0, 1e-12);
  EXPECT_NEAR(*r2.within, 1.0, 1e-12);
  EXPECT_NEAR(*r2.between, 1.0, 1e-12);
  Eigen::VectorXd cons_only(2);
  cons_only << 0.0, 0.3;
  auto undefined = r_squared_triple(b.X, b.y, cons_only);
  EXPECT_FALSE(undefined.overall);
  EXPECT_FALSE(undefined.within);
  EXPECT_FALSE(undefined.between);
}

TEST(Wald, SingleCoefficientIsZSquared) {
  Eigen::VectorXd beta(2);
  beta << -.0001965, 0.01;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 2);
  v(0, 0) = .0000833 * .0000833;
  v(1, 1) = 1;
  auto w = wald_joint(beta, v, {"w_t", "cons"}, {"w_t"});
  const double z = -.0001965 / .0000833;
  EXPECT_NEAR(w.chi2, z * z, 1e-12);
  EXPECT_NEAR(w.chi2, 5.5647, 1e-4);
  EXPECT_EQ(w.df, 1);
}

TEST(Wald, ZeroAndDiagonalCases) {
  Eigen::MatrixXd v(2, 2);
  v << 4.0, 0.0, 0.0, 0.25;
  EXPECT_EQ(wald_joint(Eigen::VectorXd::Zero(2), v, {"a", "b"}, {"a", "b"}).chi2, 0.0);
  Eigen::VectorXd beta(2);
  beta << 1.0, 1.0;
  auto w = wald_joint(beta, v, {"a", "b"}, {"a", "b"});
  EXPECT_NEAR(w.chi2, 1.0 / 4.0 + 1.0 / 0.25, 1e-14);
  EXPECT_EQ(w.df, 2);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(wald_joint(beta, singular, {"a", "b"}, {"a", "b"}), EstimationError);
}

// Shifting y by any function of year alone moves only dummies and cons.
TEST(SlopeInvariance, YearShiftLeavesSignalUnchanged) {
  std::mt19937_64 rng(58);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    synthetic::PanelSpec spec;
    spec.groups = 40;
    spec.years = 8;
    spec.slope = -2e-4;
    spec.sigma_u = 0.1;
    spec.sigma_e = 0.3;
    auto panel = synthetic::make_panel(spec, rng);
    std::map<int, double> shift;
    for (int y = 1993; y < 2001; ++y) shift[y] = nd(rng);
    auto shifted = panel;
    for (auto& r : shifted.rows) r.r_next += shift[r.year_t];
    for (auto m : {Method::ReGls, Method::PooledCluster}) {
      auto a = estimate(build_design(panel, Dependent::Return), m);
      auto b = estimate(build_design(shifted, Dependent::Return), m);
      ASSERT_LT(std::fabs(a.coef[0] - b.coef[0]), 1e-12);
      ASSERT_LT(std::fabs(a.se[0] - b.se[0]), 1e-12);
    }
  }
}

TEST(PermutationInvariance, RowOrderDoesNotMatter) {
  std::mt19937_64 rng(59);
  synthetic::PanelSpec spec;
  spec.groups = 30;
  spec.sigma_u = 0.3;
  auto panel = synthetic::make_panel(spec, rng);
  auto shuffled = panel;
  std::shuffle(shuffled.rows.begin(), shuffled.rows.end(), rng);
  for (auto m : {Method::ReGls, Method::PooledCluster}) {
    auto a = estimate(build_design(panel, Dependent::Return), m);
    auto b = estimate(build_design(shuffled, Dependent::Return), m);
    EXPECT_EQ(a.coef, b.coef);
    EXPECT_EQ(a.se, b.se);
  }
}

TEST(PooledCluster, RobustExceedsConventionalUnderClusteredErrors) {
  int larger = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    auto b = balanced_panel(40, 5, 1.0, 0.5, rng);
    auto r = pooled_cluster(b.X, b.y);
    auto fit = ols(b.X, b.y);
    Eigen::MatrixXd v = conventional_vcov(b.X.values, fit.residuals);
    if (r.se[0] > std::sqrt(v(0, 0))) ++larger;
  }
  EXPECT_GE(larger, 95);
}
