#pragma once

// Fixed-width regression tables in the familiar panel-software layout, and a
// JSON rendering carrying every field of a RegressionResult.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "promises/econometrics/estimators.hpp"

namespace promises::report {

namespace detail {

inline std::string printf_str(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

inline void strip_trailing_zeros(std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos) return;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
}

inline void strip_leading_zero(std::string& s) {
  if (s.rfind("0.", 0) == 0) {
    s.erase(0, 1);
  } else if (s.rfind("-0.", 0) == 0) {
    s.erase(1, 1);
  }
}

}  // namespace detail

// Up to seven significant digits in at most `width` characters, leading zero
// dropped (-.0001965); exponent form when fixed notation cannot fit.
inline std::string format_general(double v, std::size_t width = 9) {
  if (std::isnan(v)) return ".";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  if (v == 0.0) return "0";
  const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(v))));
  for (int decimals = std::max(0, 6 - magnitude); decimals >= 0; --decimals) {
    std::string s = detail::printf_str("%.*f", decimals, v);
    detail::strip_trailing_zeros(s);
    detail::strip_leading_zero(s);
    if (s.size() <= width && s != "0" && s != "-0" && s != "-") return s;
  }
  for (int digits = 3; digits >= 0; --digits) {
    std::string s = detail::printf_str("%.*e", digits, v);
    if (s.size() <= width || digits == 0) return s;
  }
  return detail::printf_str("%.0e", v);
}

inline std::string format_fixed(double v, int decimals) {
  if (std::isnan(v)) return ".";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return detail::printf_str("%.*f", decimals, v);
}

inline std::string format_r2(const std::optional<double>& v) {
  return v ? format_fixed(*v, 4) : ".";
}

namespace detail {

inline constexpr int kLeftWidth = 48;
inline const std::string kRule(78, '-');
inline const std::string kSplitRule = std::string(13, '-') + "+" + std::string(64, '-');

// One header line: left text padded to the split, then "label = value".
inline std::string header_line(const std::string& left, const std::string& label,
                               const std::string& value) {
  std::string out = left;
  if (!label.empty()) {
    if (out.size() < static_cast<std::size_t>(kLeftWidth)) out.resize(kLeftWidth, ' ');
    out += printf_str("%-19s= %9s", label.c_str(), value.c_str());
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out + "\n";
}

inline std::string coef_line(const std::string& label, double coef, double se, double z, double p,
                             double lo, double hi) {
  std::string name = label.size() > 12 ? label.substr(0, 12) : label;
  return printf_str("%12s | %10s %10s %8s %7s    %10s %10s\n", name.c_str(),
                    format_general(coef).c_str(), format_general(se).c_str(),
                    format_fixed(z, 2).c_str(), format_fixed(p, 3).c_str(),
                    format_general(lo).c_str(), format_general(hi).c_str());
}

inline std::string wald_label(const econometrics::WaldTest& w) {
  return "Wald chi2(" + std::to_string(w.df) + ")";
}

}  // namespace detail

inline std::string render_table(const econometrics::RegressionResult& r) {
  using detail::header_line;
  std::string out;
  const bool re = r.method == econometrics::Method::ReGls;
  const std::string n_obs = std::to_string(r.n_obs);
  const std::string n_groups = std::to_string(r.n_groups);

  std::vector<std::pair<std::string, std::string>> wald_rows;
  wald_rows.emplace_back(detail::wald_label(r.wald), format_fixed(r.wald.chi2, 2));
  wald_rows.emplace_back("Prob > chi2", format_fixed(r.wald.p, 4));
  if (r.wald_signal) {
    wald_rows.emplace_back("Wald chi2(1) w_t", format_fixed(r.wald_signal->chi2, 2));
    wald_rows.emplace_back("Prob > chi2", format_fixed(r.wald_signal->p, 4));
  }

  if (re) {
    out += header_line("Random-effects GLS regression", "Number of obs", n_obs);
    out += header_line("Group variable (i): id", "Number of groups", n_groups);
    out += "\n";
    out += header_line("R-sq:  within  = " + format_r2(r.r2.within), "Obs per group: min",
                       std::to_string(r.group_min));
    out += header_line("       between = " + format_r2(r.r2.between), "               avg",
                       format_fixed(r.group_avg, 1));
    out += header_line("       overall = " + format_r2(r.r2.overall), "               max",
                       std::to_string(r.group_max));
    out += "\n";
    const char* left[] = {"Random effects u_i ~ Gaussian", "corr(u_i, X)       = 0 (assumed)"};
    for (std::size_t i = 0; i < wald_rows.size(); ++i) {
      out += header_line(i < 2 ? left[i] : "", wald_rows[i].first, wald_rows[i].second);
    }
  } else {
    out += header_line("Regression with robust standard errors", "Number of obs", n_obs);
    out += header_line("", "R-squared", format_r2(r.r2.overall));
    const std::string clusters = "Number of clusters (id) = " + n_groups;
    for (std::size_t i = 0; i < wald_rows.size(); ++i) {
      out += header_line(i == 0 ? clusters : "", wald_rows[i].first, wald_rows[i].second);
    }
  }
  out += "\n";
  out += "Dep var. " + r.dependent + "\n";
  out += detail::kRule + "\n";
  if (!re) out += detail::printf_str("%12s | %10s %10s\n", "", "", "Robust");
  out += detail::printf_str("%12s | %10s %10s %8s %7s    %21s\n", "", "Coef.", "Std. Err.", "z",
                            "P>z", "[95% Conf. Interval]");
  out += detail::kSplitRule + "\n";
  for (std::size_t k = 0; k < r.labels.size(); ++k) {
    out += detail::coef_line(r.labels[k], r.coef[k], r.se[k], r.z[k], r.p[k], r.ci_low[k],
                             r.ci_high[k]);
  }
  if (re && r.components) {
    out += detail::kSplitRule + "\n";
    auto row = [&](const char* name, double v) {
      out += detail::printf_str("%12s | %10s\n", name, format_general(v).c_str());
    };
    row("sigma_u", std::sqrt(r.components->sigma_u2));
    row("sigma_e", std::sqrt(r.components->sigma_e2));
    row("rho", r.components->rho());
  }
  out += detail::kRule + "\n";
  for (const auto& note : r.notes) out += "Note: " + note + "\n";
  return out;
}

inline nlohmann::json wald_json(const econometrics::WaldTest& w) {
  return {{"subset", w.subset}, {"chi2", w.chi2}, {"df", w.df}, {"p", w.p}};
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const econometrics::RegressionResult& r) {
  using nlohmann::json;
  json coefs = json::array();
  for (std::size_t k = 0; k < r.labels.size(); ++k) {
    coefs.push_back({{"label", r.labels[k]},
                     {"coef", r.coef[k]},
                     {"se", r.se[k]},
                     {"z", r.z[k]},
                     {"p", r.p[k]},
                     {"ci_low", r.ci_low[k]},
                     {"ci_high", r.ci_high[k]}});
  }
  json vcov = json::array();
  for (Eigen::Index i = 0; i < r.vcov.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.vcov.cols(); ++j) row.push_back(r.vcov(i, j));
    vcov.push_back(std::move(row));
  }
  json j = {
      {"method", econometrics::method_tag(r.method)},
      {"dependent", r.dependent},
      {"n_obs", r.n_obs},
      {"n_groups", r.n_groups},
      {"obs_per_group", {{"min", r.group_min}, {"avg", r.group_avg}, {"max", r.group_max}}},
      {"r2_within", optional_json(r.r2.within)},
      {"r2_between", optional_json(r.r2.between)},
      {"r2_overall", optional_json(r.r2.overall)},
      {"wald_chi2", r.wald.chi2},
      {"wald_df", r.wald.df},
      {"wald", wald_json(r.wald)},
      {"wald_w_t", r.wald_signal ? wald_json(*r.wald_signal) : json(nullptr)},
      {"ci_multiplier", econometrics::kCiMultiplier},
      {"coefficients", std::move(coefs)},
      {"vcov", std::move(vcov)},
      {"notes", r.notes},
  };
  if (r.components) {
    const auto& vc = *r.components;
    j["variance_components"] = {{"sigma_u2", vc.sigma_u2},
                                {"sigma_e2", vc.sigma_e2},
                                {"rho", vc.rho()},
                                {"theta", vc.theta},
                                {"degenerate", vc.degenerate},
                                {"truncated", vc.truncated},
                                {"harmonic_mean_group_size", vc.harmonic_mean_group_size}};
  } else {
    j["variance_components"] = nullptr;
  }
  return j;
}

inline nlohmann::json to_json(const econometrics::SimpleFit& fit, const std::string& y_label,
                              const std::string& x_label) {
  return {{"method", econometrics::method_tag(econometrics::Method::SimpleOls)},
          {"dependent", y_label},
          {"regressor", x_label},
          {"n_obs", fit.n},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r2", fit.r2}};
}

}  // namespace promises::report
