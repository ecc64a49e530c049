#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "promises/returns.hpp"

namespace promises::econometrics {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSignalLabel = "w_t";
inline constexpr std::string_view kConstLabel = "cons";

// Contiguous block of rows belonging to one entity.
struct GroupSpan {
  std::string entity;
  Eigen::Index begin = 0;
  Eigen::Index size = 0;
};

struct DesignMatrix {
  std::vector<std::string> column_labels;
  Eigen::MatrixXd values;
  std::vector<std::string> cluster_ids;  // one per row
  std::vector<GroupSpan> groups;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  std::optional<Eigen::Index> find_column(std::string_view label) const {
    for (std::size_t k = 0; k < column_labels.size(); ++k) {
      if (column_labels[k] == label) return static_cast<Eigen::Index>(k);
    }
    return std::nullopt;
  }
};

// Groups rows by cluster id; rows of one id must be adjacent.
inline std::vector<GroupSpan> group_spans(const std::vector<std::string>& ids) {
  std::vector<GroupSpan> spans;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (spans.empty() || spans.back().entity != ids[i]) {
      if (!seen.insert(ids[i]).second) {
        throw EstimationError("rows of group '" + ids[i] + "' are not contiguous");
      }
      spans.push_back(GroupSpan{ids[i], static_cast<Eigen::Index>(i), 0});
    }
    ++spans.back().size;
  }
  return spans;
}

inline DesignMatrix make_design(Eigen::MatrixXd values, std::vector<std::string> labels,
                                std::vector<std::string> cluster_ids) {
  if (labels.size() != static_cast<std::size_t>(values.cols())) {
    throw EstimationError("design: label count does not match column count");
  }
  if (cluster_ids.size() != static_cast<std::size_t>(values.rows())) {
    throw EstimationError("design: cluster id count does not match row count");
  }
  DesignMatrix d;
  d.groups = group_spans(cluster_ids);
  d.values = std::move(values);
  d.column_labels = std::move(labels);
  d.cluster_ids = std::move(cluster_ids);
  return d;
}

enum class Dependent { Return, Excess };

inline std::string dependent_label(Dependent dep) {
  return dep == Dependent::Return ? "R_{t+1}" : "R_{t+1} - rf_{t+1}";
}

struct Design {
  DesignMatrix X;
  Eigen::VectorXd y;
  Dependent dependent = Dependent::Return;
  std::size_t dropped_missing_riskfree = 0;
  std::vector<std::string> warnings;
};

// Columns: w_t, one dummy per year present other than the base year
// (ascending), cons. Excess-return designs drop rows without rf_{t+1}.
inline Design build_design(returns::PanelDataset panel, Dependent dep) {
  returns::sort_canonical(panel);
  Design out;
  out.dependent = dep;
  std::vector<const returns::PanelRow*> rows;
  for (const auto& r : panel.rows) {
    if (dep == Dependent::Excess && !r.rf_next) {
      ++out.dropped_missing_riskfree;
      out.warnings.push_back("dropped " + r.entity + " " + std::to_string(r.year_t) +
                             ": no risk-free rate for " + std::to_string(r.year_t + 1));
      continue;
    }
    rows.push_back(&r);
  }
  if (rows.empty()) throw EstimationError("design: panel is empty");

  std::set<int> years;
  for (const auto* r : rows) years.insert(r->year_t);
  if (!years.count(panel.base_year)) {
    throw EstimationError("omitted category absent: base year " +
                          std::to_string(panel.base_year) + " has no rows");
  }
  std::set<int> all_years;
  for (const auto& r : panel.rows) all_years.insert(r.year_t);
  for (int y : all_years) {
    if (!years.count(y)) {
      out.warnings.push_back("year " + std::to_string(y) +
                             " has no rows after drops; dummy omitted");
    }
  }
  std::vector<int> dummy_years;
  for (int y : years) {
    if (y != panel.base_year) dummy_years.push_back(y);
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(dummy_years.size() + 2);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, k);
  Eigen::VectorXd y(n);
  std::vector<std::string> labels;
  labels.emplace_back(kSignalLabel);
  for (int yr : dummy_years) labels.push_back("dum" + std::to_string(yr));
  labels.emplace_back(kConstLabel);
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = *rows[static_cast<std::size_t>(i)];
    values(i, 0) = static_cast<double>(r.w_t);
    auto it = std::lower_bound(dummy_years.begin(), dummy_years.end(), r.year_t);
    if (it != dummy_years.end() && *it == r.year_t) {
      values(i, 1 + (it - dummy_years.begin())) = 1.0;
    }
    values(i, k - 1) = 1.0;
    y(i) = dep == Dependent::Return ? r.r_next : *r.excess_next();
    ids.push_back(r.entity);
  }
  out.X = make_design(std::move(values), std::move(labels), std::move(ids));
  out.y = std::move(y);
  return out;
}

}  // namespace promises::econometrics
