#pragma once

// Annual log returns, excess returns, and the lagged entity-year panel that
// pairs a year-t "will" count with the year t+1 return.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "promises/csv.hpp"
#include "promises/futuretense.hpp"

namespace promises::returns {

class ReturnsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PricePoint {
  int year = 0;
  double price = 0.0;  // year-end dividend-adjusted close
};

struct PriceSeries {
  std::string entity;
  std::vector<PricePoint> points;  // strictly increasing years
};

struct RiskFreeSeries {
  std::map<int, double> rates;  // annual decimal rate, used as-is

  std::optional<double> at(int year) const {
    auto it = rates.find(year);
    if (it == rates.end()) return std::nullopt;
    return it->second;
  }
};

// R_{t+1} = ln S_{t+1} - ln S_t, keyed by t+1. Only consecutive calendar
// years produce a return.
inline std::map<int, double> annual_log_returns(const PriceSeries& prices) {
  for (const auto& p : prices.points) {
    if (!(p.price > 0.0) || !std::isfinite(p.price)) {
      throw ReturnsError("nonpositive price for " + prices.entity + " in " +
                         std::to_string(p.year));
    }
  }
  std::map<int, double> out;
  for (std::size_t i = 1; i < prices.points.size(); ++i) {
    const auto& prev = prices.points[i - 1];
    const auto& cur = prices.points[i];
    if (cur.year <= prev.year) {
      throw ReturnsError("price years not strictly increasing for " + prices.entity + " at " +
                         std::to_string(cur.year));
    }
    if (cur.year - prev.year == 1) {
      out[cur.year] = std::log(cur.price) - std::log(prev.price);
    }
  }
  return out;
}

inline double excess(double r, double rf) { return r - rf; }

struct PanelRow {
  std::string entity;
  int year_t = 0;
  std::int64_t w_t = 0;
  double r_next = 0.0;
  std::optional<double> rf_next;

  std::optional<double> excess_next() const {
    if (!rf_next) return std::nullopt;
    return excess(r_next, *rf_next);
  }
  bool operator==(const PanelRow&) const = default;
};

struct PanelDataset {
  std::vector<PanelRow> rows;  // canonical (entity, year_t) order
  int base_year = 1993;

  std::size_t size() const { return rows.size(); }
  std::size_t groups() const {
    std::set<std::string> g;
    for (const auto& r : rows) g.insert(r.entity);
    return g.size();
  }
};

inline void sort_canonical(PanelDataset& panel) {
  std::stable_sort(panel.rows.begin(), panel.rows.end(), [](const PanelRow& a, const PanelRow& b) {
    return std::tie(a.entity, a.year_t) < std::tie(b.entity, b.year_t);
  });
}

inline void check_panel(const PanelDataset& panel) {
  for (std::size_t i = 1; i < panel.rows.size(); ++i) {
    const auto& a = panel.rows[i - 1];
    const auto& b = panel.rows[i];
    if (std::tie(a.entity, a.year_t) >= std::tie(b.entity, b.year_t)) {
      throw ReturnsError("panel rows not in canonical order or duplicated at (" + b.entity +
                         ", " + std::to_string(b.year_t) + ")");
    }
  }
  bool base_present = std::any_of(panel.rows.begin(), panel.rows.end(),
                                  [&](const PanelRow& r) { return r.year_t == panel.base_year; });
  // An empty panel is reported through the drop counts, not as an error.
  if (!panel.rows.empty() && !base_present) {
    throw ReturnsError("omitted category absent: base year " + std::to_string(panel.base_year) +
                       " has no panel rows");
  }
}

struct DropReport {
  std::size_t missing_return = 0;  // count row without R_{t+1}
  std::size_t missing_riskfree = 0;  // kept rows lacking rf_{t+1}
  std::vector<std::string> details;
};

struct PanelBuild {
  PanelDataset panel;
  DropReport drops;
};

// Joins counts (w_t = "will" tokens in year t) with R_{t+1}. Rows missing a
// return are dropped and reported; rf_{t+1} is attached when available.
inline PanelBuild build_panel(const std::vector<futuretense::CountRow>& counts,
                              const std::map<std::string, PriceSeries>& prices,
                              const RiskFreeSeries& rf, int base_year) {
  std::map<std::string, std::map<int, double>> returns;
  for (const auto& [entity, series] : prices) returns[entity] = annual_log_returns(series);

  PanelBuild out;
  out.panel.base_year = base_year;
  for (const auto& c : counts) {
    auto series = returns.find(c.entity);
    std::optional<double> r;
    if (series != returns.end()) {
      auto it = series->second.find(c.year + 1);
      if (it != series->second.end()) r = it->second;
    }
    if (!r) {
      ++out.drops.missing_return;
      out.drops.details.push_back("missing return: " + c.entity + " " + std::to_string(c.year) +
                                  " (no R_" + std::to_string(c.year + 1) + ")");
      continue;
    }
    PanelRow row{c.entity, c.year, static_cast<std::int64_t>(c.counts.will), *r,
                 rf.at(c.year + 1)};
    if (!row.rf_next) {
      ++out.drops.missing_riskfree;
      out.drops.details.push_back("missing risk-free rate: " + c.entity + " " +
                                  std::to_string(c.year) + " (no rf_" +
                                  std::to_string(c.year + 1) + ")");
    }
    out.panel.rows.push_back(std::move(row));
  }
  sort_canonical(out.panel);
  check_panel(out.panel);
  return out;
}

// Prices CSV: entity,year,adj_close. Rows may arrive in any order.
inline std::map<std::string, PriceSeries> read_prices_csv(std::istream& in,
                                                          const std::string& source) {
  auto table = csv::Table::read(in, source);
  const auto ce = table.column("entity"), cy = table.column("year"),
             cp = table.column("adj_close");
  std::map<std::string, PriceSeries> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& rec = table.rows()[i];
    auto where = table.where(i);
    auto& series = out[rec[ce]];
    series.entity = rec[ce];
    series.points.push_back(PricePoint{static_cast<int>(csv::to_int(rec[cy], where)),
                                       csv::to_double(rec[cp], where)});
    if (!(series.points.back().price > 0.0)) {
      throw ReturnsError(where + ": nonpositive price for " + rec[ce] + " in " + rec[cy]);
    }
  }
  for (auto& [entity, series] : out) {
    std::sort(series.points.begin(), series.points.end(),
              [](const PricePoint& a, const PricePoint& b) { return a.year < b.year; });
    for (std::size_t i = 1; i < series.points.size(); ++i) {
      if (series.points[i].year == series.points[i - 1].year) {
        throw ReturnsError(source + ": duplicate price for " + entity + " in " +
                           std::to_string(series.points[i].year));
      }
    }
  }
  return out;
}

// Risk-free CSV: year,rate.
inline RiskFreeSeries read_riskfree_csv(std::istream& in, const std::string& source) {
  auto table = csv::Table::read(in, source);
  const auto cy = table.column("year"), cr = table.column("rate");
  RiskFreeSeries out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& rec = table.rows()[i];
    auto where = table.where(i);
    int year = static_cast<int>(csv::to_int(rec[cy], where));
    if (!out.rates.emplace(year, csv::to_double(rec[cr], where)).second) {
      throw ReturnsError(where + ": duplicate risk-free rate for " + std::to_string(year));
    }
  }
  return out;
}

// Panel CSV: entity,year_t,w_t,r_next,rf_next (rf_next empty when absent).
inline void write_panel_csv(std::ostream& out, const PanelDataset& panel) {
  out << "entity,year_t,w_t,r_next,rf_next\n";
  for (const auto& r : panel.rows) {
    out << csv::join({r.entity, std::to_string(r.year_t), std::to_string(r.w_t),
                      csv::format_double(r.r_next),
                      r.rf_next ? csv::format_double(*r.rf_next) : std::string()})
        << '\n';
  }
}

inline PanelDataset read_panel_csv(std::istream& in, const std::string& source, int base_year) {
  auto table = csv::Table::read(in, source);
  const auto ce = table.column("entity"), cy = table.column("year_t"), cw = table.column("w_t"),
             cr = table.column("r_next"), cf = table.column("rf_next");
  PanelDataset panel;
  panel.base_year = base_year;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& rec = table.rows()[i];
    auto where = table.where(i);
    PanelRow row;
    row.entity = rec[ce];
    row.year_t = static_cast<int>(csv::to_int(rec[cy], where));
    row.w_t = csv::to_int(rec[cw], where);
    if (row.w_t < 0) throw ReturnsError(where + ": negative w_t");
    row.r_next = csv::to_double(rec[cr], where);
    if (!rec[cf].empty()) row.rf_next = csv::to_double(rec[cf], where);
    panel.rows.push_back(std::move(row));
  }
  sort_canonical(panel);
  check_panel(panel);
  return panel;
}

}  // namespace promises::returns
