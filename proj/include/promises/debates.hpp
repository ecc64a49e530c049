#pragma once

// Debate analysis: per-candidate future-tense totals, the fewer-promises
// winner rule, and a one-sided paired t-test of loser minus winner totals.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "promises/corpus.hpp"
#include "promises/csv.hpp"
#include "promises/distributions.hpp"
#include "promises/futuretense.hpp"
#include "promises/io.hpp"

namespace promises::debates {

class DebateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TieError : public DebateError {
 public:
  using DebateError::DebateError;
};

struct CandidateTotal {
  std::string name;
  std::uint64_t total = 0;

  bool operator==(const CandidateTotal&) const = default;
};

struct ElectionRecord {
  int year = 0;
  std::array<CandidateTotal, 2> candidates;
  std::optional<std::string> actual_winner;

  const CandidateTotal& get(const std::string& name) const {
    for (const auto& c : candidates) {
      if (c.name == name) return c;
    }
    throw DebateError(std::to_string(year) + ": no candidate named " + name);
  }
};

struct Transcript {
  std::string name;  // debate identifier, e.g. file stem
  std::string text;
};

// Maps a trimmed speaker label to a canonical candidate name.
using AliasMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string resolve(const std::string& speaker, const AliasMap& aliases) {
  std::string key = trim(speaker);
  auto it = aliases.find(key);
  return it == aliases.end() ? key : it->second;
}

}  // namespace detail

// Sums FutureCounts::total() over every turn of each candidate in every
// transcript of one election. Other speakers are ignored.
inline ElectionRecord candidate_totals(int year, const std::vector<Transcript>& transcripts,
                                       const std::pair<std::string, std::string>& names,
                                       const AliasMap& aliases = {},
                                       std::optional<std::string> actual_winner = std::nullopt) {
  if (names.first == names.second) {
    throw DebateError(std::to_string(year) + ": the two candidates must differ");
  }
  ElectionRecord rec;
  rec.year = year;
  rec.candidates = {CandidateTotal{names.first, 0}, CandidateTotal{names.second, 0}};
  std::array<bool, 2> seen{false, false};
  for (const auto& t : transcripts) {
    for (const auto& [speaker, text] : corpus::segment_by_speaker(t.text)) {
      const std::string who = detail::resolve(speaker, aliases);
      for (std::size_t c = 0; c < 2; ++c) {
        if (who == rec.candidates[c].name) {
          seen[c] = true;
          rec.candidates[c].total += futuretense::count_future(text).total();
        }
      }
    }
  }
  for (std::size_t c = 0; c < 2; ++c) {
    if (!seen[c]) {
      throw DebateError(std::to_string(year) + ": candidate " + rec.candidates[c].name +
                        " does not speak in any transcript");
    }
  }
  if (actual_winner && *actual_winner != names.first && *actual_winner != names.second) {
    throw DebateError(std::to_string(year) + ": actual winner " + *actual_winner +
                      " is not one of the candidates");
  }
  rec.actual_winner = std::move(actual_winner);
  return rec;
}

// The candidate with the strictly smaller total. Equal totals are an error.
inline std::string predict_winner(const ElectionRecord& rec) {
  const auto& [a, b] = rec.candidates;
  if (a.total == b.total) {
    throw TieError(std::to_string(rec.year) + ": tie at " + std::to_string(a.total) +
                   " future-tense markers; the winner rule is undefined");
  }
  return a.total < b.total ? a.name : b.name;
}

inline const CandidateTotal& loser_of(const ElectionRecord& rec) {
  if (!rec.actual_winner) throw DebateError(std::to_string(rec.year) + ": no actual winner");
  return rec.candidates[0].name == *rec.actual_winner ? rec.candidates[1] : rec.candidates[0];
}

inline const CandidateTotal& winner_of(const ElectionRecord& rec) {
  if (!rec.actual_winner) throw DebateError(std::to_string(rec.year) + ": no actual winner");
  return rec.get(*rec.actual_winner);
}

inline double student_t_cdf(double t, int df) { return dist::student_t_cdf(t, df); }

struct TTestResult {
  std::optional<double> t;  // empty when the differences have zero variance
  int df = 0;
  std::size_t n = 0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  int sign = 0;  // sign of mean_diff
  double critical_90 = 0.0;  // one-sided 90% Student t critical value
  bool significant_90 = false;
};

// d_i = loser_total - winner_total; t = mean(d) / (sd(d) / sqrt(n)), sample
// sd; significant when t exceeds the one-sided 90% critical value at n-1 df.
inline TTestResult loser_winner_ttest(const std::vector<ElectionRecord>& records) {
  std::vector<double> d;
  for (const auto& rec : records) {
    if (!rec.actual_winner) continue;
    d.push_back(static_cast<double>(loser_of(rec).total) -
                static_cast<double>(winner_of(rec).total));
  }
  if (d.size() < 2) throw DebateError("t-test needs >=2 elections with a known winner");
  TTestResult r;
  r.n = d.size();
  r.df = static_cast<int>(d.size()) - 1;
  const auto n = static_cast<double>(d.size());
  for (double v : d) r.mean_diff += v;
  r.mean_diff /= n;
  double ss = 0.0;
  for (double v : d) ss += (v - r.mean_diff) * (v - r.mean_diff);
  r.sd_diff = std::sqrt(ss / (n - 1.0));
  r.sign = (r.mean_diff > 0) - (r.mean_diff < 0);
  r.critical_90 = dist::student_t_quantile(0.90, r.df);
  if (r.sd_diff > 0) {
    r.t = r.mean_diff / (r.sd_diff / std::sqrt(n));
    r.significant_90 = *r.t > r.critical_90;
  }
  return r;
}

// Election fixture CSV: year,candidate,total,actual_winner_flag. Exactly two
// rows per year; at most one flagged winner.
inline std::vector<ElectionRecord> read_fixtures_csv(std::istream& in, const std::string& source) {
  auto table = csv::Table::read(in, source);
  const auto cy = table.column("year"), cc = table.column("candidate"),
             ct = table.column("total"), cw = table.column("actual_winner_flag");
  std::map<int, std::vector<std::pair<CandidateTotal, bool>>> by_year;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& rec = table.rows()[i];
    auto where = table.where(i);
    auto total = csv::to_int(rec[ct], where);
    if (total < 0) throw DebateError(where + ": negative total");
    auto flag = csv::to_int(rec[cw], where);
    if (flag != 0 && flag != 1) throw DebateError(where + ": actual_winner_flag must be 0 or 1");
    by_year[static_cast<int>(csv::to_int(rec[cy], where))].push_back(
        {CandidateTotal{detail::trim(rec[cc]), static_cast<std::uint64_t>(total)}, flag == 1});
  }
  std::vector<ElectionRecord> out;
  for (auto& [year, rows] : by_year) {
    if (rows.size() != 2) {
      throw DebateError(source + ": year " + std::to_string(year) + " has " +
                        std::to_string(rows.size()) + " candidates, expected 2");
    }
    if (rows[0].first.name == rows[1].first.name) {
      throw DebateError(source + ": year " + std::to_string(year) + " repeats candidate " +
                        rows[0].first.name);
    }
    if (rows[0].second && rows[1].second) {
      throw DebateError(source + ": year " + std::to_string(year) + " flags two winners");
    }
    ElectionRecord rec;
    rec.year = year;
    rec.candidates = {rows[0].first, rows[1].first};
    for (const auto& [c, won] : rows) {
      if (won) rec.actual_winner = c.name;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline void write_fixtures_csv(std::ostream& out, const std::vector<ElectionRecord>& records) {
  out << "year,candidate,total,actual_winner_flag\n";
  for (const auto& rec : records) {
    for (const auto& c : rec.candidates) {
      out << csv::join({std::to_string(rec.year), c.name, std::to_string(c.total),
                        rec.actual_winner == c.name ? "1" : "0"})
          << '\n';
    }
  }
}

// Candidates CSV for transcript mode: year,candidate,actual_winner_flag.
struct ElectionSpec {
  int year = 0;
  std::pair<std::string, std::string> names;
  std::optional<std::string> actual_winner;
};

inline std::vector<ElectionSpec> read_candidates_csv(std::istream& in, const std::string& source) {
  auto table = csv::Table::read(in, source);
  const auto cy = table.column("year"), cc = table.column("candidate"),
             cw = table.column("actual_winner_flag");
  std::map<int, std::vector<std::pair<std::string, bool>>> by_year;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& rec = table.rows()[i];
    auto where = table.where(i);
    auto flag = csv::to_int(rec[cw], where);
    if (flag != 0 && flag != 1) throw DebateError(where + ": actual_winner_flag must be 0 or 1");
    by_year[static_cast<int>(csv::to_int(rec[cy], where))].push_back(
        {detail::trim(rec[cc]), flag == 1});
  }
  std::vector<ElectionSpec> out;
  for (const auto& [year, rows] : by_year) {
    if (rows.size() != 2) {
      throw DebateError(source + ": year " + std::to_string(year) + " has " +
                        std::to_string(rows.size()) + " candidates, expected 2");
    }
    if (rows[0].second && rows[1].second) {
      throw DebateError(source + ": year " + std::to_string(year) + " flags two winners");
    }
    ElectionSpec spec{year, {rows[0].first, rows[1].first}, std::nullopt};
    for (const auto& [name, won] : rows) {
      if (won) spec.actual_winner = name;
    }
    out.push_back(std::move(spec));
  }
  return out;
}

// Alias CSV: alias,candidate.
inline AliasMap read_aliases_csv(std::istream& in, const std::string& source) {
  auto table = csv::Table::read(in, source);
  const auto ca = table.column("alias"), cc = table.column("candidate");
  AliasMap out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& rec = table.rows()[i];
    if (!out.emplace(detail::trim(rec[ca]), detail::trim(rec[cc])).second) {
      throw DebateError(table.where(i) + ": duplicate alias " + rec[ca]);
    }
  }
  return out;
}

// Reads `<root>/<year>/<debate>.txt`, keyed by year.
inline std::map<int, std::vector<Transcript>> load_transcripts(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw DebateError("transcript root not found: " + root.string());
  std::map<int, std::vector<Transcript>> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string dir = entry.path().filename().string();
    int year = 0;
    auto [ptr, perr] = std::from_chars(dir.data(), dir.data() + dir.size(), year);
    if (perr != std::errc{} || ptr != dir.data() + dir.size()) {
      throw DebateError("non-integer year directory: " + entry.path().string());
    }
    auto& list = out[year];
    for (const auto& file : fs::directory_iterator(entry.path())) {
      if (!file.is_regular_file() || file.path().extension() != ".txt") continue;
      list.push_back(Transcript{file.path().stem().string(),
                                corpus::sanitize_utf8(io::read_file(file.path()))});
    }
    std::sort(list.begin(), list.end(),
              [](const Transcript& a, const Transcript& b) { return a.name < b.name; });
  }
  return out;
}

// Prediction table CSV: year,candidate_a,total_a,candidate_b,total_b,predicted,actual,hit.
inline void write_predictions_csv(std::ostream& out, const std::vector<ElectionRecord>& records) {
  out << "year,candidate_a,total_a,candidate_b,total_b,predicted,actual,hit\n";
  for (const auto& rec : records) {
    const std::string predicted = predict_winner(rec);
    const std::string actual = rec.actual_winner.value_or("");
    const std::string hit = rec.actual_winner ? (predicted == actual ? "hit" : "miss") : "";
    out << csv::join({std::to_string(rec.year), rec.candidates[0].name,
                      std::to_string(rec.candidates[0].total), rec.candidates[1].name,
                      std::to_string(rec.candidates[1].total), predicted, actual, hit})
        << '\n';
  }
}

// Backing data for the winner/loser bar chart: elections with a known winner.
inline void write_figure_csv(std::ostream& out, const std::vector<ElectionRecord>& records) {
  out << "year,winner,winner_total,loser,loser_total\n";
  for (const auto& rec : records) {
    if (!rec.actual_winner) continue;
    const auto& w = winner_of(rec);
    const auto& l = loser_of(rec);
    out << csv::join({std::to_string(rec.year), w.name, std::to_string(w.total), l.name,
                      std::to_string(l.total)})
        << '\n';
  }
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Grouped bar chart, two bars (winner, loser) per election.
inline std::string render_figure_svg(const std::vector<ElectionRecord>& records) {
  std::vector<const ElectionRecord*> shown;
  std::uint64_t peak = 1;
  for (const auto& rec : records) {
    if (!rec.actual_winner) continue;
    shown.push_back(&rec);
    peak = std::max({peak, rec.candidates[0].total, rec.candidates[1].total});
  }
  const int group_w = 60, bar_w = 22, left = 60, top = 40, plot_h = 300;
  const int width = left + std::max<int>(1, static_cast<int>(shown.size())) * group_w + 140;
  const int height = top + plot_h + 60;
  auto px = [&](std::uint64_t v) {
    return static_cast<int>(std::lround(static_cast<double>(v) * plot_h / static_cast<double>(peak)));
  };
  std::string s;
  auto add = [&](const std::string& line) { s += line + "\n"; };
  add("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
      "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">");
  add("<text x=\"" + std::to_string(width / 2) +
      "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">Future tense usage comparison</text>");
  add("<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(top + plot_h) +
      "\" x2=\"" + std::to_string(width - 130) + "\" y2=\"" + std::to_string(top + plot_h) +
      "\" stroke=\"black\"/>");
  add("<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(top) + "\" x2=\"" +
      std::to_string(left) + "\" y2=\"" + std::to_string(top + plot_h) + "\" stroke=\"black\"/>");
  add("<text x=\"15\" y=\"" + std::to_string(top + plot_h / 2) +
      "\" transform=\"rotate(-90 15 " + std::to_string(top + plot_h / 2) +
      ")\" text-anchor=\"middle\">future-tense markers</text>");
  add("<text x=\"" + std::to_string(left - 4) + "\" y=\"" + std::to_string(top + 4) +
      "\" text-anchor=\"end\">" + std::to_string(peak) + "</text>");
  add("<text x=\"" + std::to_string(left - 4) + "\" y=\"" + std::to_string(top + plot_h) +
      "\" text-anchor=\"end\">0</text>");
  for (std::size_t i = 0; i < shown.size(); ++i) {
    const auto& rec = *shown[i];
    const int x0 = left + static_cast<int>(i) * group_w + 8;
    const std::array<std::pair<const CandidateTotal*, const char*>, 2> bars = {
        std::pair{&winner_of(rec), "#3a6ea5"}, std::pair{&loser_of(rec), "#c0504d"}};
    for (std::size_t b = 0; b < 2; ++b) {
      const int h = px(bars[b].first->total);
      const int x = x0 + static_cast<int>(b) * bar_w;
      add("<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(top + plot_h - h) +
          "\" width=\"" + std::to_string(bar_w - 2) + "\" height=\"" + std::to_string(h) +
          "\" fill=\"" + bars[b].second + "\"><title>" + xml_escape(bars[b].first->name) + " " +
          std::to_string(bars[b].first->total) + "</title></rect>");
    }
    add("<text x=\"" + std::to_string(x0 + bar_w) + "\" y=\"" + std::to_string(top + plot_h + 15) +
        "\" text-anchor=\"middle\">" + std::to_string(rec.year) + "</text>");
  }
  const int lx = width - 120;
  add("<rect x=\"" + std::to_string(lx) + "\" y=\"" + std::to_string(top) +
      "\" width=\"12\" height=\"12\" fill=\"#3a6ea5\"/>");
  add("<text x=\"" + std::to_string(lx + 16) + "\" y=\"" + std::to_string(top + 10) +
      "\">Winner</text>");
  add("<rect x=\"" + std::to_string(lx) + "\" y=\"" + std::to_string(top + 18) +
      "\" width=\"12\" height=\"12\" fill=\"#c0504d\"/>");
  add("<text x=\"" + std::to_string(lx + 16) + "\" y=\"" + std::to_string(top + 28) +
      "\">Loser</text>");
  add("</svg>");
  return s;
}

}  // namespace promises::debates
