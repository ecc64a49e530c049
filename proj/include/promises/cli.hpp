#pragma once

// Command implementations behind the `promises` executable. Argument parsing
// lives in tools/promises.cpp; everything here takes a RunConfig so the
// commands can be driven from tests.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "promises/corpus.hpp"
#include "promises/debates.hpp"
#include "promises/econometrics/design.hpp"
#include "promises/econometrics/estimators.hpp"
#include "promises/futuretense.hpp"
#include "promises/io.hpp"
#include "promises/report.hpp"
#include "promises/returns.hpp"

namespace promises::cli {

enum class Command { Count, Panel, Regress, DebatePredict, DebateTest, Report };

struct RunConfig {
  Command command = Command::Count;
  std::filesystem::path corpus;
  std::filesystem::path counts;
  std::filesystem::path prices;
  std::filesystem::path riskfree;
  std::filesystem::path panel;
  std::filesystem::path fixtures;
  std::filesystem::path transcripts;
  std::filesystem::path candidates;
  std::filesystem::path aliases;
  std::filesystem::path manifest;
  std::filesystem::path out;
  econometrics::Method model = econometrics::Method::ReGls;
  econometrics::Dependent dep = econometrics::Dependent::Return;
  int base_year = 1993;
  bool with_total = false;
};

inline std::string model_name(econometrics::Method m) {
  return m == econometrics::Method::ReGls ? "re" : "pooled";
}

inline std::string dep_name(econometrics::Dependent d) {
  return d == econometrics::Dependent::Return ? "return" : "excess";
}

namespace detail {

inline void require(const std::filesystem::path& p, const char* flag) {
  if (p.empty()) throw std::runtime_error(std::string("missing required option ") + flag);
}

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + p.string());
  return in;
}

template <typename Writer>
void write_artifact(const std::filesystem::path& p, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  io::write_file_atomic(p, ss.str());
}

inline corpus::Corpus load_corpus_logged(const std::filesystem::path& root, std::ostream& err) {
  auto c = corpus::load_corpus(root);
  for (const auto& doc : c.docs) {
    if (doc.replaced_bytes) {
      err << "warning: " << doc.source_file << ": " << doc.replaced_bytes
          << " invalid UTF-8 byte(s) replaced\n";
    }
    if (doc.unterminated_tags) {
      err << "warning: " << doc.source_file << ": unterminated markup tag dropped to end of text\n";
    }
  }
  return c;
}

inline returns::PanelBuild build_panel_from(const std::vector<futuretense::CountRow>& counts,
                                            const RunConfig& cfg, std::ostream& err) {
  require(cfg.prices, "--prices");
  auto prices_in = open_input(cfg.prices);
  auto prices = returns::read_prices_csv(prices_in, cfg.prices.string());
  returns::RiskFreeSeries rf;
  if (!cfg.riskfree.empty()) {
    auto rf_in = open_input(cfg.riskfree);
    rf = returns::read_riskfree_csv(rf_in, cfg.riskfree.string());
  }
  auto built = returns::build_panel(counts, prices, rf, cfg.base_year);
  err << "panel: " << built.panel.size() << " rows, " << built.panel.groups() << " groups; dropped "
      << built.drops.missing_return << " row(s) without a next-year return; "
      << built.drops.missing_riskfree << " row(s) without a risk-free rate\n";
  return built;
}

inline std::string drop_report(const returns::DropReport& drops) {
  std::string s = "missing_return," + std::to_string(drops.missing_return) + "\n" +
                  "missing_riskfree," + std::to_string(drops.missing_riskfree) + "\n";
  for (const auto& d : drops.details) s += d + "\n";
  return s;
}

inline std::vector<debates::ElectionRecord> load_elections(const RunConfig& cfg) {
  if (!cfg.fixtures.empty()) {
    auto in = open_input(cfg.fixtures);
    return debates::read_fixtures_csv(in, cfg.fixtures.string());
  }
  if (cfg.transcripts.empty() || cfg.candidates.empty()) {
    throw std::runtime_error("need --fixtures, or --transcripts with --candidates");
  }
  auto cand_in = open_input(cfg.candidates);
  auto specs = debates::read_candidates_csv(cand_in, cfg.candidates.string());
  debates::AliasMap aliases;
  if (!cfg.aliases.empty()) {
    auto alias_in = open_input(cfg.aliases);
    aliases = debates::read_aliases_csv(alias_in, cfg.aliases.string());
  }
  auto transcripts = debates::load_transcripts(cfg.transcripts);
  std::vector<debates::ElectionRecord> records;
  for (const auto& spec : specs) {
    auto it = transcripts.find(spec.year);
    if (it == transcripts.end() || it->second.empty()) {
      throw std::runtime_error("no transcripts for " + std::to_string(spec.year) + " under " +
                               cfg.transcripts.string());
    }
    records.push_back(debates::candidate_totals(spec.year, it->second, spec.names, aliases,
                                                spec.actual_winner));
  }
  return records;
}

inline void write_regression(const std::filesystem::path& dir, const std::string& stem,
                             const econometrics::RegressionResult& r) {
  io::write_file_atomic(dir / (stem + ".txt"), report::render_table(r));
  io::write_file_atomic(dir / (stem + ".json"), report::to_json(r).dump(2) + "\n");
}

}  // namespace detail

inline int run_count(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  detail::require(cfg.corpus, "--corpus");
  detail::require(cfg.out, "--out");
  auto c = detail::load_corpus_logged(cfg.corpus, err);
  auto rows = futuretense::aggregate_counts(c);
  detail::write_artifact(cfg.out, [&](std::ostream& os) {
    futuretense::write_counts_csv(os, rows, cfg.with_total);
  });
  if (!cfg.manifest.empty()) {
    detail::write_artifact(cfg.manifest, [&](std::ostream& os) { corpus::write_manifest(os, c); });
  }
  auto total = futuretense::grand_total(rows);
  out << rows.size() << " documents: will=" << total.will << " shall=" << total.shall
      << " going_to=" << total.going_to << " future_sentences=" << total.future_sentences << "\n";
  return 0;
}

inline int run_panel(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  detail::require(cfg.counts, "--counts");
  detail::require(cfg.out, "--out");
  auto counts_in = detail::open_input(cfg.counts);
  auto counts = futuretense::read_counts_csv(counts_in, cfg.counts.string());
  auto built = detail::build_panel_from(counts, cfg, err);
  detail::write_artifact(cfg.out, [&](std::ostream& os) { returns::write_panel_csv(os, built.panel); });
  out << detail::drop_report(built.drops);
  return 0;
}

inline int run_regress(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  detail::require(cfg.panel, "--panel");
  auto in = detail::open_input(cfg.panel);
  auto panel = returns::read_panel_csv(in, cfg.panel.string(), cfg.base_year);
  auto design = econometrics::build_design(panel, cfg.dep);
  auto result = econometrics::estimate(design, cfg.model);
  out << report::render_table(result);
  if (!cfg.out.empty()) {
    detail::write_regression(cfg.out, model_name(cfg.model) + "_" + dep_name(cfg.dep), result);
  }
  return 0;
}

inline int run_debate_predict(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  auto records = detail::load_elections(cfg);
  for (const auto& rec : records) {
    const std::string predicted = debates::predict_winner(rec);
    out << rec.year << ": predicted " << predicted << " (" << rec.candidates[0].name << " "
        << rec.candidates[0].total << ", " << rec.candidates[1].name << " "
        << rec.candidates[1].total << ")";
    if (rec.actual_winner) {
      out << "; actual " << *rec.actual_winner << " -> "
          << (predicted == *rec.actual_winner ? "hit" : "miss");
    }
    out << "\n";
  }
  if (!cfg.out.empty()) {
    detail::write_artifact(cfg.out / "predictions.csv", [&](std::ostream& os) {
      debates::write_predictions_csv(os, records);
    });
    detail::write_artifact(cfg.out / "figure1.csv",
                           [&](std::ostream& os) { debates::write_figure_csv(os, records); });
    io::write_file_atomic(cfg.out / "figure1.svg", debates::render_figure_svg(records));
    detail::write_artifact(cfg.out / "elections.csv",
                           [&](std::ostream& os) { debates::write_fixtures_csv(os, records); });
  }
  return 0;
}

inline nlohmann::json ttest_json(const debates::TTestResult& t) {
  return {{"n", t.n},
          {"df", t.df},
          {"mean_diff", t.mean_diff},
          {"sd_diff", t.sd_diff},
          {"t", t.t ? nlohmann::json(*t.t) : nlohmann::json(nullptr)},
          {"sign", t.sign},
          {"critical_90_one_sided", t.critical_90},
          {"significant_90", t.significant_90}};
}

inline int run_debate_test(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  auto records = detail::load_elections(cfg);
  auto t = debates::loser_winner_ttest(records);
  out << "loser - winner: n=" << t.n << " mean=" << report::format_fixed(t.mean_diff, 4)
      << " sd=" << report::format_fixed(t.sd_diff, 4) << "\n";
  out << "t=" << (t.t ? report::format_fixed(*t.t, 4) : std::string("undefined (zero variance)"))
      << " df=" << t.df << " one-sided 90% critical=" << report::format_fixed(t.critical_90, 6)
      << " significant_90=" << (t.significant_90 ? "yes" : "no") << "\n";
  if (!cfg.out.empty()) {
    io::write_file_atomic(cfg.out / "ttest.json", ttest_json(t).dump(2) + "\n");
  }
  return 0;
}

// Full pipeline: corpus -> counts -> panel -> all four specifications, plus
// the wills-on-shalls fit.
inline int run_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  detail::require(cfg.corpus, "--corpus");
  detail::require(cfg.out, "--out");
  auto c = detail::load_corpus_logged(cfg.corpus, err);
  auto rows = futuretense::aggregate_counts(c);
  detail::write_artifact(cfg.out / "counts.csv",
                         [&](std::ostream& os) { futuretense::write_counts_csv(os, rows, true); });
  detail::write_artifact(cfg.out / "manifest.csv",
                         [&](std::ostream& os) { corpus::write_manifest(os, c); });
  auto built = detail::build_panel_from(rows, cfg, err);
  detail::write_artifact(cfg.out / "panel.csv",
                         [&](std::ostream& os) { returns::write_panel_csv(os, built.panel); });
  io::write_file_atomic(cfg.out / "drops.txt", detail::drop_report(built.drops));

  std::vector<double> wills, shalls;
  for (const auto& r : rows) {
    wills.push_back(static_cast<double>(r.counts.will));
    shalls.push_back(static_cast<double>(r.counts.shall));
  }
  try {
    auto fit = econometrics::simple_ols(shalls, wills);
    io::write_file_atomic(cfg.out / "wills_on_shalls.json",
                          report::to_json(fit, "will", "shall").dump(2) + "\n");
    out << "wills on shalls: slope=" << report::format_general(fit.slope)
        << " R2=" << report::format_fixed(fit.r2, 4) << "\n";
  } catch (const econometrics::EstimationError& e) {
    err << "warning: wills-on-shalls fit skipped: " << e.what() << "\n";
  }

  const bool have_rf = !cfg.riskfree.empty();
  for (auto dep : {econometrics::Dependent::Return, econometrics::Dependent::Excess}) {
    if (dep == econometrics::Dependent::Excess && !have_rf) {
      err << "warning: no --riskfree given; excess-return models skipped\n";
      continue;
    }
    auto design = econometrics::build_design(built.panel, dep);
    for (auto model : {econometrics::Method::ReGls, econometrics::Method::PooledCluster}) {
      auto result = econometrics::estimate(design, model);
      const std::string stem = model_name(model) + "_" + dep_name(dep);
      detail::write_regression(cfg.out, stem, result);
      const auto w = *result.index_of(econometrics::kSignalLabel);
      out << stem << ": b(w_t)=" << report::format_general(result.coef[w])
          << " se=" << report::format_general(result.se[w])
          << " z=" << report::format_fixed(result.z[w], 2) << "\n";
    }
  }
  return 0;
}

// Runs one command; module errors print a one-line diagnostic and return 1.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    switch (cfg.command) {
      case Command::Count: return run_count(cfg, out, err);
      case Command::Panel: return run_panel(cfg, out, err);
      case Command::Regress: return run_regress(cfg, out, err);
      case Command::DebatePredict: return run_debate_predict(cfg, out, err);
      case Command::DebateTest: return run_debate_test(cfg, out, err);
      case Command::Report: return run_report(cfg, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace promises::cli
