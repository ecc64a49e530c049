// promises: command-line front end for the counting, panel, regression and
// debate pipelines.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "promises/cli.hpp"

namespace {

using promises::cli::Command;
using promises::cli::RunConfig;
using promises::econometrics::Dependent;
using promises::econometrics::Method;

void add_model_options(CLI::App* sub, RunConfig& cfg) {
  const std::map<std::string, Method> models{{"re", Method::ReGls}, {"pooled", Method::PooledCluster}};
  const std::map<std::string, Dependent> deps{{"return", Dependent::Return},
                                              {"excess", Dependent::Excess}};
  sub->add_option("--model", cfg.model, "re (random-effects GLS) or pooled (cluster-robust OLS)")
      ->transform(CLI::CheckedTransformer(models, CLI::ignore_case));
  sub->add_option("--dep", cfg.dep, "return or excess")
      ->transform(CLI::CheckedTransformer(deps, CLI::ignore_case));
}

void add_election_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--fixtures", cfg.fixtures, "CSV of year,candidate,total,actual_winner_flag");
  sub->add_option("--transcripts", cfg.transcripts, "directory of <year>/<debate>.txt transcripts");
  sub->add_option("--candidates", cfg.candidates, "CSV of year,candidate,actual_winner_flag");
  sub->add_option("--aliases", cfg.aliases, "CSV of alias,candidate speaker-label mappings");
  sub->add_option("--out", cfg.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Future-tense disclosure counts, return panels and debate predictions"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  RunConfig cfg;

  auto* count = app.add_subcommand("count", "count future-tense markers per filing");
  count->add_option("--corpus", cfg.corpus, "corpus root (<entity>/<year>.txt)")->required();
  count->add_option("--out", cfg.out, "counts CSV to write")->required();
  count->add_option("--manifest", cfg.manifest, "optional manifest CSV to write");
  count->add_flag("--with-total", cfg.with_total, "append a TOTAL row");
  count->callback([&] { cfg.command = Command::Count; });

  auto* panel = app.add_subcommand("panel", "join counts with next-year returns");
  panel->add_option("--counts", cfg.counts, "counts CSV")->required();
  panel->add_option("--prices", cfg.prices, "CSV of entity,year,adj_close")->required();
  panel->add_option("--riskfree", cfg.riskfree, "CSV of year,rate");
  panel->add_option("--base-year", cfg.base_year, "omitted year dummy");
  panel->add_option("--out", cfg.out, "panel CSV to write")->required();
  panel->callback([&] { cfg.command = Command::Panel; });

  auto* regress = app.add_subcommand("regress", "estimate one specification on a panel");
  regress->add_option("--panel", cfg.panel, "panel CSV")->required();
  regress->add_option("--base-year", cfg.base_year, "omitted year dummy");
  regress->add_option("--out", cfg.out, "directory for <model>_<dep>.txt/.json");
  add_model_options(regress, cfg);
  regress->callback([&] { cfg.command = Command::Regress; });

  auto* predict = app.add_subcommand("debate-predict", "predict winners by fewer promises");
  add_election_options(predict, cfg);
  predict->callback([&] { cfg.command = Command::DebatePredict; });

  auto* ttest = app.add_subcommand("debate-test", "paired t-test of loser minus winner totals");
  add_election_options(ttest, cfg);
  ttest->callback([&] { cfg.command = Command::DebateTest; });

  auto* report = app.add_subcommand("report", "run the full filing pipeline");
  report->add_option("--corpus", cfg.corpus, "corpus root")->required();
  report->add_option("--prices", cfg.prices, "CSV of entity,year,adj_close")->required();
  report->add_option("--riskfree", cfg.riskfree, "CSV of year,rate");
  report->add_option("--base-year", cfg.base_year, "omitted year dummy");
  report->add_option("--out", cfg.out, "output directory")->required();
  report->callback([&] { cfg.command = Command::Report; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return promises::cli::run(cfg, std::cout, std::cerr);
}
