// Command-line front end: every subcommand is a thin wrapper over library
// calls so results are reproducible programmatically.

#include <cinttypes>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alseg/data/dataset_io.hpp"
#include "alseg/data/synthetic.hpp"
#include "alseg/loop/config_io.hpp"
#include "alseg/loop/experiment.hpp"
#include "alseg/report/report.hpp"
#include "alseg/selection/select.hpp"
#include "alseg/uncertainty/scores.hpp"

namespace fs = std::filesystem;
using namespace alseg;

namespace {

struct RunOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  std::string strategy;
  int budget = 0;
  int q = -1;
  std::string pool_mode;
  std::string output_dir;
  bool dry_run = false;
  bool do_resume = false;
  int jobs = 1;
};

loop::ExperimentSuite load_suite(const RunOptions& opt) {
  auto overrides = opt.overrides;
  if (opt.budget > 0)
    overrides.push_back("selection.budget=" + std::to_string(opt.budget));
  if (opt.q >= 0) overrides.push_back("selection.q=" + std::to_string(opt.q));
  if (!opt.pool_mode.empty())
    overrides.push_back("selection.pool_mode=\"" + opt.pool_mode + "\"");
  if (!opt.output_dir.empty())
    overrides.push_back("output_dir=\"" + opt.output_dir + "\"");
  if (!opt.seeds.empty()) {
    std::string s = "seeds=[";
    for (std::size_t i = 0; i < opt.seeds.size(); ++i)
      s += (i ? "," : "") + std::to_string(opt.seeds[i]);
    overrides.push_back(s + "]");
  }

  loop::ExperimentSuite suite = loop::load_suite_file(opt.config_path, overrides);
  if (!opt.strategy.empty()) {
    loop::ExperimentSuite filtered;
    for (const auto& e : suite.experiments)
      if (e.name == opt.strategy ||
          selection::strategy_name(e.selection.strategy) == opt.strategy)
        filtered.experiments.push_back(e);
    if (filtered.experiments.empty())
      throw std::invalid_argument("no strategy matches --strategy " + opt.strategy);
    suite = std::move(filtered);
  }
  return suite;
}

int cmd_run(const RunOptions& opt) {
  const loop::ExperimentSuite suite = load_suite(opt);

  // Fail before any state is created when the dataset cannot be loaded.
  for (const auto& e : suite.experiments)
    if (e.dataset.kind == loop::DatasetSpec::Kind::disk &&
        !fs::is_directory(e.dataset.resolved_root()))
      throw std::runtime_error("dataset root not found: " +
                               e.dataset.resolved_root().string());

  if (opt.dry_run) {
    for (const auto& e : suite.experiments) {
      std::printf("experiment %-20s strategy=%-17s scorer=%-9s budget=%d "
                  "q=%s mode=%s cycles=%d n_init=%d seeds=",
                  e.name.c_str(), selection::strategy_name(e.selection.strategy),
                  uncertainty::scorer_name(e.scorer.kind), e.selection.budget,
                  e.selection.q == 0 ? "auto" : std::to_string(e.selection.q).c_str(),
                  selection::pool_mode_name(e.selection.pool_mode), e.cycles,
                  e.n_init);
      for (const auto s : e.seeds) std::printf("%" PRIu64 " ", s);
      std::printf("\n  cycle plan: cycle 0 trains on %d samples; cycles 1..%d "
                  "add %d samples each (final labelled size %d)\n",
                  e.n_init, e.cycles, e.selection.budget,
                  e.n_init + e.cycles * e.selection.budget);
    }
    return 0;
  }

  if (opt.do_resume) {
    int failures = 0;
    for (const auto& e : suite.experiments)
      for (const auto s : e.seeds) {
        const fs::path dir = e.run_dir(s);
        if (!fs::exists(dir / "manifest.json")) continue;
        try {
          loop::resume(dir);
        } catch (const std::exception& ex) {
          std::fprintf(stderr, "resume failed for %s: %s\n", dir.c_str(),
                       ex.what());
          ++failures;
        }
      }
    return failures == 0 ? 0 : 1;
  }

  return loop::run_suite(suite, opt.jobs) == 0 ? 0 : 1;
}

int cmd_report(const std::string& results_dir, const std::string& out_dir) {
  const auto runs = loop::load_all_runs(results_dir);
  if (runs.empty()) throw std::runtime_error("no completed runs in " + results_dir);
  const auto summary = loop::aggregate_runs(runs);
  report::write_report(summary,
                       out_dir.empty() ? fs::path(results_dir) : fs::path(out_dir));
  return 0;
}

int cmd_plot(const std::string& results_dir, const std::string& out_dir,
             const std::string& metric, bool by_cycle, bool exclude_cycle0) {
  const auto runs = loop::load_all_runs(results_dir);
  if (runs.empty()) throw std::runtime_error("no completed runs in " + results_dir);
  const auto summary = loop::aggregate_runs(runs);

  report::PlotSpec spec;
  spec.metric = metric;
  spec.x_labelled_size = !by_cycle;
  spec.include_cycle0 = !exclude_cycle0;

  const fs::path out = out_dir.empty() ? fs::path(results_dir) : fs::path(out_dir);
  fs::create_directories(out);
  report::write_learning_curve_svg(summary, spec,
                                   out / ("curve_" + metric + ".svg"));
  report::write_box_plot_svg(summary, spec, out / ("box_" + metric + ".svg"));
  std::printf("wrote %s and %s\n", (out / ("curve_" + metric + ".svg")).c_str(),
              (out / ("box_" + metric + ".svg")).c_str());
  return 0;
}

int cmd_score(const std::string& scores_path, const std::string& strategy,
              int budget, const std::string& pool_mode, int q,
              std::uint64_t seed) {
  const auto table = uncertainty::ScoreTable::load(scores_path);
  std::vector<std::string> ids;
  ids.reserve(table.scores.size());
  for (const auto& [id, v] : table.scores) ids.push_back(id);

  selection::CandidateBatch chosen;
  const auto strat = selection::strategy_from_name(strategy);
  Rng rng(seed);
  switch (strat) {
    case selection::Strategy::topk:
      chosen = selection::topk_select(table, budget);
      break;
    case selection::Strategy::stochastic_batch: {
      const auto mode = selection::pool_mode_from_name(pool_mode);
      const auto pool = selection::build_stochastic_pool(ids, budget, mode,
                                                         q, rng);
      chosen = selection::stochastic_batch_select(table, pool);
      break;
    }
    case selection::Strategy::random:
      chosen = selection::random_select(ids, budget, rng);
      break;
    default:
      throw std::invalid_argument(
          "offline re-selection supports random, topk and stochastic_batch");
  }

  std::printf("scorer=%s cycle=%d model=%s strategy=%s batch_score=%g\n",
              table.scorer.c_str(), table.cycle, table.model_digest.c_str(),
              strategy.c_str(), chosen.batch_score);
  for (const auto& id : chosen.sample_ids) std::printf("%s\n", id.c_str());
  return 0;
}

int cmd_synth(const std::string& out_dir, std::uint64_t seed, int volumes,
              int slices, int height, int width, int classes, double spacing) {
  data::SyntheticSpec spec;
  spec.n_volumes = volumes;
  spec.slices_per_volume = slices;
  spec.size = {static_cast<std::size_t>(height), static_cast<std::size_t>(width)};
  spec.class_count = classes;
  spec.spacing = spacing;

  const auto vols = data::generate_synthetic_volumes(seed, spec);
  const auto splits = data::assign_splits(spec.n_volumes);
  data::write_dataset_root(out_dir, vols, splits, spec.class_count);
  std::printf("wrote %d volumes (%d slices each, %dx%d, %d classes) to %s\n",
              volumes, slices, height, width, classes, out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pool-based active learning for 2D medical image segmentation"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run the experiments in a config file");
  run->add_option("--config", run_opt.config_path, "Experiment config (JSON)")
      ->required();
  run->add_option("--set", run_opt.overrides,
                  "Dotted-path override, e.g. train.epochs=5");
  run->add_option("--seed", run_opt.seeds, "Override the seed list");
  run->add_option("--strategy", run_opt.strategy,
                  "Run only the matching strategy entry");
  run->add_option("--budget", run_opt.budget, "Override the per-cycle budget");
  run->add_option("--q", run_opt.q, "Override the stochastic pool size (0 = auto)");
  run->add_option("--pool-mode", run_opt.pool_mode, "partition or resample");
  run->add_option("--output-dir", run_opt.output_dir, "Override the output dir");
  run->add_flag("--dry-run", run_opt.dry_run,
                "Validate and print the cycle plan without training");
  run->add_flag("--resume", run_opt.do_resume,
                "Resume previously persisted runs instead of starting fresh");
  run->add_option("--jobs", run_opt.jobs, "Parallel experiment workers")
      ->check(CLI::Range(1, 64));

  std::string results_dir, out_dir, metric = "dsc3d";
  auto* report_cmd = app.add_subcommand("report", "Aggregate results into tables");
  report_cmd->add_option("--results", results_dir, "Results directory")->required();
  report_cmd->add_option("--out", out_dir, "Output directory (default: results)");

  bool by_cycle = false, exclude_cycle0 = false;
  auto* plot_cmd = app.add_subcommand("plot", "Learning-curve and box plots (SVG)");
  plot_cmd->add_option("--results", results_dir, "Results directory")->required();
  plot_cmd->add_option("--out", out_dir, "Output directory (default: results)");
  plot_cmd->add_option("--metric", metric, "dsc3d|dsc2d|hd3d|hd2d");
  plot_cmd->add_flag("--by-cycle", by_cycle, "Cycle index on the x axis");
  plot_cmd->add_flag("--exclude-cycle0", exclude_cycle0,
                     "Drop the shared initial cycle from the plot");

  std::string scores_path, sel_strategy = "topk", pool_mode = "resample";
  int budget = 10, q = 100;
  std::uint64_t seed = 1;
  auto* score_cmd =
      app.add_subcommand("score", "Offline re-selection from a saved score table");
  score_cmd->add_option("--scores", scores_path, "ScoreTable JSON file")->required();
  score_cmd->add_option("--strategy", sel_strategy, "random|topk|stochastic_batch");
  score_cmd->add_option("--budget", budget, "Batch size B");
  score_cmd->add_option("--pool-mode", pool_mode, "partition or resample");
  score_cmd->add_option("--q", q, "Stochastic pool size (0 = auto)");
  score_cmd->add_option("--seed", seed, "Selection seed");

  std::string synth_out;
  std::uint64_t synth_seed = 7;
  int volumes = 30, slices = 12, height = 64, width = 64, classes = 2;
  double spacing = 1.0;
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic dataset on disk");
  synth_cmd->add_option("--out", synth_out, "Dataset root to create")->required();
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--volumes", volumes, "Number of volumes");
  synth_cmd->add_option("--slices", slices, "Slices per volume");
  synth_cmd->add_option("--height", height, "Slice height");
  synth_cmd->add_option("--width", width, "Slice width");
  synth_cmd->add_option("--classes", classes, "Class count (incl. background)");
  synth_cmd->add_option("--spacing", spacing, "Isotropic spacing (mm)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (report_cmd->parsed()) return cmd_report(results_dir, out_dir);
    if (plot_cmd->parsed())
      return cmd_plot(results_dir, out_dir, metric, by_cycle, exclude_cycle0);
    if (score_cmd->parsed())
      return cmd_score(scores_path, sel_strategy, budget, pool_mode, q, seed);
    if (synth_cmd->parsed())
      return cmd_synth(synth_out, synth_seed, volumes, slices, height, width,
                       classes, spacing);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
