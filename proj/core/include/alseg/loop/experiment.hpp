#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alseg/data/types.hpp"
#include "alseg/eval/metrics.hpp"
#include "alseg/nn/loss_predictor.hpp"
#include "alseg/nn/unet.hpp"
#include "alseg/selection/select.hpp"
#include "alseg/train/config.hpp"
#include "alseg/uncertainty/scores.hpp"

namespace alseg::loop {

struct DatasetSpec {
  enum class Kind { synthetic, disk };
  Kind kind = Kind::synthetic;
  // synthetic
  std::uint64_t seed = 7;
  int volumes = 30;
  int slices_per_volume = 12;
  std::array<std::size_t, 2> size{64, 64};
  int class_count = 2;
  // disk; an empty root falls back to $ALSEG_DATA_ROOT
  std::string root;
  double target_spacing = 1.0;
  std::array<std::size_t, 2> target_size{128, 128};

  data::DatasetSplit load() const;
  std::filesystem::path resolved_root() const;
};

// One experiment = one (strategy, scorer) pair over a list of seeds.
struct ExperimentConfig {
  std::string name = "exp";
  DatasetSpec dataset;
  nn::SegModelConfig model;
  train::TrainConfig train_cfg;
  nn::LossPredictorConfig loss_predictor;
  selection::SelectionConfig selection;
  uncertainty::ScorerConfig scorer;
  int n_init = 10;
  int cycles = 5;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "runs";
  int score_threads = 1;

  bool needs_scores() const {
    return selection.strategy == selection::Strategy::topk ||
           selection.strategy == selection::Strategy::stochastic_batch;
  }
  bool with_loss_module() const {
    return needs_scores() && scorer.kind == uncertainty::ScorerKind::learnloss;
  }
  void validate() const;
  // Content digest over every semantic field (seeds and output paths
  // excluded); guards resume against config drift.
  std::string digest() const;

  std::filesystem::path run_dir(std::uint64_t seed) const;
};

struct CycleResult {
  int cycle = 0;
  std::vector<std::string> queried;  // empty at cycle 0
  int labelled_size = 0;
  eval::EvalSummary metrics;
  std::string history_digest;
  double batch_score = 0.0;          // NaN when the strategy is score-free
  int provenance = -1;
  std::uint64_t train_seed = 0;
  double wall_seconds = 0.0;         // informational; kept out of records
};

struct ExperimentRun {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<CycleResult> cycles;
  bool partial = false;  // pool exhausted before the configured cycle count
};

// Runs (or resumes) one experiment for one master seed. Every completed
// cycle is persisted before the next starts: records.jsonl (deterministic),
// timings.jsonl (informational), checkpoints/ and scores/ per cycle.
ExperimentRun run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

// Continues a previously persisted run; refuses on config digest mismatch.
ExperimentRun resume(const std::filesystem::path& run_dir);

// Same as run_experiment but stops after `stop_after_cycle` completes (the
// persisted state then matches an interrupted run).
ExperimentRun run_experiment_until(const ExperimentConfig& cfg,
                                   std::uint64_t seed, int stop_after_cycle);

// Loads a persisted run from disk.
ExperimentRun load_run(const std::filesystem::path& run_dir);

// Runs every (experiment, seed) pair, optionally on parallel worker
// threads; results are identical regardless of the job count.
struct ExperimentSuite {
  std::vector<ExperimentConfig> experiments;
};
int run_suite(const ExperimentSuite& suite, int jobs = 1);

// -------------------------------------------------------------------------
// Aggregation

struct MetricKey {
  std::string experiment;
  int cycle = 0;
  auto operator<=>(const MetricKey&) const = default;
};

struct AggregateSummary {
  // Per (experiment, cycle): values over seeds.
  std::map<MetricKey, std::vector<double>> dsc3d, dsc2d, hd3d, hd2d;
  std::map<MetricKey, std::vector<int>> labelled_size;
  // Per experiment, pooled over cycles >= 1 and seeds (cycle 0 is shared
  // across strategies and excluded).
  std::map<std::string, std::vector<double>> overall_dsc3d, overall_dsc2d,
      overall_hd3d, overall_hd2d;
  // Paired permutation p-values on 3D DSC between experiments sharing
  // identical (seed, cycle) coverage.
  std::map<std::pair<std::string, std::string>, double> pvalue_dsc3d;
  int common_cycles = 0;
  bool truncated = false;  // runs had mismatched cycle counts
};

AggregateSummary aggregate_runs(const std::vector<ExperimentRun>& runs,
                                int n_perm = 10000,
                                std::uint64_t perm_seed = 0x5eed);

// Loads every run under <results_dir>/<experiment>/seed*/.
std::vector<ExperimentRun> load_all_runs(const std::filesystem::path& results_dir);

}  // namespace alseg::loop
