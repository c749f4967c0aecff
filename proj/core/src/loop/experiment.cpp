#include "alseg/loop/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "alseg/data/dataset_io.hpp"
#include "alseg/data/pool.hpp"
#include "alseg/data/synthetic.hpp"
#include "alseg/eval/stats.hpp"
#include "alseg/loop/config_io.hpp"
#include "alseg/nn/checkpoint.hpp"
#include "alseg/train/trainer.hpp"

namespace alseg::loop {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Dataset spec

fs::path DatasetSpec::resolved_root() const {
  if (!root.empty()) return root;
  if (const char* env = std::getenv("ALSEG_DATA_ROOT")) return env;
  throw std::runtime_error(
      "dataset root not set (config dataset.root or $ALSEG_DATA_ROOT)");
}

data::DatasetSplit DatasetSpec::load() const {
  if (kind == Kind::synthetic)
    return data::generate_synthetic_dataset(seed, volumes, slices_per_volume,
                                            size, class_count);
  return data::load_dataset_root(resolved_root(), target_spacing, target_size);
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (name.empty()) throw std::invalid_argument("experiment: empty name");
  model.validate();
  train_cfg.validate();
  loss_predictor.validate();
  selection.validate();
  scorer.validate();
  if (n_init < 1) throw std::invalid_argument("experiment: n_init >= 1");
  if (cycles < 1) throw std::invalid_argument("experiment: cycles >= 1");
  if (seeds.empty()) throw std::invalid_argument("experiment: no seeds");
  if (score_threads < 1) throw std::invalid_argument("experiment: score_threads >= 1");
  if (output_dir.empty()) throw std::invalid_argument("experiment: empty output_dir");
}

std::string ExperimentConfig::digest() const {
  ExperimentConfig canon = *this;
  canon.seeds = {};        // per-run seed is recorded alongside
  canon.output_dir = "";   // location does not change the results
  canon.score_threads = 1; // parallelism does not change the results
  const std::string s = experiment_config_to_json_string(canon);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, fnv1a64(s));
  return hex;
}

fs::path ExperimentConfig::run_dir(std::uint64_t seed) const {
  return fs::path(output_dir) / name / ("seed" + std::to_string(seed));
}

// ---------------------------------------------------------------------------
// Record (de)serialization

namespace {

json metric_record_to_json(const eval::MetricRecord& r) {
  json j;
  json pc = json::object();
  for (const auto& [c, v] : r.per_class) pc[std::to_string(c)] = v;
  json ud = json::object();
  for (const auto& [c, n] : r.undefined_count) ud[std::to_string(c)] = n;
  j["per_class"] = std::move(pc);
  j["undefined"] = std::move(ud);
  if (std::isfinite(r.mean_non_background))
    j["mean"] = r.mean_non_background;
  else
    j["mean"] = nullptr;
  return j;
}

eval::MetricRecord metric_record_from_json(const json& j,
                                           eval::MetricRecord::Scope scope,
                                           eval::MetricRecord::Kind kind) {
  eval::MetricRecord r;
  r.scope = scope;
  r.kind = kind;
  for (const auto& [k, v] : j.at("per_class").items())
    r.per_class[std::stoi(k)] = v.get<double>();
  for (const auto& [k, v] : j.at("undefined").items())
    r.undefined_count[std::stoi(k)] = v.get<int>();
  r.mean_non_background = j.at("mean").is_null()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : j.at("mean").get<double>();
  return r;
}

json cycle_to_json(const CycleResult& r) {
  json j;
  j["cycle"] = r.cycle;
  j["labelled_size"] = r.labelled_size;
  j["queried"] = r.queried;
  if (std::isfinite(r.batch_score))
    j["batch_score"] = r.batch_score;
  else
    j["batch_score"] = nullptr;
  j["provenance"] = r.provenance;
  j["train_seed"] = r.train_seed;
  j["history_digest"] = r.history_digest;
  json m;
  m["dsc_2d"] = metric_record_to_json(r.metrics.dsc_2d);
  m["hd95_2d"] = metric_record_to_json(r.metrics.hd95_2d);
  m["dsc_3d"] = metric_record_to_json(r.metrics.dsc_3d);
  m["hd95_3d"] = metric_record_to_json(r.metrics.hd95_3d);
  j["metrics"] = std::move(m);
  return j;
}

CycleResult cycle_from_json(const json& j) {
  using MR = eval::MetricRecord;
  CycleResult r;
  r.cycle = j.at("cycle").get<int>();
  r.labelled_size = j.at("labelled_size").get<int>();
  r.queried = j.at("queried").get<std::vector<std::string>>();
  r.batch_score = j.at("batch_score").is_null()
                      ? std::numeric_limits<double>::quiet_NaN()
                      : j.at("batch_score").get<double>();
  r.provenance = j.at("provenance").get<int>();
  r.train_seed = j.at("train_seed").get<std::uint64_t>();
  r.history_digest = j.at("history_digest").get<std::string>();
  const json& m = j.at("metrics");
  r.metrics.dsc_2d = metric_record_from_json(m.at("dsc_2d"), MR::Scope::slices_2d,
                                             MR::Kind::dsc);
  r.metrics.hd95_2d = metric_record_from_json(m.at("hd95_2d"),
                                              MR::Scope::slices_2d, MR::Kind::hd95);
  r.metrics.dsc_3d = metric_record_from_json(m.at("dsc_3d"),
                                             MR::Scope::volumes_3d, MR::Kind::dsc);
  r.metrics.hd95_3d = metric_record_from_json(m.at("hd95_3d"),
                                              MR::Scope::volumes_3d, MR::Kind::hd95);
  return r;
}

struct RunPaths {
  fs::path dir, manifest, records, timings, status, checkpoints, scores;
  explicit RunPaths(const fs::path& d)
      : dir(d), manifest(d / "manifest.json"), records(d / "records.jsonl"),
        timings(d / "timings.jsonl"), status(d / "status.json"),
        checkpoints(d / "checkpoints"), scores(d / "scores") {}
};

void write_manifest(const RunPaths& p, const ExperimentConfig& cfg,
                    std::uint64_t seed) {
  json j;
  j["schema_version"] = 1;
  j["experiment"] = cfg.name;
  j["seed"] = seed;
  j["config"] = json::parse(experiment_config_to_json_string(cfg));
  j["config_digest"] = cfg.digest();
  std::ofstream f(p.manifest);
  if (!f) throw std::runtime_error("cannot write " + p.manifest.string());
  f << j.dump(2) << "\n";
}

json read_manifest(const RunPaths& p) {
  std::ifstream f(p.manifest);
  if (!f) throw std::runtime_error("missing manifest: " + p.manifest.string());
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded())
    throw std::runtime_error("corrupted manifest: " + p.manifest.string());
  return j;
}

std::vector<CycleResult> read_records(const RunPaths& p) {
  std::vector<CycleResult> out;
  std::ifstream f(p.records);
  if (!f) return out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error("corrupted record (line " +
                               std::to_string(line_no) + ") in " +
                               p.records.string());
    try {
      out.push_back(cycle_from_json(j));
    } catch (const std::exception& e) {
      throw std::runtime_error("corrupted record (line " +
                               std::to_string(line_no) + ") in " +
                               p.records.string() + ": " + e.what());
    }
    if (out.back().cycle != line_no - 1)
      throw std::runtime_error("record cycle out of order in " +
                               p.records.string());
  }
  return out;
}

void append_record(const RunPaths& p, const CycleResult& r) {
  std::ofstream f(p.records, std::ios::app);
  if (!f) throw std::runtime_error("cannot append to " + p.records.string());
  f << cycle_to_json(r).dump() << "\n";
  f.flush();
  if (!f) throw std::runtime_error("short write to " + p.records.string());
}

void append_timing(const RunPaths& p, int cycle, double train_s, double total_s) {
  std::ofstream f(p.timings, std::ios::app);
  if (!f) return;  // timings are informational
  json j;
  j["cycle"] = cycle;
  j["train_seconds"] = train_s;
  j["cycle_seconds"] = total_s;
  f << j.dump() << "\n";
}

void write_status(const RunPaths& p, int completed, bool partial) {
  json j;
  j["schema_version"] = 1;
  j["completed_cycles"] = completed;
  j["partial"] = partial;
  std::ofstream f(p.status);
  if (f) f << j.dump(2) << "\n";
}

fs::path checkpoint_path(const RunPaths& p, int cycle, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "cycle%03d_seed%" PRIu64 ".ckpt", cycle, seed);
  return p.checkpoints / buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Runner

namespace {

struct SampleIndex {
  std::unordered_map<std::string, const data::SliceSample*> by_id;
  explicit SampleIndex(const std::vector<data::SliceSample>& train) {
    for (const auto& s : train) by_id.emplace(s.id(), &s);
  }
  const data::SliceSample* get(const std::string& id) const {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::runtime_error("unknown sample id: " + id);
    return it->second;
  }
};

eval::SlicePredictor make_eval_predictor(const nn::UNet<float>& net) {
  auto ws = std::make_shared<nn::UNet<float>::Workspace>();
  return [&net, ws](const data::SliceSample& s) {
    Tensor<float> input({1, 1, s.image.h, s.image.w});
    std::copy(s.image.v.begin(), s.image.v.end(), input.data());
    const nn::ForwardResult<float> r = net.forward(input, false, nullptr, *ws);
    const std::size_t c = r.probabilities.dim(1), hw = s.image.h * s.image.w;
    Grid2D<data::ClassId> mask(s.image.h, s.image.w);
    for (std::size_t p = 0; p < hw; ++p) {
      std::size_t best = 0;
      float bv = r.probabilities[p];
      for (std::size_t ci = 1; ci < c; ++ci)
        if (r.probabilities[ci * hw + p] > bv) {
          bv = r.probabilities[ci * hw + p];
          best = ci;
        }
      mask.v[p] = static_cast<data::ClassId>(best);
    }
    return mask;
  };
}

selection::FeatureSet bottleneck_features(
    const nn::UNet<float>& net, const SampleIndex& index,
    const std::vector<std::string>& ids) {
  selection::FeatureSet out;
  out.reserve(ids.size());
  nn::UNet<float>::Workspace ws;
  for (const auto& id : ids) {
    const auto* s = index.get(id);
    Tensor<float> input({1, 1, s->image.h, s->image.w});
    std::copy(s->image.v.begin(), s->image.v.end(), input.data());
    const nn::ForwardResult<float> r = net.forward(input, false, nullptr, ws);
    std::vector<double> feat(r.bottleneck.size());
    for (std::size_t i = 0; i < feat.size(); ++i) feat[i] = r.bottleneck[i];
    out.emplace_back(id, std::move(feat));
  }
  return out;
}

ExperimentRun run_impl(const ExperimentConfig& cfg, std::uint64_t seed,
                       int stop_after_cycle) {
  cfg.validate();
  const data::DatasetSplit dataset = cfg.dataset.load();
  const SampleIndex index(dataset.train);
  const int budget = cfg.selection.budget;

  if (cfg.n_init > static_cast<int>(dataset.train.size()))
    throw std::invalid_argument("experiment: n_init exceeds the train split");
  if (cfg.n_init + budget * cfg.cycles > static_cast<int>(dataset.train.size()))
    std::fprintf(stderr,
                 "[alseg] warning: budget*cycles exceeds the unlabelled pool; "
                 "the run will stop early with partial results\n");

  const RunPaths paths(cfg.run_dir(seed));
  fs::create_directories(paths.checkpoints);
  fs::create_directories(paths.scores);

  if (fs::exists(paths.manifest)) {
    const json m = read_manifest(paths);
    if (m.value("config_digest", "") != cfg.digest())
      throw std::runtime_error(
          "refusing to resume: config digest mismatch in " + paths.dir.string());
    if (m.value("seed", std::uint64_t(0)) != seed)
      throw std::runtime_error("refusing to resume: seed mismatch in " +
                               paths.dir.string());
  } else {
    write_manifest(paths, cfg, seed);
  }

  ExperimentRun run;
  run.experiment = cfg.name;
  run.seed = seed;
  run.cycles = read_records(paths);

  // Rebuild the pool by replaying recorded queries; oracle_annotate
  // re-validates legality, which doubles as an integrity check.
  data::PoolState pool =
      data::init_pool(dataset, static_cast<std::size_t>(cfg.n_init),
                      derive_seed(seed, "init"));
  for (const auto& r : run.cycles) {
    if (r.cycle == 0) continue;
    pool = data::oracle_annotate(pool, r.queried);
  }

  const int total_cycles = cfg.cycles;  // query cycles; cycle 0 is initial
  const int last_done = static_cast<int>(run.cycles.size()) - 1;
  if (last_done >= total_cycles) return run;  // complete: no-op
  const int stop = std::min(stop_after_cycle, total_cycles);

  // Model from the last completed cycle (needed for scoring the next one).
  std::optional<nn::UNet<float>> model;
  std::optional<nn::LossPredictor<float>> loss_predictor;
  if (last_done >= 0) {
    auto ck = nn::load_checkpoint(checkpoint_path(paths, last_done, seed));
    model.emplace(std::move(ck.model));
    if (ck.loss_predictor) loss_predictor.emplace(std::move(*ck.loss_predictor));
  }

  for (int cycle = last_done + 1; cycle <= stop; ++cycle) {
    const auto cycle_t0 = std::chrono::steady_clock::now();
    CycleResult res;
    res.cycle = cycle;
    res.batch_score = std::numeric_limits<double>::quiet_NaN();

    if (cycle > 0) {
      if (static_cast<int>(pool.unlabelled.size()) < budget) {
        write_status(paths, cycle, true);
        run.partial = true;
        std::fprintf(stderr,
                     "[alseg] pool exhausted at cycle %d (%zu ids left, "
                     "budget %d); stopping early\n",
                     cycle, pool.unlabelled.size(), budget);
        return run;
      }

      selection::CandidateBatch chosen;
      Rng select_rng(derive_seed(seed, "select", cycle));
      switch (cfg.selection.strategy) {
        case selection::Strategy::random:
          chosen = selection::random_select(pool.unlabelled, budget, select_rng);
          break;
        case selection::Strategy::coreset: {
          const auto lab = bottleneck_features(*model, index, pool.labelled);
          const auto unl = bottleneck_features(*model, index, pool.unlabelled);
          chosen = selection::coreset_select(lab, unl, budget);
          break;
        }
        case selection::Strategy::topk:
        case selection::Strategy::stochastic_batch: {
          std::vector<const data::SliceSample*> samples;
          samples.reserve(pool.unlabelled.size());
          for (const auto& id : pool.unlabelled) samples.push_back(index.get(id));

          const uncertainty::UNetPredictor pred(*model);
          uncertainty::SampleScorer scorer_fn;
          if (cfg.scorer.kind == uncertainty::ScorerKind::learnloss) {
            if (!loss_predictor)
              throw std::runtime_error(
                  "learnloss scoring requires the jointly trained loss module");
            scorer_fn = uncertainty::make_learnloss_scorer(*model, *loss_predictor);
          } else {
            scorer_fn = uncertainty::make_scorer(cfg.scorer, pred);
          }
          uncertainty::ScoreTable table = uncertainty::score_pool(
              scorer_fn, uncertainty::scorer_name(cfg.scorer.kind), samples,
              cycle, nn::model_digest(*model), derive_seed(seed, "score", cycle),
              cfg.score_threads);
          table.save(paths.scores /
                     ("cycle" + std::to_string(cycle) + "_" + table.scorer +
                      ".json"));

          if (cfg.selection.strategy == selection::Strategy::topk) {
            chosen = selection::topk_select(table, budget);
          } else {
            const auto batches = selection::build_stochastic_pool(
                pool.unlabelled, budget, cfg.selection.pool_mode,
                cfg.selection.q, select_rng);
            chosen = selection::stochastic_batch_select(table, batches);
          }
          break;
        }
      }
      res.queried = chosen.sample_ids;
      res.batch_score = chosen.batch_score;
      res.provenance = chosen.provenance;
      pool = data::oracle_annotate(pool, chosen.sample_ids);
    }

    // Retrain from scratch on the current labelled set.
    std::vector<const data::SliceSample*> labelled;
    labelled.reserve(pool.labelled.size());
    for (const auto& id : pool.labelled) labelled.push_back(index.get(id));

    train::TrainConfig tc = cfg.train_cfg;
    tc.seed = derive_seed(seed, "train", cycle);
    res.train_seed = tc.seed;

    const auto train_t0 = std::chrono::steady_clock::now();
    train::TrainedModel trained = train::train(cfg.model, labelled, tc,
                                               cfg.with_loss_module(),
                                               cfg.loss_predictor);
    const double train_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - train_t0)
            .count();
    model.emplace(std::move(trained.model));
    if (trained.loss_predictor)
      loss_predictor.emplace(std::move(*trained.loss_predictor));
    else
      loss_predictor.reset();
    res.history_digest = trained.history.digest();

    res.metrics = eval::evaluate_model(make_eval_predictor(*model), dataset);
    res.labelled_size = static_cast<int>(pool.labelled.size());

    nn::save_checkpoint(checkpoint_path(paths, cycle, seed), *model,
                        loss_predictor ? &*loss_predictor : nullptr);
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - cycle_t0)
            .count();
    append_record(paths, res);
    append_timing(paths, cycle, train_s, res.wall_seconds);
    write_status(paths, cycle + 1, false);
    run.cycles.push_back(std::move(res));
  }
  return run;
}

}  // namespace

ExperimentRun run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  return run_impl(cfg, seed, cfg.cycles);
}

ExperimentRun run_experiment_until(const ExperimentConfig& cfg,
                                   std::uint64_t seed, int stop_after_cycle) {
  if (stop_after_cycle < 0)
    throw std::invalid_argument("run_experiment_until: negative cycle");
  return run_impl(cfg, seed, stop_after_cycle);
}

ExperimentRun resume(const fs::path& run_dir) {
  const RunPaths paths(run_dir);
  const json m = read_manifest(paths);
  ExperimentConfig cfg =
      experiment_config_from_json_string(m.at("config").dump());
  if (cfg.digest() != m.value("config_digest", ""))
    throw std::runtime_error("resume: config digest mismatch in " +
                             run_dir.string());
  return run_impl(cfg, m.at("seed").get<std::uint64_t>(), cfg.cycles);
}

ExperimentRun load_run(const fs::path& run_dir) {
  const RunPaths paths(run_dir);
  const json m = read_manifest(paths);
  ExperimentRun run;
  run.experiment = m.at("experiment").get<std::string>();
  run.seed = m.at("seed").get<std::uint64_t>();
  run.cycles = read_records(paths);
  std::ifstream f(paths.status);
  if (f) {
    json s = json::parse(f, nullptr, false);
    if (!s.is_discarded()) run.partial = s.value("partial", false);
  }
  return run;
}

int run_suite(const ExperimentSuite& suite, int jobs) {
  struct Job {
    const ExperimentConfig* cfg;
    std::uint64_t seed;
  };
  std::vector<Job> todo;
  for (const auto& e : suite.experiments)
    for (const auto s : e.seeds) todo.push_back({&e, s});

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      try {
        run_experiment(*todo[i].cfg, todo[i].seed);
      } catch (const std::exception& e) {
        ++failures;
        std::fprintf(stderr, "[alseg] experiment %s seed %" PRIu64 " failed: %s\n",
                     todo[i].cfg->name.c_str(), todo[i].seed, e.what());
      }
    }
  };

  const int nt = std::max(1, std::min<int>(jobs, static_cast<int>(todo.size())));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::future<void>> futs;
    for (int t = 0; t < nt; ++t)
      futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }
  return failures.load();
}

// ---------------------------------------------------------------------------
// Aggregation

AggregateSummary aggregate_runs(const std::vector<ExperimentRun>& runs,
                                int n_perm, std::uint64_t perm_seed) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");

  AggregateSummary out;
  int common = std::numeric_limits<int>::max();
  for (const auto& r : runs)
    common = std::min(common, static_cast<int>(r.cycles.size()) - 1);
  if (common < 0) throw std::invalid_argument("aggregate_runs: a run has no cycles");
  for (const auto& r : runs)
    if (static_cast<int>(r.cycles.size()) - 1 != common) out.truncated = true;
  if (out.truncated)
    std::fprintf(stderr,
                 "[alseg] warning: runs have mismatched cycle counts; "
                 "aggregating over the common prefix (%d cycles)\n",
                 common);
  out.common_cycles = common;

  // (experiment, seed) -> per-cycle 3D DSC for the paired test.
  std::map<std::pair<std::string, std::uint64_t>, std::vector<double>> paired;

  for (const auto& r : runs) {
    std::vector<double> seq;
    for (int c = 0; c <= common; ++c) {
      const auto& cy = r.cycles[c];
      const MetricKey key{r.experiment, c};
      auto push = [&](std::map<MetricKey, std::vector<double>>& m, double v) {
        if (std::isfinite(v)) m[key].push_back(v);
      };
      push(out.dsc3d, cy.metrics.dsc_3d.mean_non_background);
      push(out.dsc2d, cy.metrics.dsc_2d.mean_non_background);
      push(out.hd3d, cy.metrics.hd95_3d.mean_non_background);
      push(out.hd2d, cy.metrics.hd95_2d.mean_non_background);
      out.labelled_size[key].push_back(cy.labelled_size);
      if (c >= 1) {
        auto pool = [&](std::map<std::string, std::vector<double>>& m, double v) {
          if (std::isfinite(v)) m[r.experiment].push_back(v);
        };
        pool(out.overall_dsc3d, cy.metrics.dsc_3d.mean_non_background);
        pool(out.overall_dsc2d, cy.metrics.dsc_2d.mean_non_background);
        pool(out.overall_hd3d, cy.metrics.hd95_3d.mean_non_background);
        pool(out.overall_hd2d, cy.metrics.hd95_2d.mean_non_background);
        seq.push_back(cy.metrics.dsc_3d.mean_non_background);
      }
    }
    paired[{r.experiment, r.seed}] = std::move(seq);
  }

  // Pairwise tests between experiments with identical (seed, cycle) coverage.
  std::map<std::string, std::set<std::uint64_t>> seeds_of;
  for (const auto& [key, seq] : paired) seeds_of[key.first].insert(key.second);
  std::vector<std::string> exps;
  for (const auto& [e, s] : seeds_of) exps.push_back(e);
  for (std::size_t i = 0; i < exps.size(); ++i) {
    for (std::size_t j = i + 1; j < exps.size(); ++j) {
      if (seeds_of[exps[i]] != seeds_of[exps[j]]) continue;
      std::vector<double> a, b;
      for (const auto s : seeds_of[exps[i]]) {
        const auto& va = paired[{exps[i], s}];
        const auto& vb = paired[{exps[j], s}];
        a.insert(a.end(), va.begin(), va.end());
        b.insert(b.end(), vb.begin(), vb.end());
      }
      if (a.size() >= 2 && a.size() == b.size())
        out.pvalue_dsc3d[{exps[i], exps[j]}] =
            eval::paired_permutation_test(a, b, n_perm, perm_seed);
    }
  }
  return out;
}

std::vector<ExperimentRun> load_all_runs(const fs::path& results_dir) {
  if (!fs::is_directory(results_dir))
    throw std::runtime_error("results dir not found: " + results_dir.string());
  std::vector<fs::path> run_dirs;
  for (const auto& exp : fs::directory_iterator(results_dir)) {
    if (!exp.is_directory()) continue;
    for (const auto& seed_dir : fs::directory_iterator(exp.path())) {
      if (!seed_dir.is_directory()) continue;
      if (fs::exists(seed_dir.path() / "manifest.json"))
        run_dirs.push_back(seed_dir.path());
    }
  }
  std::sort(run_dirs.begin(), run_dirs.end());
  std::vector<ExperimentRun> out;
  for (const auto& d : run_dirs) out.push_back(load_run(d));
  return out;
}

}  // namespace alseg::loop
