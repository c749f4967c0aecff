#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alseg/rng.hpp"
#include "alseg/uncertainty/scores.hpp"

namespace alseg::selection {

enum class Strategy { random, topk, stochastic_batch, coreset };
enum class PoolMode { partition, resample };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);
const char* pool_mode_name(PoolMode m);
PoolMode pool_mode_from_name(const std::string& name);

struct SelectionConfig {
  Strategy strategy = Strategy::stochastic_batch;
  int budget = 10;
  PoolMode pool_mode = PoolMode::partition;
  // Number of candidate batches; 0 means "auto", i.e. floor(|U|/B) in
  // partition mode. Resample mode requires an explicit value.
  int q = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CandidateBatch {
  std::vector<std::string> sample_ids;  // sorted
  double batch_score = 0.0;             // NaN for score-free strategies
  int provenance = -1;                  // winning index in the candidate pool
};

// Uniform draw of `budget` ids without replacement.
CandidateBatch random_select(const std::vector<std::string>& unlabelled,
                             int budget, Rng& rng);

// The `budget` highest-scoring ids; ties break toward the lexicographically
// smaller id.
CandidateBatch topk_select(const uncertainty::ScoreTable& scores, int budget);

// Candidate batch pool. Partition mode shuffles the unlabelled ids and
// chops them into floor(|U|/B) disjoint batches (leftover ids sit this
// cycle out). Resample mode draws q independent batches, each without
// replacement internally, so ids may recur across batches.
std::vector<std::vector<std::string>> build_stochastic_pool(
    const std::vector<std::string>& unlabelled, int budget, PoolMode mode,
    int q, Rng& rng);

// Scores each candidate batch by the mean member score and returns the
// argmax; ties break toward the lowest batch index. A pooled id without a
// score is a hard error.
CandidateBatch stochastic_batch_select(
    const uncertainty::ScoreTable& scores,
    const std::vector<std::vector<std::string>>& pool_batches);

// k-center greedy: repeatedly pick the unlabelled point farthest (Euclidean)
// from the covered set (labelled + already picked). With no labelled points
// the first pick maximizes the distance to the unlabelled centroid. Ties
// break toward the smaller id.
using FeatureSet = std::vector<std::pair<std::string, std::vector<double>>>;
CandidateBatch coreset_select(const FeatureSet& labelled_feats,
                              const FeatureSet& unlabelled_feats, int budget);

}  // namespace alseg::selection
