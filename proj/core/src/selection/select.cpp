#include "alseg/selection/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alseg::selection {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::random: return "random";
    case Strategy::topk: return "topk";
    case Strategy::stochastic_batch: return "stochastic_batch";
    case Strategy::coreset: return "coreset";
  }
  return "random";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "random") return Strategy::random;
  if (name == "topk") return Strategy::topk;
  if (name == "stochastic_batch") return Strategy::stochastic_batch;
  if (name == "coreset") return Strategy::coreset;
  throw std::invalid_argument("unknown strategy: " + name);
}

const char* pool_mode_name(PoolMode m) {
  return m == PoolMode::partition ? "partition" : "resample";
}

PoolMode pool_mode_from_name(const std::string& name) {
  if (name == "partition") return PoolMode::partition;
  if (name == "resample") return PoolMode::resample;
  throw std::invalid_argument("unknown pool mode: " + name);
}

void SelectionConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("selection: budget >= 1");
  if (q < 0) throw std::invalid_argument("selection: q >= 0");
  if (pool_mode == PoolMode::resample &&
      strategy == Strategy::stochastic_batch && q == 0)
    throw std::invalid_argument("selection: resample mode needs an explicit q");
}

CandidateBatch random_select(const std::vector<std::string>& unlabelled,
                             int budget, Rng& rng) {
  if (budget < 1) throw std::invalid_argument("random_select: budget >= 1");
  if (unlabelled.size() < static_cast<std::size_t>(budget))
    throw std::invalid_argument("random_select: pool smaller than budget");
  const auto idx = rng.sample_without_replacement(
      unlabelled.size(), static_cast<std::size_t>(budget));
  CandidateBatch out;
  out.batch_score = std::numeric_limits<double>::quiet_NaN();
  for (auto i : idx) out.sample_ids.push_back(unlabelled[i]);
  std::sort(out.sample_ids.begin(), out.sample_ids.end());
  return out;
}

CandidateBatch topk_select(const uncertainty::ScoreTable& scores, int budget) {
  if (budget < 1) throw std::invalid_argument("topk_select: budget >= 1");
  if (scores.scores.size() < static_cast<std::size_t>(budget))
    throw std::invalid_argument("topk_select: pool smaller than budget");

  std::vector<std::pair<std::string, double>> rows(scores.scores.begin(),
                                                   scores.scores.end());
  // Map iteration is id-ascending; stable sort keeps that order inside
  // equal-score groups, which is the documented tie break.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  CandidateBatch out;
  double sum = 0.0;
  for (int i = 0; i < budget; ++i) {
    out.sample_ids.push_back(rows[i].first);
    sum += rows[i].second;
  }
  out.batch_score = sum / budget;
  std::sort(out.sample_ids.begin(), out.sample_ids.end());
  return out;
}

std::vector<std::vector<std::string>> build_stochastic_pool(
    const std::vector<std::string>& unlabelled, int budget, PoolMode mode,
    int q, Rng& rng) {
  if (budget < 1) throw std::invalid_argument("stochastic pool: budget >= 1");
  const std::size_t n = unlabelled.size();

  std::vector<std::vector<std::string>> pool;
  if (mode == PoolMode::partition) {
    if (n < static_cast<std::size_t>(budget))
      throw std::invalid_argument("stochastic pool: fewer unlabelled ids than budget");
    const std::size_t auto_q = n / static_cast<std::size_t>(budget);
    const std::size_t want = q == 0 ? auto_q : static_cast<std::size_t>(q);
    if (want == 0) throw std::invalid_argument("stochastic pool: q must be >= 1");
    if (want != auto_q)
      throw std::invalid_argument(
          "stochastic pool: partition mode fixes q = floor(|U|/B)");
    std::vector<std::string> ids = unlabelled;
    rng.shuffle(ids);
    pool.resize(want);
    for (std::size_t b = 0; b < want; ++b)
      pool[b].assign(ids.begin() + b * budget, ids.begin() + (b + 1) * budget);
    // floor(n/B)*B ids used; leftovers stay unlabelled until the next cycle.
  } else {
    if (q < 1) throw std::invalid_argument("stochastic pool: q must be >= 1");
    if (n < static_cast<std::size_t>(budget))
      throw std::invalid_argument("stochastic pool: fewer unlabelled ids than budget");
    pool.resize(q);
    for (int b = 0; b < q; ++b) {
      const auto idx =
          rng.sample_without_replacement(n, static_cast<std::size_t>(budget));
      for (auto i : idx) pool[b].push_back(unlabelled[i]);
    }
  }
  return pool;
}

CandidateBatch stochastic_batch_select(
    const uncertainty::ScoreTable& scores,
    const std::vector<std::vector<std::string>>& pool_batches) {
  if (pool_batches.empty())
    throw std::invalid_argument("stochastic_batch_select: empty pool");

  CandidateBatch out;
  double best = -std::numeric_limits<double>::infinity();
  int best_idx = -1;
  for (std::size_t b = 0; b < pool_batches.size(); ++b) {
    const auto& batch = pool_batches[b];
    if (batch.empty())
      throw std::invalid_argument("stochastic_batch_select: empty batch");
    double sum = 0.0;
    for (const auto& id : batch) {
      const auto it = scores.scores.find(id);
      if (it == scores.scores.end())
        throw std::invalid_argument(
            "stochastic_batch_select: pooled id has no score: " + id);
      sum += it->second;
    }
    const double mean = sum / static_cast<double>(batch.size());
    if (mean > best) {  // strict: ties keep the lowest batch index
      best = mean;
      best_idx = static_cast<int>(b);
    }
  }
  out.sample_ids = pool_batches[best_idx];
  std::sort(out.sample_ids.begin(), out.sample_ids.end());
  out.batch_score = best;
  out.provenance = best_idx;
  return out;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

CandidateBatch coreset_select(const FeatureSet& labelled_feats,
                              const FeatureSet& unlabelled_feats, int budget) {
  if (budget < 1) throw std::invalid_argument("coreset_select: budget >= 1");
  if (unlabelled_feats.size() < static_cast<std::size_t>(budget))
    throw std::invalid_argument("coreset_select: pool smaller than budget");

  FeatureSet pool = unlabelled_feats;
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t dim = pool.front().second.size();
  for (const auto& [id, f] : pool)
    if (f.size() != dim)
      throw std::invalid_argument("coreset_select: feature dim mismatch");
  for (const auto& [id, f] : labelled_feats)
    if (f.size() != dim)
      throw std::invalid_argument("coreset_select: feature dim mismatch");

  const std::size_t n = pool.size();
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  CandidateBatch out;
  out.batch_score = std::numeric_limits<double>::quiet_NaN();
  std::vector<bool> picked(n, false);
  int b0 = 0;

  if (labelled_feats.empty()) {
    // Bootstrap pick: farthest point from the unlabelled centroid. The
    // centroid is not a covered point, so distances reset afterwards.
    std::vector<double> centroid(dim, 0.0);
    for (const auto& [id, f] : pool)
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += f[d];
    for (auto& c : centroid) c /= static_cast<double>(n);
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sq_dist(pool[i].second, centroid);
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    picked[best] = true;
    out.sample_ids.push_back(pool[best].first);
    for (std::size_t i = 0; i < n; ++i)
      if (!picked[i]) min_sq[i] = sq_dist(pool[i].second, pool[best].second);
    b0 = 1;
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [id, f] : labelled_feats)
        min_sq[i] = std::min(min_sq[i], sq_dist(pool[i].second, f));
  }

  for (int b = b0; b < budget; ++b) {
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (picked[i]) continue;
      if (min_sq[i] > best_d) {  // strict: pool is id-sorted, ties pick low id
        best_d = min_sq[i];
        best = i;
      }
    }
    picked[best] = true;
    out.sample_ids.push_back(pool[best].first);
    for (std::size_t i = 0; i < n; ++i)
      if (!picked[i])
        min_sq[i] = std::min(min_sq[i], sq_dist(pool[i].second, pool[best].second));
  }
  std::sort(out.sample_ids.begin(), out.sample_ids.end());
  return out;
}

}  // namespace alseg::selection
