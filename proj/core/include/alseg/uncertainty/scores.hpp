#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "alseg/data/types.hpp"
#include "alseg/nn/loss_predictor.hpp"
#include "alseg/nn/unet.hpp"
#include "alseg/rng.hpp"
#include "alseg/tensor.hpp"

namespace alseg::uncertainty {

enum class ScorerKind { entropy, dropout, tta, learnloss };

const char* scorer_name(ScorerKind kind);
ScorerKind scorer_from_name(const std::string& name);

enum class AggregateMode { mean, sum, top_q_mean };

struct ScorerConfig {
  ScorerKind kind = ScorerKind::entropy;
  int k = 8;  // stochastic forwards for dropout / tta
  AggregateMode aggregate = AggregateMode::mean;
  double top_q = 0.1;
  double tta_rotation_deg = 10.0;  // rotations drawn from U(-r, r)
  double tta_noise_sigma = 0.01;

  void validate() const;
};

// Read-only probability surface the scorers run against. Implementations
// must be safe for concurrent calls.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual int class_count() const = 0;
  // (C, H, W) per-pixel class probabilities for one image. When
  // stochastic_dropout is set, dropout masks come from `rng`; batch-norm
  // always runs with inference statistics.
  virtual Tensor<float> probabilities(const Grid2D<float>& image,
                                      bool stochastic_dropout,
                                      Rng* rng) const = 0;
  virtual bool has_dropout() const { return false; }
};

class UNetPredictor : public Predictor {
 public:
  explicit UNetPredictor(const nn::UNet<float>& net) : net_(&net) {}
  int class_count() const override { return net_->config().class_count; }
  Tensor<float> probabilities(const Grid2D<float>& image,
                              bool stochastic_dropout, Rng* rng) const override;
  bool has_dropout() const override {
    return net_->config().dropout_rate > 0.0;
  }

 private:
  const nn::UNet<float>* net_;
};

// Shannon entropy per pixel, natural log, 0*ln 0 := 0. Rejects maps whose
// per-pixel sums stray from 1 by more than 1e-5 or with negative entries.
Grid2D<double> pixel_entropy(const Tensor<float>& prob);

// Jensen-Shannon divergence per pixel across K >= 2 probability maps:
// H(mean of maps) - mean of H(map); bounded by [0, ln K].
Grid2D<double> jsd(const std::vector<Tensor<float>>& probs);

// Pixel-map reduction to a scalar sample score.
double aggregate_pixels(const Grid2D<double>& map,
                        AggregateMode mode = AggregateMode::mean,
                        double top_q = 0.1);

double score_entropy(const Predictor& model, const data::SliceSample& sample,
                     const ScorerConfig& cfg = {});
double score_dropout(const Predictor& model, const data::SliceSample& sample,
                     const ScorerConfig& cfg, Rng& rng);
double score_tta(const Predictor& model, const data::SliceSample& sample,
                 const ScorerConfig& cfg, Rng& rng);
double score_learnloss(const nn::UNet<float>& model,
                       const nn::LossPredictor<float>& loss_predictor,
                       const data::SliceSample& sample);

// Per-unlabelled-sample scores for one cycle and one scorer.
struct ScoreTable {
  std::string scorer;
  std::map<std::string, double> scores;
  int cycle = 0;
  std::string model_digest;

  void save(const std::filesystem::path& path) const;
  static ScoreTable load(const std::filesystem::path& path);
};

using SampleScorer = std::function<double(const data::SliceSample&, Rng&)>;

SampleScorer make_scorer(const ScorerConfig& cfg, const Predictor& model);
SampleScorer make_learnloss_scorer(const nn::UNet<float>& model,
                                   const nn::LossPredictor<float>& lp);

// Scores every sample. Per-sample RNG streams derive from master_seed and
// the sample id, so the table is identical no matter how many threads run.
ScoreTable score_pool(const SampleScorer& scorer, const std::string& name,
                      const std::vector<const data::SliceSample*>& samples,
                      int cycle, const std::string& model_digest,
                      std::uint64_t master_seed, int threads = 1);

}  // namespace alseg::uncertainty
