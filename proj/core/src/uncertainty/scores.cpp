#include "alseg/uncertainty/scores.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "alseg/image_ops.hpp"

namespace alseg::uncertainty {

namespace {
using json = nlohmann::ordered_json;
}

const char* scorer_name(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::entropy: return "entropy";
    case ScorerKind::dropout: return "dropout";
    case ScorerKind::tta: return "tta";
    case ScorerKind::learnloss: return "learnloss";
  }
  return "entropy";
}

ScorerKind scorer_from_name(const std::string& name) {
  if (name == "entropy") return ScorerKind::entropy;
  if (name == "dropout") return ScorerKind::dropout;
  if (name == "tta") return ScorerKind::tta;
  if (name == "learnloss") return ScorerKind::learnloss;
  throw std::invalid_argument("unknown scorer: " + name);
}

void ScorerConfig::validate() const {
  if (k < 2) throw std::invalid_argument("scorer: k >= 2");
  if (top_q <= 0.0 || top_q > 1.0)
    throw std::invalid_argument("scorer: top_q in (0, 1]");
  if (tta_rotation_deg < 0.0 || tta_noise_sigma < 0.0)
    throw std::invalid_argument("scorer: negative TTA parameters");
}

Tensor<float> UNetPredictor::probabilities(const Grid2D<float>& image,
                                           bool stochastic_dropout,
                                           Rng* rng) const {
  Tensor<float> input({1, 1, image.h, image.w});
  std::copy(image.v.begin(), image.v.end(), input.data());
  nn::ForwardResult<float> res = net_->forward(input, stochastic_dropout, rng);
  Tensor<float> probs(
      {static_cast<std::size_t>(net_->config().class_count), image.h, image.w});
  std::copy(res.probabilities.data(), res.probabilities.data() + probs.size(),
            probs.data());
  return probs;
}

namespace {

void check_distribution(const Tensor<float>& prob) {
  if (prob.ndim() != 3) throw std::invalid_argument("expected a (C,H,W) map");
  const std::size_t c = prob.dim(0), hw = prob.dim(1) * prob.dim(2);
  for (std::size_t p = 0; p < hw; ++p) {
    double sum = 0.0;
    for (std::size_t ci = 0; ci < c; ++ci) {
      const double v = prob[ci * hw + p];
      if (v < -1e-7 || !std::isfinite(v))
        throw std::invalid_argument("invalid probability value");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-5)
      throw std::invalid_argument("probabilities do not sum to 1");
  }
}

inline double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

Grid2D<double> pixel_entropy(const Tensor<float>& prob) {
  check_distribution(prob);
  const std::size_t c = prob.dim(0), h = prob.dim(1), w = prob.dim(2);
  const std::size_t hw = h * w;
  Grid2D<double> out(h, w);
  for (std::size_t p = 0; p < hw; ++p) {
    double acc = 0.0;
    for (std::size_t ci = 0; ci < c; ++ci)
      acc -= plogp(std::max(0.0, static_cast<double>(prob[ci * hw + p])));
    out.v[p] = acc;
  }
  return out;
}

Grid2D<double> jsd(const std::vector<Tensor<float>>& probs) {
  if (probs.size() < 2) throw std::invalid_argument("jsd: need K >= 2 maps");
  for (const auto& p : probs) {
    check_distribution(p);
    if (!p.same_shape(probs.front()))
      throw std::invalid_argument("jsd: map shape mismatch");
  }
  const std::size_t k = probs.size();
  const std::size_t c = probs[0].dim(0), h = probs[0].dim(1), w = probs[0].dim(2);
  const std::size_t hw = h * w;

  Grid2D<double> out(h, w);
  for (std::size_t p = 0; p < hw; ++p) {
    double mean_entropy = 0.0;
    double mix_entropy = 0.0;
    for (std::size_t ci = 0; ci < c; ++ci) {
      double mix = 0.0;
      for (std::size_t ki = 0; ki < k; ++ki) {
        const double v = std::max(0.0, double(probs[ki][ci * hw + p]));
        mix += v;
        mean_entropy -= plogp(v);
      }
      mix_entropy -= plogp(mix / static_cast<double>(k));
    }
    const double v = mix_entropy - mean_entropy / static_cast<double>(k);
    out.v[p] = std::max(0.0, v);  // guard ulp-level negatives
  }
  return out;
}

double aggregate_pixels(const Grid2D<double>& map, AggregateMode mode,
                        double top_q) {
  if (map.v.empty()) throw std::invalid_argument("aggregate_pixels: empty map");
  for (double v : map.v)
    if (!std::isfinite(v))
      throw std::invalid_argument("aggregate_pixels: non-finite value");
  switch (mode) {
    case AggregateMode::sum: {
      double s = 0.0;
      for (double v : map.v) s += v;
      return s;
    }
    case AggregateMode::top_q_mean: {
      if (top_q <= 0.0 || top_q > 1.0)
        throw std::invalid_argument("aggregate_pixels: top_q in (0, 1]");
      const std::size_t n = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(top_q * map.v.size())));
      std::vector<double> v = map.v;
      std::nth_element(v.begin(), v.begin() + (n - 1), v.end(),
                       std::greater<double>());
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += v[i];
      return s / static_cast<double>(n);
    }
    case AggregateMode::mean:
    default: {
      double s = 0.0;
      for (double v : map.v) s += v;
      return s / static_cast<double>(map.v.size());
    }
  }
}

double score_entropy(const Predictor& model, const data::SliceSample& sample,
                     const ScorerConfig& cfg) {
  const Tensor<float> probs = model.probabilities(sample.image, false, nullptr);
  return aggregate_pixels(pixel_entropy(probs), cfg.aggregate, cfg.top_q);
}

double score_dropout(const Predictor& model, const data::SliceSample& sample,
                     const ScorerConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!model.has_dropout()) {
    std::fprintf(stderr,
                 "[alseg] warning: dropout scoring with dropout_rate = 0 is "
                 "degenerate; score is 0\n");
    return 0.0;
  }
  std::vector<Tensor<float>> maps;
  maps.reserve(cfg.k);
  for (int i = 0; i < cfg.k; ++i)
    maps.push_back(model.probabilities(sample.image, true, &rng));
  return aggregate_pixels(jsd(maps), cfg.aggregate, cfg.top_q);
}

double score_tta(const Predictor& model, const data::SliceSample& sample,
                 const ScorerConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t h = sample.image.h, w = sample.image.w;
  const int classes = model.class_count();
  std::vector<Tensor<float>> maps;
  maps.reserve(cfg.k);

  for (int k = 0; k < cfg.k; ++k) {
    // Transform: additive noise, then rotation.
    const double d =
        rng.uniform(-cfg.tta_rotation_deg, cfg.tta_rotation_deg);
    Grid2D<float> x = sample.image;
    if (cfg.tta_noise_sigma > 0.0)
      for (auto& v : x.v)
        v += static_cast<float>(rng.normal(0.0, cfg.tta_noise_sigma));
    x = rotate_bilinear(x, d, 0.0f);

    const Tensor<float> raw = model.probabilities(x, false, nullptr);

    // Inverse transform on the probability planes (noise has no inverse),
    // then per-pixel renormalization; pixels drawn fully from padding get
    // the uniform distribution.
    Grid2D<float> sums;
    Tensor<float> back = rotate_planes_bilinear(raw, -d, &sums);
    const float uniform = 1.0f / static_cast<float>(classes);
    const std::size_t hw = h * w;
    for (std::size_t p = 0; p < hw; ++p) {
      const float s = sums.v[p];
      if (s < 1e-6f) {
        for (int ci = 0; ci < classes; ++ci) back[ci * hw + p] = uniform;
      } else {
        const float inv = 1.0f / s;
        for (int ci = 0; ci < classes; ++ci) {
          const float v = std::max(0.0f, back[ci * hw + p]);
          back[ci * hw + p] = v * inv;
        }
      }
    }
    maps.push_back(std::move(back));
  }
  return aggregate_pixels(jsd(maps), cfg.aggregate, cfg.top_q);
}

double score_learnloss(const nn::UNet<float>& model,
                       const nn::LossPredictor<float>& loss_predictor,
                       const data::SliceSample& sample) {
  if (!loss_predictor.trained())
    throw std::invalid_argument(
        "score_learnloss: loss predictor has not been trained");
  Tensor<float> input({1, 1, sample.image.h, sample.image.w});
  std::copy(sample.image.v.begin(), sample.image.v.end(), input.data());
  const nn::ForwardResult<float> res = model.forward(input, false, nullptr);

  std::vector<const Tensor<float>*> taps;
  taps.reserve(res.feature_taps.size());
  for (const auto& t : res.feature_taps) taps.push_back(&t);

  typename nn::LossPredictor<float>::Workspace ws;
  Tensor<float> pred;
  loss_predictor.forward(taps, ws, pred);
  const double v = pred[0];
  if (!std::isfinite(v))
    throw std::runtime_error("score_learnloss: non-finite prediction");
  return v;
}

SampleScorer make_scorer(const ScorerConfig& cfg, const Predictor& model) {
  switch (cfg.kind) {
    case ScorerKind::entropy:
      return [cfg, &model](const data::SliceSample& s, Rng&) {
        return score_entropy(model, s, cfg);
      };
    case ScorerKind::dropout:
      return [cfg, &model](const data::SliceSample& s, Rng& rng) {
        return score_dropout(model, s, cfg, rng);
      };
    case ScorerKind::tta:
      return [cfg, &model](const data::SliceSample& s, Rng& rng) {
        return score_tta(model, s, cfg, rng);
      };
    default:
      throw std::invalid_argument(
          "make_scorer: learnloss needs make_learnloss_scorer");
  }
}

SampleScorer make_learnloss_scorer(const nn::UNet<float>& model,
                                   const nn::LossPredictor<float>& lp) {
  return [&model, &lp](const data::SliceSample& s, Rng&) {
    return score_learnloss(model, lp, s);
  };
}

ScoreTable score_pool(const SampleScorer& scorer, const std::string& name,
                      const std::vector<const data::SliceSample*>& samples,
                      int cycle, const std::string& model_digest,
                      std::uint64_t master_seed, int threads) {
  ScoreTable table;
  table.scorer = name;
  table.cycle = cycle;
  table.model_digest = model_digest;

  std::vector<double> values(samples.size());
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng(derive_seed(master_seed, samples[i]->id()));
      values[i] = scorer(*samples[i], rng);
      if (!std::isfinite(values[i]))
        throw std::runtime_error("score_pool: non-finite score for " +
                                 samples[i]->id());
    }
  };

  const int nt = std::max(1, threads);
  if (nt == 1 || samples.size() < 2) {
    run_range(0, samples.size());
  } else {
    std::vector<std::future<void>> futs;
    const std::size_t chunk = (samples.size() + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(samples.size(), lo + chunk);
      if (lo >= hi) break;
      futs.push_back(std::async(std::launch::async, run_range, lo, hi));
    }
    for (auto& f : futs) f.get();
  }

  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!table.scores.emplace(samples[i]->id(), values[i]).second)
      throw std::invalid_argument("score_pool: duplicate sample id " +
                                  samples[i]->id());
  return table;
}

void ScoreTable::save(const std::filesystem::path& path) const {
  json j;
  j["schema_version"] = 1;
  j["scorer"] = scorer;
  j["cycle"] = cycle;
  j["model_digest"] = model_digest;
  json rows = json::array();
  for (const auto& [id, v] : scores) rows.push_back({id, v});
  j["scores"] = std::move(rows);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write score table " + path.string());
  f << j.dump(2) << "\n";
}

ScoreTable ScoreTable::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read score table " + path.string());
  json j = json::parse(f);
  if (j.value("schema_version", 0) != 1)
    throw std::runtime_error("unsupported score table schema: " + path.string());
  ScoreTable t;
  t.scorer = j.at("scorer").get<std::string>();
  t.cycle = j.at("cycle").get<int>();
  t.model_digest = j.at("model_digest").get<std::string>();
  for (const auto& row : j.at("scores"))
    t.scores[row.at(0).get<std::string>()] = row.at(1).get<double>();
  return t;
}

}  // namespace alseg::uncertainty
