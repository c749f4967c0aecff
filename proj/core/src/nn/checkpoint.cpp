#include "alseg/nn/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "alseg/rng.hpp"

namespace alseg::nn {

namespace {

using json = nlohmann::ordered_json;
constexpr char kMagic[8] = {'A', 'L', 'S', 'E', 'G', 'C', 'K', '1'};

json config_json(const SegModelConfig& c) {
  json j;
  j["depth"] = c.depth;
  j["base_channels"] = c.base_channels;
  j["class_count"] = c.class_count;
  j["dropout_rate"] = c.dropout_rate;
  j["negative_slope"] = c.negative_slope;
  return j;
}

SegModelConfig config_from_json(const json& j) {
  SegModelConfig c;
  c.depth = j.at("depth").get<int>();
  c.base_channels = j.at("base_channels").get<int>();
  c.class_count = j.at("class_count").get<int>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.negative_slope = j.at("negative_slope").get<double>();
  return c;
}

json lp_config_json(const LossPredictorConfig& c) {
  json j;
  j["tap_projection_dim"] = c.tap_projection_dim;
  j["margin"] = c.margin;
  j["loss_weight"] = c.loss_weight;
  j["detach_features"] = c.detach_features;
  return j;
}

LossPredictorConfig lp_config_from_json(const json& j) {
  LossPredictorConfig c;
  c.tap_projection_dim = j.at("tap_projection_dim").get<int>();
  c.margin = j.at("margin").get<double>();
  c.loss_weight = j.at("loss_weight").get<double>();
  c.detach_features = j.at("detach_features").get<bool>();
  return c;
}

// Every float buffer of the model in a fixed traversal order.
struct NamedBuffer {
  std::string name;
  float* data;
  std::size_t count;
};

std::vector<NamedBuffer> buffers(UNet<float>& m, LossPredictor<float>* lp) {
  std::vector<NamedBuffer> out;
  for (auto* p : m.params())
    out.push_back({p->name, p->value.data(), p->value.size()});
  int i = 0;
  for (auto* bn : m.batch_norms()) {
    out.push_back({"bn" + std::to_string(i) + ".running_mean",
                   bn->running_mean().data(), bn->running_mean().size()});
    out.push_back({"bn" + std::to_string(i) + ".running_var",
                   bn->running_var().data(), bn->running_var().size()});
    ++i;
  }
  if (lp)
    for (auto* p : lp->params())
      out.push_back({p->name, p->value.data(), p->value.size()});
  return out;
}

}  // namespace

std::string model_digest(UNet<float>& model) {
  std::uint64_t h = fnv1a64(model.config().digest());
  for (const auto& b : buffers(model, nullptr))
    h = fnv1a64(b.data, b.count * sizeof(float), h);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
  return hex;
}

void save_checkpoint(const std::filesystem::path& path, UNet<float>& model,
                     const LossPredictor<float>* loss_predictor) {
  json meta;
  meta["model"] = config_json(model.config());
  if (loss_predictor) {
    meta["loss_predictor"] = lp_config_json(loss_predictor->config());
    meta["loss_predictor_trained"] = loss_predictor->trained();
  }
  const std::string meta_s = meta.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint " + path.string());
  f.write(kMagic, sizeof(kMagic));
  const std::uint64_t meta_len = meta_s.size();
  f.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
  f.write(meta_s.data(), static_cast<std::streamsize>(meta_s.size()));

  auto bufs = buffers(model, const_cast<LossPredictor<float>*>(loss_predictor));
  const std::uint32_t count = static_cast<std::uint32_t>(bufs.size());
  f.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& b : bufs) {
    const std::uint32_t name_len = static_cast<std::uint32_t>(b.name.size());
    const std::uint64_t n = b.count;
    f.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    f.write(b.name.data(), name_len);
    f.write(reinterpret_cast<const char*>(&n), sizeof(n));
    f.write(reinterpret_cast<const char*>(b.data),
            static_cast<std::streamsize>(n * sizeof(float)));
  }
  if (!f) throw std::runtime_error("short write to checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path.string());

  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path.string());

  std::uint64_t meta_len = 0;
  f.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len));
  std::string meta_s(meta_len, '\0');
  f.read(meta_s.data(), static_cast<std::streamsize>(meta_len));
  if (!f) throw std::runtime_error("truncated checkpoint: " + path.string());
  const json meta = json::parse(meta_s);

  LoadedCheckpoint out{UNet<float>(config_from_json(meta.at("model"))),
                       std::nullopt};
  if (meta.contains("loss_predictor")) {
    out.loss_predictor.emplace(lp_config_from_json(meta.at("loss_predictor")),
                               out.model.tap_channels());
    if (meta.value("loss_predictor_trained", false))
      out.loss_predictor->mark_trained();
  }

  auto bufs = buffers(out.model,
                      out.loss_predictor ? &*out.loss_predictor : nullptr);
  std::uint32_t count = 0;
  f.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (count != bufs.size())
    throw std::runtime_error("checkpoint tensor count mismatch: " + path.string());
  for (auto& b : bufs) {
    std::uint32_t name_len = 0;
    f.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    std::uint64_t n = 0;
    f.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!f || name != b.name || n != b.count)
      throw std::runtime_error("checkpoint layout mismatch at " + name + ": " +
                               path.string());
    f.read(reinterpret_cast<char*>(b.data),
           static_cast<std::streamsize>(n * sizeof(float)));
  }
  if (!f) throw std::runtime_error("truncated checkpoint: " + path.string());
  return out;
}

}  // namespace alseg::nn
