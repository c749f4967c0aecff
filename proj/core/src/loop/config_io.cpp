#include "alseg/loop/config_io.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace alseg::loop {

namespace {

using json = nlohmann::ordered_json;

json dataset_to_json(const DatasetSpec& d) {
  json j;
  if (d.kind == DatasetSpec::Kind::synthetic) {
    j["kind"] = "synthetic";
    j["seed"] = d.seed;
    j["volumes"] = d.volumes;
    j["slices_per_volume"] = d.slices_per_volume;
    j["size"] = {d.size[0], d.size[1]};
    j["class_count"] = d.class_count;
  } else {
    j["kind"] = "disk";
    j["root"] = d.root;
    j["target_spacing"] = d.target_spacing;
    j["target_size"] = {d.target_size[0], d.target_size[1]};
  }
  return j;
}

DatasetSpec dataset_from_json(const json& j) {
  DatasetSpec d;
  const std::string kind = j.value("kind", "synthetic");
  if (kind == "synthetic") {
    d.kind = DatasetSpec::Kind::synthetic;
    d.seed = j.value("seed", d.seed);
    d.volumes = j.value("volumes", d.volumes);
    d.slices_per_volume = j.value("slices_per_volume", d.slices_per_volume);
    if (j.contains("size")) {
      const auto v = j.at("size").get<std::vector<std::size_t>>();
      if (v.size() != 2) throw std::invalid_argument("dataset.size wants [H, W]");
      d.size = {v[0], v[1]};
    }
    d.class_count = j.value("class_count", d.class_count);
  } else if (kind == "disk") {
    d.kind = DatasetSpec::Kind::disk;
    d.root = j.value("root", std::string());
    d.target_spacing = j.value("target_spacing", d.target_spacing);
    if (j.contains("target_size")) {
      const auto v = j.at("target_size").get<std::vector<std::size_t>>();
      if (v.size() != 2)
        throw std::invalid_argument("dataset.target_size wants [H, W]");
      d.target_size = {v[0], v[1]};
    }
  } else {
    throw std::invalid_argument("dataset.kind must be synthetic or disk");
  }
  return d;
}

json model_to_json(const nn::SegModelConfig& m) {
  json j;
  j["depth"] = m.depth;
  j["base_channels"] = m.base_channels;
  j["class_count"] = m.class_count;
  j["dropout_rate"] = m.dropout_rate;
  j["negative_slope"] = m.negative_slope;
  return j;
}

nn::SegModelConfig model_from_json(const json& j) {
  nn::SegModelConfig m;
  m.depth = j.value("depth", m.depth);
  m.base_channels = j.value("base_channels", m.base_channels);
  m.class_count = j.value("class_count", m.class_count);
  m.dropout_rate = j.value("dropout_rate", m.dropout_rate);
  m.negative_slope = j.value("negative_slope", m.negative_slope);
  return m;
}

json train_to_json(const train::TrainConfig& t) {
  json j;
  j["epochs"] = t.epochs;
  j["iters_per_epoch"] = t.iters_per_epoch;
  j["batch_size"] = t.batch_size;
  j["lr_init"] = t.lr_init;
  j["weight_decay"] = t.weight_decay;
  j["warmup_epochs"] = t.warmup_epochs;
  j["warmup_factor"] = t.warmup_factor;
  j["aug_rotation_deg"] = {t.aug_rotation_deg[0], t.aug_rotation_deg[1]};
  j["aug_noise_sigma"] = t.aug_noise_sigma;
  return j;
}

train::TrainConfig train_from_json(const json& j) {
  train::TrainConfig t;
  t.epochs = j.value("epochs", t.epochs);
  t.iters_per_epoch = j.value("iters_per_epoch", t.iters_per_epoch);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.lr_init = j.value("lr_init", t.lr_init);
  t.weight_decay = j.value("weight_decay", t.weight_decay);
  t.warmup_epochs = j.value("warmup_epochs", t.warmup_epochs);
  t.warmup_factor = j.value("warmup_factor", t.warmup_factor);
  if (j.contains("aug_rotation_deg")) {
    const auto v = j.at("aug_rotation_deg").get<std::vector<double>>();
    if (v.size() != 2)
      throw std::invalid_argument("train.aug_rotation_deg wants [lo, hi]");
    t.aug_rotation_deg = {v[0], v[1]};
  }
  t.aug_noise_sigma = j.value("aug_noise_sigma", t.aug_noise_sigma);
  return t;
}

json lp_to_json(const nn::LossPredictorConfig& c) {
  json j;
  j["tap_projection_dim"] = c.tap_projection_dim;
  j["margin"] = c.margin;
  j["loss_weight"] = c.loss_weight;
  j["detach_features"] = c.detach_features;
  return j;
}

nn::LossPredictorConfig lp_from_json(const json& j) {
  nn::LossPredictorConfig c;
  c.tap_projection_dim = j.value("tap_projection_dim", c.tap_projection_dim);
  c.margin = j.value("margin", c.margin);
  c.loss_weight = j.value("loss_weight", c.loss_weight);
  c.detach_features = j.value("detach_features", c.detach_features);
  return c;
}

json selection_to_json(const selection::SelectionConfig& s) {
  json j;
  j["strategy"] = selection::strategy_name(s.strategy);
  j["budget"] = s.budget;
  j["pool_mode"] = selection::pool_mode_name(s.pool_mode);
  j["q"] = s.q;
  return j;
}

selection::SelectionConfig selection_from_json(const json& j) {
  selection::SelectionConfig s;
  if (j.contains("strategy"))
    s.strategy = selection::strategy_from_name(j.at("strategy").get<std::string>());
  s.budget = j.value("budget", s.budget);
  if (j.contains("pool_mode"))
    s.pool_mode =
        selection::pool_mode_from_name(j.at("pool_mode").get<std::string>());
  if (j.contains("q")) {
    if (j.at("q").is_string()) {
      if (j.at("q").get<std::string>() != "auto")
        throw std::invalid_argument("selection.q must be a number or \"auto\"");
      s.q = 0;
    } else {
      s.q = j.at("q").get<int>();
    }
  }
  return s;
}

const char* aggregate_name(uncertainty::AggregateMode m) {
  switch (m) {
    case uncertainty::AggregateMode::sum: return "sum";
    case uncertainty::AggregateMode::top_q_mean: return "top_q_mean";
    default: return "mean";
  }
}

uncertainty::AggregateMode aggregate_from_name(const std::string& s) {
  if (s == "mean") return uncertainty::AggregateMode::mean;
  if (s == "sum") return uncertainty::AggregateMode::sum;
  if (s == "top_q_mean") return uncertainty::AggregateMode::top_q_mean;
  throw std::invalid_argument("unknown aggregate mode: " + s);
}

json scorer_to_json(const uncertainty::ScorerConfig& s) {
  json j;
  j["name"] = uncertainty::scorer_name(s.kind);
  j["k"] = s.k;
  j["aggregate"] = aggregate_name(s.aggregate);
  j["top_q"] = s.top_q;
  j["tta_rotation_deg"] = s.tta_rotation_deg;
  j["tta_noise_sigma"] = s.tta_noise_sigma;
  return j;
}

uncertainty::ScorerConfig scorer_from_json(const json& j) {
  uncertainty::ScorerConfig s;
  if (j.contains("name"))
    s.kind = uncertainty::scorer_from_name(j.at("name").get<std::string>());
  s.k = j.value("k", s.k);
  if (j.contains("aggregate"))
    s.aggregate = aggregate_from_name(j.at("aggregate").get<std::string>());
  s.top_q = j.value("top_q", s.top_q);
  s.tta_rotation_deg = j.value("tta_rotation_deg", s.tta_rotation_deg);
  s.tta_noise_sigma = j.value("tta_noise_sigma", s.tta_noise_sigma);
  return s;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = 1;
  j["name"] = c.name;
  j["dataset"] = dataset_to_json(c.dataset);
  j["model"] = model_to_json(c.model);
  j["train"] = train_to_json(c.train_cfg);
  j["loss_predictor"] = lp_to_json(c.loss_predictor);
  j["selection"] = selection_to_json(c.selection);
  j["scorer"] = scorer_to_json(c.scorer);
  j["n_init"] = c.n_init;
  j["cycles"] = c.cycles;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["score_threads"] = c.score_threads;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (j.value("schema_version", 0) != 1)
    throw std::invalid_argument("config: unsupported schema_version");
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  if (j.contains("dataset")) c.dataset = dataset_from_json(j.at("dataset"));
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("train")) c.train_cfg = train_from_json(j.at("train"));
  if (j.contains("loss_predictor"))
    c.loss_predictor = lp_from_json(j.at("loss_predictor"));
  if (j.contains("selection")) c.selection = selection_from_json(j.at("selection"));
  if (j.contains("scorer")) c.scorer = scorer_from_json(j.at("scorer"));
  c.n_init = j.value("n_init", c.n_init);
  c.cycles = j.value("cycles", c.cycles);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.output_dir = j.value("output_dir", c.output_dir);
  c.score_threads = j.value("score_threads", c.score_threads);
  return c;
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like path.to.key=value: " +
                                assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json* node = &root;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    if (key.empty()) throw std::invalid_argument("bad override path: " + path);
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

}  // namespace

ExperimentSuite parse_suite_json(const std::string& text,
                                 const std::vector<std::string>& overrides) {
  json root = json::parse(text);
  for (const auto& o : overrides) apply_override(root, o);

  ExperimentSuite suite;
  if (root.contains("strategies")) {
    const json base = [&] {
      json b = root;
      b.erase("strategies");
      return b;
    }();
    for (const auto& entry : root.at("strategies")) {
      json j = base;
      if (entry.contains("name")) j["name"] = entry.at("name");
      if (entry.contains("strategy"))
        j["selection"]["strategy"] = entry.at("strategy");
      if (entry.contains("scorer")) j["scorer"]["name"] = entry.at("scorer");
      if (entry.contains("q")) j["selection"]["q"] = entry.at("q");
      if (entry.contains("pool_mode"))
        j["selection"]["pool_mode"] = entry.at("pool_mode");
      suite.experiments.push_back(config_from_json(j));
    }
    if (suite.experiments.empty())
      throw std::invalid_argument("config: empty strategies array");
  } else {
    suite.experiments.push_back(config_from_json(root));
  }
  for (const auto& e : suite.experiments) e.validate();
  return suite;
}

ExperimentSuite load_suite_file(const std::filesystem::path& path,
                                const std::vector<std::string>& overrides) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  try {
    return parse_suite_json(text, overrides);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
}

std::string experiment_config_to_json_string(const ExperimentConfig& cfg) {
  return config_to_json(cfg).dump();
}

ExperimentConfig experiment_config_from_json_string(const std::string& text) {
  return config_from_json(json::parse(text));
}

}  // namespace alseg::loop
