#include "alseg/data/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "alseg/data/preprocess.hpp"
#include "alseg/rng.hpp"

namespace alseg::data {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

struct Blob {
  double cy0, cx0;        // base centre (pixels)
  double drift_ay, drift_ax, drift_py, drift_px;
  double r0;              // base radius (pixels)
  double rmod_a, rmod_p;  // radius modulation along the stack
  double h2, h2p, h3, h3p;  // boundary harmonics
  double jitter_sigma;

  // Inside test for pixel (y, x) on slice z of depth d; jy/jx are the
  // per-slice jitter draws shared by the whole slice.
  bool contains(double y, double x, double z, double d, double jy,
                double jx) const {
    const double t = kTwoPi * z / d;
    const double cy = cy0 + drift_ay * std::sin(t + drift_py) + jy;
    const double cx = cx0 + drift_ax * std::sin(t + drift_px) + jx;
    const double r = r0 * (1.0 + rmod_a * std::sin(t + rmod_p));
    const double dy = y - cy, dx = x - cx;
    const double phi = std::atan2(dy, dx);
    const double rho =
        r * (1.0 + h2 * std::sin(2.0 * phi + h2p) + h3 * std::sin(3.0 * phi + h3p));
    return dy * dy + dx * dx <= rho * rho;
  }
};

Blob make_blob(Rng& rng, double h, double w, double scale) {
  const double m = std::min(h, w);
  Blob b;
  b.cy0 = rng.uniform(0.30, 0.70) * h;
  b.cx0 = rng.uniform(0.30, 0.70) * w;
  b.drift_ay = rng.uniform(0.0, 0.05) * h;
  b.drift_ax = rng.uniform(0.0, 0.05) * w;
  b.drift_py = rng.uniform(0.0, kTwoPi);
  b.drift_px = rng.uniform(0.0, kTwoPi);
  b.r0 = rng.uniform(0.10, 0.16) * m * scale;
  b.rmod_a = rng.uniform(0.0, 0.15);
  b.rmod_p = rng.uniform(0.0, kTwoPi);
  b.h2 = rng.uniform(0.0, 0.20);
  b.h2p = rng.uniform(0.0, kTwoPi);
  b.h3 = rng.uniform(0.0, 0.12);
  b.h3p = rng.uniform(0.0, kTwoPi);
  b.jitter_sigma = 0.01 * m;
  return b;
}

}  // namespace

std::vector<VolumeRecord> generate_synthetic_volumes(std::uint64_t seed,
                                                     const SyntheticSpec& spec) {
  if (spec.n_volumes < 3)
    throw std::invalid_argument("synthetic: need at least 3 volumes");
  if (spec.slices_per_volume < 1 || spec.size[0] < 8 || spec.size[1] < 8)
    throw std::invalid_argument("synthetic: invalid sizes");
  if (spec.class_count < 2 || spec.class_count > 255)
    throw std::invalid_argument("synthetic: invalid class count");

  const std::size_t H = spec.size[0], W = spec.size[1];
  const std::size_t D = static_cast<std::size_t>(spec.slices_per_volume);
  std::vector<VolumeRecord> volumes;
  volumes.reserve(spec.n_volumes);

  for (int v = 0; v < spec.n_volumes; ++v) {
    Rng rng(derive_seed(seed, "synthetic-volume", static_cast<std::uint64_t>(v)));

    const double bias = rng.uniform(0.10, 0.40);
    const double contrast = rng.uniform(0.25, 0.70);
    const double noise_sigma = rng.uniform(0.02, 0.05);
    const double grad_amp = rng.uniform(0.0, 0.10);
    const double grad_dir = rng.uniform(0.0, kTwoPi);

    // 1-2 blobs per foreground class; the second one is smaller.
    std::vector<std::vector<Blob>> class_blobs(spec.class_count);
    for (int c = 1; c < spec.class_count; ++c) {
      class_blobs[c].push_back(make_blob(rng, double(H), double(W), 1.0));
      if (rng.uniform() < 0.35)
        class_blobs[c].push_back(make_blob(rng, double(H), double(W), 0.6));
    }

    VolumeRecord rec;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "vol%03d", v);
    rec.volume_id = buf;
    rec.intensities = Grid3D<float>(D, H, W);
    rec.labels = Grid3D<ClassId>(D, H, W, 0);
    rec.spacing = {spec.spacing, spec.spacing, spec.spacing};

    const double gy = std::sin(grad_dir), gx = std::cos(grad_dir);
    for (std::size_t z = 0; z < D; ++z) {
      // Per-slice jitter, shared by all blobs of the slice so neighbouring
      // slices stay strongly correlated.
      const double jy = rng.normal(0.0, class_blobs[1].front().jitter_sigma);
      const double jx = rng.normal(0.0, class_blobs[1].front().jitter_sigma);
      for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
          double val = bias + grad_amp * (gy * (double(y) / H - 0.5) +
                                          gx * (double(x) / W - 0.5));
          ClassId label = 0;
          for (int c = 1; c < spec.class_count; ++c) {
            const double level =
                spec.class_count == 2
                    ? 1.0
                    : 0.55 + 0.45 * double(c - 1) / double(spec.class_count - 2);
            for (const Blob& b : class_blobs[c]) {
              if (b.contains(double(y), double(x), double(z), double(D), jy, jx)) {
                val = bias + contrast * level;
                label = static_cast<ClassId>(c);
              }
            }
          }
          val += rng.normal(0.0, noise_sigma);
          rec.intensities.at(z, y, x) = static_cast<float>(val);
          rec.labels.at(z, y, x) = label;
        }
      }
    }
    volumes.push_back(std::move(rec));
  }
  return volumes;
}

std::vector<Split> assign_splits(int n_volumes) {
  if (n_volumes < 3)
    throw std::invalid_argument("assign_splits: need at least 3 volumes");
  int n_test = std::max(1, static_cast<int>(std::lround(0.2 * n_volumes)));
  int n_val = std::max(1, static_cast<int>(std::lround(0.1 * n_volumes)));
  while (n_volumes - n_test - n_val < 1) (n_test > 1 ? n_test : n_val) -= 1;
  std::vector<Split> out(n_volumes, Split::train);
  for (int i = n_volumes - n_test; i < n_volumes; ++i) out[i] = Split::test;
  for (int i = n_volumes - n_test - n_val; i < n_volumes - n_test; ++i)
    out[i] = Split::validation;
  return out;
}

DatasetSplit generate_synthetic_dataset(std::uint64_t seed,
                                        const SyntheticSpec& spec) {
  const auto volumes = generate_synthetic_volumes(seed, spec);
  const auto splits = assign_splits(spec.n_volumes);

  DatasetSplit ds;
  ds.class_count = spec.class_count;
  for (int v = 0; v < spec.n_volumes; ++v) {
    const VolumeRecord norm = normalize_intensity(volumes[v]);
    auto slices = volume_to_slices(norm, spec.spacing, spec.size);
    auto& dest = splits[v] == Split::train
                     ? ds.train
                     : (splits[v] == Split::validation ? ds.validation : ds.test);
    for (auto& s : slices) dest.push_back(std::move(s));
    ds.slice_spacing[volumes[v].volume_id] = spec.spacing;
  }
  ds.validate();
  return ds;
}

DatasetSplit generate_synthetic_dataset(std::uint64_t seed, int n_volumes,
                                        int slices_per_volume,
                                        std::array<std::size_t, 2> size,
                                        int class_count) {
  SyntheticSpec spec;
  spec.n_volumes = n_volumes;
  spec.slices_per_volume = slices_per_volume;
  spec.size = size;
  spec.class_count = class_count;
  return generate_synthetic_dataset(seed, spec);
}

}  // namespace alseg::data
