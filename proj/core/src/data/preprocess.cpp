#include "alseg/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alseg/image_ops.hpp"

namespace alseg::data {

double percentile_linear(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  if (p < 0.0 || p > 100.0) throw std::invalid_argument("percentile out of [0,100]");
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const double vlo = values[lo];
  if (hi == lo) return vlo;
  const double vhi = *std::min_element(values.begin() + lo + 1, values.end());
  return vlo + (rank - lo) * (vhi - vlo);
}

VolumeRecord normalize_intensity(const VolumeRecord& volume) {
  if (volume.intensities.size() == 0)
    throw std::invalid_argument("normalize_intensity: empty volume");
  std::vector<double> vals(volume.intensities.v.begin(), volume.intensities.v.end());
  const double p1 = percentile_linear(vals, 1.0);
  const double p99 = percentile_linear(std::move(vals), 99.0);

  VolumeRecord out = volume;
  if (p99 <= p1) {
    std::fill(out.intensities.v.begin(), out.intensities.v.end(), 0.0f);
    return out;
  }
  const double scale = 1.0 / (p99 - p1);
  for (auto& v : out.intensities.v) {
    const double c = std::clamp(static_cast<double>(v), p1, p99);
    v = static_cast<float>((c - p1) * scale);
  }
  return out;
}

namespace {

std::size_t resampled_count(std::size_t n, double spacing, double target) {
  const double extent = static_cast<double>(n - 1) * spacing;
  return static_cast<std::size_t>(std::floor(extent / target)) + 1;
}

inline std::size_t clampi(long i, std::size_t n) {
  if (i < 0) return 0;
  if (i >= static_cast<long>(n)) return n - 1;
  return static_cast<std::size_t>(i);
}

// Trilinear sample on the source index grid.
float sample_trilinear(const Grid3D<float>& g, double z, double y, double x) {
  const long z0 = static_cast<long>(std::floor(z));
  const long y0 = static_cast<long>(std::floor(y));
  const long x0 = static_cast<long>(std::floor(x));
  const double wz = z - z0, wy = y - y0, wx = x - x0;
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double w =
            (dz ? wz : 1 - wz) * (dy ? wy : 1 - wy) * (dx ? wx : 1 - wx);
        if (w == 0.0) continue;
        acc += w * g.at(clampi(z0 + dz, g.d), clampi(y0 + dy, g.h),
                        clampi(x0 + dx, g.w));
      }
  return static_cast<float>(acc);
}

ClassId sample_nearest(const Grid3D<ClassId>& g, double z, double y, double x) {
  return g.at(clampi(static_cast<long>(std::floor(z + 0.5)), g.d),
              clampi(static_cast<long>(std::floor(y + 0.5)), g.h),
              clampi(static_cast<long>(std::floor(x + 0.5)), g.w));
}

}  // namespace

std::vector<SliceSample> volume_to_slices(const VolumeRecord& volume,
                                          double target_spacing,
                                          std::array<std::size_t, 2> target_size) {
  if (!(target_spacing > 0.0))
    throw std::invalid_argument("volume_to_slices: non-positive target spacing");
  if (target_size[0] == 0 || target_size[1] == 0)
    throw std::invalid_argument("volume_to_slices: empty target size");
  if (volume.intensities.size() == 0 || !volume.intensities.same_shape(volume.labels))
    throw std::invalid_argument("volume_to_slices: invalid volume");

  const std::size_t rd = resampled_count(volume.intensities.d, volume.spacing[0], target_spacing);
  const std::size_t rh = resampled_count(volume.intensities.h, volume.spacing[1], target_spacing);
  const std::size_t rw = resampled_count(volume.intensities.w, volume.spacing[2], target_spacing);
  if (rd < 1) throw std::invalid_argument("volume_to_slices: no slices after resampling");

  // Source index coordinates of resampled grid positions.
  const double fz = target_spacing / volume.spacing[0];
  const double fy = target_spacing / volume.spacing[1];
  const double fx = target_spacing / volume.spacing[2];

  std::vector<SliceSample> out;
  out.reserve(rd);
  const double py = target_spacing * static_cast<double>(rh) / target_size[0];
  const double px = target_spacing * static_cast<double>(rw) / target_size[1];

  Grid2D<float> img(rh, rw);
  Grid2D<ClassId> msk(rh, rw);
  for (std::size_t z = 0; z < rd; ++z) {
    const double sz = z * fz;
    for (std::size_t y = 0; y < rh; ++y) {
      const double sy = y * fy;
      for (std::size_t x = 0; x < rw; ++x) {
        const double sx = x * fx;
        img.at(y, x) = sample_trilinear(volume.intensities, sz, sy, sx);
        msk.at(y, x) = sample_nearest(volume.labels, sz, sy, sx);
      }
    }
    SliceSample s;
    s.volume_id = volume.volume_id;
    s.slice_index = static_cast<int>(z);
    s.image = (rh == target_size[0] && rw == target_size[1])
                  ? img
                  : resize_bilinear(img, target_size[0], target_size[1]);
    s.mask = (rh == target_size[0] && rw == target_size[1])
                 ? msk
                 : resize_nearest(msk, target_size[0], target_size[1]);
    s.pixel_spacing = {py, px};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace alseg::data
