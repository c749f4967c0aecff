#include "alseg/train/augment.hpp"

#include "alseg/image_ops.hpp"

namespace alseg::train {

data::SliceSample augment(const data::SliceSample& sample,
                          std::array<double, 2> rotation_deg,
                          double noise_sigma, Rng& rng) {
  const double d = rng.uniform(rotation_deg[0], rotation_deg[1]);

  data::SliceSample out;
  out.volume_id = sample.volume_id;
  out.slice_index = sample.slice_index;
  out.pixel_spacing = sample.pixel_spacing;
  out.image = rotate_bilinear(sample.image, d, 0.0f);
  out.mask = rotate_nearest(sample.mask, d, 0);
  if (noise_sigma > 0.0)
    for (auto& v : out.image.v)
      v += static_cast<float>(rng.normal(0.0, noise_sigma));
  return out;
}

}  // namespace alseg::train
