#pragma once

#include <cstdint>

#include "alseg/tensor.hpp"

namespace alseg {

// Bilinear resize with pixel-center alignment; source sampling clamps to
// the image border.
Grid2D<float> resize_bilinear(const Grid2D<float>& src, std::size_t out_h,
                              std::size_t out_w);

// Nearest-neighbour resize; preserves the label vocabulary.
Grid2D<std::uint8_t> resize_nearest(const Grid2D<std::uint8_t>& src,
                                    std::size_t out_h, std::size_t out_w);

// Rotation about the image centre by `degrees` (counter-clockwise with the
// y axis pointing down). Samples falling outside the source are filled with
// `fill`.
Grid2D<float> rotate_bilinear(const Grid2D<float>& src, double degrees,
                              float fill);
Grid2D<std::uint8_t> rotate_nearest(const Grid2D<std::uint8_t>& src,
                                    double degrees, std::uint8_t fill);

// Rotates each channel plane of a (C, H, W) tensor bilinearly with zero
// fill and writes the per-pixel plane sum into `sums` (H, W). Used to undo
// test-time rotations on probability maps before renormalization.
Tensor<float> rotate_planes_bilinear(const Tensor<float>& src, double degrees,
                                     Grid2D<float>* sums);

}  // namespace alseg
