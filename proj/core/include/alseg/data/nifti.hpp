#pragma once

#include <filesystem>

#include "alseg/data/types.hpp"

namespace alseg::data {

// Minimal NIfTI-1 reader (.nii and .nii.gz, little-endian files) covering
// the usual scalar datatypes. Returns the image grid as (D, H, W) with
// axis 0 = the volume's third spatial axis, and per-axis spacing in mm.
// scl_slope/scl_inter scaling is applied when present.
Grid3D<float> read_nifti(const std::filesystem::path& path,
                         std::array<double, 3>* spacing_out);

// Convenience: pairs an intensity file with a label file (labels are
// rounded to the nearest integer class).
VolumeRecord read_nifti_volume(const std::filesystem::path& image_path,
                               const std::filesystem::path& label_path,
                               const std::string& volume_id);

}  // namespace alseg::data
