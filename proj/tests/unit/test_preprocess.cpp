#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "alseg/data/preprocess.hpp"
#include "alseg/rng.hpp"

using namespace alseg;
using namespace alseg::data;

namespace {

VolumeRecord make_volume(std::size_t d, std::size_t h, std::size_t w,
                         double spacing = 1.0) {
  VolumeRecord v;
  v.volume_id = "t";
  v.intensities = Grid3D<float>(d, h, w);
  v.labels = Grid3D<ClassId>(d, h, w, 0);
  v.spacing = {spacing, spacing, spacing};
  return v;
}

// Brute-force percentile: full sort, linear interpolation between order
// statistics.
double percentile_oracle(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double rank = p / 100.0 * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (rank - lo) * (v[hi] - v[lo]);
}

}  // namespace

TEST_CASE("percentile matches a sort-based oracle on random data") {
  Rng rng(5);
  for (int it = 0; it < 50; ++it) {
    std::vector<double> v(1 + static_cast<std::size_t>(rng.uniform_index(300)));
    for (auto& x : v) x = rng.normal(0, 10);
    for (const double p : {0.0, 1.0, 37.5, 50.0, 95.0, 99.0, 100.0})
      CHECK(percentile_linear(v, p) == doctest::Approx(percentile_oracle(v, p))
                                           .epsilon(1e-12));
  }
}

TEST_CASE("constant volume normalizes to all zeros") {
  auto v = make_volume(2, 4, 4);
  std::fill(v.intensities.v.begin(), v.intensities.v.end(), 7.0f);
  const auto n = normalize_intensity(v);
  for (float x : n.intensities.v) CHECK(x == 0.0f);
}

TEST_CASE("linear ramp normalization matches hand arithmetic") {
  auto v = make_volume(1, 10, 10);
  for (std::size_t i = 0; i < 100; ++i) v.intensities.v[i] = static_cast<float>(i);
  // p1 = 0.99, p99 = 98.01 under the interpolated-order-statistic convention.
  const auto n = normalize_intensity(v);
  const double expected = (50.0 - 0.99) / (98.01 - 0.99);
  CHECK(n.intensities.v[50] == doctest::Approx(expected).epsilon(1e-5));
  CHECK(expected == doctest::Approx(0.5051).epsilon(1e-3));
}

TEST_CASE("normalization clips into [0,1]") {
  Rng rng(9);
  auto v = make_volume(3, 8, 8);
  for (auto& x : v.intensities.v) x = static_cast<float>(rng.normal(100, 25));
  const auto n = normalize_intensity(v);
  float lo = 1e9f, hi = -1e9f;
  for (float x : n.intensities.v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo >= 0.0f);
  CHECK(hi <= 1.0f);
}

TEST_CASE("normalization is idempotent once both tails clip") {
  // 3% of the mass at each extreme pins the second-pass percentiles to
  // exactly 0 and 1, making the second application an exact identity.
  Rng rng(9);
  auto v = make_volume(1, 25, 40);  // 1000 voxels
  for (std::size_t i = 0; i < 1000; ++i) {
    if (i < 30)
      v.intensities.v[i] = -1000.0f;
    else if (i >= 970)
      v.intensities.v[i] = 1000.0f;
    else
      v.intensities.v[i] = static_cast<float>(rng.uniform(-3, 3));
  }
  const auto n = normalize_intensity(v);
  const auto n2 = normalize_intensity(n);
  CHECK(n2.intensities.v == n.intensities.v);

  // On generic data the second pass is only an affine squeeze by the
  // percentile gap; values stay within a small tolerance.
  auto g = make_volume(3, 8, 8);
  for (auto& x : g.intensities.v) x = static_cast<float>(rng.normal(100, 25));
  const auto g1 = normalize_intensity(g);
  const auto g2 = normalize_intensity(g1);
  for (std::size_t i = 0; i < g1.intensities.v.size(); ++i)
    CHECK(std::abs(g2.intensities.v[i] - g1.intensities.v[i]) < 0.05);
}

TEST_CASE("labels unchanged by normalization") {
  auto v = make_volume(2, 4, 4);
  v.labels.at(0, 1, 2) = 1;
  Rng rng(2);
  for (auto& x : v.intensities.v) x = static_cast<float>(rng.uniform(0, 50));
  const auto n = normalize_intensity(v);
  CHECK(n.labels.v == v.labels.v);
}

TEST_CASE("identity resample keeps planes bit-identical") {
  Rng rng(4);
  auto v = make_volume(5, 16, 16, 1.0);
  for (auto& x : v.intensities.v) x = static_cast<float>(rng.uniform());
  v.labels.at(2, 8, 8) = 1;
  const auto slices = volume_to_slices(v, 1.0, {16, 16});
  REQUIRE(slices.size() == 5);
  for (std::size_t z = 0; z < 5; ++z) {
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) {
        CHECK(slices[z].image.at(y, x) == v.intensities.at(z, y, x));
        CHECK(slices[z].mask.at(y, x) == v.labels.at(z, y, x));
      }
    CHECK(slices[z].slice_index == static_cast<int>(z));
    CHECK(slices[z].pixel_spacing[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("2 mm spacing across 10 slices resamples to 19 slices") {
  auto v = make_volume(10, 8, 8, 1.0);
  v.spacing = {2.0, 1.0, 1.0};
  const auto slices = volume_to_slices(v, 1.0, {8, 8});
  // Physical extent (10 - 1) * 2 mm = 18 mm; floor(18 / 1) + 1 = 19.
  CHECK(slices.size() == 19);
}

TEST_CASE("resize preserves the label vocabulary") {
  Rng rng(6);
  auto v = make_volume(3, 20, 20);
  for (auto& x : v.intensities.v) x = static_cast<float>(rng.uniform());
  for (auto& l : v.labels.v)
    l = static_cast<ClassId>(rng.uniform_index(3));
  const auto slices = volume_to_slices(v, 1.0, {14, 14});
  for (const auto& s : slices)
    for (ClassId c : s.mask.v) CHECK(c < 3);
  // Spacing reflects the resize: 20 px at 1 mm squeezed into 14 px.
  CHECK(slices[0].pixel_spacing[0] == doctest::Approx(20.0 / 14.0));
}

TEST_CASE("degenerate volumes are rejected") {
  auto v = make_volume(2, 4, 4);
  CHECK_THROWS(volume_to_slices(v, -1.0, {4, 4}));
  CHECK_THROWS(volume_to_slices(v, 1.0, {0, 4}));
  VolumeRecord empty;
  CHECK_THROWS(normalize_intensity(empty));
  CHECK_THROWS(percentile_linear({}, 50.0));
  CHECK_THROWS(percentile_linear({1.0}, 101.0));
}
