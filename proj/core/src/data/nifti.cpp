#include "alseg/data/nifti.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include <zlib.h>

namespace alseg::data {

namespace {

// Reads a whole file, transparently inflating gzip (gzread passes
// uncompressed files through unchanged).
std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> out;
  unsigned char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof(buf))) > 0)
    out.insert(out.end(), buf, buf + n);
  const bool bad = n < 0;
  gzclose(f);
  if (bad) throw std::runtime_error("gzip error reading " + path.string());
  return out;
}

template <typename T>
T get_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;  // build targets little-endian hosts
}

template <typename Src>
void convert(const unsigned char* p, std::size_t n, double slope, double inter,
             std::vector<float>& out) {
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(get_le<Src>(p + i * sizeof(Src)));
    out[i] = static_cast<float>(v * slope + inter);
  }
}

}  // namespace

Grid3D<float> read_nifti(const std::filesystem::path& path,
                         std::array<double, 3>* spacing_out) {
  const auto bytes = read_all(path);
  if (bytes.size() < 352) throw std::runtime_error("not a NIfTI-1 file: " + path.string());
  const unsigned char* h = bytes.data();

  const std::int32_t sizeof_hdr = get_le<std::int32_t>(h + 0);
  if (sizeof_hdr != 348)
    throw std::runtime_error("unsupported NIfTI header (byte order?): " + path.string());
  if (std::memcmp(h + 344, "n+1", 3) != 0 && std::memcmp(h + 344, "ni1", 3) != 0)
    throw std::runtime_error("missing NIfTI magic: " + path.string());

  const std::int16_t ndim = get_le<std::int16_t>(h + 40);
  if (ndim < 3 || ndim > 7)
    throw std::runtime_error("expected a 3D NIfTI image: " + path.string());
  const std::size_t nx = static_cast<std::size_t>(get_le<std::int16_t>(h + 42));
  const std::size_t ny = static_cast<std::size_t>(get_le<std::int16_t>(h + 44));
  const std::size_t nz = static_cast<std::size_t>(get_le<std::int16_t>(h + 46));
  for (int d = 4; d <= ndim; ++d)
    if (get_le<std::int16_t>(h + 40 + 2 * d) > 1)
      throw std::runtime_error("expected a 3D NIfTI image: " + path.string());

  const std::int16_t datatype = get_le<std::int16_t>(h + 70);
  const double sx = get_le<float>(h + 76 + 4);
  const double sy = get_le<float>(h + 76 + 8);
  const double sz = get_le<float>(h + 76 + 12);
  const float vox_offset = get_le<float>(h + 108);
  double slope = get_le<float>(h + 112);
  double inter = get_le<float>(h + 116);
  if (slope == 0.0) {
    slope = 1.0;
    inter = 0.0;
  }

  const std::size_t n = nx * ny * nz;
  const std::size_t off = static_cast<std::size_t>(vox_offset);
  const unsigned char* data = bytes.data() + off;

  std::vector<float> v;
  auto need = [&](std::size_t elem) {
    if (bytes.size() < off + n * elem)
      throw std::runtime_error("truncated NIfTI data: " + path.string());
  };
  switch (datatype) {
    case 2:   need(1); convert<std::uint8_t>(data, n, slope, inter, v); break;
    case 256: need(1); convert<std::int8_t>(data, n, slope, inter, v); break;
    case 4:   need(2); convert<std::int16_t>(data, n, slope, inter, v); break;
    case 512: need(2); convert<std::uint16_t>(data, n, slope, inter, v); break;
    case 8:   need(4); convert<std::int32_t>(data, n, slope, inter, v); break;
    case 16:  need(4); convert<float>(data, n, slope, inter, v); break;
    case 64:  need(8); convert<double>(data, n, slope, inter, v); break;
    default:
      throw std::runtime_error("unsupported NIfTI datatype " +
                               std::to_string(datatype) + ": " + path.string());
  }

  // NIfTI stores x fastest; (z, y, x) therefore maps directly onto our
  // (axis0, h, w) row-major layout.
  Grid3D<float> g(nz, ny, nx);
  g.v = std::move(v);
  if (spacing_out) *spacing_out = {sz, sy, sx};
  return g;
}

VolumeRecord read_nifti_volume(const std::filesystem::path& image_path,
                               const std::filesystem::path& label_path,
                               const std::string& volume_id) {
  VolumeRecord rec;
  rec.volume_id = volume_id;
  std::array<double, 3> spacing{};
  rec.intensities = read_nifti(image_path, &spacing);
  rec.spacing = spacing;

  Grid3D<float> lab = read_nifti(label_path, nullptr);
  if (!lab.same_shape(rec.intensities))
    throw std::runtime_error("label shape differs from image for " + volume_id);
  rec.labels = Grid3D<ClassId>(lab.d, lab.h, lab.w);
  for (std::size_t i = 0; i < lab.v.size(); ++i) {
    const long c = std::lround(static_cast<double>(lab.v[i]));
    if (c < 0 || c > 255)
      throw std::runtime_error("label value out of range for " + volume_id);
    rec.labels.v[i] = static_cast<ClassId>(c);
  }
  return rec;
}

}  // namespace alseg::data
