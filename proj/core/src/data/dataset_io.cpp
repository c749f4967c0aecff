#include "alseg/data/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "alseg/data/preprocess.hpp"

namespace alseg::data {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

template <typename T>
void write_raw(const fs::path& path, const std::vector<T>& v) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(T)));
  if (!f) throw std::runtime_error("short write to " + path.string());
}

template <typename T>
void read_raw(const fs::path& path, std::vector<T>& v, std::size_t count) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  v.resize(count);
  f.read(reinterpret_cast<char*>(v.data()),
         static_cast<std::streamsize>(count * sizeof(T)));
  if (static_cast<std::size_t>(f.gcount()) != count * sizeof(T))
    throw std::runtime_error("truncated file " + path.string());
}

}  // namespace

void write_volume(const fs::path& volume_dir, const VolumeRecord& volume,
                  int class_count) {
  volume.validate(class_count);
  fs::create_directories(volume_dir);
  write_raw(volume_dir / "image.bin", volume.intensities.v);
  write_raw(volume_dir / "label.bin", volume.labels.v);

  json meta;
  meta["schema_version"] = 1;
  meta["volume_id"] = volume.volume_id;
  meta["shape"] = {volume.intensities.d, volume.intensities.h, volume.intensities.w};
  meta["spacing"] = {volume.spacing[0], volume.spacing[1], volume.spacing[2]};
  meta["class_count"] = class_count;
  std::ofstream f(volume_dir / "meta.json");
  if (!f) throw std::runtime_error("cannot write meta.json in " + volume_dir.string());
  f << meta.dump(2) << "\n";
}

VolumeRecord read_volume(const fs::path& volume_dir, int* class_count_out) {
  std::ifstream mf(volume_dir / "meta.json");
  if (!mf) throw std::runtime_error("missing meta.json in " + volume_dir.string());
  json meta = json::parse(mf);
  if (meta.value("schema_version", 0) != 1)
    throw std::runtime_error("unsupported dataset schema in " + volume_dir.string());

  VolumeRecord rec;
  rec.volume_id = meta.at("volume_id").get<std::string>();
  const auto shape = meta.at("shape").get<std::vector<std::size_t>>();
  const auto spacing = meta.at("spacing").get<std::vector<double>>();
  if (shape.size() != 3 || spacing.size() != 3)
    throw std::runtime_error("malformed meta.json in " + volume_dir.string());
  rec.intensities = Grid3D<float>(shape[0], shape[1], shape[2]);
  rec.labels = Grid3D<ClassId>(shape[0], shape[1], shape[2]);
  rec.spacing = {spacing[0], spacing[1], spacing[2]};

  const std::size_t n = shape[0] * shape[1] * shape[2];
  read_raw(volume_dir / "image.bin", rec.intensities.v, n);
  read_raw(volume_dir / "label.bin", rec.labels.v, n);

  const int class_count = meta.at("class_count").get<int>();
  rec.validate(class_count);
  if (class_count_out) *class_count_out = class_count;
  return rec;
}

void write_dataset_root(const fs::path& root,
                        const std::vector<VolumeRecord>& volumes,
                        const std::vector<Split>& splits, int class_count) {
  if (volumes.size() != splits.size())
    throw std::invalid_argument("write_dataset_root: volumes/splits size mismatch");
  for (std::size_t i = 0; i < volumes.size(); ++i)
    write_volume(root / split_name(splits[i]) / volumes[i].volume_id, volumes[i],
                 class_count);
}

DatasetSplit load_dataset_root(const fs::path& root, double target_spacing,
                               std::array<std::size_t, 2> target_size) {
  if (!fs::is_directory(root))
    throw std::runtime_error("dataset root not found: " + root.string());

  DatasetSplit ds;
  int class_count = -1;
  for (Split split : {Split::train, Split::validation, Split::test}) {
    const fs::path dir = root / split_name(split);
    if (!fs::is_directory(dir)) {
      if (split == Split::train)
        throw std::runtime_error("dataset root has no train/ directory: " +
                                 root.string());
      continue;
    }
    std::vector<fs::path> vol_dirs;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory()) vol_dirs.push_back(e.path());
    std::sort(vol_dirs.begin(), vol_dirs.end());

    for (const auto& vd : vol_dirs) {
      int c = 0;
      VolumeRecord rec = read_volume(vd, &c);
      if (class_count == -1) class_count = c;
      if (c != class_count)
        throw std::runtime_error("inconsistent class_count in " + vd.string());
      auto slices =
          volume_to_slices(normalize_intensity(rec), target_spacing, target_size);
      auto& dest = split == Split::train
                       ? ds.train
                       : (split == Split::validation ? ds.validation : ds.test);
      for (auto& s : slices) dest.push_back(std::move(s));
      ds.slice_spacing[rec.volume_id] = target_spacing;
    }
  }
  if (class_count < 2)
    throw std::runtime_error("dataset root contains no volumes: " + root.string());
  ds.class_count = class_count;
  ds.validate();
  return ds;
}

}  // namespace alseg::data
