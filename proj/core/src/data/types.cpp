#include "alseg/data/types.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace alseg::data {

void VolumeRecord::validate(int class_count) const {
  if (!intensities.same_shape(labels))
    throw std::invalid_argument("volume " + volume_id +
                                ": intensity/label shape mismatch");
  if (intensities.size() == 0)
    throw std::invalid_argument("volume " + volume_id + ": empty");
  for (double s : spacing)
    if (!(s > 0.0))
      throw std::invalid_argument("volume " + volume_id + ": non-positive spacing");
  for (ClassId c : labels.v)
    if (static_cast<int>(c) >= class_count)
      throw std::invalid_argument("volume " + volume_id + ": label out of range");
}

void DatasetSplit::validate() const {
  if (class_count < 2) throw std::invalid_argument("dataset: class_count < 2");
  std::set<std::string> vol_train, vol_val, vol_test, ids;
  auto scan = [&](const std::vector<SliceSample>& split, std::set<std::string>& vols) {
    for (const auto& s : split) {
      vols.insert(s.volume_id);
      if (!ids.insert(s.id()).second)
        throw std::invalid_argument("dataset: duplicate sample id " + s.id());
      if (s.image.h != s.mask.h || s.image.w != s.mask.w)
        throw std::invalid_argument("dataset: image/mask shape mismatch in " + s.id());
    }
  };
  scan(train, vol_train);
  scan(validation, vol_val);
  scan(test, vol_test);
  for (const auto& v : vol_train)
    if (vol_val.count(v) || vol_test.count(v))
      throw std::invalid_argument("dataset: volume " + v + " crosses splits");
  for (const auto& v : vol_val)
    if (vol_test.count(v))
      throw std::invalid_argument("dataset: volume " + v + " crosses splits");
}

void PoolState::check_invariants(std::size_t train_size) const {
  if (!std::is_sorted(labelled.begin(), labelled.end()) ||
      !std::is_sorted(unlabelled.begin(), unlabelled.end()))
    throw std::logic_error("pool: id sets not sorted");
  std::vector<std::string> inter;
  std::set_intersection(labelled.begin(), labelled.end(), unlabelled.begin(),
                        unlabelled.end(), std::back_inserter(inter));
  if (!inter.empty()) throw std::logic_error("pool: labelled/unlabelled overlap");
  if (labelled.size() + unlabelled.size() != train_size)
    throw std::logic_error("pool: partition does not cover the train set");
}

}  // namespace alseg::data
