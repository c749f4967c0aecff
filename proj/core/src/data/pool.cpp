#include "alseg/data/pool.hpp"

#include <algorithm>
#include <stdexcept>

#include "alseg/rng.hpp"

namespace alseg::data {

PoolState init_pool(const DatasetSplit& split, std::size_t n_init,
                    std::uint64_t rng_seed) {
  if (n_init == 0) throw std::invalid_argument("init_pool: n_init must be positive");
  if (n_init > split.train.size())
    throw std::invalid_argument("init_pool: n_init exceeds train set");

  std::vector<std::string> ids;
  ids.reserve(split.train.size());
  for (const auto& s : split.train) ids.push_back(s.id());

  Rng rng(rng_seed);
  const auto picked = rng.sample_without_replacement(ids.size(), n_init);
  std::vector<bool> is_labelled(ids.size(), false);
  for (auto i : picked) is_labelled[i] = true;

  PoolState pool;
  for (std::size_t i = 0; i < ids.size(); ++i)
    (is_labelled[i] ? pool.labelled : pool.unlabelled).push_back(ids[i]);
  std::sort(pool.labelled.begin(), pool.labelled.end());
  std::sort(pool.unlabelled.begin(), pool.unlabelled.end());
  pool.cycle = 0;
  return pool;
}

PoolState oracle_annotate(const PoolState& pool,
                          const std::vector<std::string>& queried) {
  std::vector<std::string> q = queried;
  std::sort(q.begin(), q.end());
  if (std::adjacent_find(q.begin(), q.end()) != q.end())
    throw std::invalid_argument("oracle_annotate: duplicate id in query");
  if (!std::includes(pool.unlabelled.begin(), pool.unlabelled.end(), q.begin(),
                     q.end()))
    throw std::invalid_argument(
        "oracle_annotate: query contains an id that is not unlabelled");

  PoolState next;
  next.cycle = pool.cycle + 1;
  next.labelled.reserve(pool.labelled.size() + q.size());
  std::merge(pool.labelled.begin(), pool.labelled.end(), q.begin(), q.end(),
             std::back_inserter(next.labelled));
  std::set_difference(pool.unlabelled.begin(), pool.unlabelled.end(), q.begin(),
                      q.end(), std::back_inserter(next.unlabelled));
  return next;
}

}  // namespace alseg::data
