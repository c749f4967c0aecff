#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alseg/data/types.hpp"

namespace alseg::data {

// Draws n_init train ids uniformly without replacement as the initial
// labelled set; the remainder is unlabelled, cycle = 0.
PoolState init_pool(const DatasetSplit& split, std::size_t n_init,
                    std::uint64_t rng_seed);

// Moves `queried` from unlabelled to labelled and bumps the cycle counter.
// Querying a duplicate, labelled, or unknown id throws (it signals a
// selection bug, not a recoverable condition).
PoolState oracle_annotate(const PoolState& pool,
                          const std::vector<std::string>& queried);

}  // namespace alseg::data
