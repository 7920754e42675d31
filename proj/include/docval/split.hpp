#pragma once

#include "docval/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace docval {

using SplitRatios = std::array<double, 3>;

struct DatasetSplit {
    std::vector<DocumentExample> train;
    std::vector<DocumentExample> refine;
    std::vector<DocumentExample> test;
};

struct SplitSizes {
    size_t train  = 0;
    size_t refine = 0;
    size_t test   = 0;
};

// floor(n*r1), floor(n*r2), remainder to test. Throws kBadRatios.
SplitSizes split_sizes(size_t n, const SplitRatios & ratios);

// Seeded permutation of [0, n), sliced by split_sizes. Index-level so callers
// can split anything.
std::array<std::vector<size_t>, 3> split_indices(size_t n, const SplitRatios & ratios, std::uint64_t seed);

DatasetSplit split_dataset(std::span<const DocumentExample> examples, const SplitRatios & ratios, std::uint64_t seed);

}  // namespace docval
