#include "docval/split.hpp"

#include "docval/error.hpp"
#include "docval/rng.hpp"

#include <cmath>
#include <numeric>

namespace docval {

namespace {

void check_ratios(const SplitRatios & ratios) {
    for (double r : ratios) {
        if (!std::isfinite(r) || r < 0.0 || r > 1.0) {
            throw Error(ErrorCode::kBadRatios, "split ratios must each lie in [0,1]");
        }
    }
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
        throw Error(ErrorCode::kBadRatios, "split ratios must sum to 1");
    }
}

size_t floor_share(size_t n, double r) {
    // n*r for exact divisions can land a few ulps under the integer.
    return static_cast<size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
}

}  // namespace

SplitSizes split_sizes(size_t n, const SplitRatios & ratios) {
    check_ratios(ratios);
    SplitSizes s;
    s.train  = std::min(n, floor_share(n, ratios[0]));
    s.refine = std::min(n - s.train, floor_share(n, ratios[1]));
    s.test   = n - s.train - s.refine;
    return s;
}

std::array<std::vector<size_t>, 3> split_indices(size_t n, const SplitRatios & ratios, std::uint64_t seed) {
    const SplitSizes sizes = split_sizes(n, ratios);

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{ 0 });
    std::mt19937_64 rng(splitmix64(seed));
    seeded_shuffle(order.begin(), order.end(), rng);

    std::array<std::vector<size_t>, 3> out;
    const auto                         train_end  = order.begin() + static_cast<std::ptrdiff_t>(sizes.train);
    const auto                         refine_end = train_end + static_cast<std::ptrdiff_t>(sizes.refine);
    out[0].assign(order.begin(), train_end);
    out[1].assign(train_end, refine_end);
    out[2].assign(refine_end, order.end());
    return out;
}

DatasetSplit split_dataset(std::span<const DocumentExample> examples, const SplitRatios & ratios, std::uint64_t seed) {
    if (examples.empty()) {
        throw Error(ErrorCode::kEmptyInput, "cannot split an empty dataset");
    }
    const auto   parts = split_indices(examples.size(), ratios, seed);
    DatasetSplit out;
    auto         gather = [&](const std::vector<size_t> & idx, std::vector<DocumentExample> & dst) {
        dst.reserve(idx.size());
        for (size_t i : idx) {
            dst.push_back(examples[i]);
        }
    };
    gather(parts[0], out.train);
    gather(parts[1], out.refine);
    gather(parts[2], out.test);
    return out;
}

}  // namespace docval
