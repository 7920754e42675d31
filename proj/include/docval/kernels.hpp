#pragma once

#include "docval/config.hpp"
#include "docval/feedback.hpp"
#include "docval/types.hpp"

#include <span>
#include <vector>

namespace docval {

// One (example, prediction) pair to score. Both pointers must outlive the call.
struct PairRef {
    const DocumentExample * example    = nullptr;
    const PredictionTuple * prediction = nullptr;
};

// Worker count used when callers pass jobs <= 0.
int default_jobs();

// Reference implementations: a plain loop, kept for equivalence tests and
// the benchmark baseline.
std::vector<QualityBreakdown> validate_serial(std::span<const PairRef> pairs, const ValidatorConfig & cfg);
std::vector<FeedbackReport>   build_reports_serial(std::span<const PairRef> pairs, const ValidatorConfig & cfg);

// OpenMP kernels. Slot i always holds the result for pairs[i], so output is
// bit-identical to the serial version for every worker count. If any pair
// throws, the exception of the lowest failing index is rethrown.
std::vector<QualityBreakdown> validate_parallel(std::span<const PairRef> pairs, const ValidatorConfig & cfg, int jobs);
std::vector<FeedbackReport>   build_reports_parallel(std::span<const PairRef> pairs, const ValidatorConfig & cfg, int jobs);

}  // namespace docval
