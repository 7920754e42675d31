#pragma once

#include "docval/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace docval {

struct FixtureOptions {
    std::uint64_t seed            = 7;
    size_t        n               = 1;
    int           regions_per_doc = 15;
    PageGeometry  page{ 1000, 1000 };
};

struct FixtureSet {
    std::vector<DocumentExample> examples;
    std::vector<PredictionTuple> predictions;  // ground truth, canonical traces
};

// Receipt-like synthetic documents: label/value rows laid out without overlap,
// one value region designated as the answer. Deterministic in (seed, index),
// so the same options always produce byte-identical files. Throws
// kInfeasibleLayout when the page cannot hold the requested regions, and
// kOutOfRange when n == 0 or regions_per_doc < 1.
FixtureSet generate_fixtures(const FixtureOptions & opts);

DocumentExample generate_example(const FixtureOptions & opts, size_t index);

// Three-step canonical trace declaring (answer, box) with spatial wording that
// matches the box position. `field` names the label when known.
std::string canonical_trace(const PageGeometry & page, std::string_view answer, const BBox & box,
                            std::string_view field = {});
PredictionTuple ground_truth_prediction(const DocumentExample & ex);

// Nearest other region (by center distance, ties to lower index) whose text
// differs from the primary answer after normalization.
std::optional<int> pick_decoy_region(const DocumentExample & ex);

// Answers with the decoy region's text and box while keeping the original
// trace: guaranteed to score below any q_min above 0.6 under the default
// weights. Returns the input unchanged when there is no decoy.
PredictionTuple corrupt_prediction(const DocumentExample & ex, const PredictionTuple & pred);

// Corrupts `count` predictions chosen by a seeded permutation; returns the
// corrupted positions in ascending order.
std::vector<size_t> corrupt_fixtures(FixtureSet & set, size_t count, std::uint64_t seed);

}  // namespace docval
