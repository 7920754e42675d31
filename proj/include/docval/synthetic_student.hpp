#pragma once

#include "docval/pipeline.hpp"
#include "docval/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>

namespace docval {

struct StudentOptions {
    std::uint64_t seed  = 0;
    double        rho   = 1.0;  // fraction of the pixel error applied per update
    Coord         noise = 0;    // uniform +/- noise per coordinate per update

    Coord  max_initial_offset = 80;    // initial box shift drawn from [-max, max] per axis
    double decoy_probability  = 0.25;  // chance an example starts with a decoy answer

    // Fixed (dx, dy) initial shift for every example instead of a seeded one.
    std::optional<std::array<Coord, 2>> fixed_initial_offset;
};

// Stand-in for a fine-tuned student. It is built from the refine set (its
// "world knowledge"), but predict() only ever receives StudentQuery. Each
// update moves a box by round(rho * delta) plus seeded noise, and flips a
// decoy answer to the suggested one with probability rho when the first fix
// is an answer directive.
class SyntheticStudent final : public StudentAdapter {
  public:
    // Throws kOutOfRange unless rho in [0,1] and noise >= 0.
    SyntheticStudent(std::span<const DocumentExample> world, const StudentOptions & opts);

    // Throws kOrphanPrediction for an id it was not built with.
    PredictionTuple predict(const StudentQuery & query) const override;
    void            update(std::span<const FeedbackReport> reports) override;

    int updates() const { return updates_; }

  private:
    struct Belief {
        BBox         box;
        std::string  answer;
        PageGeometry page;
    };

    StudentOptions                          opts_;
    std::unordered_map<std::string, Belief> beliefs_;
    int                                     updates_ = 0;
};

}  // namespace docval
