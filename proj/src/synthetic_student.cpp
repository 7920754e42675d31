#include "docval/synthetic_student.hpp"

#include "docval/error.hpp"
#include "docval/fixtures.hpp"
#include "docval/rng.hpp"

#include <algorithm>
#include <cmath>

namespace docval {

namespace {

constexpr std::uint64_t kInitSalt = 0x696e6974;

BBox clamp_to_page(BBox b, const PageGeometry & page) {
    b.x1 = std::clamp<Coord>(b.x1, 0, page.width);
    b.x2 = std::clamp<Coord>(b.x2, 0, page.width);
    b.y1 = std::clamp<Coord>(b.y1, 0, page.height);
    b.y2 = std::clamp<Coord>(b.y2, 0, page.height);
    if (b.x1 > b.x2) {
        std::swap(b.x1, b.x2);
    }
    if (b.y1 > b.y2) {
        std::swap(b.y1, b.y2);
    }
    return b;
}

// Shifts b by (dx, dy), reduced so the box stays on the page.
BBox shift_inside(const BBox & b, Coord dx, Coord dy, const PageGeometry & page) {
    dx = std::clamp<Coord>(dx, -b.x1, page.width - b.x2);
    dy = std::clamp<Coord>(dy, -b.y1, page.height - b.y2);
    return { b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy };
}

}  // namespace

SyntheticStudent::SyntheticStudent(std::span<const DocumentExample> world, const StudentOptions & opts) : opts_(opts) {
    if (!(opts.rho >= 0.0 && opts.rho <= 1.0)) {
        throw Error(ErrorCode::kOutOfRange, "synthetic student: rho must lie in [0,1]");
    }
    if (opts.noise < 0 || opts.max_initial_offset < 0) {
        throw Error(ErrorCode::kOutOfRange, "synthetic student: noise and offsets must be >= 0");
    }
    beliefs_.reserve(world.size());
    for (const auto & ex : world) {
        auto  rng = keyed_engine(opts.seed, ex.id, kInitSalt);
        Coord dx  = uniform_int(rng, -opts.max_initial_offset, opts.max_initial_offset);
        Coord dy  = uniform_int(rng, -opts.max_initial_offset, opts.max_initial_offset);
        if (opts.fixed_initial_offset) {
            dx = (*opts.fixed_initial_offset)[0];
            dy = (*opts.fixed_initial_offset)[1];
        }

        Belief b;
        b.page   = ex.page;
        b.box    = shift_inside(ex.gt_bbox, dx, dy, ex.page);
        b.answer = ex.answers.front();
        if (uniform_unit(rng) < opts.decoy_probability) {
            if (auto decoy = pick_decoy_region(ex)) {
                b.answer = ex.find_region(*decoy)->text;
            }
        }
        beliefs_.insert_or_assign(ex.id, std::move(b));
    }
}

PredictionTuple SyntheticStudent::predict(const StudentQuery & query) const {
    auto it = beliefs_.find(query.id);
    if (it == beliefs_.end()) {
        throw Error(ErrorCode::kOrphanPrediction, "synthetic student has no state for '" + query.id + "'");
    }
    const Belief & b = it->second;
    return { query.id, canonical_trace(query.page, b.answer, b.box), b.answer, b.box };
}

void SyntheticStudent::update(std::span<const FeedbackReport> reports) {
    ++updates_;
    for (const auto & report : reports) {
        auto it = beliefs_.find(report.id);
        if (it == beliefs_.end()) {
            continue;
        }
        Belief & b   = it->second;
        auto     rng = keyed_engine(opts_.seed, report.id, static_cast<std::uint64_t>(updates_));

        std::array<Coord, 4> c = { b.box.x1, b.box.y1, b.box.x2, b.box.y2 };
        for (size_t i = 0; i < 4; ++i) {
            const auto step = static_cast<Coord>(std::lround(opts_.rho * static_cast<double>(report.breakdown.delta[i])));
            const Coord jitter = opts_.noise > 0 ? uniform_int(rng, -opts_.noise, opts_.noise) : 0;
            c[i] += step + jitter;
        }
        b.box = clamp_to_page({ c[0], c[1], c[2], c[3] }, b.page);

        if (!report.fixes.empty() && report.fixes.front().kind == FixKind::kAnswerField &&
            uniform_unit(rng) < opts_.rho) {
            b.answer = report.suggested_answer;
        }
    }
}

}  // namespace docval
