#include "docval/cot_parser.hpp"
#include "docval/fixtures.hpp"
#include "docval/metrics.hpp"
#include "docval/records.hpp"
#include "docval/validators.hpp"

#include "support.hpp"

#include <cmath>

using namespace docval;
using docval::test::error_code_of;
using docval::test::random_box;

namespace {

DocumentExample receipt() {
    return parse_example_line(docval::test::read_file(docval::test::data_path("receipt_example.jsonl")));
}

PredictionTuple receipt_prediction() {
    return parse_prediction_line(docval::test::read_file(docval::test::data_path("receipt_prediction.jsonl")));
}

DocumentExample scaled(const DocumentExample & ex, Coord k) {
    DocumentExample out = ex;
    auto            s   = [k](BBox & b) { b = { b.x1 * k, b.y1 * k, b.x2 * k, b.y2 * k }; };
    out.page            = { ex.page.width * k, ex.page.height * k };
    s(out.gt_bbox);
    for (auto & r : out.regions) {
        s(r.bbox);
    }
    return out;
}

}  // namespace

TEST_CASE("ground_region") {
    const DocumentExample ex = receipt();
    SUBCASE("the subtotal box lands on region 7") {
        const auto a = ground_region({ 760, 650, 840, 680 }, ex.regions);
        CHECK(a.region == 7);
        CHECK(a.overlap_iou == 1.0);
    }
    SUBCASE("empty space is ungrounded") {
        const auto a = ground_region({ 400, 500, 450, 520 }, ex.regions);
        CHECK_FALSE(a.grounded());
        CHECK(a.overlap_iou == 0.0);
    }
    SUBCASE("ties go to the lowest index regardless of order") {
        // Each region covers 40 of the box's 100 px and nothing else: IoU 0.4.
        const std::vector<Region> regions{ { 5, { 6, 0, 10, 10 }, "b" }, { 2, { 0, 0, 4, 10 }, "a" } };
        CHECK(iou({ 0, 0, 10, 10 }, regions[0].bbox) == doctest::Approx(0.4));
        CHECK(iou({ 0, 0, 10, 10 }, regions[1].bbox) == doctest::Approx(0.4));
        CHECK(ground_region({ 0, 0, 10, 10 }, regions).region == 2);
    }
    SUBCASE("no regions") {
        CHECK_FALSE(ground_region({ 0, 0, 10, 10 }, {}).grounded());
    }
}

TEST_CASE("ground_truth_region prefers the annotated index") {
    DocumentExample ex = receipt();
    CHECK(ground_truth_region(ex).region == 2);
    ex.gt_region_index = 14;
    CHECK(ground_truth_region(ex).region == 14);
    ex.gt_region_index.reset();
    CHECK(ground_truth_region(ex).region == 2);
}

TEST_CASE("answer_in_ocr uses single-region normalized containment") {
    const std::vector<Region> regions{ { 0, { 0, 0, 1, 1 }, "TOTAL  $45.99" }, { 1, { 2, 2, 3, 3 }, "$45" },
                                       { 2, { 4, 4, 5, 5 }, ".99" } };
    CHECK(answer_in_ocr("$45.99", regions));
    CHECK(answer_in_ocr("total $45.99", regions));
    CHECK_FALSE(answer_in_ocr("$45.990", regions));
    CHECK_FALSE(answer_in_ocr("", regions));
    CHECK_FALSE(answer_in_ocr("   ", regions));
    const std::vector<Region> split{ { 1, { 2, 2, 3, 3 }, "$45" }, { 2, { 4, 4, 5, 5 }, ".99" } };
    CHECK_FALSE(answer_in_ocr("$45.99", split));
}

TEST_CASE("score_answer") {
    const DocumentExample          ex = receipt();
    const ValidatorConfig          cfg;
    const std::vector<std::string> gts{ "$45.99" };
    CHECK(score_answer("$45.99", gts, ex.regions, cfg).q_ans == 1.0);
    const auto miss = score_answer("hallucinated", gts, ex.regions, cfg);
    CHECK(miss.q_ans == 0.0);
    CHECK(miss.anls == 0.0);
    CHECK_FALSE(miss.answer_in_ocr);

    // ANLS 1/6 with OCR membership: 0.7/6 + 0.3 = 0.41667.
    ValidatorConfig loose;
    loose.anls_threshold                 = 0.0;
    const std::vector<Region>      text{ { 0, { 0, 0, 1, 1 }, "azzzzz" } };
    const std::vector<std::string> six{ "abcdef" };
    const auto                     s = score_answer("azzzzz", six, text, loose);
    CHECK(s.anls == doctest::Approx(1.0 / 6.0));
    CHECK(s.answer_in_ocr);
    CHECK(s.q_ans == doctest::Approx(0.7 / 6.0 + 0.3));
    CHECK(std::round(s.q_ans * 1000.0) / 1000.0 == doctest::Approx(0.417));

    CHECK(error_code_of([&] { score_answer("x", std::vector<std::string>{}, ex.regions, cfg); }) ==
          ErrorCode::kEmptyGroundTruth);
}

TEST_CASE("score_bbox") {
    const ValidatorConfig cfg;
    const DocumentExample ex = receipt();
    SUBCASE("identity") {
        CHECK(score_bbox(ex.gt_bbox, ex.gt_bbox, ex.regions, cfg, 2).q_bbox == 1.0);
    }
    SUBCASE("receipt failure: disjoint, wrong region") {
        const auto s = score_bbox({ 760, 650, 840, 680 }, ex.gt_bbox, ex.regions, cfg, 2);
        CHECK(s.iou == 0.0);
        CHECK(s.pred_region.region == 7);
        CHECK(s.gt_region.region == 2);
        CHECK(s.q_bbox == 0.0);
        CHECK(s.delta == PixelDelta{ -250, 150, -270, 150 });
    }
    SUBCASE("IoU 0.5 inside one region") {
        const std::vector<Region> regions{ { 0, { 0, 0, 10, 20 }, "x" } };
        const auto                s = score_bbox({ 0, 0, 10, 10 }, { 0, 0, 10, 20 }, regions, cfg);
        CHECK(s.iou == 0.5);
        CHECK(s.q_bbox == doctest::Approx(0.6));
    }
    SUBCASE("overlapping boxes grounded to adjacent regions") {
        const std::vector<Region> regions{ { 0, { 0, 0, 10, 10 }, "a" }, { 1, { 10, 0, 30, 10 }, "b" } };
        const auto                s = score_bbox({ 5, 0, 25, 10 }, { 0, 0, 10, 10 }, regions, cfg);
        CHECK(s.iou > 0.0);
        CHECK(s.pred_region.region == 1);
        CHECK(s.gt_region.region == 0);
        CHECK(s.q_bbox == doctest::Approx(0.8 * s.iou));
    }
    SUBCASE("both ungrounded earn no region bonus") {
        const auto s = score_bbox({ 400, 500, 450, 520 }, { 400, 500, 450, 520 }, {}, cfg);
        CHECK(s.q_bbox == doctest::Approx(0.8));
    }
}

TEST_CASE("score_reasoning") {
    const ValidatorConfig cfg;
    const PageGeometry    page{ 1000, 1000 };
    SUBCASE("complete and consistent") {
        const PredictionTuple p{ "a",
                                 "Step 1: find the total\nStep 2: look in the lower area\n"
                                 "Step 3: the value at [500, 800, 560, 830]\nAnswer: x\nBBox: [500, 800, 560, 830]",
                                 "x",
                                 { 500, 800, 560, 830 } };
        const auto            s = score_reasoning(parse_trace(p.cot), p, page, cfg);
        CHECK(s.s_struct == 1.0);
        CHECK(s.s_coord == 1.0);
        CHECK(s.s_spatial == 1.0);
        CHECK(s.q_reason == 1.0);
        CHECK(s.phrase_count == 1);
    }
    SUBCASE("no BBox line") {
        const PredictionTuple p{ "a", "Step 1: a\nStep 2: b\nAnswer: x", "x", { 1, 1, 2, 2 } };
        const auto            s = score_reasoning(parse_trace(p.cot), p, page, cfg);
        CHECK(s.s_struct == 0.75);
        CHECK(s.s_coord == 0.0);
        CHECK_FALSE(s.coord_error);
    }
    SUBCASE("upper claimed for a box at 90% height") {
        const PredictionTuple p{ "a", "Step 1: it is in the upper part\nStep 2: b\nAnswer: x\nBBox: [100, 880, 200, 920]",
                                 "x", { 100, 880, 200, 920 } };
        const auto            s = score_reasoning(parse_trace(p.cot), p, page, cfg);
        CHECK(s.s_spatial == 0.0);
        CHECK(s.q_reason == doctest::Approx(2.0 / 3.0));
        REQUIRE(s.mismatches.size() == 1);
        CHECK(s.mismatches[0].actual == Band::kLast);
    }
    SUBCASE("coordinate tolerance and linear penalty") {
        auto coord_score = [&](Coord off) {
            const BBox            declared{ 100, 100, 200, 200 };
            const BBox            cited{ 100 + off, 100, 200, 200 };
            const PredictionTuple p{ "a",
                                     "Step 1: at " + format_trace_bbox(cited) + "\nStep 2: b\nAnswer: x\nBBox: " +
                                         format_trace_bbox(declared),
                                     "x", declared };
            return score_reasoning(parse_trace(p.cot), p, page, cfg).s_coord;
        };
        CHECK(coord_score(0) == 1.0);
        CHECK(coord_score(5) == 1.0);
        CHECK(coord_score(-5) == 1.0);
        CHECK(coord_score(6) == doctest::Approx(1.0 - 1.0 / 50.0));
        CHECK(coord_score(30) == doctest::Approx(0.5));
        CHECK(coord_score(55) == 0.0);
        CHECK(coord_score(90) == 0.0);
    }
    SUBCASE("empty trace") {
        const PredictionTuple p{ "a", "", "x", { 1, 1, 2, 2 } };
        const auto            s = score_reasoning(parse_trace(p.cot), p, page, cfg);
        CHECK(s.s_struct == 0.0);
        CHECK(s.s_coord == 0.0);
        CHECK(s.s_spatial == 1.0);
    }
}

TEST_CASE("band_of uses strict lower edges") {
    const ValidatorConfig cfg;
    const PageGeometry    page{ 900, 900 };
    CHECK(band_of({ 0, 0, 10, 598 }, page, Axis::kVertical, cfg) == Band::kFirst);   // center 299
    CHECK(band_of({ 0, 0, 10, 600 }, page, Axis::kVertical, cfg) == Band::kMiddle);  // center 300 = 1/3
    CHECK(band_of({ 0, 0, 10, 1200 }, page, Axis::kVertical, cfg) == Band::kLast);   // center 600 = 2/3
    CHECK(band_of({ 800, 0, 900, 10 }, page, Axis::kHorizontal, cfg) == Band::kLast);
}

TEST_CASE("overall_quality") {
    const ValidatorConfig cfg;
    CHECK(overall_quality(0.417, 0.0, 0.73, cfg) == doctest::Approx(0.3128));
    CHECK(overall_quality(1, 1, 1, cfg) == doctest::Approx(1.0));
    CHECK(overall_quality(0, 0, 0, cfg) == 0.0);
    CHECK(error_code_of([&] { overall_quality(1.1, 0, 0, cfg); }) == ErrorCode::kOutOfRange);
    CHECK(error_code_of([&] { overall_quality(0, -0.1, 0, cfg); }) == ErrorCode::kOutOfRange);
    CHECK(error_code_of([&] { overall_quality(0, 0, std::nan(""), cfg); }) == ErrorCode::kOutOfRange);
}

TEST_CASE("overall_quality is monotone in each component") {
    const ValidatorConfig cfg;
    std::mt19937_64       rng(77);
    for (int i = 0; i < 2000; ++i) {
        double c[3] = { uniform_unit(rng), uniform_unit(rng), uniform_unit(rng) };
        const double before = overall_quality(c[0], c[1], c[2], cfg);
        const size_t k      = static_cast<size_t>(uniform_int(rng, 0, 2));
        c[k] += (1.0 - c[k]) * uniform_unit(rng);
        CHECK(overall_quality(c[0], c[1], c[2], cfg) >= before);
    }
}

TEST_CASE("validate on the receipt failure") {
    const ValidatorConfig  cfg;
    const QualityBreakdown b = validate(receipt(), receipt_prediction(), cfg);
    CHECK(b.anls == doctest::Approx(0.5));
    CHECK(b.answer_in_ocr);
    CHECK(b.q_ans == doctest::Approx(0.65));
    CHECK(b.q_bbox == 0.0);
    CHECK(b.q_reason == 1.0);
    CHECK(b.q == doctest::Approx(0.46));
    CHECK(b.q < cfg.q_min);
    CHECK(b.pred_region.region == 7);
    CHECK(b.gt_region.region == 2);
}

TEST_CASE("validate on fixtures") {
    const ValidatorConfig cfg;
    FixtureOptions        opts;
    opts.n              = 100;
    const FixtureSet fx = generate_fixtures(opts);
    for (size_t i = 0; i < fx.examples.size(); ++i) {
        const auto & ex = fx.examples[i];
        CHECK(validate(ex, fx.predictions[i], cfg).q == 1.0);

        // Shift 10px horizontally, keeping the trace consistent with the box.
        PredictionTuple p = fx.predictions[i];
        const Coord     d = p.bbox.x2 + 10 <= ex.page.width ? 10 : -10;
        p.bbox            = { p.bbox.x1 + d, p.bbox.y1, p.bbox.x2 + d, p.bbox.y2 };
        p.cot             = canonical_trace(ex.page, p.answer, p.bbox);
        const auto b      = validate(ex, p, cfg);
        CHECK(b.pred_region == RegionAssignment{ ex.gt_region_index, b.pred_region.overlap_iou });
        const double w = static_cast<double>(p.bbox.width());
        CHECK(b.iou == doctest::Approx((w - 10.0) / (w + 10.0)));
        CHECK(b.q > cfg.q_min);
        CHECK(b.q < 1.0);
    }
    PredictionTuple other = fx.predictions[0];
    other.id              = "elsewhere";
    CHECK(error_code_of([&] { validate(fx.examples[0], other, cfg); }) == ErrorCode::kIdMismatch);
}

TEST_CASE("scores stay in range and satisfy the weighting under fuzz") {
    const ValidatorConfig cfg;
    std::mt19937_64       rng(2024);
    const std::vector<std::string> words{ "Step 1: upper left", "Step 2: lower right [1, 2, 3, 4]", "Answer: $1.00",
                                          "BBox: [10, 10, 50, 50]", "middle", "noise [5, 5, 1]", "" };
    for (int i = 0; i < 3000; ++i) {
        DocumentExample ex;
        ex.id      = "f";
        ex.page    = { uniform_int(rng, 1, 1500), uniform_int(rng, 1, 1500) };
        ex.answers = { uniform_unit(rng) < 0.5 ? "$1.00" : "x" };
        ex.gt_bbox = random_box(rng, std::min(ex.page.width, ex.page.height));
        const auto k = uniform_int(rng, 0, 6);
        for (int r = 0; r < k; ++r) {
            ex.regions.push_back({ r, random_box(rng, std::min(ex.page.width, ex.page.height)), r % 2 ? "$1.00" : "tot" });
        }
        PredictionTuple p;
        p.id     = "f";
        p.answer = uniform_unit(rng) < 0.5 ? "$1.00" : "y";
        p.bbox   = random_box(rng, 1500);
        for (int w = 0; w < 6; ++w) {
            p.cot += words[static_cast<size_t>(uniform_int(rng, 0, 6))] + "\n";
        }
        const auto b = validate(ex, p, cfg);
        for (double v : { b.q, b.q_ans, b.q_bbox, b.q_reason, b.s_struct, b.s_coord, b.s_spatial, b.anls, b.iou }) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(b.q == doctest::Approx(0.4 * b.q_ans + 0.4 * b.q_bbox + 0.2 * b.q_reason).epsilon(1e-12));
        CHECK(b.q_reason == doctest::Approx((b.s_struct + b.s_coord + b.s_spatial) / 3.0).epsilon(1e-12));
        CHECK(b == validate(ex, p, cfg));
    }
}

TEST_CASE("uniform scaling leaves grounding and scores unchanged") {
    const ValidatorConfig cfg;
    FixtureOptions        opts;
    opts.n              = 60;
    const FixtureSet fx = generate_fixtures(opts);
    std::mt19937_64  rng(8);
    for (size_t i = 0; i < fx.examples.size(); ++i) {
        const auto & ex = fx.examples[i];
        PredictionTuple p = fx.predictions[i];
        p.bbox            = random_box(rng, 1000);
        p.cot             = canonical_trace(ex.page, p.answer, p.bbox);
        const auto base   = validate(ex, p, cfg);
        for (Coord k : { 2, 3, 7 }) {
            PredictionTuple q = p;
            q.bbox            = { p.bbox.x1 * k, p.bbox.y1 * k, p.bbox.x2 * k, p.bbox.y2 * k };
            q.cot             = canonical_trace({ ex.page.width * k, ex.page.height * k }, q.answer, q.bbox);
            const auto s      = validate(scaled(ex, k), q, cfg);
            CHECK(s.pred_region.region == base.pred_region.region);
            CHECK(s.gt_region.region == base.gt_region.region);
            CHECK(s.iou == base.iou);
            CHECK(s.q_ans == base.q_ans);
            CHECK(s.q_bbox == base.q_bbox);
            CHECK(s.q_reason == base.q_reason);
            CHECK(s.q == base.q);
            for (size_t c = 0; c < 4; ++c) {
                CHECK(s.delta[c] == base.delta[c] * k);
            }
        }
    }
}
