#include "docval/fixtures.hpp"

#include "docval/config.hpp"
#include "docval/cot_parser.hpp"
#include "docval/error.hpp"
#include "docval/metrics.hpp"
#include "docval/rng.hpp"
#include "docval/validators.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <set>

namespace docval {

namespace {

constexpr std::array<std::string_view, 20> kLabels = {
    "TOTAL",   "SUBTOTAL", "TAX",     "DATE",     "INVOICE NO", "TIP",   "CASH",    "CHANGE",  "DISCOUNT", "BALANCE DUE",
    "ACCOUNT", "STORE",    "PHONE",   "ORDER ID", "VAT",        "SERVICE", "DELIVERY", "DEPOSIT", "ITEMS",    "CARD",
};

std::string make_value(std::mt19937_64 & rng) {
    char buf[32];
    switch (uniform_int(rng, 0, 2)) {
        case 0:
            std::snprintf(buf, sizeof(buf), "$%d.%02d", static_cast<int>(uniform_int(rng, 1, 999)),
                          static_cast<int>(uniform_int(rng, 0, 99)));
            break;
        case 1:
            std::snprintf(buf, sizeof(buf), "%02d/%02d/20%02d", static_cast<int>(uniform_int(rng, 1, 12)),
                          static_cast<int>(uniform_int(rng, 1, 28)), static_cast<int>(uniform_int(rng, 10, 29)));
            break;
        default:
            std::snprintf(buf, sizeof(buf), "#%05d", static_cast<int>(uniform_int(rng, 0, 99999)));
            break;
    }
    return buf;
}

std::string make_id(size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "doc-%06zu", index);
    return buf;
}

struct Span1D {
    Coord lo;
    Coord hi;
};

// A [lo, hi) interval of length in [min_len, max_len] placed inside [begin, end).
Span1D place(std::mt19937_64 & rng, Coord begin, Coord end, Coord min_len, Coord max_len) {
    const Coord len = uniform_int(rng, min_len, max_len);
    const Coord lo  = uniform_int(rng, begin, end - len);
    return { lo, lo + len };
}

}  // namespace

std::string canonical_trace(const PageGeometry & page, std::string_view answer, const BBox & box,
                            std::string_view field) {
    const ValidatorConfig defaults;
    const std::string     where = std::string(band_word(Axis::kVertical, band_of(box, page, Axis::kVertical, defaults))) +
                              " " +
                              std::string(band_word(Axis::kHorizontal, band_of(box, page, Axis::kHorizontal, defaults)));
    CoTTrace t;
    t.steps.push_back({ 1,
                        field.empty() ? std::string("Identify the field the question asks for.")
                                      : "The question asks for the " + std::string(field) + " field.",
                        {},
                        {} });
    t.steps.push_back({ 2, "Scan the " + where + " part of the page for the matching value.", {}, {} });
    t.steps.push_back({ 3, "The value at " + format_trace_bbox(box) + " reads \"" + std::string(answer) + "\".", {}, {} });
    t.final_answer = std::string(answer);
    t.final_bbox   = box;
    return serialize_trace(t);
}

DocumentExample generate_example(const FixtureOptions & opts, size_t index) {
    const int   k    = opts.regions_per_doc;
    const Coord W    = opts.page.width;
    const Coord H    = opts.page.height;
    const Coord half = W / 2;
    if (k < 1) {
        throw Error(ErrorCode::kOutOfRange, "regions_per_doc must be >= 1");
    }
    const Coord rows  = (k + 1) / 2;
    const Coord row_h = H / rows;
    if (W < 200 || row_h < 16) {
        throw Error(ErrorCode::kInfeasibleLayout, "InfeasibleLayout: cannot place " + std::to_string(k) +
                                                      " disjoint regions on a " + std::to_string(W) + "x" +
                                                      std::to_string(H) + " page");
    }

    std::mt19937_64 rng = keyed_engine(opts.seed, make_id(index), 0x66697874);

    DocumentExample ex;
    ex.id   = make_id(index);
    ex.page = opts.page;

    // Labels: a seeded pick from the vocabulary, numbered on reuse.
    std::vector<size_t> label_order(kLabels.size());
    std::iota(label_order.begin(), label_order.end(), size_t{ 0 });
    seeded_shuffle(label_order.begin(), label_order.end(), rng);

    struct Slot {
        BBox        box;
        std::string text;
        bool        is_value;
        size_t      row;
    };
    std::vector<Slot>     slots;
    std::set<std::string> value_texts;
    std::vector<std::string> row_labels(static_cast<size_t>(rows));

    const Coord h_min = std::max<Coord>(1, std::min<Coord>(10, row_h / 2));
    const Coord h_max = std::max<Coord>(h_min, std::min<Coord>(30, row_h - 2));
    const Coord w_min = half / 8;
    const Coord w_max = half / 2;

    for (Coord r = 0; r < rows; ++r) {
        const auto   row        = static_cast<size_t>(r);
        const Coord  y0         = r * row_h;
        const bool   only_value = (k == 1);
        const size_t label_pick = label_order[row % kLabels.size()];
        std::string  label(kLabels[label_pick]);
        if (row >= kLabels.size()) {
            label += " " + std::to_string(row / kLabels.size() + 1);
        }
        row_labels[row] = label;

        auto vertical = [&]() { return place(rng, y0 + 1, y0 + row_h - 1, h_min, h_max); };
        if (!only_value) {
            const Span1D x = place(rng, 0, half - 1, w_min, w_max);
            const Span1D y = vertical();
            slots.push_back({ BBox{ x.lo, y.lo, x.hi, y.hi }, label + ":", false, row });
        }
        if (static_cast<int>(slots.size()) < k) {
            const Span1D x = place(rng, half + 1, W, w_min, w_max);
            const Span1D y = vertical();
            std::string  value;
            do {
                value = make_value(rng);
            } while (!value_texts.insert(value).second);
            slots.push_back({ BBox{ x.lo, y.lo, x.hi, y.hi }, value, true, row });
        }
    }

    std::vector<size_t> value_slots;
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].is_value) {
            value_slots.push_back(i);
        }
    }
    const size_t answer_slot =
        value_slots[static_cast<size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(value_slots.size()) - 1))];

    std::vector<int> indices(slots.size());
    std::iota(indices.begin(), indices.end(), 0);
    seeded_shuffle(indices.begin(), indices.end(), rng);

    for (size_t i = 0; i < slots.size(); ++i) {
        ex.regions.push_back({ indices[i], slots[i].box, slots[i].text });
    }
    const std::string & field = row_labels[slots[answer_slot].row];
    ex.question               = "What is the " + field + "?";
    ex.answers                = { slots[answer_slot].text };
    ex.gt_bbox                = slots[answer_slot].box;
    ex.gt_region_index        = indices[answer_slot];
    return ex;
}

PredictionTuple ground_truth_prediction(const DocumentExample & ex) {
    std::string_view field;
    const std::string prefix = "What is the ";
    if (ex.question.rfind(prefix, 0) == 0 && ex.question.size() > prefix.size() + 1 && ex.question.back() == '?') {
        field = std::string_view(ex.question).substr(prefix.size(), ex.question.size() - prefix.size() - 1);
    }
    return { ex.id, canonical_trace(ex.page, ex.answers.front(), ex.gt_bbox, field), ex.answers.front(), ex.gt_bbox };
}

FixtureSet generate_fixtures(const FixtureOptions & opts) {
    if (opts.n == 0) {
        throw Error(ErrorCode::kOutOfRange, "fixture count must be >= 1");
    }
    FixtureSet set;
    set.examples.reserve(opts.n);
    set.predictions.reserve(opts.n);
    for (size_t i = 0; i < opts.n; ++i) {
        set.examples.push_back(generate_example(opts, i));
        set.predictions.push_back(ground_truth_prediction(set.examples.back()));
    }
    return set;
}

std::optional<int> pick_decoy_region(const DocumentExample & ex) {
    const RegionAssignment gt     = ground_truth_region(ex);
    const std::u32string   answer = normalize_text(ex.answers.front());
    const Coord            cx     = ex.gt_bbox.x1 + ex.gt_bbox.x2;
    const Coord            cy     = ex.gt_bbox.y1 + ex.gt_bbox.y2;

    std::optional<int> best;
    Coord              best_dist = 0;
    for (const auto & r : ex.regions) {
        if (gt.region && r.index == *gt.region) {
            continue;
        }
        const std::u32string text = normalize_text(r.text);
        if (text.empty() || text == answer) {
            continue;
        }
        const Coord dx   = r.bbox.x1 + r.bbox.x2 - cx;
        const Coord dy   = r.bbox.y1 + r.bbox.y2 - cy;
        const Coord dist = dx * dx + dy * dy;
        if (!best || dist < best_dist || (dist == best_dist && r.index < *best)) {
            best      = r.index;
            best_dist = dist;
        }
    }
    return best;
}

PredictionTuple corrupt_prediction(const DocumentExample & ex, const PredictionTuple & pred) {
    const auto decoy = pick_decoy_region(ex);
    if (!decoy) {
        return pred;
    }
    const Region *  r   = ex.find_region(*decoy);
    PredictionTuple out = pred;
    out.answer          = r->text;
    out.bbox            = r->bbox;
    return out;
}

std::vector<size_t> corrupt_fixtures(FixtureSet & set, size_t count, std::uint64_t seed) {
    const size_t n = set.predictions.size();
    if (count > n) {
        throw Error(ErrorCode::kOutOfRange, "cannot corrupt more predictions than exist");
    }
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{ 0 });
    std::mt19937_64 rng(splitmix64(seed ^ 0x636f7272ULL));
    seeded_shuffle(order.begin(), order.end(), rng);
    order.resize(count);
    std::sort(order.begin(), order.end());
    for (size_t i : order) {
        set.predictions[i] = corrupt_prediction(set.examples[i], set.predictions[i]);
    }
    return order;
}

}  // namespace docval
