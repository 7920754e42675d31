#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace docval {

using Coord = std::int64_t;

// Pixel box, origin top-left, x right, y down. Area follows the half-open
// convention (x2 - x1) * (y2 - y1).
struct BBox {
    Coord x1 = 0;
    Coord y1 = 0;
    Coord x2 = 0;
    Coord y2 = 0;

    Coord width() const { return x2 - x1; }
    Coord height() const { return y2 - y1; }
    Coord area() const { return width() * height(); }

    bool is_valid() const { return x1 >= 0 && y1 >= 0 && x1 <= x2 && y1 <= y2; }

    friend bool operator==(const BBox &, const BBox &) = default;
};

// gt - pred, componentwise: [dx1, dy1, dx2, dy2].
using PixelDelta = std::array<Coord, 4>;

struct PageGeometry {
    Coord width  = 0;
    Coord height = 0;

    bool contains(const BBox & b) const { return b.is_valid() && b.x2 <= width && b.y2 <= height; }

    friend bool operator==(const PageGeometry &, const PageGeometry &) = default;
};

// A detected text instance: box, OCR text, and its index within the document.
struct Region {
    int         index = 0;
    BBox        bbox;
    std::string text;

    friend bool operator==(const Region &, const Region &) = default;
};

struct DocumentExample {
    std::string              id;
    PageGeometry             page;
    std::string              question;
    std::vector<std::string> answers;
    BBox                     gt_bbox;
    std::optional<int>       gt_region_index;
    std::vector<Region>      regions;

    const Region * find_region(int index) const {
        for (const auto & r : regions) {
            if (r.index == index) {
                return &r;
            }
        }
        return nullptr;
    }

    friend bool operator==(const DocumentExample &, const DocumentExample &) = default;
};

// The model output under validation: the complete (CoT, answer, bbox) tuple.
struct PredictionTuple {
    std::string id;
    std::string cot;
    std::string answer;
    BBox        bbox;

    friend bool operator==(const PredictionTuple &, const PredictionTuple &) = default;
};

// Result of grounding a box against the detected regions. An empty region
// means the box targets empty space.
struct RegionAssignment {
    std::optional<int> region;
    double             overlap_iou = 0.0;

    bool grounded() const { return region.has_value(); }

    friend bool operator==(const RegionAssignment &, const RegionAssignment &) = default;
};

struct QualityBreakdown {
    double q_ans    = 0.0;
    double q_bbox   = 0.0;
    double q_reason = 0.0;
    double q        = 0.0;

    double s_struct  = 0.0;
    double s_coord   = 0.0;
    double s_spatial = 0.0;

    double anls = 0.0;
    double iou  = 0.0;

    PixelDelta       delta{};
    RegionAssignment pred_region;
    RegionAssignment gt_region;
    bool             answer_in_ocr = false;

    friend bool operator==(const QualityBreakdown &, const QualityBreakdown &) = default;
};

}  // namespace docval
