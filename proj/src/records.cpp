#include "docval/records.hpp"

#include "docval/error.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace docval {

namespace {

constexpr Coord kMaxCoord = std::numeric_limits<std::int32_t>::max();

class RecordContext {
  public:
    RecordContext(const json & record, std::string_view kind) : record_(record), kind_(kind) {
        if (!record_.is_object()) {
            throw Error(ErrorCode::kParse, std::string(kind_) + " record is not a JSON object");
        }
        if (auto it = record_.find("id"); it != record_.end() && it->is_string()) {
            id_ = it->get<std::string>();
        }
    }

    [[noreturn]] void fail(ErrorCode code, std::string_view field, std::string_view what) const {
        std::string msg = std::string(error_code_name(code)) + ": " + std::string(kind_) + " '" +
                          (id_.empty() ? std::string("<unknown>") : id_) + "' field '" + std::string(field) + "'";
        if (!what.empty()) {
            msg += ": ";
            msg += what;
        }
        throw Error(code, msg);
    }

    const json & require(const json & obj, std::string_view key, std::string_view field) const {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            fail(ErrorCode::kMissingField, field, "missing");
        }
        return *it;
    }

    std::string string_at(const json & v, std::string_view field) const {
        if (!v.is_string()) {
            fail(ErrorCode::kInvalidField, field, "expected a string");
        }
        return v.get<std::string>();
    }

    // Integral JSON number; fractional values are rejected, not rounded.
    Coord integer_at(const json & v, std::string_view field, ErrorCode on_fraction) const {
        if (v.is_number_integer()) {
            if (v.is_number_unsigned()) {
                const auto u = v.get<std::uint64_t>();
                if (u > static_cast<std::uint64_t>(kMaxCoord)) {
                    fail(ErrorCode::kOutOfRange, field, "value too large");
                }
                return static_cast<Coord>(u);
            }
            const auto s = v.get<std::int64_t>();
            if (s > kMaxCoord || s < -kMaxCoord) {
                fail(ErrorCode::kOutOfRange, field, "value too large");
            }
            return s;
        }
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::isfinite(d) && std::floor(d) == d && std::abs(d) <= static_cast<double>(kMaxCoord)) {
                return static_cast<Coord>(d);
            }
            fail(on_fraction, field, "non-integer value");
        }
        fail(ErrorCode::kInvalidField, field, "expected an integer");
    }

    BBox bbox_at(const json & v, std::string_view field) const {
        if (!v.is_array() || v.size() != 4) {
            fail(ErrorCode::kInvalidBBox, field, "expected [x1, y1, x2, y2]");
        }
        BBox b{
            integer_at(v[0], field, ErrorCode::kInvalidBBox),
            integer_at(v[1], field, ErrorCode::kInvalidBBox),
            integer_at(v[2], field, ErrorCode::kInvalidBBox),
            integer_at(v[3], field, ErrorCode::kInvalidBBox),
        };
        if (b.x1 < 0 || b.y1 < 0) {
            fail(ErrorCode::kInvalidBBox, field, "negative coordinate");
        }
        if (b.x2 < b.x1) {
            fail(ErrorCode::kInvalidBBox, field, "x2 < x1");
        }
        if (b.y2 < b.y1) {
            fail(ErrorCode::kInvalidBBox, field, "y2 < y1");
        }
        return b;
    }

    const std::string & id() const { return id_; }

  private:
    const json &     record_;
    std::string_view kind_;
    std::string      id_;
};

json parse_line(std::string_view line) {
    try {
        return json::parse(line.begin(), line.end());
    } catch (const json::parse_error & e) {
        throw Error(ErrorCode::kParse, std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

DocumentExample validate_example(const json & record) {
    RecordContext ctx(record, "example");

    DocumentExample ex;
    ex.id = ctx.string_at(ctx.require(record, "id", "id"), "id");
    if (ex.id.empty()) {
        ctx.fail(ErrorCode::kInvalidField, "id", "empty");
    }

    const json & page = ctx.require(record, "page", "page");
    if (!page.is_object()) {
        ctx.fail(ErrorCode::kInvalidField, "page", "expected an object");
    }
    ex.page.width  = ctx.integer_at(ctx.require(page, "width", "page.width"), "page.width", ErrorCode::kInvalidField);
    ex.page.height = ctx.integer_at(ctx.require(page, "height", "page.height"), "page.height", ErrorCode::kInvalidField);
    if (ex.page.width <= 0) {
        ctx.fail(ErrorCode::kInvalidField, "page.width", "must be > 0");
    }
    if (ex.page.height <= 0) {
        ctx.fail(ErrorCode::kInvalidField, "page.height", "must be > 0");
    }

    ex.question = ctx.string_at(ctx.require(record, "question", "question"), "question");

    const json & answers = ctx.require(record, "answers", "answers");
    if (!answers.is_array()) {
        ctx.fail(ErrorCode::kInvalidField, "answers", "expected an array of strings");
    }
    if (answers.empty()) {
        ctx.fail(ErrorCode::kInvalidField, "answers", "must be non-empty");
    }
    for (size_t i = 0; i < answers.size(); ++i) {
        ex.answers.push_back(ctx.string_at(answers[i], "answers[" + std::to_string(i) + "]"));
    }

    ex.gt_bbox = ctx.bbox_at(ctx.require(record, "gt_bbox", "gt_bbox"), "gt_bbox");
    if (!ex.page.contains(ex.gt_bbox)) {
        ctx.fail(ErrorCode::kOutOfPageBounds, "gt_bbox", "exceeds page bounds");
    }

    const json & regions = ctx.require(record, "regions", "regions");
    if (!regions.is_array()) {
        ctx.fail(ErrorCode::kInvalidField, "regions", "expected an array");
    }
    std::set<int> seen;
    ex.regions.reserve(regions.size());
    for (size_t i = 0; i < regions.size(); ++i) {
        const std::string prefix = "regions[" + std::to_string(i) + "]";
        const json &      r      = regions[i];
        if (!r.is_object()) {
            ctx.fail(ErrorCode::kInvalidField, prefix, "expected an object");
        }
        Region region;
        const Coord index =
            ctx.integer_at(ctx.require(r, "index", prefix + ".index"), prefix + ".index", ErrorCode::kInvalidField);
        if (index < 0) {
            ctx.fail(ErrorCode::kInvalidField, prefix + ".index", "must be >= 0");
        }
        region.index = static_cast<int>(index);
        region.bbox  = ctx.bbox_at(ctx.require(r, "bbox", prefix + ".bbox"), prefix + ".bbox");
        if (!ex.page.contains(region.bbox)) {
            ctx.fail(ErrorCode::kOutOfPageBounds, prefix + ".bbox", "exceeds page bounds");
        }
        if (auto it = r.find("text"); it != r.end() && !it->is_null()) {
            region.text = ctx.string_at(*it, prefix + ".text");
        }
        if (!seen.insert(region.index).second) {
            ctx.fail(ErrorCode::kDuplicateRegionIndex, prefix + ".index",
                     "index " + std::to_string(region.index) + " repeated");
        }
        ex.regions.push_back(std::move(region));
    }

    if (auto it = record.find("gt_region_index"); it != record.end() && !it->is_null()) {
        const Coord k = ctx.integer_at(*it, "gt_region_index", ErrorCode::kInvalidField);
        if (k < 0 || !seen.contains(static_cast<int>(k))) {
            ctx.fail(ErrorCode::kInvalidField, "gt_region_index", "does not name a region");
        }
        ex.gt_region_index = static_cast<int>(k);
    }
    return ex;
}

DocumentExample parse_example_line(std::string_view line) {
    return validate_example(parse_line(line));
}

PredictionTuple validate_prediction(const json & record) {
    RecordContext   ctx(record, "prediction");
    PredictionTuple p;
    p.id = ctx.string_at(ctx.require(record, "id", "id"), "id");
    if (p.id.empty()) {
        ctx.fail(ErrorCode::kInvalidField, "id", "empty");
    }
    if (auto it = record.find("cot"); it != record.end() && !it->is_null()) {
        p.cot = ctx.string_at(*it, "cot");
    }
    p.answer = ctx.string_at(ctx.require(record, "answer", "answer"), "answer");
    p.bbox   = ctx.bbox_at(ctx.require(record, "bbox", "bbox"), "bbox");
    return p;
}

PredictionTuple parse_prediction_line(std::string_view line) {
    return validate_prediction(parse_line(line));
}

ordered_json bbox_to_json(const BBox & b) {
    return ordered_json::array({ b.x1, b.y1, b.x2, b.y2 });
}

ordered_json example_to_json(const DocumentExample & ex) {
    ordered_json j;
    j["id"]       = ex.id;
    j["page"]     = { { "width", ex.page.width }, { "height", ex.page.height } };
    j["question"] = ex.question;
    j["answers"]  = ex.answers;
    j["gt_bbox"]  = bbox_to_json(ex.gt_bbox);
    if (ex.gt_region_index) {
        j["gt_region_index"] = *ex.gt_region_index;
    }
    ordered_json regions = ordered_json::array();
    for (const auto & r : ex.regions) {
        ordered_json jr;
        jr["index"] = r.index;
        jr["bbox"]  = bbox_to_json(r.bbox);
        jr["text"]  = r.text;
        regions.push_back(std::move(jr));
    }
    j["regions"] = std::move(regions);
    return j;
}

ordered_json prediction_to_json(const PredictionTuple & p) {
    ordered_json j;
    j["id"]     = p.id;
    j["cot"]    = p.cot;
    j["answer"] = p.answer;
    j["bbox"]   = bbox_to_json(p.bbox);
    return j;
}

std::string example_to_line(const DocumentExample & ex) {
    return example_to_json(ex).dump();
}

std::string prediction_to_line(const PredictionTuple & p) {
    return prediction_to_json(p).dump();
}

std::optional<std::string_view> JsonlReader::next() {
    while (std::getline(in_, buf_)) {
        ++line_no_;
        if (!buf_.empty() && buf_.back() == '\r') {
            buf_.pop_back();
        }
        if (buf_.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        return std::string_view(buf_);
    }
    if (in_.bad()) {
        throw Error(ErrorCode::kIo, source_ + ": read error");
    }
    return std::nullopt;
}

void JsonlReader::rethrow_with_location(const std::exception & e) const {
    const std::string where = source_ + ":" + std::to_string(line_no_) + ": ";
    if (const auto * err = dynamic_cast<const Error *>(&e)) {
        throw Error(err->code(), where + err->what());
    }
    throw Error(ErrorCode::kParse, where + e.what());
}

}  // namespace docval
