#include "docval/metrics.hpp"

#include "docval/error.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace docval {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

char32_t to_lower(char32_t c) {
    if (c < 0x80) {
        return (c >= 'A' && c <= 'Z') ? c + 32 : c;
    }
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) {
        return c + 32;
    }
    if (c >= 0x100 && c <= 0x17F) {
        if (c == 0x130) {
            return U'i';
        }
        if (c == 0x178) {
            return 0xFF;
        }
        if ((c >= 0x100 && c <= 0x12F) || (c >= 0x132 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) {
            return (c % 2 == 0) ? c + 1 : c;
        }
        if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) {
            return (c % 2 == 1) ? c + 1 : c;
        }
        return c;
    }
    if (c >= 0x386 && c <= 0x3AB) {
        if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) {
            return c + 32;
        }
        switch (c) {
            case 0x386: return 0x3AC;
            case 0x388:
            case 0x389:
            case 0x38A: return c + 37;
            case 0x38C: return 0x3CC;
            case 0x38E:
            case 0x38F: return c + 63;
            default: return c;
        }
    }
    if (c >= 0x400 && c <= 0x40F) {
        return c + 80;
    }
    if (c >= 0x410 && c <= 0x42F) {
        return c + 32;
    }
    return c;
}

}  // namespace

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int      len = 0;
        char32_t cp  = 0;
        char32_t min = 0;
        if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp  = b0 & 0x1F;
            min = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp  = b0 & 0x0F;
            min = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp  = b0 & 0x07;
            min = 0x10000;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t c : s) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else if (c < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else if (c < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (c >> 12)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (c >> 18)));
            out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

std::u32string normalize_text(std::string_view s) {
    const std::u32string decoded = decode_utf8(s);
    std::u32string       out;
    out.reserve(decoded.size());
    bool pending_space = false;
    for (char32_t c : decoded) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(U' ');
            pending_space = false;
        }
        out.push_back(to_lower(c));
    }
    return out;
}

size_t edit_distance(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    // b is the shorter string; one row of |b|+1 cells.
    std::vector<size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), size_t{ 0 });
    for (size_t i = 1; i <= a.size(); ++i) {
        size_t diag = row[0];
        row[0]      = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            const size_t up = row[j];
            if (a[i - 1] == b[j - 1]) {
                row[j] = diag;
            } else {
                row[j] = 1 + std::min({ diag, up, row[j - 1] });
            }
            diag = up;
        }
    }
    return row[b.size()];
}

double normalized_levenshtein(std::string_view a, std::string_view b, double tau) {
    const std::u32string na = normalize_text(a);
    const std::u32string nb = normalize_text(b);
    const size_t         longest = std::max(na.size(), nb.size());
    if (longest == 0) {
        return 1.0;
    }
    const double nls = 1.0 - static_cast<double>(edit_distance(na, nb)) / static_cast<double>(longest);
    return nls >= tau ? nls : 0.0;
}

double anls(std::string_view pred, std::span<const std::string> gts, double tau) {
    if (gts.empty()) {
        throw Error(ErrorCode::kEmptyGroundTruth, "ANLS needs at least one ground-truth answer");
    }
    double best = 0.0;
    for (const auto & g : gts) {
        best = std::max(best, normalized_levenshtein(pred, g, tau));
    }
    return best;
}

Coord intersection_area(const BBox & a, const BBox & b) {
    const Coord w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const Coord h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    return (w > 0 && h > 0) ? w * h : 0;
}

double iou(const BBox & a, const BBox & b) {
    const Coord inter = intersection_area(a, b);
    const Coord uni   = a.area() + b.area() - inter;
    if (uni <= 0) {
        return 0.0;
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

PixelDelta pixel_error(const BBox & pred, const BBox & gt) {
    return { gt.x1 - pred.x1, gt.y1 - pred.y1, gt.x2 - pred.x2, gt.y2 - pred.y2 };
}

std::array<double, kIouThresholdCount> iou_thresholds() {
    std::array<double, kIouThresholdCount> t{};
    for (size_t i = 0; i < kIouThresholdCount; ++i) {
        t[i] = static_cast<double>(50 + 5 * i) / 100.0;
    }
    return t;
}

LocalizationSummary map_over_iou(std::span<const MatchedPair> pairs) {
    if (pairs.empty()) {
        throw Error(ErrorCode::kEmptyInput, "mAP needs at least one matched pair");
    }
    const auto                             thresholds = iou_thresholds();
    std::array<size_t, kIouThresholdCount> hits{};
    for (const auto & p : pairs) {
        for (size_t i = 0; i < kIouThresholdCount; ++i) {
            hits[i] += p.iou >= thresholds[i] ? 1 : 0;
        }
    }
    LocalizationSummary s;
    const auto          n     = static_cast<double>(pairs.size());
    size_t              total = 0;
    for (size_t i = 0; i < kIouThresholdCount; ++i) {
        s.per_threshold[i] = static_cast<double>(hits[i]) / n;
        total += hits[i];
    }
    // Mean of the per-threshold accuracies, computed from the integer total so
    // equal hit counts give bit-equal results.
    s.map       = static_cast<double>(total) / (n * static_cast<double>(kIouThresholdCount));
    s.iou_at_50 = s.per_threshold[0];
    s.iou_at_75 = s.per_threshold[5];
    return s;
}

double dataset_anls(std::span<const MatchedPair> pairs) {
    if (pairs.empty()) {
        throw Error(ErrorCode::kEmptyInput, "ANLS needs at least one matched pair");
    }
    double sum = 0.0;
    for (const auto & p : pairs) {
        sum += p.anls;
    }
    return sum / static_cast<double>(pairs.size());
}

}  // namespace docval
