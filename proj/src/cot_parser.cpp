#include "docval/cot_parser.hpp"

#include <array>
#include <cctype>
#include <limits>

namespace docval {

namespace {

bool is_blank(char c) {
    return c == ' ' || c == '\t' || c == '\r';
}

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (is_blank(s.front()) || s.front() == '\n')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (is_blank(s.back()) || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

void skip_blanks(std::string_view s, size_t & pos) {
    while (pos < s.size() && is_blank(s[pos])) {
        ++pos;
    }
}

// Case-insensitive keyword at pos; advances past it on success.
bool eat_keyword(std::string_view s, size_t & pos, std::string_view kw) {
    if (s.size() - pos < kw.size()) {
        return false;
    }
    for (size_t i = 0; i < kw.size(); ++i) {
        if (lower(s[pos + i]) != kw[i]) {
            return false;
        }
    }
    pos += kw.size();
    return true;
}

bool eat_char(std::string_view s, size_t & pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

// Non-negative decimal integer bounded by int32 range.
std::optional<Coord> eat_integer(std::string_view s, size_t & pos) {
    const size_t start = pos;
    Coord        v     = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        v = v * 10 + (s[pos] - '0');
        if (v > std::numeric_limits<std::int32_t>::max()) {
            return std::nullopt;
        }
        ++pos;
    }
    if (pos == start) {
        return std::nullopt;
    }
    return v;
}

// "[ int , int , int , int ]" starting exactly at pos.
std::optional<BBox> eat_bbox_group(std::string_view s, size_t & pos) {
    size_t p = pos;
    if (!eat_char(s, p, '[')) {
        return std::nullopt;
    }
    std::array<Coord, 4> v{};
    for (size_t i = 0; i < 4; ++i) {
        skip_blanks(s, p);
        auto n = eat_integer(s, p);
        if (!n) {
            return std::nullopt;
        }
        v[i] = *n;
        skip_blanks(s, p);
        if (!eat_char(s, p, i < 3 ? ',' : ']')) {
            return std::nullopt;
        }
    }
    pos = p;
    return BBox{ v[0], v[1], v[2], v[3] };
}

// "<kw> :" after optional indentation; returns the position after the colon.
std::optional<size_t> match_label(std::string_view line, std::string_view kw) {
    size_t p = 0;
    skip_blanks(line, p);
    if (!eat_keyword(line, p, kw)) {
        return std::nullopt;
    }
    skip_blanks(line, p);
    if (!eat_char(line, p, ':')) {
        return std::nullopt;
    }
    return p;
}

struct StepHeader {
    int              ordinal;
    std::string_view text;
};

std::optional<StepHeader> match_step(std::string_view line) {
    size_t p = 0;
    skip_blanks(line, p);
    if (!eat_keyword(line, p, "step")) {
        return std::nullopt;
    }
    skip_blanks(line, p);
    const size_t digits_start = p;
    auto         n            = eat_integer(line, p);
    if (!n || p - digits_start > 9) {
        return std::nullopt;
    }
    skip_blanks(line, p);
    if (!eat_char(line, p, ':')) {
        return std::nullopt;
    }
    return StepHeader{ static_cast<int>(*n), trim(line.substr(p)) };
}

std::optional<BBox> parse_bbox_value(std::string_view rest) {
    size_t p = 0;
    skip_blanks(rest, p);
    auto b = eat_bbox_group(rest, p);
    if (!b || !b->is_valid()) {
        return std::nullopt;
    }
    return b;
}

// Splits "Answer: $45.99, BBox: [..]" into the answer and the trailing box.
void split_inline_bbox(std::string_view rest, std::string_view & answer, std::optional<BBox> & bbox) {
    answer = trim(rest);
    for (size_t i = 0; i + 4 <= rest.size(); ++i) {
        size_t p = i;
        if (!eat_keyword(rest, p, "bbox")) {
            continue;
        }
        if (i > 0 && std::isalnum(static_cast<unsigned char>(rest[i - 1]))) {
            continue;
        }
        skip_blanks(rest, p);
        if (!eat_char(rest, p, ':')) {
            continue;
        }
        auto b = parse_bbox_value(rest.substr(p));
        if (!b) {
            continue;
        }
        std::string_view head = trim(rest.substr(0, i));
        while (!head.empty() && (head.back() == ',' || head.back() == ';' || is_blank(head.back()))) {
            head.remove_suffix(1);
        }
        answer = head;
        bbox   = b;
        return;
    }
}

void finish_step(ReasoningStep & step) {
    step.coordinates     = extract_coordinates(step.text);
    step.spatial_phrases = extract_spatial_phrases(step.text);
}

enum class Keyword { kNone, kTop, kBottom, kLeft, kRight, kCenter };

Keyword classify(std::string_view word) {
    if (word == "top" || word == "upper") {
        return Keyword::kTop;
    }
    if (word == "bottom" || word == "lower") {
        return Keyword::kBottom;
    }
    if (word == "left") {
        return Keyword::kLeft;
    }
    if (word == "right") {
        return Keyword::kRight;
    }
    if (word == "middle" || word == "center" || word == "centre") {
        return Keyword::kCenter;
    }
    return Keyword::kNone;
}

bool is_vertical(Keyword k) {
    return k == Keyword::kTop || k == Keyword::kBottom;
}

bool is_horizontal(Keyword k) {
    return k == Keyword::kLeft || k == Keyword::kRight;
}

}  // namespace

std::optional<BBox> CoTTrace::last_coordinate_mention() const {
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        if (!it->coordinates.empty()) {
            return it->coordinates.back();
        }
    }
    return std::nullopt;
}

std::vector<BBox> extract_coordinates(std::string_view text) {
    std::vector<BBox> out;
    size_t            pos = 0;
    while ((pos = text.find('[', pos)) != std::string_view::npos) {
        size_t p = pos;
        if (auto b = eat_bbox_group(text, p); b && b->is_valid()) {
            out.push_back(*b);
            pos = p;
        } else {
            ++pos;
        }
    }
    return out;
}

std::vector<SpatialPhrase> extract_spatial_phrases(std::string_view step_text) {
    struct Word {
        std::string_view source;
        std::string      folded;
        Keyword          kind;
    };

    std::vector<Word> words;
    size_t            i = 0;
    while (i < step_text.size()) {
        if (!std::isalpha(static_cast<unsigned char>(step_text[i]))) {
            ++i;
            continue;
        }
        const size_t start = i;
        while (i < step_text.size() && std::isalpha(static_cast<unsigned char>(step_text[i]))) {
            ++i;
        }
        Word w;
        w.source = step_text.substr(start, i - start);
        for (char c : w.source) {
            w.folded.push_back(lower(c));
        }
        w.kind = classify(w.folded);
        words.push_back(std::move(w));
    }

    std::vector<SpatialPhrase> out;
    for (size_t k = 0; k < words.size(); ++k) {
        const Word & w    = words[k];
        auto         emit = [&](Axis axis, Band band) { out.push_back({ axis, band, std::string(w.source) }); };
        switch (w.kind) {
            case Keyword::kNone:
                break;
            case Keyword::kTop:
                emit(Axis::kVertical, Band::kFirst);
                break;
            case Keyword::kBottom:
                emit(Axis::kVertical, Band::kLast);
                break;
            case Keyword::kLeft:
                emit(Axis::kHorizontal, Band::kFirst);
                break;
            case Keyword::kRight:
                emit(Axis::kHorizontal, Band::kLast);
                break;
            case Keyword::kCenter: {
                // A neighbouring keyword fixes the axis: "upper middle" is
                // horizontal, "middle left" is vertical, "middle center"
                // reads vertical then horizontal. A lone middle/center is
                // ambiguous and counts on both axes.
                const Keyword prev = k > 0 ? words[k - 1].kind : Keyword::kNone;
                const Keyword next = k + 1 < words.size() ? words[k + 1].kind : Keyword::kNone;
                const std::string_view next_word =
                    k + 1 < words.size() ? std::string_view(words[k + 1].folded) : std::string_view();
                if (is_vertical(prev) || is_vertical(next) || next_word == "column" || prev == Keyword::kCenter) {
                    emit(Axis::kHorizontal, Band::kMiddle);
                } else if (is_horizontal(prev) || is_horizontal(next) || next_word == "row" ||
                           next == Keyword::kCenter) {
                    emit(Axis::kVertical, Band::kMiddle);
                } else {
                    emit(Axis::kVertical, Band::kMiddle);
                    emit(Axis::kHorizontal, Band::kMiddle);
                }
                break;
            }
        }
    }
    return out;
}

CoTTrace parse_trace(std::string_view raw) {
    CoTTrace trace;
    trace.raw = std::string(raw);

    ReasoningStep * current = nullptr;
    auto            append  = [](std::string & dst, std::string_view line) {
        if (!dst.empty()) {
            dst.push_back('\n');
        }
        dst.append(line);
    };

    std::string_view rest = raw;
    while (!rest.empty()) {
        const size_t     nl   = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest.remove_prefix(nl == std::string_view::npos ? rest.size() : nl + 1);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }

        if (auto step = match_step(line)) {
            trace.steps.push_back({ step->ordinal, std::string(step->text), {}, {} });
            current = &trace.steps.back();
            continue;
        }
        if (auto p = match_label(line, "answer")) {
            std::string_view    answer;
            std::optional<BBox> inline_bbox;
            split_inline_bbox(line.substr(*p), answer, inline_bbox);
            trace.final_answer = std::string(answer);
            if (inline_bbox) {
                trace.final_bbox = inline_bbox;
            }
            continue;
        }
        if (auto p = match_label(line, "bbox")) {
            trace.final_bbox = parse_bbox_value(line.substr(*p));
            continue;
        }
        if (trim(line).empty()) {
            continue;
        }
        append(current ? current->text : trace.preamble, trim(line));
    }

    for (auto & step : trace.steps) {
        finish_step(step);
    }
    return trace;
}

std::string format_trace_bbox(const BBox & b) {
    return "[" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " + std::to_string(b.x2) + ", " +
           std::to_string(b.y2) + "]";
}

std::string serialize_trace(const CoTTrace & trace) {
    std::string out;
    auto        line = [&out](std::string_view s) {
        if (!out.empty()) {
            out.push_back('\n');
        }
        out.append(s);
    };
    if (!trace.preamble.empty()) {
        line(trace.preamble);
    }
    for (const auto & step : trace.steps) {
        line("Step " + std::to_string(step.ordinal) + ": " + step.text);
    }
    if (trace.final_answer) {
        line("Answer: " + *trace.final_answer);
    }
    if (trace.final_bbox) {
        line("BBox: " + format_trace_bbox(*trace.final_bbox));
    }
    return out;
}

std::string_view band_word(Axis axis, Band band) {
    if (axis == Axis::kVertical) {
        switch (band) {
            case Band::kFirst:  return "upper";
            case Band::kMiddle: return "middle";
            case Band::kLast:   return "lower";
        }
    }
    switch (band) {
        case Band::kFirst:  return "left";
        case Band::kMiddle: return "center";
        case Band::kLast:   return "right";
    }
    return "";
}

}  // namespace docval
