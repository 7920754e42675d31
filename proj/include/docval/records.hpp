#pragma once

#include "docval/types.hpp"

#include <json.hpp>

#include <istream>
#include <optional>
#include <string>
#include <string_view>

namespace docval {

using json         = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Validates one parsed record of the example JSONL schema. Errors carry the
// record id (when readable) and the offending field name.
DocumentExample validate_example(const json & record);
DocumentExample parse_example_line(std::string_view line);

PredictionTuple validate_prediction(const json & record);
PredictionTuple parse_prediction_line(std::string_view line);

ordered_json example_to_json(const DocumentExample & ex);
ordered_json prediction_to_json(const PredictionTuple & p);
ordered_json bbox_to_json(const BBox & b);

// Single-line serialisations, no trailing newline.
std::string example_to_line(const DocumentExample & ex);
std::string prediction_to_line(const PredictionTuple & p);

// Reads LF-terminated lines, skipping blank ones, and tracks line numbers for
// diagnostics.
class JsonlReader {
  public:
    explicit JsonlReader(std::istream & in, std::string source_name = "<stream>")
        : in_(in), source_(std::move(source_name)) {}

    // Next non-blank line, or nullopt at end of stream.
    std::optional<std::string_view> next();

    size_t              line_number() const { return line_no_; }
    const std::string & source() const { return source_; }

    // Prefixes "<source>:<line>: " to the message of a docval::Error.
    [[noreturn]] void rethrow_with_location(const std::exception & e) const;

  private:
    std::istream & in_;
    std::string    source_;
    std::string    buf_;
    size_t         line_no_ = 0;
};

}  // namespace docval
