#include "docval/config.hpp"

#include "docval/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace docval {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_ws(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_ws(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_real(std::string_view key, std::string_view value) {
    // std::from_chars for double is missing from some libstdc++ releases we target.
    std::string buf(trim(value));
    char *      end = nullptr;
    double      v   = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::kBadConfig,
                    "config key '" + std::string(key) + "': expected a real number, got '" + buf + "'");
    }
    return v;
}

long parse_integer(std::string_view key, std::string_view value) {
    value   = trim(value);
    long v  = 0;
    auto rc = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || rc.ec != std::errc() || rc.ptr != value.data() + value.size()) {
        throw Error(ErrorCode::kBadConfig,
                    "config key '" + std::string(key) + "': expected an integer, got '" + std::string(value) + "'");
    }
    return v;
}

std::string format_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void check_config(const ValidatorConfig & cfg) {
    auto fail = [](const std::string & msg) { throw Error(ErrorCode::kBadConfig, msg); };

    const double sum = cfg.alpha_ans + cfg.alpha_bbox + cfg.alpha_reason;
    if (std::abs(sum - 1.0) > 1e-9) {
        fail("alpha_ans + alpha_bbox + alpha_reason must equal 1 (got " + format_real(sum) + ")");
    }
    if (cfg.alpha_ans < 0 || cfg.alpha_bbox < 0 || cfg.alpha_reason < 0) {
        fail("module weights must be non-negative");
    }
    if (!(cfg.q_min >= 0.0 && cfg.q_min <= 1.0)) {
        fail("q_min must lie in [0,1]");
    }
    if (!(cfg.anls_threshold >= 0.0 && cfg.anls_threshold <= 1.0)) {
        fail("anls_threshold must lie in [0,1]");
    }
    if (cfg.coord_tolerance < 0) {
        fail("coord_tolerance must be >= 0");
    }
    if (cfg.coord_penalty_scale <= 0) {
        fail("coord_penalty_scale must be > 0");
    }
    const auto [lo, hi] = cfg.spatial_band_edges;
    if (!(lo > 0.0 && lo < hi && hi < 1.0)) {
        fail("spatial_band_edges must satisfy 0 < first < second < 1");
    }
    if (cfg.convergence.window < 1) {
        fail("convergence.window must be >= 1");
    }
    if (cfg.convergence.max_iterations < 1) {
        fail("convergence.max_iterations must be >= 1");
    }
}

void apply_config_value(ValidatorConfig & cfg, std::string_view key, std::string_view value) {
    if (key == "q_min") {
        cfg.q_min = parse_real(key, value);
    } else if (key == "alpha_ans") {
        cfg.alpha_ans = parse_real(key, value);
    } else if (key == "alpha_bbox") {
        cfg.alpha_bbox = parse_real(key, value);
    } else if (key == "alpha_reason") {
        cfg.alpha_reason = parse_real(key, value);
    } else if (key == "anls_threshold") {
        cfg.anls_threshold = parse_real(key, value);
    } else if (key == "coord_tolerance") {
        cfg.coord_tolerance = parse_integer(key, value);
    } else if (key == "coord_penalty_scale") {
        cfg.coord_penalty_scale = parse_integer(key, value);
    } else if (key == "spatial_band_edges") {
        const auto comma = value.find(',');
        if (comma == std::string_view::npos) {
            throw Error(ErrorCode::kBadConfig, "config key 'spatial_band_edges': expected two comma-separated reals");
        }
        cfg.spatial_band_edges = { parse_real(key, value.substr(0, comma)), parse_real(key, value.substr(comma + 1)) };
    } else if (key == "convergence.window") {
        cfg.convergence.window = static_cast<int>(parse_integer(key, value));
    } else if (key == "convergence.eps_mean") {
        cfg.convergence.eps_mean = parse_real(key, value);
    } else if (key == "convergence.eps_max") {
        cfg.convergence.eps_max = parse_real(key, value);
    } else if (key == "convergence.max_iterations") {
        cfg.convergence.max_iterations = static_cast<int>(parse_integer(key, value));
    } else {
        throw Error(ErrorCode::kBadConfig, "unknown config key '" + std::string(key) + "'");
    }
}

ValidatorConfig parse_config_text(std::string_view text, ValidatorConfig base) {
    size_t line_no = 0;
    while (!text.empty()) {
        const auto       nl   = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::kBadConfig, "config line " + std::to_string(line_no) + ": expected key=value");
        }
        apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    check_config(base);
    return base;
}

ValidatorConfig load_config_file(const std::filesystem::path & path, ValidatorConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open config file '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_text(ss.str(), base);
    } catch (const Error & e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string config_to_text(const ValidatorConfig & cfg) {
    std::ostringstream os;
    os << "q_min=" << format_real(cfg.q_min) << '\n';
    os << "alpha_ans=" << format_real(cfg.alpha_ans) << '\n';
    os << "alpha_bbox=" << format_real(cfg.alpha_bbox) << '\n';
    os << "alpha_reason=" << format_real(cfg.alpha_reason) << '\n';
    os << "anls_threshold=" << format_real(cfg.anls_threshold) << '\n';
    os << "coord_tolerance=" << cfg.coord_tolerance << '\n';
    os << "coord_penalty_scale=" << cfg.coord_penalty_scale << '\n';
    os << "spatial_band_edges=" << format_real(cfg.spatial_band_edges[0]) << ','
       << format_real(cfg.spatial_band_edges[1]) << '\n';
    os << "convergence.window=" << cfg.convergence.window << '\n';
    os << "convergence.eps_mean=" << format_real(cfg.convergence.eps_mean) << '\n';
    os << "convergence.eps_max=" << format_real(cfg.convergence.eps_max) << '\n';
    os << "convergence.max_iterations=" << cfg.convergence.max_iterations << '\n';
    return os.str();
}

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kMissingField:         return "MissingField";
        case ErrorCode::kInvalidField:         return "InvalidField";
        case ErrorCode::kInvalidBBox:          return "InvalidBBox";
        case ErrorCode::kOutOfPageBounds:      return "OutOfPageBounds";
        case ErrorCode::kDuplicateRegionIndex: return "DuplicateRegionIndex";
        case ErrorCode::kBadRatios:            return "BadRatios";
        case ErrorCode::kEmptyGroundTruth:     return "EmptyGroundTruth";
        case ErrorCode::kEmptyInput:           return "EmptyInput";
        case ErrorCode::kOutOfRange:           return "OutOfRange";
        case ErrorCode::kIdMismatch:           return "IdMismatch";
        case ErrorCode::kOrphanPrediction:     return "OrphanPrediction";
        case ErrorCode::kMissingPrediction:    return "MissingPrediction";
        case ErrorCode::kDuplicateId:          return "DuplicateId";
        case ErrorCode::kInfeasibleLayout:     return "InfeasibleLayout";
        case ErrorCode::kBadConfig:            return "BadConfig";
        case ErrorCode::kParse:                return "Parse";
        case ErrorCode::kIo:                   return "Io";
        case ErrorCode::kUsage:                return "Usage";
    }
    return "Unknown";
}

}  // namespace docval
