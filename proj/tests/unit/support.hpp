#pragma once

#include "docval/error.hpp"
#include "docval/rng.hpp"
#include "docval/types.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace docval::test {

inline std::string read_file(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string & name) {
    return std::string(DOCVAL_TEST_DATA) + "/" + name;
}

inline std::string golden_path(const std::string & name) {
    return std::string(DOCVAL_TEST_GOLDEN) + "/" + name;
}

inline BBox random_box(std::mt19937_64 & rng, Coord limit) {
    Coord x1 = uniform_int(rng, 0, limit);
    Coord x2 = uniform_int(rng, 0, limit);
    Coord y1 = uniform_int(rng, 0, limit);
    Coord y2 = uniform_int(rng, 0, limit);
    if (x1 > x2) {
        std::swap(x1, x2);
    }
    if (y1 > y2) {
        std::swap(y1, y2);
    }
    return { x1, y1, x2, y2 };
}

template <typename F> ErrorCode error_code_of(F && f) {
    try {
        f();
    } catch (const Error & e) {
        return e.code();
    }
    FAIL("expected docval::Error");
    return ErrorCode::kUsage;
}

}  // namespace docval::test
