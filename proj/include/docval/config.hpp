#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

namespace docval {

struct ConvergenceConfig {
    int    window         = 3;
    double eps_mean       = 0.2;
    double eps_max        = 0.4;
    int    max_iterations = 20;
};

// Defaults reproduce the published VAL configuration (Q_min, module weights,
// convergence window). The tolerance/penalty/band settings are local choices.
struct ValidatorConfig {
    double q_min        = 0.85;
    double alpha_ans    = 0.4;
    double alpha_bbox   = 0.4;
    double alpha_reason = 0.2;

    double anls_threshold = 0.5;

    long coord_tolerance     = 5;
    long coord_penalty_scale = 50;

    std::array<double, 2> spatial_band_edges{ 1.0 / 3.0, 2.0 / 3.0 };

    ConvergenceConfig convergence;
};

// Throws Error(kBadConfig) when an invariant is broken: weights must sum to 1,
// q_min and the ANLS threshold lie in [0,1], band edges are strictly increasing
// inside (0,1), window >= 1.
void check_config(const ValidatorConfig & cfg);

// Applies one dotted key (e.g. "convergence.eps_mean") to cfg.
void apply_config_value(ValidatorConfig & cfg, std::string_view key, std::string_view value);

// Flat key=value file; '#' starts a comment, blank lines are ignored.
// Unknown keys and malformed values are errors. The result is checked.
ValidatorConfig load_config_file(const std::filesystem::path & path, ValidatorConfig base = {});
ValidatorConfig parse_config_text(std::string_view text, ValidatorConfig base = {});

// Inverse of parse_config_text; every key is emitted.
std::string config_to_text(const ValidatorConfig & cfg);

}  // namespace docval
