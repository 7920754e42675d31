#include "docval/kernels.hpp"

#include "docval/validators.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#ifdef _OPENMP
#    include <omp.h>
#endif

namespace docval {

namespace {

// Runs fn(i) for i in [0, n) and rethrows the exception of the smallest i.
template <typename Fn> void parallel_for_each_index(size_t n, int jobs, Fn && fn) {
    std::vector<std::exception_ptr> failures(n);
    bool                            any_failure = false;
    const auto                      count       = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel for schedule(dynamic, 64) num_threads(jobs) reduction(|| : any_failure)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<size_t>(i));
        } catch (...) {
            failures[static_cast<size_t>(i)] = std::current_exception();
            any_failure                      = true;
        }
    }

    if (any_failure) {
        for (auto & f : failures) {
            if (f) {
                std::rethrow_exception(f);
            }
        }
    }
}

int resolve_jobs(int jobs) {
    return jobs > 0 ? jobs : default_jobs();
}

}  // namespace

int default_jobs() {
#ifdef _OPENMP
    return std::max(1, omp_get_num_procs());
#else
    return std::max(1u, std::thread::hardware_concurrency());
#endif
}

std::vector<QualityBreakdown> validate_serial(std::span<const PairRef> pairs, const ValidatorConfig & cfg) {
    std::vector<QualityBreakdown> out;
    out.reserve(pairs.size());
    for (const auto & p : pairs) {
        out.push_back(validate(*p.example, *p.prediction, cfg));
    }
    return out;
}

std::vector<FeedbackReport> build_reports_serial(std::span<const PairRef> pairs, const ValidatorConfig & cfg) {
    std::vector<FeedbackReport> out;
    out.reserve(pairs.size());
    for (const auto & p : pairs) {
        out.push_back(build_report(*p.example, *p.prediction, validate(*p.example, *p.prediction, cfg), cfg));
    }
    return out;
}

std::vector<QualityBreakdown> validate_parallel(std::span<const PairRef> pairs, const ValidatorConfig & cfg, int jobs) {
    std::vector<QualityBreakdown> out(pairs.size());
    parallel_for_each_index(pairs.size(), resolve_jobs(jobs),
                            [&](size_t i) { out[i] = validate(*pairs[i].example, *pairs[i].prediction, cfg); });
    return out;
}

std::vector<FeedbackReport> build_reports_parallel(std::span<const PairRef> pairs, const ValidatorConfig & cfg,
                                                   int jobs) {
    std::vector<FeedbackReport> out(pairs.size());
    parallel_for_each_index(pairs.size(), resolve_jobs(jobs), [&](size_t i) {
        const auto & p = pairs[i];
        out[i]         = build_report(*p.example, *p.prediction, validate(*p.example, *p.prediction, cfg), cfg);
    });
    return out;
}

}  // namespace docval
