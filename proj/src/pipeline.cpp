#include "docval/pipeline.hpp"

#include "docval/error.hpp"
#include "docval/kernels.hpp"
#include "docval/metrics.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace docval {

namespace {

template <typename T, typename Parse> T parse_with_location(JsonlReader & reader, std::string_view line, Parse && parse) {
    try {
        return parse(line);
    } catch (const std::exception & e) {
        reader.rethrow_with_location(e);
    }
}

std::string where(const JsonlReader & r) {
    return r.source() + ":" + std::to_string(r.line_number());
}

}  // namespace

ordered_json stats_to_json(const FilterStats & stats) {
    ordered_json j;
    j["total"]     = stats.total;
    j["accepted"]  = stats.accepted;
    j["rejected"]  = stats.rejected;
    j["retention"] = stats.retention();
    j["reasons"]   = {
        { "answer", stats.reasons.answer },
        { "bbox", stats.reasons.bbox },
        { "reasoning", stats.reasons.reasoning },
    };
    return j;
}

ErrorCategory rejection_reason(const QualityBreakdown & b) {
    if (b.q_ans <= b.q_bbox && b.q_ans <= b.q_reason) {
        return ErrorCategory::kAnswer;
    }
    if (b.q_bbox <= b.q_reason) {
        return ErrorCategory::kBBox;
    }
    return ErrorCategory::kReasoning;
}

std::string accepted_record_line(const DocumentExample & ex, const PredictionTuple & pred) {
    ordered_json j    = example_to_json(ex);
    j["prediction"] = prediction_to_json(pred);
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

FilterStats filter_stream(std::istream & examples, std::istream & predictions, std::ostream * accepted,
                          const ValidatorConfig & cfg, const StreamOptions & opts) {
    JsonlReader ex_reader(examples, opts.examples_name);
    JsonlReader pr_reader(predictions, opts.predictions_name);

    const size_t                    chunk = std::max<size_t>(1, opts.chunk_size);
    std::vector<DocumentExample>    ex_chunk;
    std::vector<PredictionTuple>    pr_chunk;
    std::vector<PairRef>            refs;
    std::unordered_set<std::string> seen;
    FilterStats                     stats;

    ex_chunk.reserve(chunk);
    pr_chunk.reserve(chunk);

    bool done = false;
    while (!done) {
        ex_chunk.clear();
        pr_chunk.clear();
        while (ex_chunk.size() < chunk) {
            auto ex_line = ex_reader.next();
            auto pr_line = pr_reader.next();
            if (!ex_line && !pr_line) {
                done = true;
                break;
            }
            if (!pr_line) {
                auto ex = parse_with_location<DocumentExample>(ex_reader, *ex_line, parse_example_line);
                throw Error(ErrorCode::kMissingPrediction,
                            "MissingPrediction: example '" + ex.id + "' at " + where(ex_reader) + " has no prediction");
            }
            auto pred = parse_with_location<PredictionTuple>(pr_reader, *pr_line, parse_prediction_line);
            if (!ex_line) {
                throw Error(ErrorCode::kOrphanPrediction,
                            "OrphanPrediction: prediction '" + pred.id + "' at " + where(pr_reader) + " has no example");
            }
            auto ex = parse_with_location<DocumentExample>(ex_reader, *ex_line, parse_example_line);
            if (pred.id != ex.id) {
                throw Error(ErrorCode::kOrphanPrediction, "OrphanPrediction: prediction '" + pred.id + "' at " +
                                                              where(pr_reader) + " has no example (" +
                                                              where(ex_reader) + " is '" + ex.id + "')");
            }
            if (!seen.insert(ex.id).second) {
                throw Error(ErrorCode::kDuplicateId, "DuplicateId: '" + ex.id + "' repeated at " + where(ex_reader));
            }
            ex_chunk.push_back(std::move(ex));
            pr_chunk.push_back(std::move(pred));
        }
        if (ex_chunk.empty()) {
            break;
        }

        refs.resize(ex_chunk.size());
        for (size_t i = 0; i < ex_chunk.size(); ++i) {
            refs[i] = { &ex_chunk[i], &pr_chunk[i] };
        }
        const auto breakdowns = validate_parallel(refs, cfg, opts.jobs);

        for (size_t i = 0; i < breakdowns.size(); ++i) {
            ++stats.total;
            if (decide(breakdowns[i], cfg).status == VerdictStatus::kAccept) {
                ++stats.accepted;
                if (accepted) {
                    *accepted << accepted_record_line(ex_chunk[i], pr_chunk[i]) << '\n';
                }
                continue;
            }
            ++stats.rejected;
            switch (rejection_reason(breakdowns[i])) {
                case ErrorCategory::kAnswer:    ++stats.reasons.answer; break;
                case ErrorCategory::kBBox:      ++stats.reasons.bbox; break;
                case ErrorCategory::kReasoning: ++stats.reasons.reasoning; break;
            }
        }
    }
    if (accepted) {
        accepted->flush();
        if (!*accepted) {
            throw Error(ErrorCode::kIo, "failed writing accepted records");
        }
    }
    return stats;
}

ordered_json metrics_to_json(const BatchMetrics & m) {
    ordered_json j;
    j["count"]     = m.count;
    j["map"]       = m.map;
    j["iou_at_50"] = m.iou_at_50;
    j["iou_at_75"] = m.iou_at_75;
    j["anls"]      = m.anls;
    j["mean_q"]    = m.mean_q;
    return j;
}

BatchMetrics aggregate_metrics(std::span<const FeedbackReport> reports) {
    std::vector<MatchedPair> pairs;
    pairs.reserve(reports.size());
    double q_sum = 0.0;
    for (const auto & r : reports) {
        pairs.push_back({ r.breakdown.iou, r.breakdown.anls });
        q_sum += r.breakdown.q;
    }
    const LocalizationSummary loc = map_over_iou(pairs);

    BatchMetrics m;
    m.count     = reports.size();
    m.map       = loc.map;
    m.iou_at_50 = loc.iou_at_50;
    m.iou_at_75 = loc.iou_at_75;
    m.anls      = dataset_anls(pairs);
    m.mean_q    = q_sum / static_cast<double>(reports.size());
    return m;
}

VerifyResult verify_batch(std::span<const DocumentExample> examples, std::span<const PredictionTuple> predictions,
                          const ValidatorConfig & cfg, int jobs) {
    if (predictions.empty()) {
        throw Error(ErrorCode::kEmptyInput, "verify: no predictions");
    }
    std::unordered_map<std::string_view, const DocumentExample *> by_id;
    by_id.reserve(examples.size());
    for (const auto & ex : examples) {
        if (!by_id.emplace(ex.id, &ex).second) {
            throw Error(ErrorCode::kDuplicateId, "DuplicateId: example '" + ex.id + "' repeated");
        }
    }

    std::unordered_set<std::string_view> seen;
    std::vector<PairRef>                 refs;
    refs.reserve(predictions.size());
    for (const auto & p : predictions) {
        auto it = by_id.find(p.id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::kOrphanPrediction, "OrphanPrediction: prediction '" + p.id + "' has no example");
        }
        if (!seen.insert(p.id).second) {
            throw Error(ErrorCode::kDuplicateId, "DuplicateId: prediction '" + p.id + "' repeated");
        }
        refs.push_back({ it->second, &p });
    }

    VerifyResult result;
    result.reports = build_reports_parallel(refs, cfg, jobs);
    result.metrics = aggregate_metrics(result.reports);
    return result;
}

ConvergenceResult convergence_check(std::span<const double> history, const ConvergenceConfig & cfg) {
    ConvergenceResult r;
    const size_t      w = static_cast<size_t>(std::max(1, cfg.window));
    if (history.size() < w + 1) {
        return r;
    }
    double sum = 0.0;
    double max = 0.0;
    for (size_t j = history.size() - w; j < history.size(); ++j) {
        const double d = history[j] - history[j - 1];
        sum += d;
        max = (j == history.size() - w) ? d : std::max(max, d);
    }
    r.mean_delta = sum / static_cast<double>(w);
    r.max_delta  = max;
    r.converged  = *r.mean_delta < cfg.eps_mean && *r.max_delta < cfg.eps_max;
    return r;
}

StudentQuery make_query(const DocumentExample & ex) {
    return { ex.id, ex.page, ex.question };
}

std::vector<double> RefinementHistory::map_series() const {
    std::vector<double> out;
    out.reserve(iterations.size());
    for (const auto & it : iterations) {
        out.push_back(it.map);
    }
    return out;
}

ordered_json history_to_json(const RefinementHistory & h) {
    ordered_json iters = ordered_json::array();
    for (const auto & it : h.iterations) {
        iters.push_back({ { "k", it.k }, { "map", it.map }, { "mean_anls", it.mean_anls }, { "mean_q", it.mean_q } });
    }
    ordered_json j;
    j["iterations"]   = std::move(iters);
    j["converged_at"] = h.converged_at ? ordered_json(*h.converged_at) : ordered_json(nullptr);
    j["final_map"]    = h.final_map();
    return j;
}

RefinementHistory run_refinement_loop(StudentAdapter & student, std::span<const DocumentExample> refine_set,
                                      const ValidatorConfig & cfg, int jobs) {
    if (refine_set.empty()) {
        throw Error(ErrorCode::kEmptyInput, "refinement loop needs a non-empty refine set");
    }
    RefinementHistory   history;
    std::vector<double> maps;

    for (int k = 1; k <= cfg.convergence.max_iterations; ++k) {
        std::vector<PredictionTuple> predictions;
        try {
            predictions.reserve(refine_set.size());
            for (const auto & ex : refine_set) {
                predictions.push_back(student.predict(make_query(ex)));
            }
        } catch (const std::exception & e) {
            throw RefinementAborted("student predict failed at iteration " + std::to_string(k) + ": " + e.what(),
                                    history);
        }

        VerifyResult verified = verify_batch(refine_set, predictions, cfg, jobs);
        const double map_pct  = verified.metrics.map * 100.0;
        history.iterations.push_back({ k, map_pct, verified.metrics.anls, verified.metrics.mean_q });
        maps.push_back(map_pct);

        if (convergence_check(maps, cfg.convergence).converged) {
            history.converged_at = k;
            break;
        }
        try {
            student.update(verified.reports);
        } catch (const std::exception & e) {
            throw RefinementAborted("student update failed at iteration " + std::to_string(k) + ": " + e.what(),
                                    history);
        }
    }
    return history;
}

}  // namespace docval
