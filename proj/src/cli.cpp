#include "docval/cli.hpp"

#include "docval/config.hpp"
#include "docval/error.hpp"
#include "docval/fixtures.hpp"
#include "docval/pipeline.hpp"
#include "docval/records.hpp"
#include "docval/split.hpp"
#include "docval/synthetic_student.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>

namespace docval {

namespace {

// Flag values bound by CLI11, plus the overlay that copies only the flags the
// user actually passed on top of the file-or-default configuration.
struct ConfigFlags {
    ValidatorConfig     values;
    std::vector<double> band_edges{ values.spatial_band_edges[0], values.spatial_band_edges[1] };
    std::string         config_path;

    std::vector<std::pair<CLI::Option *, std::function<void(ValidatorConfig &)>>> overlays;

    template <typename T> void bind(CLI::App * app, const std::string & name, T & field, T ValidatorConfig::*member,
                                    const std::string & help) {
        auto * opt = app->add_option(name, field, help)->capture_default_str();
        overlays.emplace_back(opt, [this, member](ValidatorConfig & cfg) { cfg.*member = values.*member; });
    }

    template <typename T> void bind_conv(CLI::App * app, const std::string & name, T ConvergenceConfig::*member,
                                         const std::string & help) {
        auto * opt = app->add_option(name, values.convergence.*member, help)->capture_default_str();
        overlays.emplace_back(opt,
                              [this, member](ValidatorConfig & cfg) { cfg.convergence.*member = values.convergence.*member; });
    }

    void add_config_option(CLI::App * app) {
        app->add_option("--config", config_path, "flat key=value file overriding defaults; flags override the file");
    }

    void add_validator_options(CLI::App * app) {
        add_config_option(app);
        bind(app, "--q-min", values.q_min, &ValidatorConfig::q_min, "accept iff Q > q-min");
        bind(app, "--alpha-ans", values.alpha_ans, &ValidatorConfig::alpha_ans, "weight of the answer score");
        bind(app, "--alpha-bbox", values.alpha_bbox, &ValidatorConfig::alpha_bbox, "weight of the bbox score");
        bind(app, "--alpha-reason", values.alpha_reason, &ValidatorConfig::alpha_reason, "weight of the reasoning score");
        bind(app, "--anls-threshold", values.anls_threshold, &ValidatorConfig::anls_threshold,
             "NLS below this counts as 0");
        bind(app, "--coord-tolerance", values.coord_tolerance, &ValidatorConfig::coord_tolerance,
             "max px disagreement scored as fully consistent");
        bind(app, "--coord-penalty-scale", values.coord_penalty_scale, &ValidatorConfig::coord_penalty_scale,
             "px beyond tolerance at which S_coord reaches 0");
        auto * edges = app->add_option("--band-edges", band_edges, "spatial band edges as fractions of the page")
                           ->expected(2)
                           ->delimiter(',')
                           ->default_str("0.333333,0.666667");
        overlays.emplace_back(edges, [this](ValidatorConfig & cfg) {
            cfg.spatial_band_edges = { band_edges[0], band_edges[1] };
        });
    }

    void add_convergence_options(CLI::App * app) {
        bind_conv(app, "--window", &ConvergenceConfig::window, "number of trailing mAP deltas inspected");
        bind_conv(app, "--eps-mean", &ConvergenceConfig::eps_mean, "converged requires mean delta < eps-mean");
        bind_conv(app, "--eps-max", &ConvergenceConfig::eps_max, "converged requires max delta < eps-max");
        bind_conv(app, "--max-iterations", &ConvergenceConfig::max_iterations, "refinement iteration cap");
    }

    // defaults < config file < explicit flags. A file problem is an input
    // error; an inconsistent flag combination is a usage error.
    ValidatorConfig resolve() const {
        ValidatorConfig cfg;
        if (!config_path.empty()) {
            cfg = load_config_file(config_path);
        }
        for (const auto & [opt, apply] : overlays) {
            if (opt->count() > 0) {
                apply(cfg);
            }
        }
        try {
            check_config(cfg);
        } catch (const Error & e) {
            throw Error(ErrorCode::kUsage, e.what());
        }
        return cfg;
    }
};

std::istream & open_input(const std::string & path, std::ifstream & file) {
    if (path == "-") {
        return std::cin;
    }
    file.open(path, std::ios::binary);
    if (!file) {
        throw Error(ErrorCode::kIo, "cannot open input file '" + path + "'");
    }
    return file;
}

std::ostream & open_output(const std::string & path, std::ofstream & file, std::ostream & stdout_stream) {
    if (path == "-") {
        return stdout_stream;
    }
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error(ErrorCode::kIo, "cannot open output file '" + path + "'");
    }
    return file;
}

void finish_output(std::ostream & os, const std::string & path) {
    os.flush();
    if (!os) {
        throw Error(ErrorCode::kIo, "failed writing '" + path + "'");
    }
}

std::string display_name(const std::string & path) {
    return path == "-" ? std::string("<stdin>") : path;
}

std::vector<DocumentExample> read_examples(const std::string & path) {
    std::ifstream file;
    JsonlReader   reader(open_input(path, file), display_name(path));
    std::vector<DocumentExample> out;
    while (auto line = reader.next()) {
        try {
            out.push_back(parse_example_line(*line));
        } catch (const std::exception & e) {
            reader.rethrow_with_location(e);
        }
    }
    return out;
}

std::vector<PredictionTuple> read_predictions(const std::string & path) {
    std::ifstream file;
    JsonlReader   reader(open_input(path, file), display_name(path));
    std::vector<PredictionTuple> out;
    while (auto line = reader.next()) {
        try {
            out.push_back(parse_prediction_line(*line));
        } catch (const std::exception & e) {
            reader.rethrow_with_location(e);
        }
    }
    return out;
}

void check_single_stdin(const std::string & a, const std::string & b) {
    if (a == "-" && b == "-") {
        throw Error(ErrorCode::kUsage, "at most one input may be read from stdin");
    }
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// CLI11 drops environment values that fail validation, so DOCVAL_JOBS is read
// here and a malformed value is a usage error.
struct JobsFlag {
    int            value = 0;
    CLI::Option *  opt   = nullptr;

    int resolve() const {
        if (opt->count() > 0) {
            return value;
        }
        const char * env = std::getenv("DOCVAL_JOBS");
        if (env == nullptr || *env == '\0') {
            return value;
        }
        const std::string_view text(env);
        int                    parsed = 0;
        const auto [end, ec]          = std::from_chars(text.data(), text.data() + text.size(), parsed);
        if (ec != std::errc{} || end != text.data() + text.size() || parsed < 0) {
            throw Error(ErrorCode::kUsage, "DOCVAL_JOBS must be a non-negative integer, got '" + std::string(text) + "'");
        }
        return parsed;
    }
};

void add_jobs_option(CLI::App * app, JobsFlag & jobs) {
    jobs.opt = app->add_option("--jobs", jobs.value, "worker threads; 0 uses every core (env DOCVAL_JOBS)")
                   ->check(CLI::NonNegativeNumber)
                   ->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err) {
    CLI::App app{ "Rule-based validation of document VQA predictions", "docval" };
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");

    std::function<void()> action;

    // filter
    ConfigFlags filter_cfg;
    std::string filter_examples, filter_predictions, filter_out = "-", filter_stats;
    JobsFlag      filter_jobs;
    size_t      filter_chunk = StreamOptions{}.chunk_size;
    {
        auto * sub = app.add_subcommand("filter", "stream paired example/prediction JSONL, keep records with Q > q-min");
        sub->add_option("--examples", filter_examples, "example JSONL ('-' for stdin)")->required();
        sub->add_option("--predictions", filter_predictions, "prediction JSONL, same order ('-' for stdin)")->required();
        sub->add_option("--out", filter_out, "accepted record JSONL ('-' for stdout)")->capture_default_str();
        sub->add_option("--stats", filter_stats, "stats JSON path; stderr when omitted");
        sub->add_option("--chunk-size", filter_chunk, "records validated per parallel batch")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        add_jobs_option(sub, filter_jobs);
        filter_cfg.add_validator_options(sub);
        sub->callback([&] {
            action = [&] {
                check_single_stdin(filter_examples, filter_predictions);
                const ValidatorConfig cfg = filter_cfg.resolve();
                std::ifstream         ex_file, pred_file;
                std::ofstream         out_file;
                std::istream &        ex_in   = open_input(filter_examples, ex_file);
                std::istream &        pred_in = open_input(filter_predictions, pred_file);
                std::ostream &        acc     = open_output(filter_out, out_file, out);
                StreamOptions         opts;
                opts.jobs             = filter_jobs.resolve();
                opts.chunk_size       = filter_chunk;
                opts.examples_name    = display_name(filter_examples);
                opts.predictions_name = display_name(filter_predictions);
                const FilterStats stats = filter_stream(ex_in, pred_in, &acc, cfg, opts);
                finish_output(acc, filter_out);
                const std::string stats_text = stats_to_json(stats).dump() + "\n";
                if (filter_stats.empty()) {
                    err << stats_text;
                } else {
                    std::ofstream  stats_file;
                    std::ostream & s = open_output(filter_stats, stats_file, out);
                    s << stats_text;
                    finish_output(s, filter_stats);
                }
            };
        });
    }

    // verify
    ConfigFlags verify_cfg;
    std::string verify_examples, verify_predictions, verify_out = "-", verify_summary;
    JobsFlag      verify_jobs;
    {
        auto * sub = app.add_subcommand("verify", "score predictions by id and emit one feedback report per prediction");
        sub->add_option("--examples", verify_examples, "example JSONL ('-' for stdin)")->required();
        sub->add_option("--predictions", verify_predictions, "prediction JSONL ('-' for stdin)")->required();
        sub->add_option("--out", verify_out, "feedback report JSONL ('-' for stdout)")->capture_default_str();
        sub->add_option("--summary", verify_summary, "aggregate metrics JSON path; not written when omitted");
        add_jobs_option(sub, verify_jobs);
        verify_cfg.add_validator_options(sub);
        sub->callback([&] {
            action = [&] {
                check_single_stdin(verify_examples, verify_predictions);
                const ValidatorConfig cfg         = verify_cfg.resolve();
                const auto            examples    = read_examples(verify_examples);
                const auto            predictions = read_predictions(verify_predictions);
                const VerifyResult    result      = verify_batch(examples, predictions, cfg, verify_jobs.resolve());
                std::ofstream         out_file;
                std::ostream &        os = open_output(verify_out, out_file, out);
                for (const auto & r : result.reports) {
                    os << report_to_line(r) << '\n';
                }
                finish_output(os, verify_out);
                if (!verify_summary.empty()) {
                    std::ofstream  summary_file;
                    std::ostream & s = open_output(verify_summary, summary_file, out);
                    s << metrics_to_json(result.metrics).dump() << '\n';
                    finish_output(s, verify_summary);
                }
            };
        });
    }

    // eval
    ConfigFlags eval_cfg;
    std::string eval_examples, eval_predictions, eval_out = "-";
    JobsFlag      eval_jobs;
    {
        auto * sub = app.add_subcommand("eval", "aggregate metrics (mAP, IoU@0.5, IoU@0.75, ANLS, mean Q)");
        sub->add_option("--examples", eval_examples, "example JSONL ('-' for stdin)")->required();
        sub->add_option("--predictions", eval_predictions, "prediction JSONL ('-' for stdin)")->required();
        sub->add_option("--out", eval_out, "metrics JSON ('-' for stdout)")->capture_default_str();
        add_jobs_option(sub, eval_jobs);
        eval_cfg.add_validator_options(sub);
        sub->callback([&] {
            action = [&] {
                check_single_stdin(eval_examples, eval_predictions);
                const ValidatorConfig cfg         = eval_cfg.resolve();
                const auto            examples    = read_examples(eval_examples);
                const auto            predictions = read_predictions(eval_predictions);
                const VerifyResult    result      = verify_batch(examples, predictions, cfg, eval_jobs.resolve());
                std::ofstream         out_file;
                std::ostream &        os = open_output(eval_out, out_file, out);
                os << metrics_to_json(result.metrics).dump() << '\n';
                finish_output(os, eval_out);
            };
        });
    }

    // refine-sim
    ConfigFlags    refine_cfg;
    std::string    refine_examples, refine_out = "-";
    FixtureOptions refine_fixtures;
    refine_fixtures.n = 200;
    StudentOptions refine_student;
    JobsFlag         refine_jobs;
    {
        auto * sub = app.add_subcommand("refine-sim", "run the refinement loop against a synthetic student");
        sub->add_option("--examples", refine_examples, "refine-set JSONL; generated fixtures when omitted");
        sub->add_option("--fixtures", refine_fixtures.n, "generated fixture count")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--fixture-seed", refine_fixtures.seed, "generated fixture seed")->capture_default_str();
        sub->add_option("--regions", refine_fixtures.regions_per_doc, "regions per generated document")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--seed", refine_student.seed, "student seed")->capture_default_str();
        sub->add_option("--rho", refine_student.rho, "fraction of the pixel error applied per update")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        sub->add_option("--noise", refine_student.noise, "uniform +/- px noise per coordinate per update")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        sub->add_option("--initial-offset", refine_student.max_initial_offset, "max initial box shift per axis (px)")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        sub->add_option("--decoy-probability", refine_student.decoy_probability,
                        "chance an example starts with a decoy answer")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        sub->add_option("--out", refine_out, "history JSON ('-' for stdout)")->capture_default_str();
        add_jobs_option(sub, refine_jobs);
        refine_cfg.add_validator_options(sub);
        refine_cfg.add_convergence_options(sub);
        sub->callback([&] {
            action = [&] {
                const ValidatorConfig        cfg = refine_cfg.resolve();
                std::vector<DocumentExample> refine_set =
                    refine_examples.empty() ? generate_fixtures(refine_fixtures).examples : read_examples(refine_examples);
                SyntheticStudent  student(refine_set, refine_student);
                RefinementHistory history;
                try {
                    history = run_refinement_loop(student, refine_set, cfg, refine_jobs.resolve());
                } catch (const RefinementAborted & e) {
                    err << "partial history: " << history_to_json(e.history()).dump() << '\n';
                    throw Error(ErrorCode::kIo, e.what());
                }
                std::ofstream  out_file;
                std::ostream & os = open_output(refine_out, out_file, out);
                os << history_to_json(history).dump() << '\n';
                finish_output(os, refine_out);
            };
        });
    }

    // split
    std::string         split_examples, split_prefix;
    std::vector<double> split_ratios{ 0.8, 0.1, 0.1 };
    std::uint64_t       split_seed = 0;
    {
        auto * sub = app.add_subcommand("split", "seeded train/refine/test split of an example JSONL");
        sub->add_option("--examples", split_examples, "example JSONL ('-' for stdin)")->required();
        sub->add_option("--ratios", split_ratios, "train,refine,test fractions")
            ->expected(3)
            ->delimiter(',')
            ->default_str("0.8,0.1,0.1");
        sub->add_option("--seed", split_seed, "shuffle seed")->capture_default_str();
        sub->add_option("--out-prefix", split_prefix, "writes <prefix>.train.jsonl, .refine.jsonl, .test.jsonl")
            ->required();
        sub->callback([&] {
            action = [&] {
                const SplitRatios ratios{ split_ratios[0], split_ratios[1], split_ratios[2] };
                split_sizes(0, ratios);  // reject bad ratios before reading input
                const auto         examples = read_examples(split_examples);
                const DatasetSplit parts    = split_dataset(examples, ratios, split_seed);
                const std::pair<const char *, const std::vector<DocumentExample> *> outputs[] = {
                    { "train", &parts.train }, { "refine", &parts.refine }, { "test", &parts.test }
                };
                ordered_json counts;
                for (const auto & [name, rows] : outputs) {
                    const std::string path = split_prefix + "." + name + ".jsonl";
                    std::ofstream     file;
                    std::ostream &    os = open_output(path, file, out);
                    for (const auto & ex : *rows) {
                        os << example_to_line(ex) << '\n';
                    }
                    finish_output(os, path);
                    counts[name] = rows->size();
                }
                out << counts.dump() << '\n';
            };
        });
    }

    // gen-fixtures
    FixtureOptions gen;
    size_t         gen_corrupt      = 0;
    std::uint64_t  gen_corrupt_seed = 0;
    std::string    gen_out_examples, gen_out_predictions;
    {
        auto * sub = app.add_subcommand("gen-fixtures", "deterministic synthetic documents with ground-truth predictions");
        sub->add_option("--seed", gen.seed, "fixture seed")->capture_default_str();
        sub->add_option("--n", gen.n, "number of documents")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--regions", gen.regions_per_doc, "text regions per document")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--page-width", gen.page.width, "page width (px)")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--page-height", gen.page.height, "page height (px)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--corrupt", gen_corrupt, "number of predictions replaced by a decoy field")
            ->capture_default_str();
        sub->add_option("--corrupt-seed", gen_corrupt_seed, "seed choosing which predictions are corrupted")
            ->capture_default_str();
        sub->add_option("--out-examples", gen_out_examples, "example JSONL ('-' for stdout)")->required();
        sub->add_option("--out-predictions", gen_out_predictions, "prediction JSONL; skipped when omitted");
        sub->callback([&] {
            action = [&] {
                if (gen_out_examples == "-" && gen_out_predictions == "-") {
                    throw Error(ErrorCode::kUsage, "at most one output may go to stdout");
                }
                FixtureSet set = generate_fixtures(gen);
                if (gen_corrupt > 0) {
                    corrupt_fixtures(set, gen_corrupt, gen_corrupt_seed);
                }
                {
                    std::ofstream  file;
                    std::ostream & os = open_output(gen_out_examples, file, out);
                    for (const auto & ex : set.examples) {
                        os << example_to_line(ex) << '\n';
                    }
                    finish_output(os, gen_out_examples);
                }
                if (!gen_out_predictions.empty()) {
                    std::ofstream  file;
                    std::ostream & os = open_output(gen_out_predictions, file, out);
                    for (const auto & p : set.predictions) {
                        os << prediction_to_line(p) << '\n';
                    }
                    finish_output(os, gen_out_predictions);
                }
            };
        });
    }

    // converge-check
    ConfigFlags         conv_cfg;
    std::vector<double> conv_history;
    {
        auto * sub = app.add_subcommand("converge-check", "apply the convergence rule to an mAP history (0-100 scale)");
        sub->add_option("--history", conv_history, "comma-separated mAP values, oldest first")
            ->required()
            ->delimiter(',');
        conv_cfg.add_config_option(sub);
        conv_cfg.add_convergence_options(sub);
        sub->callback([&] {
            action = [&] {
                const ValidatorConfig   cfg = conv_cfg.resolve();
                const ConvergenceResult r   = convergence_check(conv_history, cfg.convergence);
                out << "converged=" << (r.converged ? "true" : "false")
                    << " mean=" << (r.mean_delta ? fixed3(*r.mean_delta) : std::string("n/a"))
                    << " max=" << (r.max_delta ? fixed3(*r.max_delta) : std::string("n/a")) << '\n';
            };
        });
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError & e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (action) {
            action();
        }
        out.flush();
        return kExitOk;
    } catch (const Error & e) {
        err << "docval: " << e.what() << '\n';
        const bool usage = e.code() == ErrorCode::kUsage || e.code() == ErrorCode::kBadRatios;
        return usage ? kExitUsage : kExitInput;
    } catch (const std::exception & e) {
        err << "docval: " << e.what() << '\n';
        return kExitInput;
    }
}

int run_cli(int argc, const char * const * argv, std::ostream & out, std::ostream & err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_cli(args, out, err);
}

}  // namespace docval
