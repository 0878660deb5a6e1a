#include "targeted/cli.hpp"

#include "targeted/completion.hpp"
#include "targeted/errors.hpp"
#include "targeted/evaluation.hpp"
#include "targeted/observed.hpp"
#include "targeted/parallel.hpp"
#include "targeted/pipeline.hpp"
#include "targeted/rng.hpp"
#include "targeted/svp.hpp"
#include "targeted/synthgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>

namespace targeted::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kSynthMaskStream = 7;

struct SvpFlags {
    std::size_t n_vectors = 3;
    double delta_threshold = 0.2;
    long max_submatrices = -1;
    std::string estimator = "auto";
    IncSvdConfig incremental;

    void attach(CLI::App* app) {
        app->add_option("--n-vectors", n_vectors, "Leading singular vectors used for projection")
            ->check(CLI::PositiveNumber);
        app->add_option("--delta-threshold", delta_threshold, "Projection gap needed to accept a submatrix");
        app->add_option("--max-submatrices", max_submatrices, "Stop after this many submatrices (-1 = no limit)")
            ->check(CLI::Range(-1L, 1000000L));
        app->add_option("--estimator", estimator, "Singular vector estimator")
            ->check(CLI::IsMember({"auto", "exact", "incremental", "zerofill"}));
        app->add_option("--learning-rate", incremental.learning_rate, "Incremental SVD step size");
        app->add_option("--regularization", incremental.regularization, "Incremental SVD ridge penalty");
        app->add_option("--max-epochs", incremental.max_epochs, "Incremental SVD epochs per feature");
        app->add_option("--inc-tol", incremental.convergence_tol, "Incremental SVD relative RMSE tolerance");
    }

    SvpConfig build(std::uint64_t seed) const {
        SvpConfig cfg;
        cfg.n_vectors = n_vectors;
        cfg.delta_threshold = delta_threshold;
        if (max_submatrices >= 0) cfg.max_submatrices = static_cast<std::size_t>(max_submatrices);
        cfg.estimator = parse_estimator(estimator);
        cfg.incremental = incremental;
        cfg.seed = seed;
        cfg.validate();
        return cfg;
    }
};

struct CompletionFlags {
    std::string rank = "auto";
    CompletionConfig cfg;

    void attach(CLI::App* app) {
        app->add_option("--rank", rank, "Completion rank, or 'auto' to estimate it");
        app->add_option("--max-rank", cfg.max_rank, "Upper bound for the estimated rank");
        app->add_option("--tol", cfg.tol, "Relative residual change that stops ALS");
        app->add_option("--max-iter", cfg.max_iter, "Maximum ALS sweeps");
    }

    CompletionConfig build() const {
        CompletionConfig out = cfg;
        if (rank != "auto") {
            std::size_t value = 0;
            auto res = std::from_chars(rank.data(), rank.data() + rank.size(), value);
            if (res.ec != std::errc() || res.ptr != rank.data() + rank.size()) {
                throw Error(ErrorKind::InvalidArgument, "--rank must be 'auto' or a positive integer");
            }
            out.rank = value;
        }
        out.validate();
        return out;
    }
};

struct PlantFlags {
    std::size_t n = 400;
    std::size_t m = 400;
    std::size_t rank = 30;
    std::vector<std::string> plants;
    double density = 1.0;

    void attach(CLI::App* app) {
        app->add_option("--n", n, "Rows")->check(CLI::PositiveNumber);
        app->add_option("--m", m, "Columns")->check(CLI::PositiveNumber);
        app->add_option("--rank", rank, "Background rank")->check(CLI::PositiveNumber);
        app->add_option("--plant", plants, "Planted submatrix rows:cols:rank:pi (repeatable)");
        app->add_option("--density", density, "Observed fraction of entries")->check(CLI::Range(0.0, 1.0));
    }

    std::vector<PlantSpec> specs() const {
        std::vector<PlantSpec> out;
        for (const auto& text : plants) out.push_back(PlantSpec::parse(text));
        return out;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
    return f;
}

json descriptor_json(const Discovery& d) {
    return json{{"rows", d.descriptor.rows},
                {"cols", d.descriptor.cols},
                {"pi", d.report.pi},
                {"gamma", d.report.gamma},
                {"delta_rows", d.report.delta_rows},
                {"delta_cols", d.report.delta_cols}};
}

json completion_json(const CompletionOutput& c) {
    return json{{"used_rank", c.used_rank}, {"iterations", c.iterations}, {"final_residual", c.final_residual}};
}

std::string plural(std::size_t count, const char* one, const char* many) {
    return std::to_string(count) + " " + (count == 1 ? one : many);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Targeted matrix completion: discover low-rank submatrices and complete them separately",
                 "targeted"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    int threads = 0;
    app.add_option("--seed", seed, "Seed for every random choice");
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a planted instance");
    PlantFlags synth_plants;
    std::string out_prefix;
    synth_plants.attach(synth);
    synth->add_option("--out-prefix", out_prefix, "Writes PREFIX.csv, PREFIX.triplet and PREFIX.plantI.desc")
        ->required();

    // discover
    auto* discover = app.add_subcommand("discover", "Find low-rank submatrices with singular vector projection");
    std::string disc_in, disc_out, disc_report;
    SvpFlags disc_svp;
    discover->add_option("--in", disc_in, "Triplet input")->required()->check(CLI::ExistingFile);
    discover->add_option("--out", disc_out, "Descriptor output")->required();
    discover->add_option("--report", disc_report, "CSV of pi,gamma,delta_rows,delta_cols per submatrix");
    disc_svp.attach(discover);

    // complete
    auto* complete_cmd = app.add_subcommand("complete", "Plain low-rank completion");
    std::string comp_in, comp_out, comp_meta;
    CompletionFlags comp_flags;
    complete_cmd->add_option("--in", comp_in, "Triplet input")->required()->check(CLI::ExistingFile);
    complete_cmd->add_option("--out", comp_out, "Dense CSV estimate")->required();
    complete_cmd->add_option("--meta", comp_meta, "JSON metadata output");
    comp_flags.attach(complete_cmd);

    // targeted
    auto* targeted_cmd = app.add_subcommand("targeted", "Discover, separate and complete each component");
    std::string tgt_in, tgt_out, tgt_report, tgt_sep = "zero-fill";
    bool tgt_times = false;
    SvpFlags tgt_svp;
    CompletionFlags tgt_comp;
    targeted_cmd->add_option("--in", tgt_in, "Triplet input")->required()->check(CLI::ExistingFile);
    targeted_cmd->add_option("--out", tgt_out, "Dense CSV estimate")->required();
    targeted_cmd->add_option("--report", tgt_report, "JSON report output");
    targeted_cmd->add_option("--separation", tgt_sep, "How extracted cells appear in the remainder")
        ->check(CLI::IsMember({"zero-fill", "delete"}));
    targeted_cmd->add_flag("--record-times", tgt_times, "Include wall time per stage in the report");
    tgt_svp.attach(targeted_cmd);
    tgt_comp.attach(targeted_cmd);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run an experiment grid and write CSV rows");
    PlantFlags sw_plants;
    std::string sw_var, sw_methods = "both", sw_out, sw_sep = "zero-fill";
    std::vector<double> sw_grid;
    std::size_t sw_seeds = 1;
    bool sw_axes = false, sw_times = false;
    SvpFlags sw_svp;
    CompletionFlags sw_comp;
    sw_plants.attach(sweep);
    sweep->add_option("--var", sw_var, "Swept variable")
        ->required()
        ->check(CLI::IsMember({"density", "subrank", "subsize", "backrank", "pi"}));
    sweep->add_option("--grid", sw_grid, "Comma-separated values of the swept variable")
        ->required()
        ->delimiter(',');
    sweep->add_option("--seeds", sw_seeds, "Instances per grid value")->check(CLI::PositiveNumber);
    sweep->add_option("--methods", sw_methods, "Methods to run")
        ->check(CLI::IsMember({"plain", "targeted", "both", "discover"}));
    sweep->add_option("--out", sw_out, "CSV output")->required();
    sweep->add_option("--separation", sw_sep, "How extracted cells appear in the remainder")
        ->check(CLI::IsMember({"zero-fill", "delete"}));
    sweep->add_flag("--per-axis", sw_axes, "Add row-only and column-only F-scores");
    sweep->add_flag("--record-times", sw_times, "Fill the wall time columns");
    sw_svp.attach(sweep);
    // --rank is the background rank here; the completion rank is --completion-rank.
    sweep->add_option("--completion-rank", sw_comp.rank, "Completion rank, or 'auto' to estimate it");
    sweep->add_option("--max-rank", sw_comp.cfg.max_rank, "Upper bound for the estimated rank");
    sweep->add_option("--tol", sw_comp.cfg.tol, "Relative residual change that stops ALS");
    sweep->add_option("--max-iter", sw_comp.cfg.max_iter, "Maximum ALS sweeps");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        set_thread_count(threads);

        if (*synth) {
            const SynthInstance inst = generate(synth_plants.n, synth_plants.m, synth_plants.rank,
                                                synth_plants.specs(), seed);
            const ObservedMatrix masked =
                mask_uniform(inst.matrix, synth_plants.density, mix_seed(seed, kSynthMaskStream));
            save_csv(out_prefix + ".csv", inst.matrix);
            save_triplets(out_prefix + ".triplet", masked);
            for (std::size_t p = 0; p < inst.truth.size(); ++p) {
                save_descriptors(out_prefix + ".plant" + std::to_string(p) + ".desc", {inst.truth[p]});
            }
            out << "synth: " << inst.matrix.rows() << "x" << inst.matrix.cols() << ", "
                << plural(inst.truth.size(), "plant", "plants") << ", " << masked.size() << " observed entries\n";
        } else if (*discover) {
            const ObservedMatrix m = load_triplets(disc_in);
            const auto found = discover_all(m, disc_svp.build(seed));
            std::vector<SubmatrixDescriptor> ds;
            for (const auto& d : found) ds.push_back(d.descriptor);
            save_descriptors(disc_out, ds);
            if (!disc_report.empty()) {
                auto f = open_out(disc_report);
                f << "pi,gamma,delta_rows,delta_cols\n";
                f.precision(17);
                for (const auto& d : found) {
                    f << d.report.pi << ',' << d.report.gamma << ',' << d.report.delta_rows << ','
                      << d.report.delta_cols << '\n';
                }
            }
            if (found.empty()) {
                out << "discover: no submatrix found\n";
            } else {
                out << "discover: found " << plural(found.size(), "submatrix", "submatrices") << "\n";
            }
        } else if (*complete_cmd) {
            const ObservedMatrix m = load_triplets(comp_in);
            const CompletionOutput c = complete(m, comp_flags.build(), seed);
            save_csv(comp_out, c.estimate);
            if (!comp_meta.empty()) open_out(comp_meta) << completion_json(c).dump() << '\n';
            out << "complete: rank " << c.used_rank << ", " << c.iterations << " iterations, residual "
                << c.final_residual << "\n";
        } else if (*targeted_cmd) {
            const ObservedMatrix m = load_triplets(tgt_in);
            TargetedConfig cfg;
            cfg.svp = tgt_svp.build(seed);
            cfg.completion = tgt_comp.build();
            cfg.separation_mode = parse_separation_mode(tgt_sep);
            const TargetedResult r = targeted_complete(m, cfg, seed);
            save_csv(tgt_out, r.estimate);
            if (!tgt_report.empty()) {
                json report;
                report["descriptors"] = json::array();
                for (const auto& d : r.discoveries) report["descriptors"].push_back(descriptor_json(d));
                report["components"] = json::array();
                for (std::size_t c = 0; c + 1 < r.per_component.size(); ++c) {
                    report["components"].push_back(completion_json(r.per_component[c]));
                }
                report["remainder"] = completion_json(r.per_component.back());
                report["separation"] = separation_mode_name(cfg.separation_mode);
                if (tgt_times) {
                    report["times"] = json{{"discover_s", r.times.discover_s}, {"complete_s", r.times.complete_s}};
                }
                open_out(tgt_report) << report.dump(2) << '\n';
            }
            out << "targeted: " << plural(r.discoveries.size(), "submatrix", "submatrices") << ", remainder rank "
                << r.per_component.back().used_rank << "\n";
        } else if (*sweep) {
            SweepSpec spec;
            spec.n = sw_plants.n;
            spec.m = sw_plants.m;
            spec.background_rank = sw_plants.rank;
            spec.plants = sw_plants.specs();
            spec.density = sw_plants.density;
            spec.var = parse_swept_var(sw_var);
            spec.grid = sw_grid;
            spec.seeds = sw_seeds;
            spec.methods = parse_sweep_methods(sw_methods);
            spec.targeted.svp = sw_svp.build(seed);
            spec.targeted.completion = sw_comp.build();
            spec.targeted.separation_mode = parse_separation_mode(sw_sep);
            spec.per_axis = sw_axes;
            spec.record_times = sw_times;
            const auto rows = run_sweep(spec, seed);
            {
                auto f = open_out(sw_out);
                write_sweep_csv(f, rows, sw_axes);
            }
            const auto failed = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.error.empty(); });
            out << "sweep: " << rows.size() << " rows, " << failed << " failed\n";
            for (const auto& r : rows) {
                if (!r.error.empty()) err << "sweep: " << r.method << " at " << r.value << " seed " << r.seed << ": " << r.error << "\n";
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace targeted::cli
