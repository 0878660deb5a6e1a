#include "targeted/evaluation.hpp"

#include "targeted/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

namespace targeted {

namespace {

constexpr std::uint64_t kMaskStream = 7;

std::size_t overlap(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t count = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

double harmonic(std::size_t shared, std::size_t truth_size, std::size_t found_size) {
    if (shared == 0) return 0.0;
    return 2.0 * static_cast<double>(shared) / static_cast<double>(truth_size + found_size);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void fill_relerr(SweepRow& row, const SynthInstance& inst, const DenseMatrix& estimate) {
    row.relerr_m = rel_err(inst.matrix, estimate);
    for (std::size_t p = 0; p < inst.truth.size(); ++p) {
        row.relerr_s[p] = rel_err_over(inst.matrix, estimate, inst.truth[p]);
    }
}

void fill_fscores(SweepRow& row, const SynthInstance& inst, const std::vector<Discovery>& found) {
    for (std::size_t p = 0; p < inst.truth.size(); ++p) {
        double best = 0.0;
        AxisFScores best_axes;
        for (const Discovery& d : found) {
            const double f = f_score(inst.truth[p], d.descriptor);
            if (f > best) {
                best = f;
                best_axes = f_score_per_axis(inst.truth[p], d.descriptor);
            }
        }
        row.fscore_s[p] = best;
        row.fscore_axes[p] = best_axes;
    }
}

void put(std::ostream& out, const std::optional<double>& v) {
    if (!v) return;
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *v);
    out.write(buf.data(), res.ptr - buf.data());
}

}  // namespace

double rel_err(const DenseMatrix& truth, const DenseMatrix& estimate) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "truth and estimate differ in shape");
    }
    const double denom = truth.values().squaredNorm();
    if (denom == 0.0) throw Error(ErrorKind::ZeroTruth, "truth has zero Frobenius norm");
    return (truth.values() - estimate.values()).squaredNorm() / denom;
}

double rel_err_over(const DenseMatrix& truth, const DenseMatrix& estimate, const SubmatrixDescriptor& d) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "truth and estimate differ in shape");
    }
    d.validate(truth.rows(), truth.cols());
    return rel_err(truth.select(d.rows, d.cols), estimate.select(d.rows, d.cols));
}

double f_score(const SubmatrixDescriptor& truth, const SubmatrixDescriptor& found) {
    if (truth.cell_count() == 0 || found.cell_count() == 0) {
        throw Error(ErrorKind::EmptyDescriptor, "F-score needs non-empty descriptors");
    }
    const std::size_t shared = overlap(truth.rows, found.rows) * overlap(truth.cols, found.cols);
    return harmonic(shared, truth.cell_count(), found.cell_count());
}

AxisFScores f_score_per_axis(const SubmatrixDescriptor& truth, const SubmatrixDescriptor& found) {
    return {harmonic(overlap(truth.rows, found.rows), truth.rows.size(), found.rows.size()),
            harmonic(overlap(truth.cols, found.cols), truth.cols.size(), found.cols.size())};
}

std::pair<double, double> rank1_lambda_oracle(double sigma, double tau, double gamma) {
    if (sigma < 0.0 || tau < 0.0 || gamma < 0.0 || gamma > 1.0) {
        throw Error(ErrorKind::InvalidArgument, "need sigma, tau >= 0 and gamma in [0, 1]");
    }
    const double s2 = sigma * sigma;
    const double t2 = tau * tau;
    const double root = std::sqrt((s2 - t2) * (s2 - t2) + 4.0 * s2 * t2 * gamma * gamma);
    const double plus = 0.5 * (s2 + t2 + root);
    // The product form avoids cancellation in the smaller root.
    const double minus = plus > 0.0 ? s2 * t2 * (1.0 - gamma * gamma) / plus : 0.0;
    return {plus, minus};
}

SweptVar parse_swept_var(std::string_view name) {
    if (name == "density") return SweptVar::Density;
    if (name == "subrank") return SweptVar::SubRank;
    if (name == "subsize") return SweptVar::SubSize;
    if (name == "backrank") return SweptVar::BackRank;
    if (name == "pi") return SweptVar::Pi;
    throw Error(ErrorKind::InvalidArgument, "unknown swept variable '" + std::string(name) + "'");
}

std::string_view swept_var_name(SweptVar v) noexcept {
    switch (v) {
        case SweptVar::Density: return "density";
        case SweptVar::SubRank: return "subrank";
        case SweptVar::SubSize: return "subsize";
        case SweptVar::BackRank: return "backrank";
        case SweptVar::Pi: return "pi";
    }
    return "density";
}

SweepMethods parse_sweep_methods(std::string_view name) {
    if (name == "plain") return SweepMethods::Plain;
    if (name == "targeted") return SweepMethods::Targeted;
    if (name == "both") return SweepMethods::Both;
    if (name == "discover") return SweepMethods::Discover;
    throw Error(ErrorKind::InvalidArgument, "unknown methods '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
    if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grid is empty");
    if (seeds < 1) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one seed");
    if (plants.size() > kSweepPlantColumns) {
        throw Error(ErrorKind::InvalidArgument, "sweep CSV reports at most 3 planted submatrices");
    }
}

SynthInstance sweep_instance(const SweepSpec& spec, double value, std::uint64_t instance_seed) {
    std::vector<PlantSpec> plants = spec.plants;
    std::size_t r = spec.background_rank;
    const auto as_count = [&](double v) { return static_cast<std::size_t>(std::llround(v)); };
    for (PlantSpec& p : plants) {
        switch (spec.var) {
            case SweptVar::SubRank: p.rank = as_count(value); break;
            case SweptVar::SubSize: p.rows = p.cols = as_count(value); break;
            case SweptVar::Pi: p.pi_target = value; break;
            default: break;
        }
    }
    if (spec.var == SweptVar::BackRank) r = as_count(value);
    return generate(spec.n, spec.m, r, plants, instance_seed);
}

ObservedMatrix sweep_mask(const SweepSpec& spec, const SynthInstance& inst, double value,
                          std::uint64_t instance_seed) {
    const double density = spec.var == SweptVar::Density ? value : spec.density;
    return mask_uniform(inst.matrix, density, mix_seed(instance_seed, kMaskStream));
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<std::string> methods;
    switch (spec.methods) {
        case SweepMethods::Plain: methods = {"plain"}; break;
        case SweepMethods::Targeted: methods = {"targeted"}; break;
        case SweepMethods::Both: methods = {"plain", "targeted"}; break;
        case SweepMethods::Discover: methods = {"discover"}; break;
    }
    const std::size_t tasks = spec.grid.size() * spec.seeds;
    std::vector<std::vector<SweepRow>> per_task(tasks);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(tasks); ++t) {
        const auto task = static_cast<std::size_t>(t);
        const double value = spec.grid[task / spec.seeds];
        const std::size_t s = task % spec.seeds;
        const std::uint64_t instance_seed = seed + s;
        std::optional<SynthInstance> inst;
        std::optional<ObservedMatrix> observed;
        std::string setup_error;
        try {
            inst = sweep_instance(spec, value, instance_seed);
            observed = sweep_mask(spec, *inst, value, instance_seed);
        } catch (const std::exception& e) {
            setup_error = e.what();
        }
        for (const std::string& method : methods) {
            SweepRow row;
            row.var = spec.var;
            row.value = value;
            row.seed = s;
            row.method = method;
            const std::size_t plant_count = inst ? inst->truth.size() : spec.plants.size();
            row.relerr_s.resize(plant_count);
            row.fscore_s.resize(plant_count);
            row.fscore_axes.resize(plant_count);
            if (!setup_error.empty()) {
                row.error = setup_error;
                per_task[task].push_back(std::move(row));
                continue;
            }
            try {
                if (method == "plain") {
                    const auto start = std::chrono::steady_clock::now();
                    const CompletionOutput out = complete(*observed, spec.targeted.completion, instance_seed);
                    if (spec.record_times) row.time_complete_s = seconds_since(start);
                    fill_relerr(row, *inst, out.estimate);
                } else if (method == "targeted") {
                    TargetedConfig cfg = spec.targeted;
                    cfg.svp.seed = instance_seed;
                    const TargetedResult out = targeted_complete(*observed, cfg, instance_seed);
                    if (spec.record_times) {
                        row.time_discover_s = out.times.discover_s;
                        row.time_complete_s = out.times.complete_s;
                    }
                    fill_relerr(row, *inst, out.estimate);
                    fill_fscores(row, *inst, out.discoveries);
                } else {
                    SvpConfig cfg = spec.targeted.svp;
                    cfg.seed = instance_seed;
                    const auto start = std::chrono::steady_clock::now();
                    const auto found = discover_all(*observed, cfg);
                    if (spec.record_times) row.time_discover_s = seconds_since(start);
                    fill_fscores(row, *inst, found);
                }
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            per_task[task].push_back(std::move(row));
        }
    }

    std::vector<SweepRow> rows;
    for (auto& group : per_task) {
        for (auto& row : group) rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool per_axis) {
    out << "swept_var,value,seed,method,relerr_M";
    for (std::size_t p = 1; p <= kSweepPlantColumns; ++p) out << ",relerr_S" << p;
    for (std::size_t p = 1; p <= kSweepPlantColumns; ++p) out << ",fscore_S" << p;
    out << ",time_discover_s,time_complete_s";
    if (per_axis) {
        for (std::size_t p = 1; p <= kSweepPlantColumns; ++p) out << ",fscore_rows_S" << p << ",fscore_cols_S" << p;
    }
    out << '\n';
    for (const SweepRow& row : rows) {
        out << swept_var_name(row.var) << ',';
        put(out, row.value);
        out << ',' << row.seed << ',' << row.method << ',';
        put(out, row.relerr_m);
        for (std::size_t p = 0; p < kSweepPlantColumns; ++p) {
            out << ',';
            if (p < row.relerr_s.size()) put(out, row.relerr_s[p]);
        }
        for (std::size_t p = 0; p < kSweepPlantColumns; ++p) {
            out << ',';
            if (p < row.fscore_s.size()) put(out, row.fscore_s[p]);
        }
        out << ',';
        put(out, row.time_discover_s);
        out << ',';
        put(out, row.time_complete_s);
        if (per_axis) {
            for (std::size_t p = 0; p < kSweepPlantColumns; ++p) {
                std::optional<double> r, c;
                if (p < row.fscore_axes.size() && row.fscore_axes[p]) {
                    r = row.fscore_axes[p]->rows;
                    c = row.fscore_axes[p]->cols;
                }
                out << ',';
                put(out, r);
                out << ',';
                put(out, c);
            }
        }
        out << '\n';
    }
}

}  // namespace targeted
