#pragma once

#include "targeted/linalg.hpp"
#include "targeted/observed.hpp"
#include "targeted/pipeline.hpp"
#include "targeted/synthgen.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace targeted {

/// ||M - M_hat||_F^2 / ||M||_F^2.
double rel_err(const DenseMatrix& truth, const DenseMatrix& estimate);

/// rel_err restricted to the cells of `d`.
double rel_err_over(const DenseMatrix& truth, const DenseMatrix& estimate, const SubmatrixDescriptor& d);

/// Harmonic mean of precision and recall on the cell sets R_s x C_s.
double f_score(const SubmatrixDescriptor& truth, const SubmatrixDescriptor& found);

struct AxisFScores {
    double rows = 0.0;
    double cols = 0.0;
};
AxisFScores f_score_per_axis(const SubmatrixDescriptor& truth, const SubmatrixDescriptor& found);

/// Both roots of lambda^2 - (s^2 + t^2) lambda + s^2 t^2 (1 - g^2): the squared
/// singular values of two stacked rank-one blocks with norms sigma and tau whose
/// right vectors meet at |cos| = gamma.
std::pair<double, double> rank1_lambda_oracle(double sigma, double tau, double gamma);

enum class SweptVar { Density, SubRank, SubSize, BackRank, Pi };
enum class SweepMethods { Plain, Targeted, Both, Discover };

SweptVar parse_swept_var(std::string_view name);
std::string_view swept_var_name(SweptVar v) noexcept;
SweepMethods parse_sweep_methods(std::string_view name);

struct SweepSpec {
    std::size_t n = 400;
    std::size_t m = 400;
    std::size_t background_rank = 30;
    std::vector<PlantSpec> plants;
    double density = 1.0;  // used unless density itself is swept
    SweptVar var = SweptVar::Density;
    std::vector<double> grid;
    std::size_t seeds = 1;
    SweepMethods methods = SweepMethods::Both;
    TargetedConfig targeted;  // completion settings are shared with the plain method
    bool per_axis = false;
    bool record_times = false;

    void validate() const;
};

inline constexpr std::size_t kSweepPlantColumns = 3;

struct SweepRow {
    SweptVar var = SweptVar::Density;
    double value = 0.0;
    std::size_t seed = 0;  // seed index within the grid point
    std::string method;    // "plain", "targeted" or "discover"
    std::optional<double> relerr_m;
    std::vector<std::optional<double>> relerr_s;  // per planted submatrix
    std::vector<std::optional<double>> fscore_s;  // best match among discovered descriptors
    std::vector<std::optional<AxisFScores>> fscore_axes;
    std::optional<double> time_discover_s;
    std::optional<double> time_complete_s;
    std::string error;  // empty on success
};

/// Instance for grid value `value` and seed index `s`; the instance seed is
/// seed + s and the mask uses a stream derived from it.
SynthInstance sweep_instance(const SweepSpec& spec, double value, std::uint64_t instance_seed);
ObservedMatrix sweep_mask(const SweepSpec& spec, const SynthInstance& inst, double value,
                          std::uint64_t instance_seed);

/// Runs every (grid value, seed, method) combination; failures are recorded
/// in the row instead of aborting. Rows come back ordered by point, seed, method.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::uint64_t seed);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool per_axis);

}  // namespace targeted
