#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robust_thresh/synth.hpp"
#include "robust_thresh/types.hpp"

namespace rthresh {

enum class SweepAxis { Eps, Nu, Kappa, N };
enum class SweepAlgo { Auto, LinearIt, NeuronIt, TorrentFc };
// Multiplicative laws error = C * f(axis).
enum class ScalingModel { EpsLog, SqrtEpsLog, Proportional, InvSqrt };

struct SweepSpec {
    GeneratorSpec base_generator;
    AdversarySpec base_adversary;
    FitConfig base_fit;
    ActivationSpec activation = ActivationSpec::linear();
    SweepAlgo algo = SweepAlgo::Auto;
    SweepAxis axis = SweepAxis::Eps;
    std::vector<double> values;
    std::size_t trials_per_point = 1;
    std::uint64_t seed = 0;
    // eps_alg = multiplier * eps_true; nullopt keeps base_fit.eps_alg.
    std::optional<double> eps_alg_multiplier = 1.0;
    bool keep_traces = false;
};

void validate_sweep(const SweepSpec& spec);
SweepSpec sweep_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepSpec& spec);

std::string axis_name(SweepAxis axis);
std::string scaling_name(ScalingModel model);

struct TrialOutcome {
    double error = 0.0;
    double ols_error = 0.0;
    double oracle_error = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t retained = 0;
    std::size_t retained_inliers = 0;
    std::size_t n = 0;
    double eps_true = 0.0;
};

struct SweepRow {
    double axis_value = 0.0;
    double median_error = 0.0;
    double iqr_lo = 0.0;
    double iqr_hi = 0.0;
    double mean_iterations = 0.0;
    double inlier_precision = 0.0;
    double baseline_ols_error = 0.0;
    double oracle_error = 0.0;
};

struct FittedScaling {
    ScalingModel model = ScalingModel::EpsLog;
    double constant = 0.0;
    double r_squared = 0.0;
    // max / min of error / f over usable rows.
    double flatness = 0.0;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows;
    FittedScaling fitted_scaling;
    // trials[axis_index][trial]
    std::vector<std::vector<TrialOutcome>> trials;
    std::vector<std::vector<nlohmann::json>> traces;
};

double scaling_function(ScalingModel model, double x);
FittedScaling fit_scaling(ScalingModel model, const std::vector<double>& x, const std::vector<double>& err);

// Runs a single (axis_index, trial) cell; exposed for tests.
TrialOutcome run_trial(const SweepSpec& spec, std::size_t axis_index, std::size_t trial,
                       nlohmann::json* trace_out = nullptr);

SweepResult run_sweep(const SweepSpec& spec);

extern const char* const kSweepCsvHeader;
std::string sweep_csv(const std::vector<SweepRow>& rows);
nlohmann::json summary_json(const SweepResult& res);

// Writes sweep.csv, summary.json and, when traces were kept, trace_{axis}_{trial}.json.
void emit_report(const SweepResult& res, const std::filesystem::path& dir);

}  // namespace rthresh
