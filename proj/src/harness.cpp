#include "robust_thresh/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/errors.hpp"
#include "robust_thresh/estimators.hpp"
#include "robust_thresh/io.hpp"
#include "robust_thresh/rng.hpp"
#include "robust_thresh/text.hpp"

namespace rthresh {

using nlohmann::json;

const char* const kSweepCsvHeader =
    "axis_value,median_error,iqr_lo,iqr_hi,mean_iters,inlier_precision,ols_error,oracle_error";

namespace {

SweepAxis parse_axis(const std::string& s) {
    if (s == "eps") return SweepAxis::Eps;
    if (s == "nu") return SweepAxis::Nu;
    if (s == "kappa") return SweepAxis::Kappa;
    if (s == "n") return SweepAxis::N;
    throw ConfigError("unknown sweep axis: " + s);
}

SweepAlgo parse_algo(const std::string& s) {
    if (s == "auto") return SweepAlgo::Auto;
    if (s == "linear_it") return SweepAlgo::LinearIt;
    if (s == "neuron_it") return SweepAlgo::NeuronIt;
    if (s == "torrent_fc") return SweepAlgo::TorrentFc;
    throw ConfigError("unknown sweep algo: " + s);
}

std::string algo_name(SweepAlgo a) {
    switch (a) {
        case SweepAlgo::Auto: return "auto";
        case SweepAlgo::LinearIt: return "linear_it";
        case SweepAlgo::NeuronIt: return "neuron_it";
        case SweepAlgo::TorrentFc: return "torrent_fc";
    }
    return "auto";
}

// Type-7 quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::nan("");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ScalingModel model_for(const SweepSpec& spec) {
    switch (spec.axis) {
        case SweepAxis::Eps:
            return spec.activation.kind == ActivationKind::Linear ? ScalingModel::EpsLog : ScalingModel::SqrtEpsLog;
        case SweepAxis::Nu:
        case SweepAxis::Kappa: return ScalingModel::Proportional;
        case SweepAxis::N: return ScalingModel::InvSqrt;
    }
    return ScalingModel::EpsLog;
}

struct Cell {
    GeneratorSpec gen;
    AdversarySpec adv;
    FitConfig fit;
};

Cell cell_for(const SweepSpec& spec, std::size_t axis_index, std::size_t trial) {
    Cell c{spec.base_generator, spec.base_adversary, spec.base_fit};
    const double v = spec.values[axis_index];
    switch (spec.axis) {
        case SweepAxis::Eps: c.adv.eps_true = v; break;
        case SweepAxis::Nu: c.gen.nu = v; break;
        case SweepAxis::Kappa: c.gen.sigma = SigmaDiagGeometric{v}; break;
        case SweepAxis::N: c.gen.n = static_cast<std::size_t>(v); break;
    }
    const std::uint64_t base = derive_seed(spec.seed, axis_index, trial);
    c.gen.seed = derive_seed(base, 1);
    c.adv.seed = derive_seed(base, 2);
    c.fit.seed = derive_seed(base, 3);
    if (spec.eps_alg_multiplier) c.fit.eps_alg = *spec.eps_alg_multiplier * c.adv.eps_true;
    return c;
}

FitReport fit_with(SweepAlgo algo, const Dataset& ds, const ActivationSpec& act, const FitConfig& cfg) {
    switch (algo) {
        case SweepAlgo::LinearIt: return fit_linear_it(ds, cfg);
        case SweepAlgo::NeuronIt: return fit_neuron_it(ds, act, cfg);
        case SweepAlgo::TorrentFc: return fit_torrent_fc(ds, cfg);
        case SweepAlgo::Auto: break;
    }
    return act.kind == ActivationKind::Linear ? fit_linear_it(ds, cfg) : fit_neuron_it(ds, act, cfg);
}

}  // namespace

std::string axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Eps: return "eps";
        case SweepAxis::Nu: return "nu";
        case SweepAxis::Kappa: return "kappa";
        case SweepAxis::N: return "n";
    }
    return "eps";
}

std::string scaling_name(ScalingModel model) {
    switch (model) {
        case ScalingModel::EpsLog: return "eps_log";
        case ScalingModel::SqrtEpsLog: return "sqrt_eps_log";
        case ScalingModel::Proportional: return "proportional";
        case ScalingModel::InvSqrt: return "inv_sqrt";
    }
    return "eps_log";
}

void validate_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw ConfigError("sweep needs at least one axis value");
    if (spec.trials_per_point == 0) throw ConfigError("trials_per_point must be >= 1");
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        if (!std::isfinite(spec.values[i])) throw ConfigError("sweep values must be finite");
        if (i > 0 && spec.values[i] < spec.values[i - 1]) throw ConfigError("sweep values must be sorted ascending");
    }
    const double lo = spec.values.front();
    switch (spec.axis) {
        case SweepAxis::Eps:
            if (lo < 0.0 || spec.values.back() >= 0.5) throw ConfigError("eps values must lie in [0, 0.5)");
            break;
        case SweepAxis::Nu:
            if (lo < 0.0) throw ConfigError("nu values must be nonnegative");
            break;
        case SweepAxis::Kappa:
            if (lo < 1.0) throw ConfigError("kappa values must be >= 1");
            break;
        case SweepAxis::N:
            for (double v : spec.values)
                if (v < 1.0 || v != std::floor(v)) throw ConfigError("n values must be positive integers");
            break;
    }
    if (spec.eps_alg_multiplier && !(*spec.eps_alg_multiplier >= 0.0))
        throw ConfigError("eps_alg_multiplier must be nonnegative");
    validate_activation(spec.activation);
}

SweepSpec sweep_from_json(const json& j) {
    SweepSpec s;
    try {
        const json g = j.value("generator", json::object());
        s.base_generator.d = g.value("d", s.base_generator.d);
        s.base_generator.n = g.value("n", s.base_generator.n);
        s.base_generator.k = g.value("k", s.base_generator.k);
        s.base_generator.sigma = parse_sigma(g.value("sigma", std::string("identity")));
        s.base_generator.law = parse_law(g.value("law", std::string("gaussian")));
        s.base_generator.nu = g.value("nu", 0.0);
        s.base_generator.w_true = RandomUnitScaled{g.value("w_norm", 1.0)};
        if (g.contains("clip") && g["clip"].is_number()) s.base_generator.clip = g["clip"].get<double>();

        s.base_adversary.kind = parse_adversary(j.value("adversary", std::string("none")));
        s.base_adversary.eps_true = j.value("eps", 0.0);
        s.base_fit = fit_config_from_json(j.value("fit", json::object()));
        s.activation = parse_activation(j.value("activation", std::string("linear")));
        s.algo = parse_algo(j.value("algo", std::string("auto")));
        s.axis = parse_axis(j.at("axis").get<std::string>());
        s.values = j.at("values").get<std::vector<double>>();
        s.trials_per_point = j.value("trials", std::size_t{1});
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("eps_alg_multiplier")) {
            if (j["eps_alg_multiplier"].is_null())
                s.eps_alg_multiplier.reset();
            else
                s.eps_alg_multiplier = j["eps_alg_multiplier"].get<double>();
        }
        s.keep_traces = j.value("keep_traces", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad sweep config: ") + e.what());
    }
    validate_sweep(s);
    return s;
}

json to_json(const SweepSpec& s) {
    const auto& g = s.base_generator;
    json gen = {{"d", g.d}, {"n", g.n}, {"k", g.k}, {"sigma", describe_sigma(g.sigma)},
                {"law", format_law(g.law)}, {"nu", g.nu},
                {"clip", g.clip ? json(*g.clip) : json(nullptr)}};
    if (const auto* r = std::get_if<RandomUnitScaled>(&g.w_true)) gen["w_norm"] = r->R;
    return {{"generator", gen},
            {"adversary", format_adversary(s.base_adversary.kind)},
            {"eps", s.base_adversary.eps_true},
            {"fit", to_json(s.base_fit)},
            {"activation", format_activation(s.activation)},
            {"algo", algo_name(s.algo)},
            {"axis", axis_name(s.axis)},
            {"values", s.values},
            {"trials", s.trials_per_point},
            {"seed", s.seed},
            {"eps_alg_multiplier", s.eps_alg_multiplier ? json(*s.eps_alg_multiplier) : json(nullptr)},
            {"keep_traces", s.keep_traces}};
}

double scaling_function(ScalingModel model, double x) {
    switch (model) {
        case ScalingModel::EpsLog: return x > 0.0 && x < 1.0 ? x * std::log(1.0 / x) : 0.0;
        case ScalingModel::SqrtEpsLog: return x > 0.0 && x < 1.0 ? std::sqrt(x * std::log(1.0 / x)) : 0.0;
        case ScalingModel::Proportional: return x;
        case ScalingModel::InvSqrt: return x > 0.0 ? 1.0 / std::sqrt(x) : 0.0;
    }
    return 0.0;
}

FittedScaling fit_scaling(ScalingModel model, const std::vector<double>& x, const std::vector<double>& err) {
    FittedScaling out;
    out.model = model;
    std::vector<double> log_e, log_ratio;
    for (std::size_t i = 0; i < x.size() && i < err.size(); ++i) {
        const double f = scaling_function(model, x[i]);
        if (f > 0.0 && err[i] > 0.0 && std::isfinite(err[i])) {
            log_e.push_back(std::log(err[i]));
            log_ratio.push_back(std::log(err[i]) - std::log(f));
        }
    }
    if (log_e.empty()) return out;
    const double n = static_cast<double>(log_e.size());
    const double log_c = std::accumulate(log_ratio.begin(), log_ratio.end(), 0.0) / n;
    out.constant = std::exp(log_c);
    const auto [mn, mx] = std::minmax_element(log_ratio.begin(), log_ratio.end());
    out.flatness = std::exp(*mx - *mn);
    const double mean_e = std::accumulate(log_e.begin(), log_e.end(), 0.0) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < log_e.size(); ++i) {
        ss_res += (log_ratio[i] - log_c) * (log_ratio[i] - log_c);
        ss_tot += (log_e[i] - mean_e) * (log_e[i] - mean_e);
    }
    if (ss_tot <= 0.0)
        out.r_squared = ss_res <= 0.0 ? 1.0 : 0.0;
    else
        out.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    return out;
}

TrialOutcome run_trial(const SweepSpec& spec, std::size_t axis_index, std::size_t trial, json* trace_out) {
    const Cell c = cell_for(spec, axis_index, trial);
    const Dataset clean = generate_clean(c.gen, spec.activation);
    const Dataset ds = corrupt(clean, c.adv);
    const FitReport rep = fit_with(spec.algo, ds, spec.activation, c.fit);

    TrialOutcome t;
    t.n = ds.size();
    t.eps_true = c.adv.eps_true;
    t.error = parameter_error(ds, rep.estimate).value_or(std::nan(""));
    t.iterations = rep.iterations;
    t.converged = rep.converged;
    t.retained = rep.final_retained.size();
    for (std::size_t i : rep.final_retained) t.retained_inliers += (*ds.inlier_mask)[i] ? 1 : 0;

    std::vector<std::size_t> inliers;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if ((*ds.inlier_mask)[i]) inliers.push_back(i);
    if (spec.activation.kind == ActivationKind::Linear) {
        t.ols_error = *parameter_error(ds, ols_full_solve(ds, AllSamples{}));
        t.oracle_error = *parameter_error(ds, ols_full_solve(ds, TrueInliers{}));
    } else {
        FitConfig plain = c.fit;
        plain.eps_alg = 0.0;
        t.ols_error = *parameter_error(ds, fit_neuron_it(ds, spec.activation, plain).estimate);
        const Dataset clean_part = subset_of(ds, inliers);
        t.oracle_error = *parameter_error(clean_part, fit_neuron_it(clean_part, spec.activation, plain).estimate);
    }
    if (trace_out) {
        *trace_out = to_json(rep);
        (*trace_out)["axis_value"] = spec.values[axis_index];
        (*trace_out)["trial"] = trial;
    }
    return t;
}

SweepResult run_sweep(const SweepSpec& spec) {
    validate_sweep(spec);
    const std::size_t points = spec.values.size(), trials = spec.trials_per_point;
    SweepResult res;
    res.spec = spec;
    res.trials.assign(points, std::vector<TrialOutcome>(trials));
    if (spec.keep_traces) res.traces.assign(points, std::vector<json>(trials));
    std::vector<std::exception_ptr> errors(points * trials);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t cell = 0; cell < static_cast<std::ptrdiff_t>(points * trials); ++cell) {
        const std::size_t a = static_cast<std::size_t>(cell) / trials, t = static_cast<std::size_t>(cell) % trials;
        try {
            res.trials[a][t] = run_trial(spec, a, t, spec.keep_traces ? &res.traces[a][t] : nullptr);
        } catch (const DivergenceError& e) {
            errors[static_cast<std::size_t>(cell)] = std::make_exception_ptr(DivergenceError(
                std::string(e.what()) + " at " + axis_name(spec.axis) + " = " + shortest(spec.values[a]) +
                    ", trial " + std::to_string(t),
                e.iteration()));
        } catch (...) {
            errors[static_cast<std::size_t>(cell)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<double> xs, medians;
    for (std::size_t a = 0; a < points; ++a) {
        const auto& cell = res.trials[a];
        std::vector<double> err, ols, oracle;
        double iters = 0.0, precision = 0.0;
        for (const auto& t : cell) {
            err.push_back(t.error);
            ols.push_back(t.ols_error);
            oracle.push_back(t.oracle_error);
            iters += static_cast<double>(t.iterations);
            precision += t.retained ? static_cast<double>(t.retained_inliers) / static_cast<double>(t.retained) : 0.0;
        }
        std::sort(err.begin(), err.end());
        std::sort(ols.begin(), ols.end());
        std::sort(oracle.begin(), oracle.end());
        SweepRow row;
        row.axis_value = spec.values[a];
        row.median_error = quantile(err, 0.5);
        row.iqr_lo = quantile(err, 0.25);
        row.iqr_hi = quantile(err, 0.75);
        row.mean_iterations = iters / static_cast<double>(trials);
        row.inlier_precision = precision / static_cast<double>(trials);
        row.baseline_ols_error = quantile(ols, 0.5);
        row.oracle_error = quantile(oracle, 0.5);
        res.rows.push_back(row);
        xs.push_back(row.axis_value);
        medians.push_back(row.median_error);
    }
    res.fitted_scaling = fit_scaling(model_for(spec), xs, medians);
    return res;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    char buf[32];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
        out += sep;
    };
    for (const auto& r : rows) {
        put(r.axis_value, ',');
        put(r.median_error, ',');
        put(r.iqr_lo, ',');
        put(r.iqr_hi, ',');
        put(r.mean_iterations, ',');
        put(r.inlier_precision, ',');
        put(r.baseline_ols_error, ',');
        put(r.oracle_error, '\n');
    }
    return out;
}

json summary_json(const SweepResult& res) {
    json rows = json::array();
    for (const auto& r : res.rows)
        rows.push_back({{"axis_value", r.axis_value},
                        {"median_error", r.median_error},
                        {"iqr_error", {r.iqr_lo, r.iqr_hi}},
                        {"mean_iterations", r.mean_iterations},
                        {"inlier_precision", r.inlier_precision},
                        {"baseline_ols_error", r.baseline_ols_error},
                        {"oracle_error", r.oracle_error}});
    std::size_t converged = 0, total = 0;
    for (const auto& cell : res.trials)
        for (const auto& t : cell) {
            converged += t.converged ? 1 : 0;
            ++total;
        }
    return {{"spec", to_json(res.spec)},
            {"axis", axis_name(res.spec.axis)},
            {"rows", rows},
            {"fitted_scaling",
             {{"model", scaling_name(res.fitted_scaling.model)},
              {"constant", res.fitted_scaling.constant},
              {"r_squared", res.fitted_scaling.r_squared},
              {"flatness", res.fitted_scaling.flatness}}},
            {"trials_converged", converged},
            {"trials_total", total}};
}

void emit_report(const SweepResult& res, const std::filesystem::path& dir) {
    write_text(dir / "sweep.csv", sweep_csv(res.rows));
    write_text(dir / "summary.json", summary_json(res).dump(2) + "\n");
    for (std::size_t a = 0; a < res.traces.size(); ++a)
        for (std::size_t t = 0; t < res.traces[a].size(); ++t)
            write_text(dir / ("trace_" + std::to_string(a) + "_" + std::to_string(t) + ".json"),
                       res.traces[a][t].dump(2) + "\n");
}

}  // namespace rthresh
