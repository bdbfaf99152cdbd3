#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "robust_thresh/activations.hpp"
#include "robust_thresh/errors.hpp"
#include "robust_thresh/estimators.hpp"
#include "robust_thresh/harness.hpp"
#include "robust_thresh/io.hpp"
#include "robust_thresh/lab.hpp"
#include "robust_thresh/rng.hpp"
#include "robust_thresh/synth.hpp"
#include "robust_thresh/text.hpp"

using namespace rthresh;

namespace {

struct GenArgs {
    std::string out;
    std::size_t d = 10, n = 1000, k = 1;
    double eps = 0.0, nu = 0.0, w_norm = 1.0;
    std::string adversary = "none", sigma = "identity", law = "gaussian", activation = "linear";
    std::uint64_t seed = 0;
    std::optional<double> clip;
};

struct FitArgs {
    std::string data, out, algo = "linear_it", activation = "linear", eta = "auto", max_iters = "auto";
    std::string init = "auto", radius_ref = "ols";
    double eps_alg = 0.0;
    std::size_t restarts = 0;
    std::uint64_t seed = 0;
};

struct VerifyArgs {
    std::string lemma, params, out;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
};

struct SweepArgs {
    std::string config, out_dir;
    bool keep_traces = false;
};

int run_gen(const GenArgs& a) {
    GeneratorSpec g;
    g.d = a.d;
    g.n = a.n;
    g.k = a.k;
    g.sigma = parse_sigma(a.sigma);
    g.law = parse_law(a.law);
    g.nu = a.nu;
    g.w_true = RandomUnitScaled{a.w_norm};
    g.seed = a.seed;
    g.clip = a.clip;
    const ActivationSpec act = parse_activation(a.activation);
    const Dataset clean = generate_clean(g, act);
    const Dataset ds = corrupt(clean, {parse_adversary(a.adversary), a.eps, derive_seed(a.seed, 0xad)});
    write_dataset(ds, a.out);
    std::cout << "wrote " << ds.size() << " samples (" << corruption_count(a.eps, ds.size()) << " corrupted) to "
              << a.out << "\n";
    return 0;
}

int run_fit(const FitArgs& a) {
    const Dataset ds = read_dataset(a.data);
    const ActivationSpec act = parse_activation(a.activation);
    FitConfig cfg;
    cfg.eps_alg = a.eps_alg;
    if (a.eta != "auto") cfg.eta = parse_double(a.eta, "eta");
    if (a.max_iters != "auto") {
        const double t = parse_double(a.max_iters, "max-iters");
        if (!(t >= 1.0) || t != std::floor(t)) throw ConfigError("max-iters must be a positive integer or auto");
        cfg.max_iters = static_cast<std::size_t>(t);
    }
    cfg.restarts = a.restarts;
    cfg.seed = a.seed;
    cfg.radius_ref = a.radius_ref == "true_norm" ? RadiusRef::TrueNorm : RadiusRef::OlsPlugIn;
    if (a.radius_ref != "true_norm" && a.radius_ref != "ols") throw ConfigError("radius-ref must be ols or true_norm");
    const bool random_init = a.init == "random_ball" || (a.init == "auto" && act.kind == ActivationKind::Relu);
    if (a.init != "auto" && a.init != "zero" && a.init != "random_ball")
        throw ConfigError("init must be auto, zero or random_ball");
    if (random_init) cfg.init = RandomBallInit{};

    FitReport rep;
    if (a.algo == "linear_it")
        rep = fit_linear_it(ds, cfg);
    else if (a.algo == "neuron_it")
        rep = fit_neuron_it(ds, act, cfg);
    else if (a.algo == "torrent_fc")
        rep = fit_torrent_fc(ds, cfg);
    else if (a.algo == "ols")
        rep = fit_ols(ds, cfg);
    else
        throw ConfigError("unknown algo: " + a.algo);

    Json j = to_json(rep);
    if (a.algo == "linear_it" || a.algo == "neuron_it") j["plan"] = to_json(plan_steps(ds, cfg, act));
    if (const auto err = parameter_error(ds, rep.estimate)) j["param_error"] = *err;
    write_text(a.out, j.dump(2) + "\n");
    std::cout << rep.algorithm << ": " << rep.iterations << " iterations, converged=" << (rep.converged ? "yes" : "no");
    if (const auto err = parameter_error(ds, rep.estimate)) std::cout << ", error=" << shortest(*err);
    std::cout << "\n";
    return 0;
}

// "n=10000,eps=0.1" -> map
std::map<std::string, double> parse_params(const std::string& text) {
    std::map<std::string, double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, end - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("params entries must look like key=value: " + item);
        out[item.substr(0, eq)] = parse_double(item.substr(eq + 1), item.substr(0, eq));
        pos = end + 1;
    }
    return out;
}

int run_verify(const VerifyArgs& a) {
    const auto p = parse_params(a.params);
    auto get = [&](const char* key, double def) {
        const auto it = p.find(key);
        return it == p.end() ? def : it->second;
    };
    auto count = [&](const char* key, double def) {
        const double v = get(key, def);
        if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(std::string(key) + " must be a nonnegative integer");
        return static_cast<std::size_t>(v);
    };

    std::vector<lab::LabReport> reports;
    if (a.lemma == "chi2_subset") {
        reports = lab::worst_subset_noise_energy(count("n", 10000), get("eps", 0.1), get("nu", 1.0), a.trials, a.seed,
                                                 get("delta", 0.05));
    } else if (a.lemma == "subset_eigs") {
        const std::size_t d = count("d", 20);
        reports = lab::subset_eigen_extremes(count("n", 5000), d, get("eps", 0.1),
                                             sigma_matrix(SigmaDiagGeometric{get("kappa", 1.0)}, d), a.trials, a.seed);
    } else if (a.lemma == "halfspace") {
        const std::size_t mc = count("mc", 1e6);
        std::vector<double> thetas;
        if (p.count("theta"))
            thetas = {p.at("theta")};
        else
            thetas = {0.0, std::numbers::pi / 6, std::numbers::pi / 3, std::numbers::pi / 2};
        for (std::size_t i = 0; i < thetas.size(); ++i)
            for (auto& r : lab::halfspace_second_moment(thetas[i], mc, derive_seed(a.seed, i), get("tol", 0.005)))
                reports.push_back(std::move(r));
    } else if (a.lemma == "scaled_gauss") {
        reports.push_back(lab::scaled_gaussian_norm_check(count("k", 5), count("n", 50), count("m", 40), count("l", 5),
                                                          get("nu", 1.0), a.trials, a.seed));
    } else if (a.lemma == "key_step") {
        reports.push_back(lab::key_step_trials(count("n", 200), count("d", 5), get("eps", 0.1), get("nu", 0.5),
                                               a.trials, a.seed));
    } else if (a.lemma == "helpers") {
        reports.push_back(lab::binomial_helper_check(count("n_max", 30)));
        reports.push_back(lab::hadamard_helper_check(a.trials, a.seed));
    } else {
        throw ConfigError("unknown lemma: " + a.lemma);
    }

    Json arr = Json::array();
    for (const auto& r : reports) {
        arr.push_back(lab::to_json(r));
        std::cout << r.lemma_id << ": stat=" << shortest(r.empirical_stat) << (r.upper_bound ? " <= " : " >= ")
                  << shortest(r.paper_bound) << " " << (r.pass ? "holds" : "violated") << "\n";
    }
    if (!a.out.empty()) write_text(a.out, Json{{"lemma", a.lemma}, {"reports", arr}}.dump(2) + "\n");
    return 0;
}

int run_sweep_cmd(const SweepArgs& a) {
    SweepSpec spec = sweep_from_json(Json::parse(read_text(a.config)));
    if (a.keep_traces) spec.keep_traces = true;
    const SweepResult res = run_sweep(spec);
    emit_report(res, a.out_dir);
    std::cout << sweep_csv(res.rows);
    std::cout << "fitted " << scaling_name(res.fitted_scaling.model) << ": C=" << shortest(res.fitted_scaling.constant)
              << " r2=" << shortest(res.fitted_scaling.r_squared) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust regression by iterative hard thresholding"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a contaminated dataset");
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--d", gen.d, "Covariate dimension");
    g->add_option("--n", gen.n, "Sample count");
    g->add_option("--k", gen.k, "Output dimension");
    g->add_option("--eps", gen.eps, "Corrupted fraction");
    g->add_option("--nu", gen.nu, "Label noise scale");
    g->add_option("--adversary", gen.adversary, "Adversary NAME[:params]");
    g->add_option("--sigma", gen.sigma, "identity or diag_geo:KAPPA");
    g->add_option("--law", gen.law, "gaussian, rademacher or uniform_ball");
    g->add_option("--activation", gen.activation, "Link used for clean labels");
    g->add_option("--w-norm", gen.w_norm, "Frobenius norm of the true weights");
    g->add_option("--clip-covariates", gen.clip, "Clip clean covariates to this norm");
    g->add_option("--seed", gen.seed, "Seed");

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Fit a dataset");
    f->add_option("--data", fit.data, "Dataset directory")->required();
    f->add_option("--algo", fit.algo, "linear_it, neuron_it, torrent_fc or ols");
    f->add_option("--activation", fit.activation, "Activation for neuron_it");
    f->add_option("--eps-alg", fit.eps_alg, "Fraction discarded per iteration");
    f->add_option("--eta", fit.eta, "Step size or auto");
    f->add_option("--max-iters", fit.max_iters, "Iteration budget or auto");
    f->add_option("--restarts", fit.restarts, "Random restarts (0 = default)");
    f->add_option("--init", fit.init, "auto, zero or random_ball");
    f->add_option("--radius-ref", fit.radius_ref, "ols or true_norm");
    f->add_option("--seed", fit.seed, "Seed");
    f->add_option("--out", fit.out, "Report path")->required();

    VerifyArgs ver;
    auto* v = app.add_subcommand("verify", "Check a concentration inequality empirically");
    v->add_option("--lemma", ver.lemma, "chi2_subset, subset_eigs, halfspace, scaled_gauss, key_step or helpers")
        ->required();
    v->add_option("--params", ver.params, "key=value pairs separated by commas");
    v->add_option("--trials", ver.trials, "Trials");
    v->add_option("--seed", ver.seed, "Seed");
    v->add_option("--out", ver.out, "Report path");

    SweepArgs sw;
    auto* s = app.add_subcommand("sweep", "Run a Monte Carlo sweep");
    s->add_option("--config", sw.config, "Sweep config (JSON)")->required();
    s->add_option("--out-dir", sw.out_dir, "Output directory")->required();
    s->add_flag("--keep-traces", sw.keep_traces, "Write per-trial traces");

    CLI11_PARSE(app, argc, argv);
    try {
        if (g->parsed()) return run_gen(gen);
        if (f->parsed()) return run_fit(fit);
        if (v->parsed()) return run_verify(ver);
        return run_sweep_cmd(sw);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged at iteration " << e.iteration() << ": " << e.what() << "\n";
        return 4;
    } catch (const SingularSystemError& e) {
        std::cerr << "singular system: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
