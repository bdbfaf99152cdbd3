#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "robust_thresh/errors.hpp"
#include "robust_thresh/harness.hpp"
#include "robust_thresh/io.hpp"

using namespace rthresh;

namespace {
SweepSpec small_sweep() {
    SweepSpec s;
    s.base_generator.d = 4;
    s.base_generator.n = 400;
    s.base_generator.nu = 0.5;
    s.base_adversary.kind = AdditiveLabelOutlier{100.0};
    s.axis = SweepAxis::Eps;
    s.values = {0.05, 0.1, 0.2};
    s.trials_per_point = 3;
    s.seed = 5;
    return s;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}
}  // namespace

TEST_CASE("empty rows give a header-only csv") {
    CHECK(sweep_csv({}) == std::string(kSweepCsvHeader) + "\n");
    CHECK(std::string(kSweepCsvHeader) ==
          "axis_value,median_error,iqr_lo,iqr_hi,mean_iters,inlier_precision,ols_error,oracle_error");
}

TEST_CASE("csv rows follow the documented column order") {
    SweepRow r{0.1, 0.2, 0.15, 0.25, 12.0, 0.9, 3.0, 0.05};
    const auto lines = lines_of(sweep_csv({r, r, r}));
    REQUIRE(lines.size() == 4);
    CHECK(lines[1] ==
          "0.10000000000000001,0.20000000000000001,0.14999999999999999,0.25,12,0.90000000000000002,3,"
          "0.050000000000000003");
}

TEST_CASE("scaling fit") {
    std::vector<double> x = {0.05, 0.1, 0.2}, e;
    for (double v : x) e.push_back(2.5 * scaling_function(ScalingModel::EpsLog, v));
    const auto f = fit_scaling(ScalingModel::EpsLog, x, e);
    CHECK(f.constant == doctest::Approx(2.5));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.flatness == doctest::Approx(1.0));
    const auto g = fit_scaling(ScalingModel::SqrtEpsLog, x, e);
    CHECK(g.r_squared < 1.0);
    CHECK(g.r_squared >= 0.0);
    CHECK(scaling_function(ScalingModel::EpsLog, 0.0) == 0.0);
    CHECK(fit_scaling(ScalingModel::EpsLog, {0.0}, {1.0}).constant == 0.0);
}

TEST_CASE("sweep spec validation and json round trip") {
    SweepSpec s = small_sweep();
    s.values = {0.2, 0.1};
    CHECK_THROWS_AS(validate_sweep(s), ConfigError);
    s.values = {0.1, 0.6};
    CHECK_THROWS_AS(validate_sweep(s), ConfigError);
    s = small_sweep();
    s.trials_per_point = 0;
    CHECK_THROWS_AS(validate_sweep(s), ConfigError);
    s = small_sweep();
    const SweepSpec back = sweep_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
    CHECK_THROWS_AS(sweep_from_json(nlohmann::json{{"axis", "temperature"}, {"values", {1.0}}}), ConfigError);
}

TEST_CASE("clean realizable sweep recovers exactly") {
    SweepSpec s = small_sweep();
    s.base_generator.nu = 0.0;
    s.values = {0.0};
    const auto res = run_sweep(s);
    REQUIRE(res.rows.size() == 1);
    for (const auto& t : res.trials[0]) CHECK(t.error <= 1e-6);
}

TEST_CASE("sweeps are reproducible and emit identical files") {
    const SweepSpec s = small_sweep();
    const auto a = run_sweep(s), b = run_sweep(s);
    CHECK(sweep_csv(a.rows) == sweep_csv(b.rows));
    CHECK(a.rows.size() == 3);
    for (const auto& r : a.rows) {
        CHECK(r.oracle_error <= r.median_error * (1.0 + 1e-6));
        CHECK(r.median_error <= r.baseline_ols_error);
        CHECK(r.iqr_lo <= r.median_error);
        CHECK(r.median_error <= r.iqr_hi);
    }
    const auto dir = std::filesystem::temp_directory_path() / "rt_harness_emit";
    std::filesystem::remove_all(dir);
    emit_report(a, dir);
    const std::string csv1 = read_text(dir / "sweep.csv"), json1 = read_text(dir / "summary.json");
    emit_report(a, dir);
    CHECK(read_text(dir / "sweep.csv") == csv1);
    CHECK(read_text(dir / "summary.json") == json1);
    const auto summary = nlohmann::json::parse(json1);
    CHECK(summary["fitted_scaling"]["model"] == "eps_log");
    std::filesystem::remove_all(dir);
}

TEST_CASE("traces are written when requested") {
    SweepSpec s = small_sweep();
    s.values = {0.1};
    s.trials_per_point = 2;
    s.keep_traces = true;
    const auto res = run_sweep(s);
    const auto dir = std::filesystem::temp_directory_path() / "rt_harness_traces";
    std::filesystem::remove_all(dir);
    emit_report(res, dir);
    CHECK(std::filesystem::exists(dir / "trace_0_0.json"));
    CHECK(std::filesystem::exists(dir / "trace_0_1.json"));
    const auto t = nlohmann::json::parse(read_text(dir / "trace_0_1.json"));
    CHECK(t["trial"] == 1);
    CHECK(t["trace"].is_array());
    std::filesystem::remove_all(dir);
}

TEST_CASE("emit reports unwritable paths") {
    SweepResult res;
    CHECK_THROWS_AS(emit_report(res, "/proc/rt_cannot_write_here"), IoError);
}
