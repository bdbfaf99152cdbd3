#include "robust_thresh/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "robust_thresh/errors.hpp"
#include "robust_thresh/text.hpp"

namespace fs = std::filesystem;

namespace rthresh {

namespace {

void write_matrix_csv(const MatrixXd& m, const fs::path& path) {
    std::string out;
    out.reserve(static_cast<std::size_t>(m.size()) * 20);
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out.push_back(',');
            const auto res = std::to_chars(buf, buf + sizeof buf, m(r, c));
            out.append(buf, res.ptr);
        }
        out.push_back('\n');
    }
    write_text(path, out);
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
    const std::string text = read_text(path);
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        pos = end + 1;
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t p = 0;
        while (p <= line.size()) {
            std::size_t q = line.find(',', p);
            if (q == std::string_view::npos) q = line.size();
            const std::string_view cell = line.substr(p, q - p);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + std::string(cell) + "'");
            row.push_back(v);
            p = q + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows, const fs::path& path) {
    if (rows.empty()) return MatrixXd(0, 0);
    const std::size_t cols = rows.front().size();
    MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw IoError(path.string() + ": ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
}

std::string init_name(const InitSpec& init) {
    return std::holds_alternative<ZeroInit>(init) ? "zero" : "random_ball";
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_json(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Json to_json(const MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty matrix (array of rows)");
    const std::size_t cols = j.front().size();
    MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != cols) throw ConfigError("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

void write_dataset(const Dataset& ds, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_matrix_csv(ds.covariates, dir / "covariates.csv");
    write_matrix_csv(ds.targets, dir / "targets.csv");
    if (ds.inlier_mask) {
        std::string row;
        for (std::size_t i = 0; i < ds.inlier_mask->size(); ++i) {
            if (i) row.push_back(',');
            row.push_back((*ds.inlier_mask)[i] ? '1' : '0');
        }
        row.push_back('\n');
        write_text(dir / "mask.csv", row);
    } else {
        fs::remove(dir / "mask.csv", ec);
    }
    Json meta = {{"seed", ds.meta.seed},           {"eps", ds.meta.eps},
                 {"nu", ds.meta.nu},               {"B", ds.meta.B},
                 {"adversary", ds.meta.adversary}, {"sigma_desc", ds.meta.sigma_desc},
                 {"activation", ds.meta.activation}};
    meta["w_true"] = ds.meta.w_true ? to_json(*ds.meta.w_true) : Json(nullptr);
    write_text(dir / "meta.json", meta.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
    Dataset ds;
    ds.covariates = rows_to_matrix(read_csv_rows(dir / "covariates.csv"), dir / "covariates.csv");
    ds.targets = rows_to_matrix(read_csv_rows(dir / "targets.csv"), dir / "targets.csv");
    if (fs::exists(dir / "mask.csv")) {
        const auto rows = read_csv_rows(dir / "mask.csv");
        if (rows.size() != 1) throw IoError((dir / "mask.csv").string() + ": expected a single row");
        std::vector<bool> mask;
        for (double v : rows.front()) {
            if (v != 0.0 && v != 1.0) throw IoError((dir / "mask.csv").string() + ": entries must be 0 or 1");
            mask.push_back(v == 1.0);
        }
        ds.inlier_mask = std::move(mask);
    }
    if (fs::exists(dir / "meta.json")) {
        Json meta;
        try {
            meta = Json::parse(read_text(dir / "meta.json"));
        } catch (const Json::exception& e) {
            throw IoError((dir / "meta.json").string() + ": " + e.what());
        }
        ds.meta.seed = meta.value("seed", std::uint64_t{0});
        ds.meta.eps = meta.value("eps", 0.0);
        ds.meta.nu = meta.value("nu", 0.0);
        ds.meta.B = meta.value("B", 0.0);
        ds.meta.adversary = meta.value("adversary", std::string("none"));
        ds.meta.sigma_desc = meta.value("sigma_desc", std::string("identity"));
        ds.meta.activation = meta.value("activation", std::string("linear"));
        if (meta.contains("w_true") && !meta["w_true"].is_null()) ds.meta.w_true = matrix_from_json(meta["w_true"]);
    }
    return ds;
}

Json to_json(const FitConfig& cfg) {
    Json j;
    j["eps_alg"] = cfg.eps_alg;
    j["eta"] = cfg.eta ? Json(*cfg.eta) : Json("auto");
    j["max_iters"] = cfg.max_iters ? Json(*cfg.max_iters) : Json("auto");
    j["target_tol"] = cfg.target_tol;
    j["stop_param_change"] = cfg.stop_param_change;
    j["init"] = init_name(cfg.init);
    if (const auto* ball = std::get_if<RandomBallInit>(&cfg.init))
        j["init_radius_scale"] = ball->radius_scale ? Json(*ball->radius_scale) : Json("auto");
    j["seed"] = cfg.seed;
    if (cfg.spectrum)
        j["spectrum"] = {{"lambda_min", cfg.spectrum->lambda_min}, {"lambda_max", cfg.spectrum->lambda_max},
                         {"kappa", cfg.spectrum->kappa}};
    else
        j["spectrum"] = "estimate";
    j["radius_ref"] = cfg.radius_ref == RadiusRef::TrueNorm ? "true_norm" : "ols";
    j["restarts"] = cfg.restarts;
    return j;
}

FitConfig fit_config_from_json(const Json& j) {
    FitConfig cfg;
    try {
        cfg.eps_alg = j.value("eps_alg", 0.0);
        if (j.contains("eta") && j["eta"].is_number()) cfg.eta = j["eta"].get<double>();
        if (j.contains("max_iters") && j["max_iters"].is_number()) cfg.max_iters = j["max_iters"].get<std::size_t>();
        cfg.target_tol = j.value("target_tol", cfg.target_tol);
        cfg.stop_param_change = j.value("stop_param_change", cfg.stop_param_change);
        if (j.value("init", std::string("zero")) == "random_ball") {
            RandomBallInit ball;
            if (j.contains("init_radius_scale") && j["init_radius_scale"].is_number())
                ball.radius_scale = j["init_radius_scale"].get<double>();
            cfg.init = ball;
        }
        cfg.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("spectrum") && j["spectrum"].is_object())
            cfg.spectrum = SpectrumInfo::from_bounds(j["spectrum"].at("lambda_min").get<double>(),
                                                     j["spectrum"].at("lambda_max").get<double>());
        cfg.radius_ref = j.value("radius_ref", std::string("ols")) == "true_norm" ? RadiusRef::TrueNorm : RadiusRef::OlsPlugIn;
        cfg.restarts = j.value("restarts", std::size_t{0});
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad fit config: ") + e.what());
    }
    validate_fit_config(cfg);
    return cfg;
}

Json to_json(const StepPlan& plan) {
    return {{"eta", plan.eta},
            {"t_max", plan.t_max},
            {"stop_param_change", plan.stop_param_change},
            {"lambda_min", plan.spectrum.lambda_min},
            {"lambda_max", plan.spectrum.lambda_max},
            {"kappa", plan.spectrum.kappa},
            {"radius_ref", plan.radius_ref},
            {"gamma", plan.gamma}};
}

Json to_json(const FitReport& rep) {
    Json trace = Json::array();
    for (const auto& r : rep.trace) {
        trace.push_back({{"iter", r.iter},
                         {"loss_on_retained", r.loss_on_retained},
                         {"param_change", r.param_change},
                         {"retained", r.retained},
                         {"retained_true_positives", optional_json(r.retained_true_positives)},
                         {"retained_false_positives", optional_json(r.retained_false_positives)},
                         {"param_error", optional_json(r.param_error)}});
    }
    return {{"algorithm", rep.algorithm},
            {"estimate", to_json(rep.estimate.weights)},
            {"converged", rep.converged},
            {"iterations", rep.iterations},
            {"eta_used", rep.eta_used},
            {"t_max_used", rep.t_max_used},
            {"restart_chosen", rep.restart_chosen},
            {"final_retained_loss", rep.final_retained_loss},
            {"final_retained_count", rep.final_retained.size()},
            {"config_echo", to_json(rep.config_echo)},
            {"trace", std::move(trace)}};
}

}  // namespace rthresh
