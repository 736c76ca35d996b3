#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpcr/bench.hpp"
#include "rpcr/csv.hpp"
#include "rpcr/estimators.hpp"
#include "rpcr/tuning.hpp"

namespace {

using json = nlohmann::json;
using Eigen::Index;

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// 64-bit FNV-1a, used to tag plots with the manifest they came from
std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json fit_json(const rpcr::FitResult& fit) {
    json j;
    j["method"] = std::string(rpcr::to_string(fit.method));
    j["theta_hat"] = vec_json(fit.theta_hat);
    j["support"] = fit.support;
    j["intercept"] = fit.intercept;
    j["y_mean"] = fit.y_mean;
    j["lambdas"] = fit.lambdas;
    json reports = json::array();
    for (const auto& r : fit.solver_reports)
        reports.push_back({{"objective", r.objective},
                           {"certificate_gap", r.certificate_gap},
                           {"iterations", r.iterations},
                           {"converged", r.converged},
                           {"method", std::string(rpcr::to_string(r.method))}});
    j["solver_reports"] = reports;
    json trace = json::array();
    for (const auto& e : fit.hbic_trace)
        trace.push_back({{"lambda", e.lambda},
                         {"support_size", e.support_size},
                         {"refit_loss", e.refit_loss},
                         {"hbic", std::isfinite(e.hbic) ? json(e.hbic) : json(nullptr)},
                         {"eligible", e.eligible}});
    if (!fit.hbic_trace.empty()) j["hbic_trace"] = trace;
    if (fit.hbic_refit.size()) j["hbic_refit"] = vec_json(fit.hbic_refit);
    if (!fit.cv_lambdas.empty()) {
        j["cv_lambdas"] = fit.cv_lambdas;
        j["cv_error"] = fit.cv_error;
    }
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank-based sparse regression in principal-components space"};
    app.require_subcommand(1);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit RPCR, L1PCR or LASSO to a CSV dataset");
    std::string method = "rpcr", data_path, response, config_path, penalty, coef_csv;
    double penalty_a = 0.0;
    std::uint64_t seed = 0;
    fit_cmd->add_option("--method", method, "rpcr, l1pcr or lasso")->check(CLI::IsMember({"rpcr", "l1pcr", "lasso"}, CLI::ignore_case));
    fit_cmd->add_option("--data", data_path, "CSV with a header row")->required();
    fit_cmd->add_option("--response", response, "response column name")->required();
    fit_cmd->add_option("--config", config_path, "JSON settings");
    auto* pen_opt = fit_cmd->add_option("--penalty", penalty, "scad or mcp")->check(CLI::IsMember({"scad", "mcp"}, CLI::ignore_case));
    auto* a_opt = fit_cmd->add_option("--penalty-a", penalty_a, "folded-concave shape parameter");
    fit_cmd->add_option("--seed", seed, "RNG seed");
    fit_cmd->add_option("--coef-csv", coef_csv, "write coefficients here");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo manifest");
    std::string manifest_path, out_dir;
    bool svg = false;
    int parallelism = 0;
    sim_cmd->add_option("--manifest", manifest_path)->required();
    sim_cmd->add_option("--out", out_dir)->required();
    sim_cmd->add_flag("--svg", svg, "also write plot.svg");
    sim_cmd->add_option("--parallelism", parallelism, "override manifest parallelism");

    // loocv
    auto* loo_cmd = app.add_subcommand("loocv", "Contaminated leave-one-out protocol on real data");
    Index screen_k = 300;
    std::string c_grid = "0,0.1,0.2,0.3,0.4,0.5";
    bool redraw = false;
    loo_cmd->add_option("--data", data_path)->required();
    loo_cmd->add_option("--response", response)->required();
    loo_cmd->add_option("--screen-k", screen_k, "keep the top-k predictors by |correlation| (0 = all)");
    loo_cmd->add_option("--c-grid", c_grid, "comma-separated contamination levels");
    loo_cmd->add_option("--seed", seed);
    loo_cmd->add_option("--out", out_dir)->required();
    loo_cmd->add_option("--config", config_path, "JSON settings");
    loo_cmd->add_option("--parallelism", parallelism);
    loo_cmd->add_flag("--redraw-per-split", redraw, "draw fresh contamination for every split");

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "Print lambda0 diagnostics for a dataset");
    rpcr::Lambda0Config l0;
    cal_cmd->add_option("--data", data_path)->required();
    cal_cmd->add_option("--response", response, "response column to drop (default: last column)");
    cal_cmd->add_option("--c", l0.c);
    cal_cmd->add_option("--alpha0", l0.alpha0);
    cal_cmd->add_option("--draws", l0.draws);
    cal_cmd->add_option("--seed", l0.rng_seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit_cmd) {
            const rpcr::Dataset data = rpcr::dataset_from_table(rpcr::read_csv(data_path), response);
            rpcr::MethodSettings s = config_path.empty() ? rpcr::MethodSettings{} : rpcr::parse_method_settings(slurp(config_path));
            if (*pen_opt) s.rpcr.family = rpcr::parse_penalty_family(penalty);
            if (*a_opt) s.rpcr.penalty_a = penalty_a;
            const rpcr::Method m = rpcr::parse_method(method);
            rpcr::FitResult fit;
            if (m == rpcr::Method::RPCR) {
                s.rpcr.lambda0.rng_seed = seed;
                fit = rpcr::fit_rpcr(data, s.rpcr);
            } else if (m == rpcr::Method::L1PCR) {
                rpcr::LambdaRule rule;
                rule.cv_folds = s.cv_folds;
                rule.rng_seed = seed;
                fit = rpcr::fit_l1pcr(data, rule, s.ls);
            } else {
                fit = rpcr::solve_lasso_raw(data.Z, data.y, {}, s.cv_folds, seed, s.ls);
            }
            std::cout << fit_json(fit).dump(2) << '\n';
            if (!coef_csv.empty()) write_text(coef_csv, rpcr::vector_csv(fit.theta_hat, "theta"));
            return 0;
        }
        if (*sim_cmd) {
            const std::string manifest_text = slurp(manifest_path);
            rpcr::ExperimentManifest man = rpcr::parse_manifest(manifest_text);
            if (parallelism > 0) man.parallelism = parallelism;
            const rpcr::ExperimentResult res = rpcr::run_monte_carlo(man);
            rpcr::emit_outputs(res, out_dir, svg, "manifest=" + manifest_path + " manifest_fnv1a=" + fnv1a_hex(manifest_text) +
                                                       " seed=" + std::to_string(man.seed));
            for (const auto& row : res.aggregates)
                std::printf("config %zu %-5s n=%zu mean=%.6g se=%.3g failures=%zu\n", row.config_id,
                            std::string(rpcr::to_string(row.method)).c_str(), row.count, row.mean, row.se, row.failures);
            if (res.failures) {
                std::fprintf(stderr, "%zu replicate fits failed (see timings.csv)\n", res.failures);
                return 1;
            }
            return 0;
        }
        if (*loo_cmd) {
            rpcr::Dataset data = rpcr::dataset_from_table(rpcr::read_csv(data_path), response);
            if (screen_k > 0 && screen_k < data.p()) {
                const auto keep = rpcr::screen_predictors(data.Z, data.y, screen_k);
                Eigen::MatrixXd Zs(data.n(), screen_k);
                for (Index k = 0; k < screen_k; ++k) Zs.col(k) = data.Z.col(keep[static_cast<std::size_t>(k)]);
                data.Z = std::move(Zs);
            }
            rpcr::LoocvOptions opts;
            opts.c_grid = parse_list(c_grid);
            opts.seed = seed;
            opts.redraw_per_split = redraw;
            if (parallelism > 0) opts.parallelism = parallelism;
            if (!config_path.empty()) opts.settings = rpcr::parse_method_settings(slurp(config_path));
            const rpcr::LoocvTable table = rpcr::run_loocv(data, opts);
            std::filesystem::create_directories(out_dir);
            write_text(out_dir + "/loocv.csv", rpcr::loocv_csv(table));
            write_text(out_dir + "/loocv_errors.csv", rpcr::loocv_errors_csv(table));
            std::cout << rpcr::loocv_csv(table);
            if (table.failures) {
                std::fprintf(stderr, "%zu split fits failed\n", table.failures);
                return 1;
            }
            return 0;
        }
        if (*cal_cmd) {
            const rpcr::CsvTable table = rpcr::read_csv(data_path);
            const std::string resp = response.empty() ? table.header.back() : response;
            const rpcr::Dataset data = rpcr::dataset_from_table(table, resp);
            const rpcr::PCBasis basis = rpcr::pc_basis(data);
            const auto d = rpcr::calibrate_lambda0_detailed(basis.Utilde, l0);
            const double n = static_cast<double>(basis.n()), m = static_cast<double>(basis.m());
            std::printf("n=%d m=%d draws=%d alpha0=%g c=%g\n", static_cast<int>(n), static_cast<int>(m), l0.draws, l0.alpha0, l0.c);
            std::printf("quantile=%.10g\nlambda0=%.10g\nrate=sqrt(log m / n)=%.10g\nlambda0/rate=%.6g\n", d.quantile, d.lambda0,
                        std::sqrt(std::log(m) / n), d.lambda0 / std::sqrt(std::log(m) / n));
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
