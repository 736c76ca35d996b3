#include "rpcr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

namespace rpcr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

double prediction_error(const VectorXd& fitted_mean, const VectorXd& y_star) {
    if (fitted_mean.size() != y_star.size()) throw std::invalid_argument("prediction_error: length mismatch");
    const VectorXd target = y_star.array() - y_star.mean();
    return (fitted_mean - target).squaredNorm() / static_cast<double>(y_star.size());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) fn(k);
        });
}

// Manifest ------------------------------------------------------------------------

void ExperimentManifest::validate() const {
    if (replicates < 1) throw std::invalid_argument("manifest: replicates must be >= 1");
    if (n < 3) throw std::invalid_argument("manifest: n must be >= 3");
    if (p_grid.empty() || kappa_grid.empty() || error_laws.empty() || contaminations.empty() || methods.empty())
        throw std::invalid_argument("manifest: grids and method list must be nonempty");
    for (const Index p : p_grid) design_scales(model, n, p, kappa_grid.front());
    for (const double k : kappa_grid)
        if (!(k > 0.0)) throw std::invalid_argument("manifest: kappa values must be positive");
    if (parallelism < 1) throw std::invalid_argument("manifest: parallelism must be >= 1");
}

namespace {

template <typename T, typename Parse>
std::vector<T> one_or_many(const json& j, Parse parse) {
    std::vector<T> out;
    if (j.is_array())
        for (const auto& e : j) out.push_back(parse(e));
    else
        out.push_back(parse(j));
    return out;
}

void read_method_settings(const json& doc, MethodSettings& s) {
    if (doc.contains("cv_folds")) s.cv_folds = doc.at("cv_folds").get<int>();
    const json r = doc.value("rpcr", json::object());
    if (r.contains("penalty")) s.rpcr.family = parse_penalty_family(r.at("penalty").get<std::string>());
    if (r.contains("penalty_a")) s.rpcr.penalty_a = r.at("penalty_a").get<double>();
    if (r.contains("c")) s.rpcr.lambda0.c = r.at("c").get<double>();
    if (r.contains("alpha0")) s.rpcr.lambda0.alpha0 = r.at("alpha0").get<double>();
    if (r.contains("draws")) s.rpcr.lambda0.draws = r.at("draws").get<int>();
    if (r.contains("grid")) s.rpcr.hbic.grid = r.at("grid").get<std::vector<double>>();
    if (r.contains("grid_size")) s.rpcr.hbic.grid_size = r.at("grid_size").get<int>();
    if (r.contains("grid_ratio")) s.rpcr.hbic.grid_ratio = r.at("grid_ratio").get<double>();
    if (r.contains("solver")) s.rpcr.solve.method = parse_rank_solver_method(r.at("solver").get<std::string>());
    if (r.contains("obj_tol")) s.rpcr.solve.obj_tol = r.at("obj_tol").get<double>();
    if (r.contains("max_iters")) s.rpcr.solve.max_iters = r.at("max_iters").get<int>();
    s.rpcr.lambda0.validate();
    s.rpcr.hbic.validate();
    PenaltySpec(s.rpcr.family, s.rpcr.penalty_a.value_or(default_penalty_a(s.rpcr.family)), 0.0);
}

}  // namespace

ExperimentManifest parse_manifest(const std::string& json_text) {
    ExperimentManifest m;
    try {
        const json doc = json::parse(json_text);
        if (doc.contains("model")) m.model = parse_sim_model(doc.at("model").get<std::string>());
        if (doc.contains("n")) m.n = doc.at("n").get<Index>();
        if (doc.contains("p_grid")) m.p_grid = one_or_many<Index>(doc.at("p_grid"), [](const json& e) { return e.get<Index>(); });
        if (doc.contains("kappa_grid"))
            m.kappa_grid = one_or_many<double>(doc.at("kappa_grid"), [](const json& e) { return e.get<double>(); });
        if (doc.contains("error_law"))
            m.error_laws = one_or_many<ErrorLaw>(doc.at("error_law"), [](const json& e) { return parse_error_law(e.get<std::string>()); });
        if (doc.contains("contamination"))
            m.contaminations = one_or_many<Contamination>(
                doc.at("contamination"), [](const json& e) { return parse_contamination(e.get<std::string>()); });
        if (doc.contains("methods"))
            m.methods = one_or_many<Method>(doc.at("methods"), [](const json& e) { return parse_method(e.get<std::string>()); });
        if (doc.contains("replicates")) m.replicates = doc.at("replicates").get<int>();
        if (doc.contains("seed")) m.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("seeds")) {
            const json& s = doc.at("seeds");
            m.seed = s.is_array() ? s.at(0).get<std::uint64_t>() : s.get<std::uint64_t>();
        }
        if (doc.contains("parallelism")) m.parallelism = doc.at("parallelism").get<int>();
        read_method_settings(doc, m.settings);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("manifest: ") + e.what());
    }
    m.validate();
    return m;
}

MethodSettings parse_method_settings(const std::string& json_text) {
    MethodSettings s;
    try {
        read_method_settings(json::parse(json_text), s);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return s;
}

std::vector<SimConfig> expand_configs(const ExperimentManifest& manifest) {
    std::vector<SimConfig> out;
    for (const Contamination c : manifest.contaminations)
        for (const ErrorLaw e : manifest.error_laws)
            for (const double k : manifest.kappa_grid)
                for (const Index p : manifest.p_grid) {
                    SimConfig cfg;
                    cfg.id = out.size();
                    cfg.p = p;
                    cfg.kappa = k;
                    cfg.error_law = e;
                    cfg.contamination = c;
                    out.push_back(cfg);
                }
    return out;
}

// Monte Carlo ------------------------------------------------------------------------

namespace {

ReplicateRecord fit_one(Method method, const NoisyDraw& draw, const SimDesign& design, const MethodSettings& settings,
                        std::uint64_t seed) {
    ReplicateRecord rec;
    rec.method = method;
    const auto start = std::chrono::steady_clock::now();
    try {
        const Dataset data{draw.Z, draw.y};
        FitResult fit;
        switch (method) {
        case Method::RPCR: {
            RpcrConfig cfg = settings.rpcr;
            cfg.lambda0.rng_seed = seed;
            fit = fit_rpcr(data, cfg);
            rec.lambda0 = fit.lambdas.at(0);
            rec.lambda = fit.lambdas.at(1);
            break;
        }
        case Method::L1PCR: {
            LambdaRule rule;
            rule.cv_folds = settings.cv_folds;
            rule.rng_seed = seed;
            fit = fit_l1pcr(data, rule, settings.ls);
            rec.lambda = fit.lambdas.at(0);
            break;
        }
        case Method::LASSO: {
            fit = solve_lasso_raw(draw.Z, draw.y, {}, settings.cv_folds, seed, settings.ls);
            rec.lambda = fit.lambdas.at(0);
            break;
        }
        }
        rec.prediction_error = prediction_error(fit.fitted_mean, design.y_star);
        rec.support_size = fit.support.size();
        if (!std::isfinite(rec.prediction_error)) throw std::runtime_error("non-finite prediction error");
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double ss = 0.0;
    for (const double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

ExperimentResult run_monte_carlo(const ExperimentManifest& manifest) {
    manifest.validate();
    ExperimentResult result;
    result.manifest = manifest;
    result.configs = expand_configs(manifest);
    const std::size_t reps = static_cast<std::size_t>(manifest.replicates);
    const std::size_t nm = manifest.methods.size();
    result.records.resize(result.configs.size() * reps * nm);

    parallel_for(result.configs.size() * reps, manifest.parallelism, [&](std::size_t task) {
        const SimConfig& cfg = result.configs[task / reps];
        const auto r = static_cast<int>(task % reps);
        Rng rng(manifest.seed, (static_cast<std::uint64_t>(cfg.id) << 32) + static_cast<std::uint64_t>(r));
        const std::uint64_t fit_seed = rng();
        std::vector<ReplicateRecord> recs;
        try {
            const SimDesign design = gen_design(manifest.model, manifest.n, cfg.p, cfg.kappa, rng);
            const NoisyDraw draw = gen_noise(design, {cfg.error_law, cfg.contamination}, rng);
            for (const Method method : manifest.methods)
                recs.push_back(fit_one(method, draw, design, manifest.settings, fit_seed));
        } catch (const std::exception& e) {
            recs.clear();
            for (const Method method : manifest.methods) {
                ReplicateRecord rec;
                rec.method = method;
                rec.ok = false;
                rec.error = e.what();
                recs.push_back(rec);
            }
        }
        for (std::size_t k = 0; k < nm; ++k) {
            recs[k].config_id = cfg.id;
            recs[k].replicate = r;
            result.records[task * nm + k] = std::move(recs[k]);
        }
    });

    for (const auto& rec : result.records) result.failures += rec.ok ? 0 : 1;
    result.aggregates = aggregate(result.configs, manifest.methods, result.records);
    return result;
}

std::vector<AggregateRow> aggregate(const std::vector<SimConfig>& configs, const std::vector<Method>& methods,
                                    const std::vector<ReplicateRecord>& records) {
    std::map<std::pair<std::size_t, int>, std::vector<double>> values;
    std::map<std::pair<std::size_t, int>, std::size_t> failures;
    for (const auto& rec : records) {
        const auto key = std::make_pair(rec.config_id, static_cast<int>(rec.method));
        if (rec.ok) values[key].push_back(rec.prediction_error);
        else ++failures[key];
    }
    std::vector<AggregateRow> out;
    for (const auto& cfg : configs)
        for (const Method method : methods) {
            const auto key = std::make_pair(cfg.id, static_cast<int>(method));
            const std::vector<double>& v = values[key];
            AggregateRow row;
            row.config_id = cfg.id;
            row.method = method;
            row.count = v.size();
            row.failures = failures[key];
            row.mean = mean_of(v);
            row.se = v.empty() ? 0.0 : sd_of(v) / std::sqrt(static_cast<double>(v.size()));
            out.push_back(row);
        }
    return out;
}

std::vector<double> replicate_errors(const ExperimentResult& result, std::size_t config_id, Method method) {
    std::vector<double> out;
    for (const auto& rec : result.records)
        if (rec.config_id == config_id && rec.method == method && rec.ok) out.push_back(rec.prediction_error);
    return out;
}

// Output ------------------------------------------------------------------------------

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string config_columns(const ExperimentResult& result, std::size_t id) {
    const SimConfig& c = result.configs.at(id);
    std::ostringstream os;
    os << id << ',' << to_string(result.manifest.model) << ',' << result.manifest.n << ',' << c.p << ',' << num(c.kappa) << ','
       << to_string(c.error_law) << ',' << to_string(c.contamination);
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string records_csv(const ExperimentResult& result) {
    std::ostringstream os;
    os << "config_id,model,n,p,kappa,error_law,contamination,replicate,method,status,prediction_error,support_size,lambda0,"
          "lambda\n";
    for (const auto& rec : result.records) {
        os << config_columns(result, rec.config_id) << ',' << rec.replicate << ',' << to_string(rec.method) << ','
           << (rec.ok ? "ok" : "failed") << ',' << (rec.ok ? num(rec.prediction_error) : "") << ',' << rec.support_size
           << ',' << num(rec.lambda0) << ',' << num(rec.lambda) << '\n';
    }
    return os.str();
}

std::string aggregates_csv(const ExperimentResult& result) {
    std::ostringstream os;
    os << "config_id,model,n,p,kappa,error_law,contamination,method,replicates,failures,mean_prediction_error,se\n";
    for (const auto& row : result.aggregates)
        os << config_columns(result, row.config_id) << ',' << to_string(row.method) << ',' << row.count << ','
           << row.failures << ',' << num(row.mean) << ',' << num(row.se) << '\n';
    return os.str();
}

std::string timings_csv(const ExperimentResult& result) {
    std::ostringstream os;
    os << "config_id,replicate,method,wall_seconds,error\n";
    for (const auto& rec : result.records) {
        std::string err = rec.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        os << rec.config_id << ',' << rec.replicate << ',' << to_string(rec.method) << ',' << num(rec.wall_seconds) << ','
           << err << '\n';
    }
    return os.str();
}

std::string result_svg(const ExperimentResult& result, const std::string& metadata) {
    const auto& man = result.manifest;
    const bool by_p = man.p_grid.size() > 1 || man.kappa_grid.size() == 1;
    struct Panel {
        Contamination c;
        ErrorLaw e;
    };
    std::vector<Panel> panels;
    for (const Contamination c : man.contaminations)
        for (const ErrorLaw e : man.error_laws) panels.push_back({c, e});

    const double pw = 320, ph = 240, margin = 45;
    const std::size_t cols = man.error_laws.size();
    const std::size_t rows = man.contaminations.size();
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(pw * static_cast<double>(cols)) << "\" height=\""
       << num(ph * static_cast<double>(rows)) << "\">\n";
    os << "<!-- " << metadata << " -->\n";
    const char* palette[] = {"#000000", "#e66100", "#1a5fb4", "#26a269"};

    for (std::size_t k = 0; k < panels.size(); ++k) {
        const double ox = pw * static_cast<double>(k % cols), oy = ph * static_cast<double>(k / cols);
        // series: (method, fixed other-axis value) -> points
        std::map<std::pair<int, double>, std::vector<std::pair<double, double>>> series;
        for (const auto& row : result.aggregates) {
            const SimConfig& c = result.configs[row.config_id];
            if (c.contamination != panels[k].c || c.error_law != panels[k].e || row.count == 0) continue;
            const double x = by_p ? static_cast<double>(c.p) : c.kappa;
            const double other = by_p ? c.kappa : static_cast<double>(c.p);
            series[{static_cast<int>(row.method), other}].push_back({x, row.mean});
        }
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& [key, pts] : series)
            for (const auto& [x, y] : pts) {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        if (xmax <= xmin) xmax = xmin + 1.0;
        if (ymax <= ymin) ymax = ymin + 1.0;
        auto sx = [&](double x) { return ox + margin + (x - xmin) / (xmax - xmin) * (pw - 2 * margin); };
        auto sy = [&](double y) { return oy + ph - margin - (y - ymin) / (ymax - ymin) * (ph - 2 * margin); };

        os << "<g>\n<text x=\"" << num(ox + margin) << "\" y=\"" << num(oy + 20) << "\" font-size=\"12\">"
           << to_string(panels[k].c) << " / " << to_string(panels[k].e) << "</text>\n";
        os << "<line x1=\"" << num(ox + margin) << "\" y1=\"" << num(oy + ph - margin) << "\" x2=\"" << num(ox + pw - margin)
           << "\" y2=\"" << num(oy + ph - margin) << "\" stroke=\"#888\"/>\n";
        os << "<text x=\"" << num(ox + pw / 2) << "\" y=\"" << num(oy + ph - 10) << "\" font-size=\"10\">"
           << (by_p ? "p" : "kappa") << "</text>\n";
        std::size_t idx = 0;
        for (const auto& [key, pts] : series) {
            auto sorted = pts;
            std::sort(sorted.begin(), sorted.end());
            os << "<polyline fill=\"none\" stroke=\"" << palette[idx % 4] << "\" data-method=\""
               << to_string(static_cast<Method>(key.first)) << "\" points=\"";
            for (std::size_t q = 0; q < sorted.size(); ++q)
                os << (q ? " " : "") << num(sx(sorted[q].first)) << ',' << num(sy(sorted[q].second));
            os << "\"/>\n";
            ++idx;
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit_outputs(const ExperimentResult& result, const std::string& out_dir, bool svg, const std::string& metadata) {
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " + ec.message());
    write_file(dir / "records.csv", records_csv(result));
    write_file(dir / "aggregates.csv", aggregates_csv(result));
    write_file(dir / "timings.csv", timings_csv(result));
    if (svg) write_file(dir / "plot.svg", result_svg(result, metadata));
}

// Real data ------------------------------------------------------------------------------

std::vector<Index> screen_predictors(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y, Index k) {
    if (X.rows() != y.size()) throw std::invalid_argument("screen_predictors: size mismatch");
    if (k < 0 || k > X.cols()) throw std::invalid_argument("screen_predictors: k must be in [0, P]");
    const VectorXd yc = y.array() - y.mean();
    const double ynorm = yc.norm();
    std::vector<double> score(static_cast<std::size_t>(X.cols()), 0.0);
    for (Index j = 0; j < X.cols(); ++j) {
        const VectorXd xc = X.col(j).array() - X.col(j).mean();
        const double denom = xc.norm() * ynorm;
        score[static_cast<std::size_t>(j)] = denom > 0.0 ? std::abs(xc.dot(yc)) / denom : 0.0;
    }
    std::vector<Index> order(static_cast<std::size_t>(X.cols()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

double paired_difference_se(const VectorXd& a, const VectorXd& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired_difference_se: need equal lengths >= 2");
    const VectorXd d = a - b;
    const double mu = d.mean();
    const double var = (d.array() - mu).square().sum() / static_cast<double>(d.size() - 1);
    return std::sqrt(var / static_cast<double>(d.size()));
}

LoocvTable run_loocv(const Dataset& data, const LoocvOptions& opts) {
    validate(data);
    const Index n = data.n();
    if (n < 10) throw std::invalid_argument("loocv: need at least 10 observations");
    if (opts.c_grid.empty() || opts.methods.empty()) throw std::invalid_argument("loocv: empty c grid or method list");

    double mean_var = 0.0;
    for (Index j = 0; j < data.p(); ++j) {
        const VectorXd xc = data.Z.col(j).array() - data.Z.col(j).mean();
        mean_var += xc.squaredNorm() / static_cast<double>(n - 1);
    }
    mean_var /= static_cast<double>(data.p());

    LoocvTable table;
    table.methods = opts.methods;
    const std::size_t nm = opts.methods.size();
    struct Level {
        MatrixXd Z;
        PCBasis basis;
    };
    std::vector<Level> shared(opts.c_grid.size());
    for (std::size_t l = 0; l < opts.c_grid.size(); ++l) {
        LoocvLevel level;
        level.c = opts.c_grid[l];
        if (!(level.c >= 0.0)) throw std::invalid_argument("loocv: contamination levels must be >= 0");
        level.sigma = level.c * std::sqrt(mean_var);
        level.squared_errors.assign(nm, VectorXd::Zero(n));
        table.levels.push_back(std::move(level));
        if (!opts.redraw_per_split) {
            Rng rng(opts.seed, static_cast<std::uint64_t>(l) << 32);
            shared[l].Z = data.Z + table.levels[l].sigma * rng.normal_matrix(n, data.p());
            shared[l].basis = pc_basis(Dataset{shared[l].Z, data.y});
        }
    }

    std::vector<std::uint8_t> failed(opts.c_grid.size() * static_cast<std::size_t>(n) * nm, 0);
    parallel_for(opts.c_grid.size() * static_cast<std::size_t>(n), opts.parallelism, [&](std::size_t task) {
        const std::size_t l = task / static_cast<std::size_t>(n);
        const auto held = static_cast<Index>(task % static_cast<std::size_t>(n));
        LoocvLevel& level = table.levels[l];
        MatrixXd Z;
        PCBasis basis;
        if (opts.redraw_per_split) {
            Rng rng(opts.seed, (static_cast<std::uint64_t>(l) << 32) + static_cast<std::uint64_t>(held) + 1);
            Z = data.Z + level.sigma * rng.normal_matrix(n, data.p());
            basis = pc_basis(Dataset{Z, data.y});
        }
        const MatrixXd& Zl = opts.redraw_per_split ? Z : shared[l].Z;
        const PCBasis& B = opts.redraw_per_split ? basis : shared[l].basis;

        // training rows only: the held-out response never reaches tuning
        const Index nt = n - 1;
        MatrixXd Ztr(nt, Zl.cols()), Utr(nt, B.m());
        VectorXd ytr(nt);
        for (Index i = 0, r = 0; i < n; ++i) {
            if (i == held) continue;
            Ztr.row(r) = Zl.row(i);
            Utr.row(r) = B.Utilde.row(i);
            ytr(r) = data.y(i);
            ++r;
        }
        const std::uint64_t fit_seed = opts.seed ^ (0x9E3779B97F4A7C15ULL * (task + 1));
        for (std::size_t k = 0; k < nm; ++k) {
            try {
                double pred = 0.0;
                switch (opts.methods[k]) {
                case Method::RPCR: {
                    RpcrConfig cfg = opts.settings.rpcr;
                    cfg.lambda0.rng_seed = fit_seed;
                    const FitResult fit = fit_rpcr_design(ytr, Utr, cfg);
                    pred = predict_design(fit, B.Utilde.row(held))(0);
                    break;
                }
                case Method::L1PCR: {
                    LambdaRule rule;
                    rule.cv_folds = opts.settings.cv_folds;
                    rule.rng_seed = fit_seed;
                    const FitResult fit = fit_l1pcr_design(ytr, Utr, rule, opts.settings.ls);
                    pred = predict_design(fit, B.Utilde.row(held))(0);
                    break;
                }
                case Method::LASSO: {
                    const FitResult fit = solve_lasso_raw(Ztr, ytr, {}, opts.settings.cv_folds, fit_seed, opts.settings.ls);
                    pred = predict_design(fit, Zl.row(held))(0);
                    break;
                }
                }
                const double err = data.y(held) - pred;
                level.squared_errors[k](held) = err * err;
            } catch (const std::exception&) {
                failed[task * nm + k] = 1;
                level.squared_errors[k](held) = std::numeric_limits<double>::quiet_NaN();
            }
        }
    });

    for (const auto f : failed) table.failures += f;
    for (auto& level : table.levels) {
        for (std::size_t k = 0; k < nm; ++k) level.mean.push_back(level.squared_errors[k].mean());
        for (std::size_t a = 0; a < nm; ++a)
            for (std::size_t b = a + 1; b < nm; ++b) {
                level.pairs.emplace_back(a, b);
                level.pair_se.push_back(paired_difference_se(level.squared_errors[a], level.squared_errors[b]));
            }
    }
    return table;
}

std::string loocv_csv(const LoocvTable& table) {
    std::ostringstream os;
    os << "c,sigma";
    for (const Method m : table.methods) os << ',' << to_string(m);
    if (!table.levels.empty())
        for (const auto& [a, b] : table.levels.front().pairs)
            os << ",SE(" << to_string(table.methods[a]) << '-' << to_string(table.methods[b]) << ')';
    os << '\n';
    for (const auto& level : table.levels) {
        os << num(level.c) << ',' << num(level.sigma);
        for (const double v : level.mean) os << ',' << num(v);
        for (const double v : level.pair_se) os << ',' << num(v);
        os << '\n';
    }
    return os.str();
}

std::string loocv_errors_csv(const LoocvTable& table) {
    std::ostringstream os;
    os << "c,row";
    for (const Method m : table.methods) os << ',' << to_string(m);
    os << '\n';
    for (const auto& level : table.levels) {
        const Index n = level.squared_errors.empty() ? 0 : level.squared_errors.front().size();
        for (Index i = 0; i < n; ++i) {
            os << num(level.c) << ',' << i;
            for (const auto& errs : level.squared_errors) os << ',' << num(errs(i));
            os << '\n';
        }
    }
    return os.str();
}

PairedTest paired_t_test_less(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired test: need equal lengths >= 2");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    PairedTest out;
    out.mean_diff = mean_of(d);
    const double se = sd_of(d) / std::sqrt(static_cast<double>(d.size()));
    if (!(se > 0.0)) {
        out.t = out.mean_diff < 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        out.p_value = out.mean_diff < 0.0 ? 0.0 : 1.0;
        return out;
    }
    out.t = out.mean_diff / se;
    const boost::math::students_t dist(static_cast<double>(d.size() - 1));
    out.p_value = boost::math::cdf(dist, out.t);
    return out;
}

}  // namespace rpcr
