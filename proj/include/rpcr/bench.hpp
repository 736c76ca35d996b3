#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpcr/estimators.hpp"
#include "rpcr/simgen.hpp"

namespace rpcr {

/// n^{-1} ||fitted_mean - (y* - mean(y*))||^2.
double prediction_error(const Eigen::VectorXd& fitted_mean, const Eigen::VectorXd& y_star);

/// Runs fn(0..count-1) on `threads` workers (threads <= 1 runs inline).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

struct MethodSettings {
    RpcrConfig rpcr;
    int cv_folds = 10;
    SolveOptions ls;
};

/// Declarative Monte Carlo sweep. Configurations are the product
/// p_grid x kappa_grid x error_laws x contaminations.
struct ExperimentManifest {
    SimModel model = SimModel::M1;
    Eigen::Index n = 100;
    std::vector<Eigen::Index> p_grid{100, 200, 400, 800};
    std::vector<double> kappa_grid{1.0};
    std::vector<ErrorLaw> error_laws{ErrorLaw::Normal};
    std::vector<Contamination> contaminations{Contamination::None};
    std::vector<Method> methods{Method::RPCR, Method::L1PCR};
    int replicates = 1000;
    std::uint64_t seed = 20240601;
    int parallelism = 1;
    MethodSettings settings;

    void validate() const;
};

/// Parses a manifest JSON document (see README for the schema). Throws
/// std::invalid_argument with the offending field on bad input.
ExperimentManifest parse_manifest(const std::string& json_text);

/// Method settings alone (the "rpcr" block and "cv_folds"), as used by `fit`.
MethodSettings parse_method_settings(const std::string& json_text);

struct SimConfig {
    std::size_t id = 0;
    Eigen::Index p = 0;
    double kappa = 1.0;
    ErrorLaw error_law = ErrorLaw::Normal;
    Contamination contamination = Contamination::None;
};

std::vector<SimConfig> expand_configs(const ExperimentManifest& manifest);

struct ReplicateRecord {
    std::size_t config_id = 0;
    int replicate = 0;
    Method method = Method::RPCR;
    bool ok = true;
    std::string error;
    double prediction_error = 0.0;
    std::size_t support_size = 0;
    double lambda0 = 0.0;   // RPCR only
    double lambda = 0.0;    // selected penalty level
    double wall_seconds = 0.0;
};

struct AggregateRow {
    std::size_t config_id = 0;
    Method method = Method::RPCR;
    std::size_t count = 0;
    std::size_t failures = 0;
    double mean = 0.0;
    double se = 0.0;  // sd / sqrt(count)
};

struct ExperimentResult {
    ExperimentManifest manifest;
    std::vector<SimConfig> configs;
    std::vector<ReplicateRecord> records;  // (config, replicate, method) order
    std::vector<AggregateRow> aggregates;  // (config, method) order
    std::size_t failures = 0;
};

/// Replicate r of config c draws from Rng(seed, c * 2^32 + r); results are
/// merged by key so output is independent of `parallelism`.
ExperimentResult run_monte_carlo(const ExperimentManifest& manifest);

std::vector<AggregateRow> aggregate(const std::vector<SimConfig>& configs, const std::vector<Method>& methods,
                                    const std::vector<ReplicateRecord>& records);

/// Per-replicate prediction errors of one (config, method), replicate order.
std::vector<double> replicate_errors(const ExperimentResult& result, std::size_t config_id, Method method);

// Output ---------------------------------------------------------------------

std::string records_csv(const ExperimentResult& result);
std::string aggregates_csv(const ExperimentResult& result);
std::string timings_csv(const ExperimentResult& result);

/// Line charts of mean error against p (or kappa when p is fixed), one panel
/// per (contamination, error law), one polyline per method.
std::string result_svg(const ExperimentResult& result, const std::string& metadata);

/// Writes records.csv, aggregates.csv, timings.csv and optionally plot.svg.
void emit_outputs(const ExperimentResult& result, const std::string& out_dir, bool svg, const std::string& metadata);

// Real-data protocol ------------------------------------------------------------

/// Top-k columns by |Pearson correlation| with y, ties to the lower index;
/// zero-variance columns score 0. Returned in rank order.
std::vector<Eigen::Index> screen_predictors(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                                            Eigen::Index k);

struct LoocvOptions {
    std::vector<double> c_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<Method> methods{Method::L1PCR, Method::LASSO, Method::RPCR};
    std::uint64_t seed = 1;
    bool redraw_per_split = false;
    int parallelism = 1;
    MethodSettings settings;
};

struct LoocvLevel {
    double c = 0.0;
    double sigma = 0.0;
    std::vector<Eigen::VectorXd> squared_errors;  // per method, per held-out row
    std::vector<double> mean;                     // per method
    // SE of pairwise differences, in (0,1), (0,2), (1,2), ... method order
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<double> pair_se;
};

struct LoocvTable {
    std::vector<Method> methods;
    std::vector<LoocvLevel> levels;
    std::size_t failures = 0;
};

/// Contaminate X once per c with N(0, sigma^2), sigma = c * sqrt(mean column
/// variance), build the basis on the full contaminated matrix, then
/// leave-one-out fit/predict. Tuning sees only the training rows.
LoocvTable run_loocv(const Dataset& data, const LoocvOptions& opts);

/// sd(diff) / sqrt(n) with the n-1 denominator.
double paired_difference_se(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

std::string loocv_csv(const LoocvTable& table);
std::string loocv_errors_csv(const LoocvTable& table);

struct PairedTest {
    double mean_diff = 0.0;  // mean(a - b)
    double t = 0.0;
    double p_value = 1.0;    // one-sided, H1: mean(a - b) < 0
};

/// One-sided paired t test of H1: E[a - b] < 0.
PairedTest paired_t_test_less(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace rpcr
