#pragma once

// Orchestration behind the command-line tool: end-to-end fitting of CSV
// data, bound-verification ensembles, rate sweeps, sparse-eigenvalue reports
// and greedy-versus-exhaustive comparisons. Every function returns a JSON
// document that depends only on its arguments, never on thread count or
// wall-clock time (unless timing is explicitly requested).

#include "fwdreg/bounds.hpp"
#include "fwdreg/forward_select.hpp"
#include "fwdreg/io.hpp"
#include "fwdreg/linalg.hpp"
#include "fwdreg/oracle.hpp"
#include "fwdreg/parallel.hpp"
#include "fwdreg/simulate.hpp"
#include "fwdreg/sparse_eig.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

namespace fwdreg {

// ---------------------------------------------------------------------------
// Summary statistics

/// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q)
{
    if (v.empty()) throw Error(ErrorCode::invalid_argument, "quantile of empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(const std::vector<double>& v) { return quantile(v, 0.5); }

inline json summary_json(const std::vector<double>& v)
{
    const double q1 = quantile(v, 0.25);
    const double q3 = quantile(v, 0.75);
    return json{{"median", median(v)}, {"q1", q1}, {"q3", q3}, {"iqr", q3 - q1}};
}

/// Ordinary least-squares slope of y on x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------
// fit

struct FitCommandOutput
{
    FitResult fit;
    Vector coefficients;  // original units
    double intercept = 0.0;
    json report;
};

/**
 * Standardizes the covariates, centers y, runs forward regression and maps
 * the coefficients back to original units:
 * beta_j = theta_j / scale_j, intercept = mean(y) - sum_j beta_j * mean_j.
 */
inline FitCommandOutput run_fit(const CsvTable& table, double t, std::size_t threads = 1)
{
    if (!table.y) throw Error(ErrorCode::malformed_input, "CSV has no 'y' column");
    if (table.names.empty()) throw Error(ErrorCode::malformed_input, "CSV has no covariates");
    const Standardized st = standardize_with_stats(table.x);
    const double y_mean = table.y->mean();

    Dataset ds;
    ds.x = st.x;
    ds.y = table.y->array() - y_mean;

    FitCommandOutput out;
    out.fit = forward_regression(ds, t, {std::nullopt, threads});
    out.coefficients = out.fit.theta_hat.cwiseQuotient(st.scale);
    out.intercept = y_mean - out.coefficients.dot(st.mean);

    json coefs = json::array();
    for (std::size_t j = 0; j < table.names.size(); ++j) {
        coefs.push_back(json{{"name", table.names[j]},
                             {"value", out.coefficients(static_cast<Eigen::Index>(j))},
                             {"standardized", out.fit.theta_hat(static_cast<Eigen::Index>(j))}});
    }
    out.report = json{{"schema_version", kSchemaVersion},
                      {"command", "fit"},
                      {"config", {{"threshold", t}}},
                      {"n", ds.n()},
                      {"p", ds.p()},
                      {"columns", table.names},
                      {"support", one_based(out.fit.support)},
                      {"support_names", names_of(out.fit.support, table.names)},
                      {"intercept", out.intercept},
                      {"coefficients", coefs},
                      {"loss", out.fit.loss},
                      {"stop_reason", to_string(out.fit.stop)},
                      {"trace", trace_json(out.fit.trace, table.names)}};
    return out;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions
{
    double safety = 1.1;
    /// Sparse-eigenvalue size used for the oracle threshold (clamped to p).
    std::size_t eig_size = 8;
    std::size_t threads = 1;
    bool timing = false;
};

struct ReplicationRecord
{
    std::uint64_t seed = 0;
    std::size_t s_hat = 0;
    std::size_t true_selected = 0;
    std::size_t false_selected = 0;
    double threshold = 0.0;
    bool threshold_floored = false;
    double phi_threshold = 0.0;
    ParameterErrors errors{};
    BoundReport bounds;
    ChainCheck chain;
    double runtime_ms = 0.0;

    bool passed() const
    {
        return bounds.pred_bound_holds && bounds.count_bound_holds() && chain.l1_ok &&
               chain.l2_ok;
    }
};

struct VerifyOutcome
{
    std::vector<ReplicationRecord> records;
    json report;
    bool all_pass = false;
};

/// One verification replication: simulate, threshold, fit, check bounds.
inline ReplicationRecord verify_replication(const SimConfig& cfg, const VerifyOptions& opt)
{
    const auto start = std::chrono::steady_clock::now();
    ReplicationRecord rec;
    rec.seed = cfg.seed;
    const Dataset ds = simulate_dataset(cfg);
    EigenvalueSource eig(gram(ds), EigMode::exact);

    rec.phi_threshold = eig.phi(std::min(opt.eig_size, cfg.p));
    const ThresholdChoice thr = oracle_threshold(ds, rec.phi_threshold, opt.safety);
    rec.threshold = thr.t;
    rec.threshold_floored = thr.floored;

    const FitResult fr = forward_regression(ds, thr.t);
    rec.s_hat = fr.s_hat();
    rec.errors = *fr.errors;
    rec.bounds = check_fit_bounds(fr, ds, thr.t, eig);
    rec.false_selected = rec.bounds.false_selections;
    rec.true_selected = rec.s_hat - rec.false_selected;
    rec.chain = check_error_chain(fr, rec.bounds.s0, eig.at(rec.s_hat + rec.bounds.s0));
    rec.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

inline void require_exact_budget(const SimConfig& cfg, std::size_t eig_size)
{
    const std::size_t k = std::min(eig_size, cfg.p);
    if (subsets_up_to(cfg.p, k) > kExactSubsetBudget) {
        throw Error(ErrorCode::budget_exceeded,
                    "exact sparse eigenvalues for p=" + std::to_string(cfg.p) + " at size " +
                        std::to_string(k) + " exceed the enumeration budget of " +
                        std::to_string(kExactSubsetBudget) +
                        " subsets; reduce p or --eig-size for bound verification");
    }
}

inline VerifyOutcome run_verify(const SimConfig& base, std::size_t replications,
                                const VerifyOptions& opt = {})
{
    validate(base);
    if (replications < 1) throw Error(ErrorCode::invalid_argument, "replications must be >= 1");
    require_exact_budget(base, opt.eig_size);

    VerifyOutcome out;
    out.records.resize(replications);
    detail::parallel_for(replications, opt.threads, [&](std::size_t r) {
        SimConfig cfg = base;
        cfg.seed = base.seed + r;
        out.records[r] = verify_replication(cfg, opt);
    });

    json per_seed = json::array();
    std::vector<double> pred, l1, l2, s_hat;
    std::size_t pass = 0, pred_pass = 0, count_pass = 0, chain_pass = 0, vacuous = 0;
    for (const auto& r : out.records) {
        json rec{{"seed", r.seed},
                 {"s_hat", r.s_hat},
                 {"true_selected", r.true_selected},
                 {"false_selected", r.false_selected},
                 {"threshold", r.threshold},
                 {"threshold_floored", r.threshold_floored},
                 {"phi_threshold", r.phi_threshold},
                 {"pred_error_norm", r.errors.pred_norm},
                 {"l1", r.errors.l1},
                 {"l2", r.errors.l2},
                 {"bounds", bound_json(r.bounds)},
                 {"chain",
                  {{"l1", r.chain.l1},
                   {"middle", r.chain.middle},
                   {"right", r.chain.right},
                   {"l1_ok", r.chain.l1_ok},
                   {"l2_ok", r.chain.l2_ok}}},
                 {"pass", r.passed()}};
        if (opt.timing) rec["runtime_ms"] = r.runtime_ms;
        per_seed.push_back(std::move(rec));
        pred.push_back(r.errors.pred_norm);
        l1.push_back(r.errors.l1);
        l2.push_back(r.errors.l2);
        s_hat.push_back(static_cast<double>(r.s_hat));
        pass += r.passed();
        pred_pass += r.bounds.pred_bound_holds;
        count_pass += r.bounds.count_bound_holds();
        chain_pass += r.chain.l1_ok && r.chain.l2_ok;
        vacuous += r.bounds.count_claims_vacuous();
    }
    out.all_pass = pass == replications;
    out.report = json{
        {"schema_version", kSchemaVersion},
        {"command", "verify"},
        {"config",
         {{"sim", base},
          {"replications", replications},
          {"safety", opt.safety},
          {"eig_size", std::min(opt.eig_size, base.p)},
          {"eig_method", "exact"}}},
        {"records", per_seed},
        {"aggregates",
         {{"pred_error_norm", summary_json(pred)},
          {"l1", summary_json(l1)},
          {"l2", summary_json(l2)},
          {"s_hat", summary_json(s_hat)}}},
        {"verdicts",
         {{"replications", replications},
          {"passed", pass},
          {"pred_bound_passed", pred_pass},
          {"count_bound_passed", count_pass},
          {"count_claims_vacuous", vacuous},
          {"chain_passed", chain_pass},
          {"all_pass", out.all_pass}}}};
    return out;
}

// ---------------------------------------------------------------------------
// rates

struct RatesOptions
{
    double safety = 1.1;
    std::size_t eig_size = 8;
    std::uint64_t draws = 2000;
    std::size_t threads = 1;
};

struct RatesRow
{
    std::size_t n;
    double median_pred_error;
    double median_s_hat;
};

struct RatesOutcome
{
    std::vector<RatesRow> rows;
    std::optional<double> slope;  // empty when some median error is ~0
    double max_s_hat_ratio = 0.0;  // max over n of median s_hat / s0
    std::string csv;
    json report;
};

/**
 * Sweeps n with p and s0 fixed. For each replication the oracle threshold
 * uses the sparse eigenvalue at `eig_size`, exact when it fits the budget and
 * sampled (an upper bound) otherwise. The slope is the OLS fit of
 * log(median error) on log(n).
 */
inline RatesOutcome run_rates(const SimConfig& base, const std::vector<std::size_t>& n_grid,
                              std::size_t replications, const RatesOptions& opt = {})
{
    validate(base);
    if (n_grid.size() < 4) throw Error(ErrorCode::invalid_argument, "n grid needs >= 4 points");
    if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
        std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
        throw Error(ErrorCode::invalid_argument, "n grid must be strictly increasing");
    }
    if (replications < 1) throw Error(ErrorCode::invalid_argument, "replications must be >= 1");

    const std::size_t jobs = n_grid.size() * replications;
    std::vector<double> pred(jobs), s_hat(jobs);
    detail::parallel_for(jobs, opt.threads, [&](std::size_t job) {
        SimConfig cfg = base;
        cfg.n = n_grid[job / replications];
        cfg.seed = base.seed + job % replications;
        const Dataset ds = simulate_dataset(cfg);
        EigenvalueSource eig(gram(ds), EigMode::automatic, opt.draws, cfg.seed);
        const double phi = eig.phi(std::min(opt.eig_size, cfg.p));
        const ThresholdChoice thr = oracle_threshold(ds, phi, opt.safety);
        const FitResult fr = forward_regression(ds, thr.t);
        pred[job] = fr.errors->pred_norm;
        s_hat[job] = static_cast<double>(fr.s_hat());
    });

    RatesOutcome out;
    std::vector<double> log_n, log_err;
    bool defined = true;
    std::ostringstream csv;
    csv << "n,median_pred_error_norm,median_s_hat\n";
    json rows = json::array();
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        const auto first = static_cast<std::ptrdiff_t>(g * replications);
        const auto last = first + static_cast<std::ptrdiff_t>(replications);
        const RatesRow row{n_grid[g],
                           median(std::vector<double>(pred.begin() + first, pred.begin() + last)),
                           median(std::vector<double>(s_hat.begin() + first, s_hat.begin() + last))};
        out.rows.push_back(row);
        csv << row.n << ',' << format_double(row.median_pred_error) << ','
            << format_double(row.median_s_hat) << '\n';
        rows.push_back(json{{"n", row.n},
                            {"median_pred_error_norm", row.median_pred_error},
                            {"median_s_hat", row.median_s_hat}});
        if (base.s0 > 0) {
            out.max_s_hat_ratio =
                std::max(out.max_s_hat_ratio, row.median_s_hat / static_cast<double>(base.s0));
        }
        if (!(row.median_pred_error > 1e-10)) defined = false;
        log_n.push_back(std::log(static_cast<double>(row.n)));
        log_err.push_back(std::log(row.median_pred_error));
    }
    if (defined) out.slope = ols_slope(log_n, log_err);
    out.csv = csv.str();

    json grid = json::array();
    for (std::size_t n : n_grid) grid.push_back(n);
    out.report = json{{"schema_version", kSchemaVersion},
                      {"command", "rates"},
                      {"config",
                       {{"sim", base},
                        {"n_grid", grid},
                        {"replications", replications},
                        {"safety", opt.safety},
                        {"eig_size", opt.eig_size},
                        {"draws", opt.draws}}},
                      {"rows", rows},
                      {"slope_defined", defined},
                      {"slope", defined ? json(*out.slope) : json(nullptr)},
                      {"max_median_s_hat_over_s0", out.max_s_hat_ratio}};
    return out;
}

// ---------------------------------------------------------------------------
// sparse-eig

inline json run_sparse_eig(const CsvTable& table, std::size_t s, EigMethod mode,
                           std::uint64_t draws, std::uint64_t seed, std::size_t threads = 1)
{
    if (table.names.empty()) throw Error(ErrorCode::malformed_input, "CSV has no covariates");
    const GramMatrix gm = gram(standardize(table.x));
    const SparseEigReport rep = mode == EigMethod::exact ? sparse_eig_exact(gm, s, threads)
                                                         : sparse_eig_sampled(gm, s, draws, seed);
    json config{{"s", s}, {"mode", mode}};
    if (mode == EigMethod::sampled) {
        config["draws"] = draws;
        config["seed"] = seed;
    }
    return json{{"schema_version", kSchemaVersion},
                {"command", "sparse-eig"},
                {"config", config},
                {"p", gm.p()},
                {"report", report_json(rep, table.names)}};
}

// ---------------------------------------------------------------------------
// compare

/**
 * Forward regression (capped at k steps when k is given) against the
 * exhaustive best subset of the same size as the greedy selection.
 */
inline json run_compare(const CsvTable& table, double t, std::optional<std::size_t> k,
                        std::size_t threads = 1)
{
    if (!table.y) throw Error(ErrorCode::malformed_input, "CSV has no 'y' column");
    if (table.names.empty()) throw Error(ErrorCode::malformed_input, "CSV has no covariates");
    Dataset ds;
    ds.x = standardize(table.x);
    ds.y = table.y->array() - table.y->mean();

    ForwardOptions fo;
    fo.threads = threads;
    if (k) fo.max_steps = std::min<std::size_t>(*k, static_cast<std::size_t>(std::min(ds.n(), ds.p())));
    const FitResult fr = forward_regression(ds, t, fo);
    const std::size_t size = fr.s_hat();
    const oracle::BestSubset best = oracle::best_subset(ds, size);

    json config{{"threshold", t}};
    if (k) config["k"] = *k;
    return json{{"schema_version", kSchemaVersion},
                {"command", "compare"},
                {"config", config},
                {"size", size},
                {"greedy",
                 {{"support", one_based(fr.support)},
                  {"support_names", names_of(fr.support, table.names)},
                  {"loss", fr.loss},
                  {"stop_reason", to_string(fr.stop)}}},
                {"exhaustive",
                 {{"support", one_based(best.support)},
                  {"support_names", names_of(best.support, table.names)},
                  {"loss", best.loss}}},
                {"loss_gap", fr.loss - best.loss},
                {"same_support", fr.support == best.support}};
}

} // namespace fwdreg
