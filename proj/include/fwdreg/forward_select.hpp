#pragma once

#include "fwdreg/error.hpp"
#include "fwdreg/linalg.hpp"
#include "fwdreg/parallel.hpp"
#include "fwdreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace fwdreg {

/// Score assigned to covariates that cannot enter: already selected or collinear.
inline constexpr double kExcludedScore = -std::numeric_limits<double>::infinity();

/**
 * Loss reduction -Delta_j l(S) for every column j, computed from the
 * incremental state as (E_n[xr_j r])^2 / E_n[xr_j^2], where xr_j is column j
 * residualized against the basis and r is the current residual.
 *
 * Each entry depends only on its own column and the shared read-only state,
 * so the result is identical for any `threads` value.
 */
inline Vector score_all(const OrthoState& state, const Dataset& ds, std::size_t threads = 1)
{
    const auto p = static_cast<std::size_t>(ds.p());
    const double n = static_cast<double>(ds.n());
    Vector scores = Vector::Constant(ds.p(), kExcludedScore);

    std::vector<char> excluded(p, 0);
    for (std::size_t j : state.support) excluded[j] = 1;

    detail::parallel_for(p, threads, [&](std::size_t j) {
        if (excluded[j]) return;
        const Vector v = residualize(state.basis, ds.x.col(static_cast<Eigen::Index>(j)));
        const double den = v.squaredNorm() / n;
        if (!(den > kCollinearTol)) return;
        const double num = v.dot(state.residual) / n;
        scores(static_cast<Eigen::Index>(j)) = num * num / den;
    });
    return scores;
}

/// Index of the largest score strictly above t (lowest index on ties).
inline std::optional<std::size_t> select_above(const Vector& scores, double t)
{
    std::optional<std::size_t> best;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
        if (!(scores(j) > t)) continue;
        if (!best || scores(j) > scores(static_cast<Eigen::Index>(*best))) {
            best = static_cast<std::size_t>(j);
        }
    }
    return best;
}

struct SelectionStep
{
    std::size_t index;
    double gain;        // -Delta_j l(S) at selection time
    double loss_after;  // l(S u {j})
};

struct SelectionTrace
{
    std::vector<SelectionStep> steps;
    double threshold = 0.0;
    double initial_loss = 0.0;  // l(empty set) = E_n[y^2]
};

enum class StopReason {
    threshold,     // no remaining gain exceeded t
    step_budget,   // max_steps reached while some gain still exceeded t
};

struct ParameterErrors
{
    double l2;
    double l1;
    double pred_norm;  // E_n[(x'theta0 - x'theta_hat)^2]^{1/2}
};

struct FitResult
{
    SelectionTrace trace;
    Vector theta_hat;
    IndexSet support;  // ascending
    double loss = 0.0;
    StopReason stop = StopReason::threshold;
    std::optional<ParameterErrors> errors;

    std::size_t s_hat() const { return support.size(); }
    bool budget_exhausted() const { return stop == StopReason::step_budget; }
};

inline ParameterErrors parameter_errors(const Dataset& ds, const Vector& theta_hat,
                                        const Vector& theta0)
{
    if (theta0.size() != ds.p() || theta_hat.size() != ds.p()) {
        throw Error(ErrorCode::invalid_argument, "coefficient vectors must have length p");
    }
    const Vector diff = theta0 - theta_hat;
    const double pred2 = (ds.x * diff).squaredNorm() / static_cast<double>(ds.n());
    return {diff.norm(), diff.lpNorm<1>(), std::sqrt(pred2)};
}

struct ForwardOptions
{
    /// Defaults to min(n, p).
    std::optional<std::size_t> max_steps;
    std::size_t threads = 1;
};

/// Rebuilds the incremental state for a support given in selection order.
inline OrthoState replay_state(const Dataset& ds, const IndexSet& order)
{
    OrthoState st = OrthoState::empty(ds);
    for (std::size_t j : order) st = ortho_extend(st, j, ds);
    return st;
}

/**
 * Thresholded forward regression. Each step scores all unselected columns,
 * adds the best one whose gain is strictly greater than `t`, and stops when
 * none qualifies. The final coefficients come from a direct least-squares
 * refit on the selected set.
 */
inline FitResult forward_regression(const Dataset& ds, double t, const ForwardOptions& opts = {})
{
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw Error(ErrorCode::invalid_argument, "threshold must be finite and > 0");
    }
    if (!is_standardized(ds.x)) {
        throw Error(ErrorCode::not_standardized,
                    "design columns must have mean 0 and unit second moment");
    }
    const auto rank_cap = static_cast<std::size_t>(std::min(ds.n(), ds.p()));
    const std::size_t max_steps = opts.max_steps.value_or(rank_cap);
    if (max_steps > rank_cap) {
        throw Error(ErrorCode::invalid_argument, "max_steps exceeds min(n, p)");
    }

    FitResult fr;
    fr.trace.threshold = t;
    OrthoState state = OrthoState::empty(ds);
    fr.trace.initial_loss = state.residual_loss;

    while (true) {
        const Vector scores = score_all(state, ds, opts.threads);
        const auto pick = select_above(scores, t);
        if (!pick) {
            fr.stop = StopReason::threshold;
            break;
        }
        if (state.support.size() >= max_steps) {
            fr.stop = StopReason::step_budget;
            break;
        }
        state = ortho_extend(state, *pick, ds);
        fr.trace.steps.push_back(
            {*pick, scores(static_cast<Eigen::Index>(*pick)), state.residual_loss});
    }

    fr.support = state.support;
    std::sort(fr.support.begin(), fr.support.end());
    const LeastSquaresFit refit = least_squares_on_support(ds, fr.support);
    fr.theta_hat = refit.theta;
    fr.loss = refit.loss;
    if (ds.truth) fr.errors = parameter_errors(ds, fr.theta_hat, ds.truth->theta0);
    return fr;
}

} // namespace fwdreg
