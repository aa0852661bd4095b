#pragma once

#include "fwdreg/error.hpp"
#include "fwdreg/forward_select.hpp"
#include "fwdreg/linalg.hpp"
#include "fwdreg/sparse_eig.hpp"
#include "fwdreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fwdreg {

/// Upper bound on the real Grothendieck constant used inside C2(m).
inline constexpr double kGrothendieckUpper = 1.783;

/// C1 = sqrt(s_hat + s0) / phi * (2 * noise_sup + sqrt(t)).
inline double constant_c1(std::size_t s_hat, std::size_t s0, double phi, double noise_sup, double t)
{
    if (!(phi > 0.0)) throw Error(ErrorCode::nonpositive_eigenvalue, "phi must be > 0");
    if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "threshold must be > 0");
    return std::sqrt(static_cast<double>(s_hat + s0)) / phi * (2.0 * noise_sup + std::sqrt(t));
}

/// C2(m) = 1 + 72 * 1.783^2 * phi^-5, with phi the (m + s0)-sparse eigenvalue.
inline double constant_c2(std::size_t /*m*/, std::size_t /*s0*/, double phi)
{
    if (!(phi > 0.0)) throw Error(ErrorCode::nonpositive_eigenvalue, "phi must be > 0");
    return 1.0 + 72.0 * kGrothendieckUpper * kGrothendieckUpper * std::pow(phi, -5.0);
}

/// sqrt(t) >= 2 * noise_sup / phi (non-strict).
inline bool threshold_condition(double t, double phi, double noise_sup)
{
    if (!(phi > 0.0)) throw Error(ErrorCode::nonpositive_eigenvalue, "phi must be > 0");
    if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "threshold must be > 0");
    return std::sqrt(t) >= 2.0 * noise_sup / phi;
}

/// ||E_n[eps_i x_i]||_inf; needs ground truth.
inline double noise_sup(const Dataset& ds)
{
    if (!ds.truth) throw Error(ErrorCode::missing_ground_truth, "dataset has no ground truth");
    return (ds.x.transpose() * ds.truth->epsilon).cwiseAbs().maxCoeff() /
           static_cast<double>(ds.n());
}

inline std::size_t support_size(const Vector& theta)
{
    return static_cast<std::size_t>((theta.array() != 0.0).count());
}

enum class EigMode { exact, sampled, automatic };

/**
 * Lazily computed, cached sparse eigenvalues of one Gram matrix. Sizes below
 * 1 are evaluated at 1 (singletons) and sizes above p at p. In `automatic`
 * mode the exact method is used whenever it fits the enumeration budget.
 */
class EigenvalueSource
{
public:
    EigenvalueSource(GramMatrix gm, EigMode mode, std::uint64_t draws = 2000,
                     std::uint64_t seed = 0, std::size_t threads = 1)
        : gm_(std::move(gm)), mode_(mode), draws_(draws), seed_(seed), threads_(threads)
    {}

    const SparseEigReport& at(std::size_t s)
    {
        const auto p = static_cast<std::size_t>(gm_.p());
        s = std::clamp<std::size_t>(s, 1, p);
        auto it = cache_.find(s);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(s, compute(s)).first->second;
    }

    double phi(std::size_t s) { return at(s).value; }

    const GramMatrix& gram() const { return gm_; }

private:
    SparseEigReport compute(std::size_t s) const
    {
        const bool use_exact =
            mode_ == EigMode::exact ||
            (mode_ == EigMode::automatic &&
             subsets_up_to(static_cast<std::uint64_t>(gm_.p()), s) <= kExactSubsetBudget);
        if (use_exact) return sparse_eig_exact(gm_, s, threads_);
        return sparse_eig_sampled(gm_, s, draws_, seed_ + s);
    }

    GramMatrix gm_;
    EigMode mode_;
    std::uint64_t draws_;
    std::uint64_t seed_;
    std::size_t threads_;
    std::map<std::size_t, SparseEigReport> cache_;
};

struct SelectionCountCheck
{
    std::size_t m;
    double phi;  // sparse eigenvalue at m + s0
    double c2;
    bool holds;  // m <= C2(m) * s0
};

/**
 * Prediction-error and selection-count verdicts for one fitted instance.
 * With a sampled eigenvalue source `caveat` is set: sampled values overstate
 * phi, so a failed check is inconclusive while a passed one is still genuine.
 */
struct BoundReport
{
    std::size_t s_hat = 0;
    std::size_t s0 = 0;
    std::size_t false_selections = 0;  // |S_hat \ S0|
    double threshold = 0.0;
    double noise_sup = 0.0;
    double phi_pred = 0.0;  // sparse eigenvalue at s_hat + s0
    double c1 = 0.0;
    double pred_error_norm = 0.0;
    bool pred_bound_holds = false;
    std::vector<SelectionCountCheck> c2_of_m;
    bool threshold_ok = false;  // premise met for every m in [0, false_selections]
    EigMethod eig_method = EigMethod::exact;
    bool caveat = false;

    bool count_claims_vacuous() const { return c2_of_m.empty(); }
    bool count_bound_holds() const
    {
        return std::all_of(c2_of_m.begin(), c2_of_m.end(),
                           [](const SelectionCountCheck& c) { return c.holds; });
    }
};

inline BoundReport check_fit_bounds(const FitResult& fr, const Dataset& ds, double t,
                                    EigenvalueSource& eig)
{
    if (!ds.truth || !fr.errors) {
        throw Error(ErrorCode::missing_ground_truth, "bound verification needs ground truth");
    }
    const Vector& theta0 = ds.truth->theta0;

    BoundReport rep;
    rep.s_hat = fr.s_hat();
    rep.s0 = support_size(theta0);
    for (std::size_t j : fr.support) {
        if (theta0(static_cast<Eigen::Index>(j)) == 0.0) ++rep.false_selections;
    }
    rep.threshold = t;
    rep.noise_sup = noise_sup(ds);
    rep.pred_error_norm = fr.errors->pred_norm;

    const SparseEigReport& pred_eig = eig.at(rep.s_hat + rep.s0);
    rep.eig_method = pred_eig.method;
    rep.phi_pred = pred_eig.value;
    rep.c1 = constant_c1(rep.s_hat, rep.s0, rep.phi_pred, rep.noise_sup, t);
    // Relative slack of a few ulps covers rounding in the measured norm.
    rep.pred_bound_holds = rep.pred_error_norm <= rep.c1 * (1.0 + 1e-12);

    rep.threshold_ok = true;
    for (std::size_t m = 0; m <= rep.false_selections; ++m) {
        const SparseEigReport& e = eig.at(m + rep.s0);
        if (e.method == EigMethod::sampled) rep.eig_method = EigMethod::sampled;
        if (!threshold_condition(t, e.value, rep.noise_sup)) {
            rep.threshold_ok = false;
            continue;
        }
        const double c2 = constant_c2(m, rep.s0, e.value);
        rep.c2_of_m.push_back(
            {m, e.value, c2, static_cast<double>(m) <= c2 * static_cast<double>(rep.s0)});
    }
    rep.caveat = rep.eig_method == EigMethod::sampled;
    return rep;
}

struct ChainCheck
{
    double l1 = 0.0;
    double middle = 0.0;  // sqrt(s_hat + s0) * l2
    double right = 0.0;   // sqrt(s_hat + s0) / phi * pred_error_norm
    bool l1_ok = false;   // l1 <= middle
    bool l2_ok = false;   // middle <= right
};

/**
 * Checks ||d||_1 <= sqrt(s_hat + s0) ||d||_2 <= sqrt(s_hat + s0) / phi * pred
 * for d = theta0 - theta_hat, with 1e-9 relative slack. `eig` must be an
 * exact report at size s_hat + s0.
 */
inline ChainCheck check_error_chain(const FitResult& fr, std::size_t s0, const SparseEigReport& eig)
{
    if (!fr.errors) throw Error(ErrorCode::missing_ground_truth, "fit has no parameter errors");
    if (eig.method != EigMethod::exact) {
        throw Error(ErrorCode::invalid_argument, "parameter-error chain needs an exact eigenvalue");
    }
    if (!(eig.value > 0.0)) throw Error(ErrorCode::nonpositive_eigenvalue, "phi must be > 0");
    constexpr double rel = 1e-9;
    const double root = std::sqrt(static_cast<double>(fr.s_hat() + s0));
    ChainCheck c;
    c.l1 = fr.errors->l1;
    c.middle = root * fr.errors->l2;
    c.right = root / eig.value * fr.errors->pred_norm;
    c.l1_ok = c.l1 <= c.middle * (1.0 + rel);
    c.l2_ok = c.middle <= c.right * (1.0 + rel);
    return c;
}

} // namespace fwdreg
