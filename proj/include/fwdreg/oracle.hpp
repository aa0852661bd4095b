#pragma once

// Brute-force reference computations. They deliberately avoid the
// Gram-Schmidt and SVD routes of the main path: least squares goes through
// the normal equations with an explicit symmetric eigen-solve, and sparse
// eigenvalues through cyclic Jacobi rotations.

#include "fwdreg/error.hpp"
#include "fwdreg/linalg.hpp"
#include "fwdreg/sparse_eig.hpp"
#include "fwdreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fwdreg::oracle {

struct NormalEqFit
{
    Vector coef;  // length |s|
    double loss;
    bool full_rank;
};

/**
 * l(S) from the normal equations (X_S'X_S / n) b = X_S'y / n, solved through
 * an eigendecomposition. Directions with eigenvalue at or below
 * kRankTol^2 * largest are dropped (pseudo-inverse), which still gives the
 * correct minimal loss when X_S is rank deficient.
 */
inline NormalEqFit normal_equation_fit(const Dataset& ds, const IndexSet& s)
{
    const double n = static_cast<double>(ds.n());
    if (s.empty()) return {Vector(0), ds.y.squaredNorm() / n, true};
    const Matrix xs = gather_columns(ds.x, s);
    const Matrix a = xs.transpose() * xs / n;
    const Vector b = xs.transpose() * ds.y / n;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    const Vector& lam = es.eigenvalues();
    const double cut = kRankTol * kRankTol * std::max(lam(lam.size() - 1), 0.0);
    Vector rotated = es.eigenvectors().transpose() * b;
    bool full = true;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        if (lam(k) > cut) {
            rotated(k) /= lam(k);
        } else {
            rotated(k) = 0.0;
            full = false;
        }
    }
    Vector coef = es.eigenvectors() * rotated;
    const double loss = (ds.y - xs * coef).squaredNorm() / n;
    return {std::move(coef), loss, full};
}

inline double subset_loss(const Dataset& ds, const IndexSet& s)
{
    return normal_equation_fit(ds, s).loss;
}

/**
 * Delta_j l(S) = l(S u {j}) - l(S) from two independent solves. S itself must
 * have full column rank; if j lies in span(S) the result is ~0.
 */
inline double naive_delta_loss(const Dataset& ds, const IndexSet& s, std::size_t j)
{
    if (std::find(s.begin(), s.end(), j) != s.end()) {
        throw Error(ErrorCode::invalid_argument, "j already in S");
    }
    if (s.size() + 1 > static_cast<std::size_t>(ds.n())) {
        throw Error(ErrorCode::rank_deficient_support, "|S| + 1 exceeds n");
    }
    const NormalEqFit base = normal_equation_fit(ds, s);
    if (!base.full_rank) {
        throw Error(ErrorCode::rank_deficient_support, "base support is rank deficient");
    }
    IndexSet bigger = s;
    bigger.push_back(j);
    return normal_equation_fit(ds, bigger).loss - base.loss;
}

/**
 * -Delta_j l(S) through block inversion of the Gram matrix:
 * (E_n[x_j y] - G_jS G_SS^-1 E_n[x_S y])^2 / (G_jj - G_jS G_SS^-1 G_Sj).
 */
inline double block_inverse_gain(const Dataset& ds, const IndexSet& s, std::size_t j)
{
    const double n = static_cast<double>(ds.n());
    const auto jj = static_cast<Eigen::Index>(j);
    const Vector xj = ds.x.col(jj);
    const double gjj = xj.squaredNorm() / n;
    const double cjy = xj.dot(ds.y) / n;
    if (s.empty()) return cjy * cjy / gjj;
    const Matrix xs = gather_columns(ds.x, s);
    const Matrix gss = xs.transpose() * xs / n;
    const Vector gsj = xs.transpose() * xj / n;
    const Vector csy = xs.transpose() * ds.y / n;
    const Matrix inv = gss.inverse();
    const double schur = gjj - gsj.dot(inv * gsj);
    const double partial = cjy - gsj.dot(inv * csy);
    return partial * partial / schur;
}

struct BestSubset
{
    IndexSet support;
    double loss;
};

inline constexpr std::uint64_t kBestSubsetBudget = 1'000'000;

/// Exhaustive minimizer of l(S) over |S| = k; ties go to the lexicographically first set.
inline BestSubset best_subset(const Dataset& ds, std::size_t k)
{
    const auto p = static_cast<std::size_t>(ds.p());
    if (k > p) throw Error(ErrorCode::invalid_argument, "k exceeds p");
    if (binomial(p, k) > kBestSubsetBudget) {
        throw Error(ErrorCode::budget_exceeded,
                    "C(" + std::to_string(p) + ", " + std::to_string(k) + ") exceeds " +
                        std::to_string(kBestSubsetBudget) + " subsets");
    }
    IndexSet c(k);
    std::iota(c.begin(), c.end(), std::size_t{0});
    BestSubset best{c, subset_loss(ds, c)};
    if (k == 0) return best;
    while (detail::next_combination(c, p)) {
        const double loss = subset_loss(ds, c);
        if (loss < best.loss) best = {c, loss};
    }
    return best;
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline Vector jacobi_eigenvalues(Matrix a, int max_sweeps = 100)
{
    const Eigen::Index k = a.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = i + 1; j < k; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = i + 1; j < k; ++j) {
                if (a(i, j) == 0.0) continue;
                const double theta = (a(j, j) - a(i, i)) / (2.0 * a(i, j));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index r = 0; r < k; ++r) {
                    const double ari = a(r, i);
                    const double arj = a(r, j);
                    a(r, i) = c * ari - s * arj;
                    a(r, j) = s * ari + c * arj;
                }
                for (Eigen::Index r = 0; r < k; ++r) {
                    const double air = a(i, r);
                    const double ajr = a(j, r);
                    a(i, r) = c * air - s * ajr;
                    a(j, r) = s * air + c * ajr;
                }
            }
        }
    }
    Vector d = a.diagonal();
    std::sort(d.data(), d.data() + d.size());
    return d;
}

struct EnumeratedEig
{
    double value = std::numeric_limits<double>::infinity();
    IndexSet witness;
};

/// Minimum over every subset of size 1..s (no interlacing shortcut), via Jacobi.
inline EnumeratedEig enumerate_sparse_eig(const Matrix& g, std::size_t s)
{
    const auto p = static_cast<std::size_t>(g.rows());
    EnumeratedEig best;
    IndexSet current;
    auto recurse = [&](auto&& self, std::size_t start) -> void {
        if (!current.empty()) {
            Matrix sub(current.size(), current.size());
            for (std::size_t a = 0; a < current.size(); ++a)
                for (std::size_t b = 0; b < current.size(); ++b)
                    sub(a, b) = g(current[a], current[b]);
            const double v = jacobi_eigenvalues(sub)(0);
            if (v < best.value) best = {v, current};
        }
        if (current.size() == s) return;
        for (std::size_t j = start; j < p; ++j) {
            current.push_back(j);
            self(self, j + 1);
            current.pop_back();
        }
    };
    recurse(recurse, 0);
    return best;
}

} // namespace fwdreg::oracle
