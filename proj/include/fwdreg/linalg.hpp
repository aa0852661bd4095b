#pragma once

#include "fwdreg/error.hpp"
#include "fwdreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fwdreg {

/// Squared (1/n)-norm below which a residualized column counts as collinear.
inline constexpr double kCollinearTol = 1e-10;

/// Smallest-to-largest singular value ratio accepted by least squares.
inline constexpr double kRankTol = 1e-10;

/// Standardized design plus the per-column shift and scale that produced it.
struct Standardized
{
    Matrix x;
    Vector mean;
    Vector scale;
};

/**
 * Centers every column and scales it to unit (1/n) second moment.
 * A column whose centered values are all zero (up to rounding relative to
 * its magnitude) raises ZeroVarianceColumn with the column index attached.
 */
inline Standardized standardize_with_stats(const Matrix& raw)
{
    const Eigen::Index n = raw.rows();
    const Eigen::Index p = raw.cols();
    if (n < 2 || p < 1) {
        throw Error(ErrorCode::invalid_argument,
                    "standardize needs n >= 2 rows and p >= 1 columns");
    }

    Standardized out{Matrix(n, p), Vector(p), Vector(p)};
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = raw.col(j);
        const double mean = col.mean();
        Vector centered = col.array() - mean;
        const double m2 = centered.squaredNorm() / static_cast<double>(n);
        const double magnitude = col.cwiseAbs().maxCoeff();
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * magnitude;
        if (!(m2 > floor * floor) || !std::isfinite(m2)) {
            throw Error(ErrorCode::zero_variance_column,
                        "column " + std::to_string(j) + " has zero sample variance",
                        static_cast<std::size_t>(j));
        }
        const double scale = std::sqrt(m2);
        out.x.col(j) = centered / scale;
        out.mean(j) = mean;
        out.scale(j) = scale;
    }
    return out;
}

inline Matrix standardize(const Matrix& raw)
{
    return standardize_with_stats(raw).x;
}

/// True when every column has |E_n[x]| <= tol and |E_n[x^2] - 1| <= tol.
inline bool is_standardized(const Matrix& x, double tol = 1e-8)
{
    const double n = static_cast<double>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (std::abs(x.col(j).sum() / n) > tol) return false;
        if (std::abs(x.col(j).squaredNorm() / n - 1.0) > tol) return false;
    }
    return true;
}

inline GramMatrix gram(const Matrix& x)
{
    GramMatrix out{x.transpose() * x / static_cast<double>(x.rows())};
    // Symmetrize exactly; the product is symmetric only up to rounding.
    out.g = 0.5 * (out.g + out.g.transpose()).eval();
    return out;
}

inline GramMatrix gram(const Dataset& ds) { return gram(ds.x); }

inline Matrix gather_columns(const Matrix& x, const IndexSet& s)
{
    Matrix out(x.rows(), static_cast<Eigen::Index>(s.size()));
    for (std::size_t k = 0; k < s.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(s[k]));
    }
    return out;
}

struct LeastSquaresFit
{
    Vector theta;  // length p, zero off the support
    double loss;   // E_n[(y - x'theta)^2]
};

/**
 * Least squares restricted to columns `s`, solved through a thin SVD of X_s.
 * Rejects supports whose smallest singular value is not above
 * kRankTol times the largest.
 */
inline LeastSquaresFit least_squares_on_support(const Dataset& ds, const IndexSet& s)
{
    const Eigen::Index n = ds.n();
    const Eigen::Index p = ds.p();
    LeastSquaresFit fit{Vector::Zero(p), 0.0};
    if (s.empty()) {
        fit.loss = ds.y.squaredNorm() / static_cast<double>(n);
        return fit;
    }
    for (std::size_t j : s) {
        if (j >= static_cast<std::size_t>(p)) {
            throw Error(ErrorCode::invalid_argument, "support index out of range");
        }
    }
    if (static_cast<Eigen::Index>(s.size()) > n) {
        throw Error(ErrorCode::rank_deficient_support, "support larger than n");
    }

    const Matrix xs = gather_columns(ds.x, s);
    Eigen::JacobiSVD<Matrix> svd(xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > kRankTol * sv(0))) {
        throw Error(ErrorCode::rank_deficient_support,
                    "selected columns are numerically collinear");
    }
    const Vector coef = svd.solve(ds.y);
    for (std::size_t k = 0; k < s.size(); ++k) {
        fit.theta(static_cast<Eigen::Index>(s[k])) = coef(static_cast<Eigen::Index>(k));
    }
    fit.loss = (ds.y - xs * coef).squaredNorm() / static_cast<double>(n);
    return fit;
}

/// Loss of an arbitrary coefficient vector: E_n[(y - x'theta)^2].
inline double loss_of(const Dataset& ds, const Vector& theta)
{
    return (ds.y - ds.x * theta).squaredNorm() / static_cast<double>(ds.n());
}

/**
 * Incremental least-squares state for a growing support. `basis` holds the
 * selected columns orthonormalized under <u, v> = u'v / n, `residual` is y
 * minus its projection onto that span, and `residual_loss` = E_n[residual^2].
 */
struct OrthoState
{
    IndexSet support;
    Matrix basis;
    Vector residual;
    double residual_loss = 0.0;

    static OrthoState empty(const Dataset& ds)
    {
        OrthoState st;
        st.basis = Matrix(ds.n(), 0);
        st.residual = ds.y;
        st.residual_loss = ds.y.squaredNorm() / static_cast<double>(ds.n());
        return st;
    }

    bool contains(std::size_t j) const
    {
        return std::find(support.begin(), support.end(), j) != support.end();
    }
};

namespace detail {

inline void project_out(const Matrix& basis, Vector& v, double n)
{
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        const double c = basis.col(k).dot(v) / n;
        v.noalias() -= c * basis.col(k);
    }
}

} // namespace detail

/**
 * Column `column` with its projection onto span(basis) removed, by modified
 * Gram-Schmidt. A second pass runs when the first leaves less than 0.7 of
 * the original norm.
 */
inline Vector residualize(const Matrix& basis, const Eigen::Ref<const Vector>& column)
{
    const double n = static_cast<double>(column.size());
    Vector v = column;
    if (basis.cols() == 0) return v;
    const double before = v.norm();
    detail::project_out(basis, v, n);
    if (v.norm() < 0.7 * before) detail::project_out(basis, v, n);
    return v;
}

/// Returns `state` extended by column j; `state` itself is left untouched.
inline OrthoState ortho_extend(const OrthoState& state, std::size_t j, const Dataset& ds)
{
    if (j >= static_cast<std::size_t>(ds.p())) {
        throw Error(ErrorCode::invalid_argument, "column index out of range");
    }
    if (state.contains(j)) {
        throw Error(ErrorCode::invalid_argument,
                    "column " + std::to_string(j) + " is already in the support");
    }
    const double n = static_cast<double>(ds.n());
    Vector v = residualize(state.basis, ds.x.col(static_cast<Eigen::Index>(j)));
    const double norm2 = v.squaredNorm() / n;
    if (!(norm2 > kCollinearTol)) {
        throw Error(ErrorCode::collinear_candidate,
                    "column " + std::to_string(j) + " lies in the span of the support", j);
    }
    v /= std::sqrt(norm2);

    OrthoState next;
    next.support = state.support;
    next.support.push_back(j);
    next.basis.resize(ds.n(), state.basis.cols() + 1);
    next.basis.leftCols(state.basis.cols()) = state.basis;
    next.basis.col(state.basis.cols()) = v;
    next.residual = state.residual - (v.dot(state.residual) / n) * v;
    next.residual_loss = next.residual.squaredNorm() / n;
    return next;
}

} // namespace fwdreg
