#pragma once

#include "fwdreg/error.hpp"
#include "fwdreg/parallel.hpp"
#include "fwdreg/types.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace fwdreg {

enum class EigMethod { exact, sampled };

inline const char* to_string(EigMethod m)
{
    return m == EigMethod::exact ? "exact" : "sampled";
}

/**
 * Minimum s-sparse eigenvalue of a Gram matrix together with the subset that
 * attains it. For `sampled` reports the value is only an upper bound on the
 * true minimum.
 */
struct SparseEigReport
{
    std::size_t s = 0;
    double value = std::numeric_limits<double>::infinity();
    EigMethod method = EigMethod::exact;
    IndexSet witness;
    std::uint64_t subsets_examined = 0;
};

/// Largest subset count sparse_eig_exact will enumerate.
inline constexpr std::uint64_t kExactSubsetBudget = 10'000'000;

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // r * num / i is exact at every step; guard the multiplication.
        const std::uint64_t g = std::gcd(r, i);
        const std::uint64_t r_red = r / g;
        const std::uint64_t num_red = num / (i / g);
        if (r_red > std::numeric_limits<std::uint64_t>::max() / num_red) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        r = r_red * num_red;
    }
    return r;
}

/// Number of nonempty subsets of size <= s drawn from p columns, saturating.
inline std::uint64_t subsets_up_to(std::uint64_t p, std::uint64_t s)
{
    std::uint64_t total = 0;
    for (std::uint64_t k = 1; k <= std::min(p, s); ++k) {
        const std::uint64_t c = binomial(p, k);
        if (c > std::numeric_limits<std::uint64_t>::max() - total) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        total += c;
    }
    return total;
}

/// Smallest eigenvalue of a small dense symmetric matrix (tridiagonal QL).
inline double min_eigenvalue(const Matrix& sym)
{
    if (sym.rows() == 1) return sym(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

namespace detail {

inline void principal_submatrix(const Matrix& g, const IndexSet& s, Matrix& out)
{
    const auto k = static_cast<Eigen::Index>(s.size());
    out.resize(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            out(a, b) = g(static_cast<Eigen::Index>(s[a]), static_cast<Eigen::Index>(s[b]));
        }
    }
}

/// The `rank`-th size-k subset of {0..p-1} in lexicographic order.
inline IndexSet unrank_combination(std::size_t p, std::size_t k, std::uint64_t rank)
{
    IndexSet out;
    out.reserve(k);
    std::size_t next = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
        for (std::size_t v = next; v < p; ++v) {
            const std::uint64_t with_v = binomial(p - v - 1, k - slot - 1);
            if (rank < with_v) {
                out.push_back(v);
                next = v + 1;
                break;
            }
            rank -= with_v;
        }
    }
    return out;
}

/// Advances to the next size-k subset in lexicographic order.
inline bool next_combination(IndexSet& c, std::size_t p)
{
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < p - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

struct Candidate
{
    double value = std::numeric_limits<double>::infinity();
    IndexSet witness;
};

/// Smaller value wins; equal values go to the lexicographically smaller witness.
inline bool better(const Candidate& a, const Candidate& b)
{
    if (a.value != b.value) return a.value < b.value;
    return std::lexicographical_compare(a.witness.begin(), a.witness.end(),
                                        b.witness.begin(), b.witness.end());
}

/**
 * Scans `count` size-k subsets starting at lexicographic rank `first`.
 * A Cholesky factorization of G_SS - (best + margin) I succeeding proves
 * lambda_min(G_SS) exceeds the running best, so the eigensolver only runs on
 * subsets that can still win or tie.
 */
inline Candidate scan_block(const Matrix& g, std::size_t k, std::uint64_t first,
                            std::uint64_t count)
{
    Candidate best;
    if (count == 0) return best;
    const auto p = static_cast<std::size_t>(g.rows());
    IndexSet c = unrank_combination(p, k, first);
    Matrix sub;
    Eigen::LLT<Matrix> llt(static_cast<Eigen::Index>(k));
    for (std::uint64_t i = 0; i < count; ++i) {
        principal_submatrix(g, c, sub);
        bool evaluate = true;
        if (std::isfinite(best.value) && k > 1) {
            const double shift = best.value + 1e-9 * std::max(1.0, std::abs(best.value));
            sub.diagonal().array() -= shift;
            llt.compute(sub);
            evaluate = llt.info() != Eigen::Success;
            sub.diagonal().array() += shift;
        }
        if (evaluate) {
            const Candidate cand{min_eigenvalue(sub), c};
            if (better(cand, best)) best = cand;
        }
        if (i + 1 < count) next_combination(c, p);
    }
    return best;
}

} // namespace detail

/**
 * Exact minimum s-sparse eigenvalue by enumeration. For s < p only subsets of
 * size exactly s are scanned: deleting a row and column of a symmetric matrix
 * cannot lower its smallest eigenvalue, so smaller subsets never win. For
 * s >= p every size is scanned.
 *
 * Throws BudgetExceeded when more than kExactSubsetBudget subsets would be
 * needed.
 */
inline SparseEigReport sparse_eig_exact(const GramMatrix& gm, std::size_t s, std::size_t threads = 1)
{
    const auto p = static_cast<std::size_t>(gm.p());
    if (s == 0 || p == 0) {
        throw Error(ErrorCode::invalid_argument, "sparse eigenvalue needs s >= 1 and p >= 1");
    }
    const std::uint64_t budget_needed = subsets_up_to(p, s);
    if (budget_needed > kExactSubsetBudget) {
        throw Error(ErrorCode::budget_exceeded,
                    "exact enumeration over p=" + std::to_string(p) + ", s=" +
                        std::to_string(s) + " exceeds " + std::to_string(kExactSubsetBudget) +
                        " subsets; use the sampled method");
    }

    SparseEigReport rep;
    rep.s = s;
    rep.method = EigMethod::exact;

    std::vector<std::size_t> sizes;
    if (s >= p) {
        for (std::size_t k = 1; k <= p; ++k) sizes.push_back(k);
    } else {
        sizes.push_back(s);
    }

    detail::Candidate best;
    for (std::size_t k : sizes) {
        const std::uint64_t total = binomial(p, k);
        const std::size_t blocks =
            static_cast<std::size_t>(std::min<std::uint64_t>(std::max<std::size_t>(threads, 1), total));
        std::vector<detail::Candidate> partial(blocks);
        const std::uint64_t per = (total + blocks - 1) / blocks;
        detail::parallel_for(blocks, threads, [&](std::size_t b) {
            const std::uint64_t first = per * b;
            const std::uint64_t last = std::min(total, first + per);
            if (first < last) partial[b] = detail::scan_block(gm.g, k, first, last - first);
        });
        for (const auto& c : partial) {
            if (!c.witness.empty() && detail::better(c, best)) best = c;
        }
        rep.subsets_examined += total;
    }
    rep.value = best.value;
    rep.witness = best.witness;
    return rep;
}

/**
 * Sampled surrogate for large p: minimum over `draws` uniform size-s subsets
 * plus, for every column j, the group made of j and its s-1 most correlated
 * columns. The result is an upper bound on the exact value. When `draws`
 * reaches C(p, s) the size-s family is enumerated instead, and for s >= p the
 * full matrix is used, so in both cases the value is exact.
 */
inline SparseEigReport sparse_eig_sampled(const GramMatrix& gm, std::size_t s,
                                          std::uint64_t draws, std::uint64_t seed)
{
    const auto p = static_cast<std::size_t>(gm.p());
    if (s == 0 || p == 0) {
        throw Error(ErrorCode::invalid_argument, "sparse eigenvalue needs s >= 1 and p >= 1");
    }
    if (draws < 1) throw Error(ErrorCode::invalid_argument, "draws must be >= 1");

    SparseEigReport rep;
    rep.s = s;
    rep.method = EigMethod::sampled;
    detail::Candidate best;
    Matrix sub;
    auto consider = [&](const IndexSet& subset) {
        detail::principal_submatrix(gm.g, subset, sub);
        const detail::Candidate cand{min_eigenvalue(sub), subset};
        if (detail::better(cand, best)) best = cand;
        ++rep.subsets_examined;
    };

    const std::size_t k = std::min(s, p);
    if (draws >= binomial(p, k)) {
        IndexSet c(k);
        std::iota(c.begin(), c.end(), std::size_t{0});
        do {
            consider(c);
        } while (detail::next_combination(c, p));
    } else {
        std::mt19937_64 rng(seed);
        IndexSet pool(p);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::uint64_t d = 0; d < draws; ++d) {
            // Partial Fisher-Yates: the first k slots become a uniform k-subset.
            for (std::size_t i = 0; i < k; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, p - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            IndexSet subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
            std::sort(subset.begin(), subset.end());
            consider(subset);
        }

        IndexSet order(p);
        for (std::size_t j = 0; j < p; ++j) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            const auto row = gm.g.row(static_cast<Eigen::Index>(j));
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (a == j || b == j) return a == j && b != j;
                return std::abs(row(static_cast<Eigen::Index>(a))) >
                       std::abs(row(static_cast<Eigen::Index>(b)));
            });
            IndexSet group(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
            std::sort(group.begin(), group.end());
            consider(group);
        }
    }
    rep.value = best.value;
    rep.witness = best.witness;
    return rep;
}

} // namespace fwdreg
