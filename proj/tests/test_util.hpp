#pragma once

#include "fwdreg/linalg.hpp"
#include "fwdreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fwdreg::testing {

/// Standardized Gaussian design with y = x * beta + noise (beta dense, N(0,1)).
inline Dataset random_dataset(std::size_t n, std::size_t p, std::mt19937_64& rng,
                              double noise = 0.5)
{
    std::normal_distribution<double> normal;
    Matrix raw(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
        for (Eigen::Index j = 0; j < raw.cols(); ++j) raw(i, j) = normal(rng);
    Dataset ds;
    ds.x = standardize(raw);
    Vector beta(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = normal(rng);
    ds.y = ds.x * beta;
    for (Eigen::Index i = 0; i < ds.y.size(); ++i) ds.y(i) += noise * normal(rng);
    return ds;
}

/// k distinct indices from [0, p), in random order.
inline IndexSet random_subset(std::size_t p, std::size_t k, std::mt19937_64& rng)
{
    IndexSet all(p);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    return all;
}

/**
 * Four rows, three +/-1 columns that are centered, unit second moment and
 * mutually orthogonal under the (1/n) inner product.
 */
inline Matrix hadamard_design()
{
    Matrix x(4, 3);
    x << 1, 1, 1,
         1, -1, -1,
         -1, 1, -1,
         -1, -1, 1;
    return x;
}

/// |a - b| <= rel * max(|a|, |b|, scale).
inline bool close_rel(double a, double b, double rel, double scale = 0.0)
{
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), scale});
}

} // namespace fwdreg::testing
