#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace fwdreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered list of zero-based column indices.
using IndexSet = std::vector<std::size_t>;

/// Known data-generating truth, available for simulated data only.
struct GroundTruth
{
    Vector theta0;
    Vector epsilon;
};

/**
 * Design matrix (n observations by p covariates), response, and optional
 * ground truth. When `truth` is present, `y == x * theta0 + epsilon`.
 */
struct Dataset
{
    Matrix x;
    Vector y;
    std::optional<GroundTruth> truth;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }
};

/// Symmetric p-by-p matrix (1/n) X'X.
struct GramMatrix
{
    Matrix g;

    Eigen::Index p() const { return g.rows(); }
};

} // namespace fwdreg
