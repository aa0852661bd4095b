#pragma once

#include "fwdreg/bounds.hpp"
#include "fwdreg/error.hpp"
#include "fwdreg/linalg.hpp"
#include "fwdreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

namespace fwdreg {

enum class DesignKind { independent, equicorrelated, toeplitz };
enum class ThetaKind { constant, decaying, signed_alternating };

struct Design
{
    DesignKind kind = DesignKind::independent;
    double rho = 0.0;
};

/// Nonzero coefficient values, by position k = 0..s0-1 within the support:
/// constant c; decaying c * (k+1)^-rate; signed_alternating c * (-1)^k.
struct ThetaPattern
{
    ThetaKind kind = ThetaKind::constant;
    double c = 1.0;
    double rate = 1.0;
};

struct SimConfig
{
    std::size_t n = 100;
    std::size_t p = 20;
    std::size_t s0 = 2;
    Design design;
    ThetaPattern theta_pattern;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;
};

inline void validate(const SimConfig& cfg)
{
    if (cfg.n < 2) throw Error(ErrorCode::invalid_argument, "n must be >= 2");
    if (cfg.p < 1) throw Error(ErrorCode::invalid_argument, "p must be >= 1");
    if (cfg.s0 > cfg.p) throw Error(ErrorCode::invalid_argument, "s0 must be <= p");
    if (!(std::abs(cfg.design.rho) < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "|rho| must be < 1");
    }
    if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) {
        throw Error(ErrorCode::invalid_argument, "noise_sd must be finite and >= 0");
    }
    if (cfg.design.kind == DesignKind::equicorrelated && cfg.p > 1 &&
        !(cfg.design.rho > -1.0 / static_cast<double>(cfg.p - 1))) {
        throw Error(ErrorCode::invalid_argument,
                    "equicorrelated rho must exceed -1/(p-1) for a valid covariance");
    }
}

/// Population covariance of the design family.
inline Matrix population_covariance(const SimConfig& cfg)
{
    const auto p = static_cast<Eigen::Index>(cfg.p);
    Matrix sigma = Matrix::Identity(p, p);
    const double rho = cfg.design.rho;
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = 0; k < p; ++k) {
            if (j == k) continue;
            switch (cfg.design.kind) {
                case DesignKind::independent: break;
                case DesignKind::equicorrelated: sigma(j, k) = rho; break;
                case DesignKind::toeplitz:
                    sigma(j, k) = std::pow(rho, static_cast<double>(std::abs(j - k)));
                    break;
            }
        }
    }
    return sigma;
}

namespace detail {

/// Draws an n-by-p raw design row by row from the configured family.
inline Matrix draw_design(const SimConfig& cfg, std::mt19937_64& rng)
{
    const auto n = static_cast<Eigen::Index>(cfg.n);
    const auto p = static_cast<Eigen::Index>(cfg.p);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double rho = cfg.design.rho;
    Matrix x(n, p);

    Matrix chol;
    if (cfg.design.kind == DesignKind::equicorrelated && rho < 0.0) {
        Eigen::LLT<Matrix> llt(population_covariance(cfg));
        if (llt.info() != Eigen::Success) {
            throw Error(ErrorCode::invalid_argument, "design covariance is not positive definite");
        }
        chol = llt.matrixL();
    }

    Vector z(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
        switch (cfg.design.kind) {
            case DesignKind::independent: x.row(i) = z.transpose(); break;
            case DesignKind::equicorrelated:
                if (rho >= 0.0) {
                    // One shared factor gives corr(x_j, x_k) = rho.
                    const double common = normal(rng);
                    x.row(i) = (std::sqrt(1.0 - rho) * z.array() + std::sqrt(rho) * common)
                                   .matrix()
                                   .transpose();
                } else {
                    x.row(i) = (chol * z).transpose();
                }
                break;
            case DesignKind::toeplitz: {
                // Stationary AR(1) across columns: corr(x_j, x_k) = rho^|j-k|.
                const double innov = std::sqrt(1.0 - rho * rho);
                x(i, 0) = z(0);
                for (Eigen::Index j = 1; j < p; ++j) x(i, j) = rho * x(i, j - 1) + innov * z(j);
                break;
            }
        }
    }
    return x;
}

} // namespace detail

/**
 * Simulated sparse linear model. The design is drawn from the configured
 * Gaussian family and standardized; theta0 is then placed on a seeded random
 * support of size s0 in standardized coordinates, so y = x * theta0 + epsilon
 * holds exactly for the stored data.
 */
inline Dataset simulate_dataset(const SimConfig& cfg)
{
    validate(cfg);
    std::mt19937_64 rng(cfg.seed);

    Dataset ds;
    ds.x = standardize(detail::draw_design(cfg, rng));

    IndexSet perm(cfg.p);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    GroundTruth truth;
    truth.theta0 = Vector::Zero(static_cast<Eigen::Index>(cfg.p));
    for (std::size_t k = 0; k < cfg.s0; ++k) {
        const ThetaPattern& tp = cfg.theta_pattern;
        double v = tp.c;
        if (tp.kind == ThetaKind::decaying) v = tp.c * std::pow(static_cast<double>(k + 1), -tp.rate);
        if (tp.kind == ThetaKind::signed_alternating && k % 2 == 1) v = -tp.c;
        truth.theta0(static_cast<Eigen::Index>(perm[k])) = v;
    }

    truth.epsilon = Vector::Zero(static_cast<Eigen::Index>(cfg.n));
    if (cfg.noise_sd > 0.0) {
        std::normal_distribution<double> normal(0.0, cfg.noise_sd);
        for (Eigen::Index i = 0; i < truth.epsilon.size(); ++i) truth.epsilon(i) = normal(rng);
    }

    ds.y = ds.x * truth.theta0 + truth.epsilon;
    ds.truth = std::move(truth);
    return ds;
}

/// Smallest positive threshold handed out when the formula yields ~0.
inline constexpr double kThresholdFloor = 1e-12;

struct ThresholdChoice
{
    double t;
    bool floored;  // formula gave t below kThresholdFloor (e.g. noiseless data)
};

/// t = (safety * 2 * ||E_n[x_i eps_i]||_inf / phi)^2, using the true noise.
inline ThresholdChoice oracle_threshold(const Dataset& ds, double phi, double safety)
{
    if (!(phi > 0.0)) throw Error(ErrorCode::nonpositive_eigenvalue, "phi must be > 0");
    if (!(safety >= 1.0)) throw Error(ErrorCode::invalid_argument, "safety must be >= 1");
    const double root = safety * 2.0 * noise_sup(ds) / phi;
    const double t = root * root;
    if (t < kThresholdFloor) return {kThresholdFloor, true};
    return {t, false};
}

} // namespace fwdreg
