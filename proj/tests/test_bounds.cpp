#include "fwdreg/bounds.hpp"
#include "fwdreg/simulate.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace fwdreg;
using fwdreg::testing::hadamard_design;

TEST(Constants, C1Arithmetic)
{
    EXPECT_NEAR(constant_c1(1, 1, 1.0, 0.0, 0.01), std::sqrt(2.0) * 0.1, 1e-15);
    EXPECT_NEAR(constant_c1(1, 1, 1.0, 0.0, 0.01), 0.141421, 1e-6);
    EXPECT_NEAR(constant_c1(2, 2, 1.0, 0.05, 0.04), 0.6, 1e-15);
    EXPECT_THROW(constant_c1(1, 1, 0.0, 0.1, 0.1), Error);
    EXPECT_THROW(constant_c1(1, 1, -0.5, 0.1, 0.1), Error);
}

TEST(Constants, C2Arithmetic)
{
    EXPECT_NEAR(constant_c2(0, 1, 1.0), 229.894408, 1e-6);
    EXPECT_NEAR(constant_c2(0, 1, 0.5), 7325.621056, 1e-6);
    EXPECT_GT(constant_c2(0, 1, 0.7), constant_c2(0, 1, 0.8));
    // Floor for standardized designs, where phi <= 1.
    for (double phi : {1.0, 0.99, 0.5, 0.1}) EXPECT_GE(constant_c2(3, 2, phi), 229.894408 - 1e-9);
    try {
        constant_c2(1, 1, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::nonpositive_eigenvalue);
    }
}

TEST(Constants, ThresholdCondition)
{
    EXPECT_TRUE(threshold_condition(1e-9, 0.3, 0.0));
    EXPECT_TRUE(threshold_condition(0.04, 1.0, 0.1));
    EXPECT_FALSE(threshold_condition(0.0399, 1.0, 0.1));
    EXPECT_FALSE(threshold_condition(0.04, 0.9, 0.1));
}

TEST(FitBounds, NoiselessOrthonormalRecovery)
{
    Dataset ds;
    ds.x = hadamard_design();
    Vector theta0(3);
    theta0 << 0.0, 1.5, 0.0;
    ds.y = ds.x * theta0;
    ds.truth = GroundTruth{theta0, Vector::Zero(4)};

    const double t = 0.5;
    const FitResult fr = forward_regression(ds, t);
    EigenvalueSource eig(gram(ds), EigMode::exact);
    const BoundReport b = check_fit_bounds(fr, ds, t, eig);
    EXPECT_EQ(b.noise_sup, 0.0);
    EXPECT_NEAR(b.pred_error_norm, 0.0, 1e-15);
    EXPECT_TRUE(b.pred_bound_holds);
    EXPECT_TRUE(b.threshold_ok);
    ASSERT_EQ(b.c2_of_m.size(), 1u);
    EXPECT_EQ(b.c2_of_m[0].m, 0u);
    EXPECT_TRUE(b.c2_of_m[0].holds);
    EXPECT_FALSE(b.caveat);
    EXPECT_NEAR(b.c1, std::sqrt(2.0) * std::sqrt(t), 1e-15);
}

TEST(FitBounds, VacuousSelectionCountClaim)
{
    SimConfig cfg;
    cfg.n = 60;
    cfg.p = 10;
    cfg.s0 = 2;
    cfg.noise_sd = 1.0;
    cfg.seed = 4;
    const Dataset ds = simulate_dataset(cfg);
    ASSERT_GT(noise_sup(ds), 1e-3);
    const double t = 1e-8;  // far below (2 * noise_sup / phi)^2
    const FitResult fr = forward_regression(ds, t);
    EigenvalueSource eig(gram(ds), EigMode::exact);
    const BoundReport b = check_fit_bounds(fr, ds, t, eig);
    EXPECT_TRUE(b.c2_of_m.empty());
    EXPECT_TRUE(b.count_claims_vacuous());
    EXPECT_FALSE(b.threshold_ok);
    EXPECT_TRUE(b.pred_bound_holds);
}

TEST(FitBounds, RequiresGroundTruth)
{
    Dataset ds{hadamard_design(), Vector::Ones(4), std::nullopt};
    ds.y = hadamard_design().col(0);
    const FitResult fr = forward_regression(ds, 0.1);
    EigenvalueSource eig(gram(ds), EigMode::exact);
    try {
        check_fit_bounds(fr, ds, 0.1, eig);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::missing_ground_truth);
    }
}

TEST(FitBounds, SampledSourceSetsCaveat)
{
    SimConfig cfg;
    cfg.n = 80;
    cfg.p = 12;
    cfg.s0 = 2;
    cfg.noise_sd = 0.5;
    cfg.seed = 2;
    const Dataset ds = simulate_dataset(cfg);
    EigenvalueSource eig(gram(ds), EigMode::sampled, 20, 1);
    const double t = oracle_threshold(ds, eig.phi(4), 1.1).t;
    const BoundReport b = check_fit_bounds(forward_regression(ds, t), ds, t, eig);
    EXPECT_TRUE(b.caveat);
    EXPECT_EQ(b.eig_method, EigMethod::sampled);
}

TEST(ErrorChain, ExactRecoveryAndTightCase)
{
    Dataset ds;
    ds.x = hadamard_design();
    Vector theta0 = Vector::Zero(3);
    theta0(0) = 1.0;
    ds.y = ds.x * theta0;
    ds.truth = GroundTruth{theta0, Vector::Zero(4)};
    EigenvalueSource eig(gram(ds), EigMode::exact);

    FitResult exact = forward_regression(ds, 0.5);
    const ChainCheck ok = check_error_chain(exact, 1, eig.at(exact.s_hat() + 1));
    EXPECT_NEAR(ok.l1, 0.0, 1e-15);
    EXPECT_TRUE(ok.l1_ok);
    EXPECT_TRUE(ok.l2_ok);

    // theta0 - theta_hat = e_0 with an empty selection: every term equals 1.
    FitResult empty;
    empty.theta_hat = Vector::Zero(3);
    empty.errors = parameter_errors(ds, empty.theta_hat, theta0);
    const ChainCheck tight = check_error_chain(empty, 1, eig.at(1));
    EXPECT_DOUBLE_EQ(tight.l1, 1.0);
    EXPECT_DOUBLE_EQ(tight.middle, 1.0);
    EXPECT_NEAR(tight.right, 1.0, 1e-15);
    EXPECT_TRUE(tight.l1_ok);
    EXPECT_TRUE(tight.l2_ok);

    FitResult no_truth;
    EXPECT_THROW(check_error_chain(no_truth, 1, eig.at(1)), Error);
}

// Both displays are deterministic inequalities: a failure is a bug.
TEST(Bounds, DeterministicEnsemble)
{
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        SimConfig cfg;
        cfg.n = 60;
        cfg.p = 12;
        cfg.s0 = 3;
        cfg.noise_sd = 0.7;
        cfg.design = {DesignKind::toeplitz, 0.5};
        cfg.seed = seed;
        const Dataset ds = simulate_dataset(cfg);
        EigenvalueSource eig(gram(ds), EigMode::exact);
        const double t = oracle_threshold(ds, eig.phi(6), 1.1).t;
        const FitResult fr = forward_regression(ds, t);
        const BoundReport b = check_fit_bounds(fr, ds, t, eig);
        EXPECT_TRUE(b.pred_bound_holds) << "seed " << seed;
        EXPECT_TRUE(b.count_bound_holds()) << "seed " << seed;
        EXPECT_NEAR(b.c1,
                    std::sqrt(static_cast<double>(b.s_hat + b.s0)) / b.phi_pred *
                        (2 * b.noise_sup + std::sqrt(t)),
                    1e-12 * b.c1);
        for (const auto& c : b.c2_of_m) {
            EXPECT_NEAR(c.c2, 1 + 72 * 1.783 * 1.783 * std::pow(c.phi, -5), 1e-12 * c.c2);
        }
        const ChainCheck chain = check_error_chain(fr, b.s0, eig.at(b.s_hat + b.s0));
        EXPECT_TRUE(chain.l1_ok && chain.l2_ok) << "seed " << seed;
    }
}

TEST(EigenvalueSource, ClampsAndCaches)
{
    EigenvalueSource eig(GramMatrix{Matrix::Identity(4, 4)}, EigMode::exact);
    EXPECT_EQ(eig.at(0).s, 1u);
    EXPECT_EQ(eig.at(9).s, 4u);
    const SparseEigReport* first = &eig.at(2);
    EXPECT_EQ(first, &eig.at(2));

    EigenvalueSource automatic(GramMatrix{Matrix::Identity(60, 60)}, EigMode::automatic, 10, 0);
    EXPECT_EQ(automatic.at(2).method, EigMethod::exact);
    EXPECT_EQ(automatic.at(8).method, EigMethod::sampled);
}
