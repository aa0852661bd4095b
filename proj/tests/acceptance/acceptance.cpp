// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "fwdreg/fwdreg.hpp"
#include "../test_util.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <thread>

using namespace fwdreg;
using fwdreg::testing::random_dataset;
using fwdreg::testing::random_subset;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail)
{
    std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// A gain is a difference of two losses, so the error scale includes the base loss.
bool agree(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), scale}); }

void oracle_equivalence()
{
    const auto start = Clock::now();
    std::mt19937_64 rng(1001);
    std::size_t mismatches = 0, comparisons = 0;
    double worst = 0.0;
    for (int inst = 0; inst < 500; ++inst) {
        const std::size_t p = std::uniform_int_distribution<std::size_t>(2, 20)(rng);
        const std::size_t n = std::uniform_int_distribution<std::size_t>(10, 100)(rng);
        const Dataset ds = random_dataset(n, p, rng, 1.0);
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, std::min<std::size_t>(8, p - 1))(rng);
        const IndexSet s = random_subset(p, k, rng);

        const Vector scores = score_all(replay_state(ds, s), ds);
        const double base = oracle::subset_loss(ds, s);
        for (std::size_t j = 0; j < p; ++j) {
            if (std::find(s.begin(), s.end(), j) != s.end()) continue;
            const double naive = -oracle::naive_delta_loss(ds, s, j);
            const double fast = scores(static_cast<Eigen::Index>(j));
            ++comparisons;
            worst = std::max(worst, std::abs(fast - naive) / std::max({std::abs(naive), base, 1e-300}));
            mismatches += !agree(fast, naive, base);
        }

        ForwardOptions opt;
        opt.max_steps = std::max<std::size_t>(k, 1);
        const FitResult fr = forward_regression(ds, 1e-12, opt);
        const double incremental = fr.trace.steps.empty() ? fr.trace.initial_loss : fr.trace.steps.back().loss_after;
        const double refit = least_squares_on_support(ds, fr.support).loss;
        ++comparisons;
        worst = std::max(worst, std::abs(incremental - refit) / std::max(refit, 1e-300));
        mismatches += !agree(incremental, refit, 0.0);
    }
    const double secs = seconds_since(start);
    report(1, "oracle equivalence", mismatches == 0 && secs < 30,
           fmt("%zu/%zu comparisons agree, worst scaled error %.2e, %.1f s", comparisons - mismatches,
               comparisons, worst, secs));
}

SimConfig canonical()
{
    SimConfig cfg;
    cfg.n = 100;
    cfg.p = 20;
    cfg.s0 = 2;
    cfg.noise_sd = 0.5;
    cfg.seed = 1;
    return cfg;
}

void ensemble_bounds()
{
    const auto start = Clock::now();
    VerifyOptions opt;
    opt.safety = 1.1;
    opt.eig_size = 8;
    opt.threads = worker_count();
    const VerifyOutcome out = run_verify(canonical(), 200, opt);
    const double secs = seconds_since(start);

    std::size_t pred = 0, count = 0, chain = 0, vacuous = 0;
    double worst_ratio = 0.0;
    for (const auto& r : out.records) {
        pred += r.bounds.pred_bound_holds;
        count += r.bounds.count_bound_holds();
        chain += r.chain.l1_ok && r.chain.l2_ok;
        vacuous += r.bounds.count_claims_vacuous();
        worst_ratio = std::max(worst_ratio, r.bounds.pred_error_norm / r.bounds.c1);
    }
    report(2, "prediction error bound", pred == 200 && secs < 300,
           fmt("%zu/200 within C1, max error/C1 %.3f, %.1f s", pred, worst_ratio, secs));

    const double floor = constant_c2(0, 1, 1.0);
    const bool floor_ok = std::abs(floor - 229.894408) < 5e-7;
    report(3, "selection count bound", count == 200 && floor_ok,
           fmt("%zu/200 hold (%zu without an admissible m), C2 floor %.6f", count, vacuous, floor));

    report(4, "l1/l2 error chain", chain == 200, fmt("%zu/200 hold at 1e-9", chain));
}

void rate_slope()
{
    const auto start = Clock::now();
    SimConfig cfg;
    cfg.p = 50;
    cfg.s0 = 3;
    cfg.noise_sd = 1.0;
    cfg.seed = 1;
    RatesOptions opt;
    opt.threads = worker_count();
    const RatesOutcome out = run_rates(cfg, {200, 400, 800, 1600}, 100, opt);
    const double secs = seconds_since(start);
    const bool slope_ok = out.slope && *out.slope >= -0.65 && *out.slope <= -0.35;
    std::string rows;
    for (const auto& r : out.rows) rows += fmt(" n=%zu:%.4f/%.1f", r.n, r.median_pred_error, r.median_s_hat);
    report(5, "error rate slope", slope_ok && out.max_s_hat_ratio <= 10 && secs < 600,
           fmt("slope %.3f, max median s_hat/s0 %.2f, %.1f s;", out.slope.value_or(NAN),
               out.max_s_hat_ratio, secs) + rows);
}

void sparse_eigenvalues()
{
    std::mt19937_64 rng(2002);
    std::size_t matched = 0, monotone = 0;
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t p = std::uniform_int_distribution<std::size_t>(2, 12)(rng);
        const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 30)(rng);
        const GramMatrix gm = gram(random_dataset(n, p, rng));
        bool ok = true, mono = true;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t s = 1; s <= 4; ++s) {
            const double fast = sparse_eig_exact(gm, s).value;
            const double ref = oracle::enumerate_sparse_eig(gm.g, s).value;
            worst = std::max(worst, std::abs(fast - ref));
            ok = ok && std::abs(fast - ref) <= 1e-10;
            mono = mono && fast <= prev;
            prev = fast;
        }
        matched += ok;
        monotone += mono;
    }
    bool identity = true;
    for (std::size_t s = 1; s <= 4; ++s) identity = identity && sparse_eig_exact(GramMatrix{Matrix::Identity(12, 12)}, s).value == 1.0;
    report(6, "sparse eigenvalue", matched == 50 && monotone == 50 && identity,
           fmt("%zu/50 match enumeration (max diff %.1e), %zu/50 monotone, identity %s", matched, worst,
               monotone, identity ? "exactly 1" : "not 1"));
}

void greedy_vs_exhaustive()
{
    std::mt19937_64 rng(3003);
    std::size_t ok = 0, strict = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t p = std::uniform_int_distribution<std::size_t>(3, 12)(rng);
        Dataset ds = random_dataset(40, p, rng, 1.0);
        // Correlate some columns so greedy has a chance to go wrong.
        for (std::size_t j = 1; j < p; j += 2) ds.x.col(static_cast<Eigen::Index>(j)) = standardize(ds.x.col(static_cast<Eigen::Index>(j)) + 0.8 * ds.x.col(static_cast<Eigen::Index>(j - 1)));
        ForwardOptions opt;
        opt.max_steps = std::uniform_int_distribution<std::size_t>(1, p)(rng);
        const FitResult fr = forward_regression(ds, 1e-9, opt);
        const double best = oracle::best_subset(ds, fr.s_hat()).loss;
        ok += best <= fr.loss * (1 + 1e-12);
        strict += best < fr.loss * (1 - 1e-9);
    }
    report(7, "greedy vs exhaustive", ok == 100,
           fmt("%zu/100 exhaustive <= greedy (%zu strictly better)", ok, strict));
}

void determinism()
{
    SimConfig cfg = canonical();
    cfg.seed = 77;
    VerifyOptions opt;
    std::string first;
    bool same = true;
    for (std::size_t threads : {1u, 2u, 4u, 7u}) {
        opt.threads = threads;
        const std::string dump = run_verify(cfg, 12, opt).report.dump(2);
        if (first.empty()) first = dump;
        same = same && dump == first;
    }
    report(8, "determinism", same, same ? "identical reports for 1, 2, 4, 7 threads" : "reports differ");
}

} // namespace

int main()
{
    oracle_equivalence();
    ensemble_bounds();
    rate_slope();
    sparse_eigenvalues();
    greedy_vs_exhaustive();
    determinism();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
