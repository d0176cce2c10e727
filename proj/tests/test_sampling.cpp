#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "subdiff/sampling.hpp"

using namespace subdiff;

namespace {

constexpr std::size_t kN = 100000;

struct MeanSe {
    double mean;
    double se;
};

template <class F>
MeanSe mc_mean(std::size_t n, F&& f) {
    double acc = 0.0, acc2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = f(i);
        acc += v;
        acc2 += v * v;
    }
    double m = acc / n;
    double var = std::max(0.0, acc2 / n - m * m);
    return {m, std::sqrt(var / n)};
}

}  // namespace

TEST_CASE("random stream: deterministic and stream-separated") {
    RandomStream a(42, 7), b(42, 7), c(42, 8);
    bool identical = true, distinct = false;
    for (int i = 0; i < 256; ++i) {
        auto va = a.next_u64();
        if (va != b.next_u64()) identical = false;
        if (va != c.next_u64()) distinct = true;
    }
    CHECK(identical);
    CHECK(distinct);

    // uniforms live strictly inside (0,1)
    RandomStream u(1, 0);
    for (int i = 0; i < 10000; ++i) {
        double v = u.uniform01();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("random stream: distinct streams are uncorrelated") {
    RandomStream a(123, 0), b(123, 1);
    std::vector<double> xs(kN), ys(kN);
    for (std::size_t i = 0; i < kN; ++i) {
        xs[i] = a.normal();
        ys[i] = b.normal();
    }
    CHECK(std::fabs(oracle::correlation(xs, ys)) < 0.01);
}

TEST_CASE("stable subordinator: Laplace transform matches e^{-dt u^alpha}") {
    for (double alpha : {0.5, 0.8}) {
        for (double u : {0.5, 1.0, 2.0}) {
            RandomStream rng(2024, 1);
            auto est = mc_mean(kN, [&](std::size_t) {
                return std::exp(-u * stable_subordinator_increment(alpha, 1.0, rng));
            });
            double target = std::exp(-std::pow(u, alpha));
            CHECK(std::fabs(est.mean - target) < 4.0 * est.se);
        }
    }
}

TEST_CASE("stable subordinator: positivity and self-similar scaling") {
    RandomStream rng(5, 2);
    std::vector<double> at_dt1(kN), at_dt2(kN);
    for (auto& v : at_dt1) {
        v = stable_subordinator_increment(0.8, 1.0, rng);
        CHECK(v > 0.0);
    }
    for (auto& v : at_dt2) v = stable_subordinator_increment(0.8, 2.0, rng);
    // T(2dt) =d 2^{1/alpha} T(dt)
    double scale = std::pow(2.0, 1.0 / 0.8);
    for (auto& v : at_dt1) v *= scale;
    CHECK(oracle::ks_two_sample(at_dt1, at_dt2) <= 0.01);

    CHECK_THROWS_AS(stable_subordinator_increment(1.2, 1.0, rng), DomainError);
    CHECK_THROWS_AS(stable_subordinator_increment(0.5, -1.0, rng), DomainError);
}

TEST_CASE("tempered stable: Laplace transform and stable limit") {
    double alpha = 0.5, lambda = 1.0;
    for (double u : {0.5, 1.0, 2.0}) {
        RandomStream rng(99, 3);
        auto est = mc_mean(kN, [&](std::size_t) {
            return std::exp(-u * tempered_stable_increment(alpha, lambda, 1.0, rng));
        });
        double target =
            std::exp(-(std::pow(u + lambda, alpha) - std::pow(lambda, alpha)));
        CHECK(std::fabs(est.mean - target) < 4.0 * est.se);
    }

    // lambda -> 0 recovers the stable law
    RandomStream r1(7, 1), r2(7, 2);
    std::vector<double> tempered(kN), stable(kN);
    for (auto& v : tempered) {
        v = tempered_stable_increment(0.5, 1e-8, 1.0, r1);
        CHECK(v > 0.0);
    }
    for (auto& v : stable) v = stable_subordinator_increment(0.5, 1.0, r2);
    CHECK(oracle::ks_two_sample(tempered, stable) <= 0.01);
}

TEST_CASE("tempered stable: hopeless acceptance rate raises numerical failure") {
    RandomStream rng(1, 1);
    CHECK_THROWS_AS(tempered_stable_increment(0.5, 1e9, 1.0, rng), NumericalError);
}

TEST_CASE("symmetric stable: characteristic function matches e^{-dt|u|^alpha}") {
    double alpha = 1.5;
    for (double u : {0.5, 1.0, 2.0}) {
        RandomStream rng(31, 4);
        auto est = mc_mean(kN, [&](std::size_t) {
            return std::cos(u * symmetric_stable_increment(alpha, 1.0, rng));
        });
        double target = std::exp(-std::pow(std::fabs(u), alpha));
        CHECK(std::fabs(est.mean - target) < 4.0 * est.se);
    }
}

TEST_CASE("symmetric stable: symmetry and the Gaussian edge") {
    RandomStream rng(77, 5);
    std::vector<double> xs(kN);
    for (auto& v : xs) v = symmetric_stable_increment(1.5, 1.0, rng);
    std::sort(xs.begin(), xs.end());
    double median = xs[kN / 2];
    double iqr = xs[3 * kN / 4] - xs[kN / 4];
    CHECK(std::fabs(median) <= 3.0 * iqr / std::sqrt(double(kN)));

    // alpha just below 2: variance approximately 2 dt
    RandomStream rng2(78, 6);
    double dt = 0.5;
    std::vector<double> g(kN);
    for (auto& v : g) v = symmetric_stable_increment(1.999, dt, rng2);
    CHECK(oracle::variance(g) == doctest::Approx(2.0 * dt).epsilon(0.10));

    CHECK_THROWS_AS(symmetric_stable_increment(2.0, 1.0, rng), DomainError);
    CHECK_THROWS_AS(symmetric_stable_increment(0.0, 1.0, rng), DomainError);
}

TEST_CASE("truncated symmetric levy: compensator vanishes, ECF matches symbol") {
    JumpNoiseSpec spec(LevyMeasureSpec::truncated_symmetric_stable(1.5, 1.0));
    double eps = 0.01;
    double dt = 0.25;

    for (double u : {0.5, 1.0}) {
        double eta = levy_symbol(spec, u).real();
        RandomStream rng(11, 9);
        auto est = mc_mean(kN / 2, [&](std::size_t) {
            TruncatedIncrement inc =
                truncated_symmetric_levy_increment(spec, dt, eps, rng);
            CHECK(inc.compensator_drift == 0.0);
            return std::cos(u * (inc.jump_sum + inc.compensator_drift));
        });
        double target = std::exp(dt * eta);
        CHECK(std::fabs(est.mean - target) < 4.0 * est.se);
    }
}

TEST_CASE("truncated symmetric levy: pure compound-Poisson counts") {
    JumpNoiseSpec spec(LevyMeasureSpec::truncated_symmetric_stable(1.5, 2.0));
    double eps = 0.8;  // below the cutoff (1.0), well inside the support
    double dt = 1.0;
    double mean = dt * 2.0 * spec.levy_measure.tail_one_sided(eps);

    const int n_draws = 20000;
    const int k_max = 12;
    std::vector<long> counts(k_max + 1, 0);
    RandomStream rng(400, 2);
    for (int i = 0; i < n_draws; ++i) {
        TruncatedIncrement inc = truncated_symmetric_levy_increment(
            spec, dt, eps, rng, /*gaussian_fill=*/false);
        counts[std::min<long>(inc.jump_count, k_max)]++;
    }
    // chi-square GOF against Poisson(mean), tail bucket at k_max
    double stat = 0.0;
    int dof = -1;
    double pmf = std::exp(-mean), cum = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        double p = (k == k_max) ? (1.0 - cum) : pmf;
        cum += pmf;
        pmf *= mean / (k + 1);
        double expected = p * n_draws;
        if (expected < 5.0) {
            // merge sparse tail cells into the last counted one
            continue;
        }
        stat += (counts[k] - expected) * (counts[k] - expected) / expected;
        ++dof;
    }
    CHECK(oracle::chi2_pvalue(stat, dof) > 0.01);
}

TEST_CASE("truncated symmetric levy: guards") {
    JumpNoiseSpec spec(LevyMeasureSpec::truncated_symmetric_stable(1.5, 1.0));
    RandomStream rng(3, 3);
    CHECK_THROWS_AS(
        truncated_symmetric_levy_increment(spec, 1.0, 2.0, rng),  // eps > cutoff
        DomainError);
    // expected jump count beyond the resource cap
    CHECK_THROWS_AS(truncated_symmetric_levy_increment(spec, 1e9, 1e-4, rng),
                    ResourceError);
    // non-truncated measure rejected
    JumpNoiseSpec plain(LevyMeasureSpec::symmetric_stable(1.5));
    CHECK_THROWS_AS(truncated_symmetric_levy_increment(plain, 1.0, 0.1, rng),
                    DomainError);
}

TEST_CASE("brownian increment: moments and cross-stream independence") {
    double dt = 0.3;
    RandomStream rng(55, 0);
    std::vector<double> xs(kN);
    for (auto& v : xs) v = brownian_increment(dt, rng);

    double mean = oracle::mean(xs);
    double se_mean = std::sqrt(dt / double(kN));
    CHECK(std::fabs(mean) < 4.0 * se_mean);

    double var = oracle::variance(xs);
    double se_var = dt * std::sqrt(2.0 / double(kN - 1));
    CHECK(std::fabs(var - dt) < 4.0 * se_var);

    RandomStream ra(55, 1), rb(55, 2);
    std::vector<double> a(kN), b(kN);
    for (std::size_t i = 0; i < kN; ++i) {
        a[i] = brownian_increment(dt, ra);
        b[i] = brownian_increment(dt, rb);
    }
    CHECK(std::fabs(oracle::correlation(a, b)) < 0.01);
}

TEST_CASE("poisson_count: first two moments") {
    RandomStream rng(8, 8);
    double mean = 3.7;
    std::vector<double> xs(kN / 2);
    for (auto& v : xs) v = static_cast<double>(poisson_count(mean, rng));
    CHECK(std::fabs(oracle::mean(xs) - mean) <
          4.0 * std::sqrt(mean / double(xs.size())));
    CHECK(oracle::variance(xs) == doctest::Approx(mean).epsilon(0.06));
}
