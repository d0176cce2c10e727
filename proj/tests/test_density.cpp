#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "subdiff/density.hpp"

using namespace subdiff;

namespace {

Grid small_grid() { return Grid(-5.0, 5.0, 101); }

std::vector<double> normal_samples(std::size_t n, unsigned seed,
                                   double mu = 0.0, double sigma = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(mu, sigma);
    std::vector<double> xs(n);
    for (auto& v : xs) v = d(rng);
    return xs;
}

DensityEstimate grid_solution(const Grid& g,
                              const std::function<double(double)>& f) {
    DensityEstimate est;
    est.grid = g;
    est.method = DensityMethod::GridSolution;
    est.values.resize(g.n_x);
    for (int i = 0; i < g.n_x; ++i) est.values[i] = f(g.x(i));
    return est;
}

}  // namespace

TEST_CASE("histogram: point mass lands in one bin at height 1/dx") {
    Grid g = small_grid();
    std::vector<double> xs(1000, 1.3);  // node x=1.3 exists (dx = 0.1)
    DensityEstimate est = estimate_density_histogram(xs, g);
    int hot = g.bin(1.3);
    for (int i = 0; i < g.n_x; ++i) {
        if (i == hot)
            CHECK(est.values[i] == doctest::Approx(1.0 / g.dx()));
        else
            CHECK(est.values[i] == 0.0);
    }
    CHECK(est.out_of_range_mass == 0.0);
}

TEST_CASE("histogram: interior mass plus out-of-range mass is exactly 1") {
    Grid g = small_grid();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-8.0, 8.0);  // spills the grid
    std::vector<double> xs(20001);
    for (auto& v : xs) v = u(rng);
    DensityEstimate est = estimate_density_histogram(xs, g);
    CHECK(est.mass() + est.out_of_range_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.out_of_range_mass > 0.0);
    for (double q : est.values) CHECK(q >= 0.0);
}

TEST_CASE("histogram: samples entirely off-grid") {
    Grid g = small_grid();
    std::vector<double> xs(100, 40.0);
    DensityEstimate est = estimate_density_histogram(xs, g);
    CHECK(est.mass() == 0.0);
    CHECK(est.out_of_range_mass == 1.0);
}

TEST_CASE("kde: close to the normal density in sup norm") {
    Grid g(-5.0, 5.0, 501);
    auto xs = normal_samples(100000, 17);
    DensityEstimate est = estimate_density_kde(xs, g);
    double worst = 0.0;
    for (int i = 0; i < g.n_x; ++i)
        worst = std::max(worst, std::fabs(est.values[i] - oracle::normal_pdf(g.x(i))));
    CHECK(worst <= 0.02);
}

TEST_CASE("kde: grid mass deficit equals the reported out-of-grid kernel mass") {
    Grid g(-2.0, 2.0, 201);  // narrow grid forces visible kernel spill
    auto xs = normal_samples(20000, 23);
    DensityEstimate est = estimate_density_kde(xs, g);
    CHECK(est.mass() <= 1.0 + 1e-9);
    CHECK(est.mass() + est.out_of_range_mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kde: degenerate bandwidth is an error, histogram still works") {
    Grid g = small_grid();
    std::vector<double> xs(50, 0.7);
    CHECK_THROWS_AS(estimate_density_kde(xs, g), ContractError);
    CHECK_NOTHROW(estimate_density_histogram(xs, g));
}

TEST_CASE("l1_distance: identity, disjoint point masses, normal-pair oracle") {
    Grid g = small_grid();
    std::vector<double> a(2000, 1.0), b(2000, 3.0);
    DensityEstimate ea = estimate_density_histogram(a, g);
    DensityEstimate eb = estimate_density_histogram(b, g);
    CHECK(l1_distance(ea, ea) == 0.0);
    CHECK(l1_distance(ea, eb) == doctest::Approx(2.0).epsilon(1e-12));

    // N(0,1) vs N(0,1.1^2) against a quadrature oracle
    Grid wide(-8.0, 8.0, 16001);
    DensityEstimate p1 = grid_solution(wide, [](double x) {
        return oracle::normal_pdf(x, 0.0, 1.0);
    });
    DensityEstimate p2 = grid_solution(wide, [](double x) {
        return oracle::normal_pdf(x, 0.0, 1.1);
    });
    double via_lib = l1_distance(p1, p2);
    double via_quad = oracle::simpson(
        [](double x) {
            return std::fabs(oracle::normal_pdf(x, 0.0, 1.0) -
                             oracle::normal_pdf(x, 0.0, 1.1));
        },
        -8.0, 8.0, 1 << 16);
    CHECK(via_lib == doctest::Approx(via_quad).epsilon(1e-4));

    Grid other(-5.0, 5.0, 100);
    DensityEstimate mismatched = grid_solution(other, [](double) { return 0.1; });
    CHECK_THROWS_AS(l1_distance(ea, mismatched), ContractError);
}

TEST_CASE("l1_distance: metric properties on random triples") {
    Grid g(-3.0, 3.0, 61);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto rand_density = [&]() {
            DensityEstimate e;
            e.grid = g;
            e.method = DensityMethod::GridSolution;
            e.values.resize(g.n_x);
            double m = 0.0;
            for (auto& v : e.values) {
                v = u(rng);
                m += v;
            }
            for (auto& v : e.values) v /= m * g.dx();
            return e;
        };
        DensityEstimate a = rand_density(), b = rand_density(), c = rand_density();
        CHECK(l1_distance(a, b) == doctest::Approx(l1_distance(b, a)));
        CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12);
        CHECK(l1_distance(a, b) >= 0.0);
    }
}

TEST_CASE("ks_distance: inverse-CDF samples from the grid solution") {
    Grid g(-8.0, 8.0, 1601);
    DensityEstimate sol = grid_solution(g, [](double x) {
        return oracle::normal_pdf(x);
    });

    // inverse-transform sampling from the tabulated CDF
    std::vector<double> cum(g.n_x);
    double acc = 0.0;
    for (int i = 0; i < g.n_x; ++i) {
        acc += sol.values[i] * g.dx();
        cum[i] = acc;
    }
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 10000;
    std::vector<double> xs(n);
    for (auto& v : xs) {
        double p = u(rng) * acc;
        auto it = std::lower_bound(cum.begin(), cum.end(), p);
        int j = static_cast<int>(it - cum.begin());
        double left = j == 0 ? 0.0 : cum[j - 1];
        double frac = (p - left) / std::max(cum[j] - left, 1e-300);
        v = g.x(j) + frac * g.dx();
    }
    double d = ks_distance(xs, sol);
    // 99% Kolmogorov bound
    CHECK(d <= 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ks_distance: degenerate cases") {
    Grid g = small_grid();
    std::vector<double> at_zero(100, 0.0);
    DensityEstimate delta0 = estimate_density_histogram(at_zero, g);
    CHECK(ks_distance(at_zero, delta0) == 0.0);

    std::vector<double> at_one(100, 1.0);
    DensityEstimate delta1 = estimate_density_histogram(at_one, g);
    CHECK(ks_distance(at_zero, delta1) == 1.0);
}

TEST_CASE("empirical_moment: constants, normal moments, symmetry") {
    std::vector<double> c(100, 3.0);
    Moment m2c = empirical_moment(c, 2);
    CHECK(m2c.value == 9.0);
    CHECK(m2c.standard_error == 0.0);

    auto xs = normal_samples(100000, 31);
    Moment m2 = empirical_moment(xs, 2);
    CHECK(std::fabs(m2.value - 1.0) < 4.0 * m2.standard_error);
    Moment m1 = empirical_moment(xs, 1);
    CHECK(std::fabs(m1.value) < 4.0 * m1.standard_error);

    CHECK_THROWS_AS(empirical_moment(xs, 0), DomainError);
}
