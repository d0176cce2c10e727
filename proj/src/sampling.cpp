#include "subdiff/sampling.hpp"

#include <cmath>

namespace subdiff {

namespace {

constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kPhiloxW = 0x9E3779B97F4A7C15ULL;
constexpr long kMaxRejectionIters = 1000000;

inline void philox_round(std::uint64_t& x0, std::uint64_t& x1, std::uint64_t key) {
    __uint128_t prod = static_cast<__uint128_t>(x0) * kPhiloxM;
    std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
    std::uint64_t lo = static_cast<std::uint64_t>(prod);
    x0 = hi ^ key ^ x1;
    x1 = lo;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {}

void RandomStream::refill() {
    std::uint64_t x0 = counter_++;
    std::uint64_t x1 = stream_id_;
    std::uint64_t key = master_seed_;
    for (int r = 0; r < 10; ++r) {
        philox_round(x0, x1, key);
        key += kPhiloxW;
    }
    block_[0] = x0;
    block_[1] = x1;
    block_pos_ = 0;
}

std::uint64_t RandomStream::next_u64() {
    if (block_pos_ >= 2) refill();
    return block_[block_pos_++];
}

double RandomStream::uniform01() {
    // 53-bit mantissa, shifted to the open interval (0,1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_normal_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double RandomStream::exponential() { return -std::log(uniform01()); }

double stable_subordinator_increment(double alpha, double dt, RandomStream& rng) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("stable subordinator requires alpha in (0,1)");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");

    if (alpha == 0.5) {
        // Levy distribution: T = dt^2 / (2 Z^2) has E[e^{-uT}] = e^{-dt sqrt(u)}
        double z;
        do {
            z = rng.normal();
        } while (z == 0.0);
        return dt * dt / (2.0 * z * z);
    }

    // Kanter / Chambers-Mallows-Stuck for the one-sided case
    double u = M_PI * rng.uniform01();
    double e = rng.exponential();
    double su = std::sin(u);
    double a1 = std::sin(alpha * u) / std::pow(su, 1.0 / alpha);
    double a2 = std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
    return std::pow(dt, 1.0 / alpha) * a1 * a2;
}

double tempered_stable_increment(double alpha, double lambda, double dt,
                                 RandomStream& rng) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("tempered stable requires alpha in (0,1)");
    if (!(lambda > 0.0)) throw DomainError("tempered stable requires lambda > 0");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");

    // exponential tilting: accept a stable draw T with probability e^{-lambda T};
    // the acceptance rate is e^{-dt lambda^alpha}
    for (long it = 0; it < kMaxRejectionIters; ++it) {
        double t = stable_subordinator_increment(alpha, dt, rng);
        if (rng.uniform01() <= std::exp(-lambda * t)) return t;
    }
    throw NumericalError(
        "tempered stable rejection sampler exceeded its iteration cap; "
        "acceptance rate e^{-dt lambda^alpha} is too small for this step");
}

double symmetric_stable_increment(double alpha, double dt, RandomStream& rng) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw DomainError("symmetric stable requires alpha in (0,2)");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");

    double u = M_PI * (rng.uniform01() - 0.5);
    double e = rng.exponential();
    if (alpha == 1.0) return std::pow(dt, 1.0) * std::tan(u);
    double cu = std::cos(u);
    double x = std::sin(alpha * u) / std::pow(cu, 1.0 / alpha) *
               std::pow(std::cos((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
    return std::pow(dt, 1.0 / alpha) * x;
}

double default_small_jump_cutoff(const LevyMeasureSpec& measure) {
    if (measure.family != MeasureFamily::TruncatedSymmetricStable)
        throw DomainError(
            "small-jump cutoff heuristic needs a finite-variance truncated measure");
    // variance rule: second_moment_below(eps) = 1e-4 * total variance
    double eps_var = measure.r_max * std::pow(1e-4, 1.0 / (2.0 - measure.alpha));
    // work cap: at most ~1e4 resolved jumps per unit time, else the
    // compound-Poisson loop dwarfs everything around it
    double c = measure.stable_constant();
    double eps_rate = std::pow(2.0 * c / (measure.alpha * 1e4), 1.0 / measure.alpha);
    return std::min(measure.r_max * 0.5, std::max(eps_var, eps_rate));
}

long poisson_count(double mean, RandomStream& rng) {
    if (mean < 0.0) throw DomainError("Poisson mean must be nonnegative");
    long count = -1;
    double acc = 0.0;
    do {
        acc += rng.exponential();
        ++count;
    } while (acc <= mean);
    return count;
}

TruncatedIncrement truncated_symmetric_levy_increment(const JumpNoiseSpec& spec,
                                                      double dt, double eps,
                                                      RandomStream& rng,
                                                      bool gaussian_fill) {
    const LevyMeasureSpec& m = spec.levy_measure;
    if (m.family != MeasureFamily::TruncatedSymmetricStable)
        throw DomainError(
            "truncated_symmetric_levy_increment requires a truncated symmetric "
            "stable measure, got " + m.describe());
    if (!(eps > 0.0 && eps < spec.jump_cutoff))
        throw DomainError("need 0 < eps < jump_cutoff");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");

    TruncatedIncrement out;
    // symmetric measure: the compensator over eps < |x| < cutoff vanishes
    out.compensator_drift = 0.0;

    double r_max = m.r_max;
    if (eps < r_max) {
        double rate = 2.0 * m.tail_one_sided(eps);  // nu({|x| > eps})
        double expected = dt * rate;
        if (expected > 1e7)
            throw ResourceError(
                "expected jump count above 1e7; raise the small-jump cutoff eps");
        long k = poisson_count(expected, rng);
        out.jump_count = k;
        double ea = std::pow(eps, -m.alpha);
        double ra = std::pow(r_max, -m.alpha);
        for (long j = 0; j < k; ++j) {
            // inverse CDF of |x| restricted to (eps, r_max]
            double v = ea - rng.uniform01() * (ea - ra);
            double mag = std::pow(v, -1.0 / m.alpha);
            double sign = (rng.next_u64() & 1ULL) ? 1.0 : -1.0;
            out.jump_sum += sign * mag;
        }
    }

    if (gaussian_fill) {
        double var = dt * 2.0 * m.second_moment_below(eps);
        if (var > 0.0) out.jump_sum += std::sqrt(var) * rng.normal();
    }
    return out;
}

double brownian_increment(double dt, RandomStream& rng) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    return std::sqrt(dt) * rng.normal();
}

}  // namespace subdiff
