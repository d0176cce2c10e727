#include "subdiff/paths.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "subdiff/numerics/parallel.hpp"

namespace subdiff {

namespace {

// Per-step increment sampler for the configured jump noise, with the
// compensator drift folded in (Definition-style dL = int_B x Ntilde + ...).
struct NoiseSampler {
    enum class Kind { None, SymmetricStable, TruncatedSymmetric, OneSidedCompensated };

    Kind kind = Kind::None;
    double alpha = 0.0;
    double lambda = 0.0;
    double eps = 0.0;
    double drift_per_dt = 0.0;  // -int_{x in B} x nu(dx) for one-sided families
    JumpNoiseSpec spec{LevyMeasureSpec::symmetric_stable(1.0)};

    static NoiseSampler make(const std::optional<JumpNoiseSpec>& noise,
                             double small_jump_eps) {
        NoiseSampler s;
        if (!noise) return s;
        s.spec = *noise;
        const LevyMeasureSpec& m = noise->levy_measure;
        s.alpha = m.alpha;
        s.lambda = m.lambda;
        switch (m.family) {
            case MeasureFamily::SymmetricStable:
                s.kind = Kind::SymmetricStable;
                break;
            case MeasureFamily::TruncatedSymmetricStable:
                s.kind = Kind::TruncatedSymmetric;
                s.eps = small_jump_eps > 0.0 ? small_jump_eps
                                             : default_small_jump_cutoff(m);
                if (!(s.eps < noise->jump_cutoff))
                    s.eps = 0.5 * std::min(noise->jump_cutoff, m.r_max);
                break;
            case MeasureFamily::OneSidedStable:
            case MeasureFamily::TemperedStable:
                s.kind = Kind::OneSidedCompensated;
                s.drift_per_dt = -m.first_moment_between(0.0, noise->jump_cutoff);
                break;
        }
        return s;
    }

    double sample(double dt, RandomStream& rng) const {
        switch (kind) {
            case Kind::None:
                return 0.0;
            case Kind::SymmetricStable:
                return symmetric_stable_increment(alpha, dt, rng);
            case Kind::TruncatedSymmetric: {
                TruncatedIncrement inc =
                    truncated_symmetric_levy_increment(spec, dt, eps, rng);
                return inc.jump_sum + inc.compensator_drift;
            }
            case Kind::OneSidedCompensated: {
                double jumps = lambda > 0.0
                                   ? tempered_stable_increment(alpha, lambda, dt, rng)
                                   : stable_subordinator_increment(alpha, dt, rng);
                return jumps + drift_per_dt * dt;
            }
        }
        return 0.0;
    }
};

void sample_subordinator_into(const SubordinatorSpec& spec, double dgamma,
                              double horizon_t, RandomStream& rng,
                              std::size_t max_steps, std::vector<double>& values) {
    const LevyMeasureSpec& m = spec.levy_measure;
    values.clear();
    values.push_back(0.0);
    double acc = 0.0;
    while (acc <= horizon_t) {
        if (values.size() > max_steps)
            throw ResourceError(
                "subordinator path exceeded the step cap before reaching t = " +
                std::to_string(horizon_t));
        double inc = (m.family == MeasureFamily::OneSidedStable)
                         ? stable_subordinator_increment(m.alpha, dgamma, rng)
                         : tempered_stable_increment(m.alpha, m.lambda, dgamma, rng);
        acc += inc;
        values.push_back(acc);
    }
}

void integrate_sde_into(const CoefficientField& coeffs,
                        const std::vector<double>& z, double dgamma,
                        const NoiseSampler& noise, RandomStream& rng,
                        std::vector<double>& y) {
    const std::size_t m = z.size() - 1;
    y.resize(z.size());
    y[0] = 0.0;
    const bool with_noise = noise.kind != NoiseSampler::Kind::None;
    for (std::size_t j = 0; j < m; ++j) {
        double yj = y[j];
        double zj = z[j];
        double f = coeffs.F.eval(yj, zj);
        double s = coeffs.sigma.eval(yj, zj);
        if (s < 0.0) throw PathError("sigma(x,t) evaluated negative", j);
        double next = yj + f * dgamma + s * brownian_increment(dgamma, rng);
        if (with_noise) {
            double h = coeffs.h.eval(yj, zj);
            next += h * noise.sample(dgamma, rng);
        }
        if (!std::isfinite(next))
            throw PathError("path state became non-finite", j);
        y[j + 1] = next;
    }
}

std::size_t crossing_index(const std::vector<double>& values, double t) {
    auto it = std::upper_bound(values.begin(), values.end(), t);
    if (it == values.end())
        throw RangeError("t = " + std::to_string(t) +
                         " is beyond the sampled path horizon; sample a longer path");
    return static_cast<std::size_t>(it - values.begin());
}

}  // namespace

SubordinatorPath sample_subordinator_path(const SubordinatorSpec& spec,
                                          double dgamma, double horizon_t,
                                          RandomStream& rng, std::size_t max_steps) {
    if (!(dgamma > 0.0)) throw DomainError("dgamma must be positive");
    if (!(horizon_t >= 0.0)) throw DomainError("horizon must be nonnegative");
    SubordinatorPath p;
    p.dgamma = dgamma;
    sample_subordinator_into(spec, dgamma, horizon_t, rng, max_steps, p.values);
    return p;
}

double inverse_subordinator(const SubordinatorPath& path, double t) {
    if (t < 0.0) throw DomainError("inverse subordinator requires t >= 0");
    return path.dgamma * static_cast<double>(crossing_index(path.values, t));
}

CoupledPath integrate_jump_sde(const CoefficientField& coeffs,
                               const SubordinatorPath& sub_path,
                               const std::optional<JumpNoiseSpec>& noise,
                               RandomStream& rng, double small_jump_eps) {
    if (sub_path.values.empty() || sub_path.values[0] != 0.0)
        throw ContractError("subordinator path must start at T_0 = 0");
    CoupledPath cp;
    cp.dgamma = sub_path.dgamma;
    cp.z = sub_path.values;
    NoiseSampler ns = NoiseSampler::make(noise, small_jump_eps);
    integrate_sde_into(coeffs, cp.z, cp.dgamma, ns, rng, cp.y);
    return cp;
}

TimeChangedSample time_change_evaluate(const CoupledPath& cp,
                                       const SubordinatorPath& sp,
                                       const std::vector<double>& times) {
    if (cp.z.size() != sp.values.size() || cp.dgamma != sp.dgamma)
        throw ContractError("coupled path and subordinator path grids differ");
    TimeChangedSample out;
    out.times = times;
    out.values.reserve(times.size());
    for (double t : times) {
        std::size_t jstar = crossing_index(sp.values, t);
        // left limit: the value one grid step before the crossing
        out.values.push_back(cp.y[jstar - 1]);
    }
    return out;
}

std::vector<double> McResult::column(std::size_t k) const {
    std::size_t n = rows();
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = samples[i * times.size() + k];
    return col;
}

McResult run_monte_carlo(const McJob& job) {
    if (job.n_paths < 1) throw DomainError("n_paths must be at least 1");
    if (job.times.empty()) throw DomainError("at least one observation time required");
    for (double t : job.times)
        if (!(t >= 0.0)) throw DomainError("observation times must be nonnegative");

    const double horizon = *std::max_element(job.times.begin(), job.times.end());
    const std::size_t k = job.times.size();
    const std::size_t n = job.n_paths;

    std::vector<double> all(n * k, 0.0);
    std::vector<unsigned char> ok(n, 0);
    std::atomic<std::size_t> failures{0};
    NoiseSampler noise_proto = NoiseSampler::make(job.noise, job.small_jump_eps);

    num::parallel_chunks(0, n, job.threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> t_values;
        std::vector<double> y_values;
        for (std::size_t i = lo; i < hi; ++i) {
            RandomStream rng(job.seed, i);
            try {
                sample_subordinator_into(job.subordinator, job.dgamma, horizon,
                                         rng, job.max_steps, t_values);
                integrate_sde_into(job.coefficients, t_values, job.dgamma,
                                   noise_proto, rng, y_values);
                for (std::size_t c = 0; c < k; ++c) {
                    std::size_t jstar = crossing_index(t_values, job.times[c]);
                    all[i * k + c] = y_values[jstar - 1];
                }
                ok[i] = 1;
            } catch (const PathError&) {
                failures.fetch_add(1, std::memory_order_relaxed);
            }
        }
    });

    std::size_t n_failed = failures.load();
    if (static_cast<double>(n_failed) >
        job.max_failure_fraction * static_cast<double>(n))
        throw NumericalError(
            std::to_string(n_failed) + " of " + std::to_string(n) +
            " paths failed (limit " + std::to_string(job.max_failure_fraction) +
            "); check the coefficient expressions");

    McResult res;
    res.times = job.times;
    res.n_requested = n;
    res.n_failed = n_failed;
    res.samples.reserve((n - n_failed) * k);
    for (std::size_t i = 0; i < n; ++i)
        if (ok[i])
            res.samples.insert(res.samples.end(), all.begin() + i * k,
                               all.begin() + (i + 1) * k);
    return res;
}

}  // namespace subdiff
