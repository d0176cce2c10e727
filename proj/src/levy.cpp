#include "subdiff/levy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "subdiff/numerics/quadrature.hpp"

namespace subdiff {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw DomainError(msg);
}

// adaptive integration in period-length chunks; plain adaptive Simpson can
// misjudge convergence on long oscillatory stretches
template <class T, class F>
T integrate_oscillatory(F&& f, double a, double b, double freq, double rel_tol) {
    double period = M_PI / std::max(freq, 1e-12);
    double chunk = std::min(b - a, std::max(period, (b - a) / 4096.0));
    T acc{};
    double lo = a;
    while (lo < b) {
        double hi = std::min(b, lo + chunk);
        if constexpr (std::is_same_v<T, double>)
            acc += num::integrate([&](double x) { return f(x); }, lo, hi, rel_tol, 24);
        else
            acc += num::integrate_complex([&](double x) { return f(x); }, lo, hi,
                                          rel_tol, 24);
        lo = hi;
    }
    return acc;
}

double pow_int_tail(double w, double alpha, double c) {
    // int_w^inf c x^{-1-alpha} dx
    return c * std::pow(w, -alpha) / alpha;
}

}  // namespace

LevyMeasureSpec LevyMeasureSpec::one_sided_stable(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "one-sided stable requires alpha in (0,1)");
    return {MeasureFamily::OneSidedStable, alpha, 0.0, 0.0};
}

LevyMeasureSpec LevyMeasureSpec::tempered_stable(double alpha, double lambda) {
    require(alpha > 0.0 && alpha < 1.0, "tempered stable requires alpha in (0,1)");
    require(lambda > 0.0, "tempered stable requires lambda > 0");
    return {MeasureFamily::TemperedStable, alpha, lambda, 0.0};
}

LevyMeasureSpec LevyMeasureSpec::symmetric_stable(double alpha) {
    require(alpha > 0.0 && alpha < 2.0, "symmetric stable requires alpha in (0,2)");
    return {MeasureFamily::SymmetricStable, alpha, 0.0, 0.0};
}

LevyMeasureSpec LevyMeasureSpec::truncated_symmetric_stable(double alpha,
                                                            double r_max) {
    require(alpha > 0.0 && alpha < 2.0,
            "truncated symmetric stable requires alpha in (0,2)");
    require(r_max > 0.0, "truncated symmetric stable requires r_max > 0");
    return {MeasureFamily::TruncatedSymmetricStable, alpha, 0.0, r_max};
}

MeasureSupport LevyMeasureSpec::support() const {
    switch (family) {
        case MeasureFamily::OneSidedStable:
        case MeasureFamily::TemperedStable:
            return MeasureSupport::PositiveHalfLine;
        default:
            return MeasureSupport::Symmetric;
    }
}

double LevyMeasureSpec::stable_constant() const {
    switch (family) {
        case MeasureFamily::OneSidedStable:
        case MeasureFamily::TemperedStable:
            // alpha / Gamma(1-alpha): Psi(u) = u^alpha for the stable case
            return alpha / std::tgamma(1.0 - alpha);
        case MeasureFamily::SymmetricStable:
        case MeasureFamily::TruncatedSymmetricStable:
            // Gamma(1+alpha) sin(pi alpha/2) / pi: eta(u) = -|u|^alpha
            return std::tgamma(1.0 + alpha) * std::sin(M_PI * alpha / 2.0) / M_PI;
    }
    return 0.0;
}

double LevyMeasureSpec::density(double x) const {
    double ax = std::fabs(x);
    if (ax == 0.0) return 0.0;
    double c = stable_constant();
    switch (family) {
        case MeasureFamily::OneSidedStable:
            return x > 0.0 ? c * std::pow(x, -1.0 - alpha) : 0.0;
        case MeasureFamily::TemperedStable:
            return x > 0.0 ? c * std::exp(-lambda * x) * std::pow(x, -1.0 - alpha)
                           : 0.0;
        case MeasureFamily::SymmetricStable:
            return c * std::pow(ax, -1.0 - alpha);
        case MeasureFamily::TruncatedSymmetricStable:
            return ax <= r_max ? c * std::pow(ax, -1.0 - alpha) : 0.0;
    }
    return 0.0;
}

double LevyMeasureSpec::tail_one_sided(double w) const {
    if (!(w > 0.0)) throw DomainError("tail function requires w > 0");
    double c = stable_constant();
    switch (family) {
        case MeasureFamily::OneSidedStable:
        case MeasureFamily::SymmetricStable:
            return pow_int_tail(w, alpha, c);
        case MeasureFamily::TruncatedSymmetricStable:
            if (w >= r_max) return 0.0;
            return pow_int_tail(w, alpha, c) - pow_int_tail(r_max, alpha, c);
        case MeasureFamily::TemperedStable: {
            // no elementary antiderivative; integrate with a doubled upper
            // bound until the exponential tail is exhausted
            auto f = [&](double x) { return density(x); };
            double hi = w + 50.0 / lambda;
            while (density(hi) > 1e-300 && density(hi) > 1e-16 * density(w))
                hi *= 2.0;
            return num::integrate(f, w, hi, 1e-10);
        }
    }
    return 0.0;
}

double LevyMeasureSpec::second_moment_below(double s) const {
    if (s <= 0.0) return 0.0;
    double c = stable_constant();
    switch (family) {
        case MeasureFamily::OneSidedStable:
        case MeasureFamily::SymmetricStable:
            return c * std::pow(s, 2.0 - alpha) / (2.0 - alpha);
        case MeasureFamily::TruncatedSymmetricStable: {
            double t = std::min(s, r_max);
            return c * std::pow(t, 2.0 - alpha) / (2.0 - alpha);
        }
        case MeasureFamily::TemperedStable: {
            auto f = [&](double x) { return x * x * density(x); };
            return num::integrate(f, 0.0, s, 1e-10);
        }
    }
    return 0.0;
}

double LevyMeasureSpec::first_moment_between(double a, double b) const {
    if (!(b > a) || a < 0.0) return 0.0;
    double c = stable_constant();
    switch (family) {
        case MeasureFamily::OneSidedStable:
        case MeasureFamily::SymmetricStable:
        case MeasureFamily::TruncatedSymmetricStable: {
            double hi = b;
            if (family == MeasureFamily::TruncatedSymmetricStable)
                hi = std::min(b, r_max);
            if (hi <= a) return 0.0;
            if (alpha == 1.0) return c * std::log(hi / a);
            return c * (std::pow(hi, 1.0 - alpha) - std::pow(a, 1.0 - alpha)) /
                   (1.0 - alpha);
        }
        case MeasureFamily::TemperedStable: {
            auto f = [&](double x) { return x * density(x); };
            return num::integrate(f, a, b, 1e-10);
        }
    }
    return 0.0;
}

std::string LevyMeasureSpec::describe() const {
    std::ostringstream os;
    switch (family) {
        case MeasureFamily::OneSidedStable:
            os << "one_sided_stable(alpha=" << alpha << ")";
            break;
        case MeasureFamily::TemperedStable:
            os << "tempered_stable(alpha=" << alpha << ", lambda=" << lambda << ")";
            break;
        case MeasureFamily::SymmetricStable:
            os << "symmetric_stable(alpha=" << alpha << ")";
            break;
        case MeasureFamily::TruncatedSymmetricStable:
            os << "truncated_symmetric_stable(alpha=" << alpha
               << ", r_max=" << r_max << ")";
            break;
    }
    return os.str();
}

SubordinatorSpec::SubordinatorSpec(LevyMeasureSpec m) : levy_measure(m) {
    if (levy_measure.support() != MeasureSupport::PositiveHalfLine)
        throw DomainError(
            "subordinator requires a positive-support Levy measure, got " +
            levy_measure.describe());
    // All positive families here have nu((0,inf)) = inf (the density blows up
    // like x^{-1-alpha} at zero), which keeps jump times dense.

    // spot-check Psi(0) = 0, monotonicity and concavity on a u-grid
    double prev = 0.0;
    double prev_inc = std::numeric_limits<double>::infinity();
    for (double u = 0.5; u <= 8.0; u += 0.5) {
        double cur = psi_exponent(*this, u);
        double inc = cur - prev;
        if (inc < -1e-12 || inc > prev_inc + 1e-9)
            throw DomainError("Laplace exponent failed the concavity spot check");
        prev = cur;
        prev_inc = inc;
    }
}

std::optional<double> SubordinatorSpec::closed_form_psi(double u) const {
    switch (levy_measure.family) {
        case MeasureFamily::OneSidedStable:
            return std::pow(u, levy_measure.alpha);
        case MeasureFamily::TemperedStable:
            return std::pow(u + levy_measure.lambda, levy_measure.alpha) -
                   std::pow(levy_measure.lambda, levy_measure.alpha);
        default:
            return std::nullopt;
    }
}

std::optional<std::complex<double>> SubordinatorSpec::closed_form_psi(
    std::complex<double> u) const {
    using C = std::complex<double>;
    switch (levy_measure.family) {
        case MeasureFamily::OneSidedStable:
            return std::pow(u, C(levy_measure.alpha));
        case MeasureFamily::TemperedStable:
            return std::pow(u + levy_measure.lambda, C(levy_measure.alpha)) -
                   std::pow(levy_measure.lambda, levy_measure.alpha);
        default:
            return std::nullopt;
    }
}

JumpNoiseSpec::JumpNoiseSpec(LevyMeasureSpec m, double cutoff)
    : levy_measure(m), jump_cutoff(cutoff) {
    if (!(jump_cutoff > 0.0)) throw DomainError("jump_cutoff must be positive");
}

double psi_exponent(const SubordinatorSpec& spec, double u) {
    if (u < 0.0) throw DomainError("psi_exponent requires u >= 0");
    if (u == 0.0) return 0.0;
    if (auto cf = spec.closed_form_psi(u)) return *cf;
    return psi_exponent_quadrature(spec, u);
}

double psi_exponent_quadrature(const SubordinatorSpec& spec, double u,
                               double rel_tol) {
    if (u < 0.0) throw DomainError("psi_exponent requires u >= 0");
    if (u == 0.0) return 0.0;
    const LevyMeasureSpec& m = spec.levy_measure;
    auto f = [&](double x) { return -std::expm1(-u * x) * m.density(x); };
    return num::integrate_positive_axis(f, rel_tol);
}

double tail_G(const LevyMeasureSpec& spec, double w) {
    if (!(w > 0.0)) throw DomainError("tail_G requires w > 0");
    if (spec.support() != MeasureSupport::PositiveHalfLine)
        throw DomainError("tail_G is defined for positive-support measures");
    return spec.tail_one_sided(w);
}

std::complex<double> levy_symbol(const JumpNoiseSpec& spec, double u) {
    const LevyMeasureSpec& m = spec.levy_measure;
    if (u == 0.0) return {0.0, 0.0};
    if (m.family == MeasureFamily::SymmetricStable)
        return {-std::pow(std::fabs(u), m.alpha), 0.0};
    return levy_symbol_quadrature(spec, u);
}

std::complex<double> levy_symbol_quadrature(const JumpNoiseSpec& spec, double u,
                                            double rel_tol) {
    const LevyMeasureSpec& m = spec.levy_measure;
    if (u == 0.0) return {0.0, 0.0};

    if (m.support() == MeasureSupport::Symmetric) {
        // eta(u) = 2 int_0^inf (cos(ux) - 1) nu(dx); the compensator drops by
        // symmetry. Truncate the oscillatory integral and add the -1 part of
        // the far tail analytically; the remaining oscillatory remainder is
        // O(nu'(X)/u) and negligible at this truncation.
        double au = std::fabs(u);
        double X = (m.family == MeasureFamily::TruncatedSymmetricStable)
                       ? m.r_max
                       : 300.0 / std::min(1.0, au);
        auto f = [&](double x) {
            // 1 - cos(v) = 2 sin^2(v/2): stable against cancellation at
            // small v, where the integrand is singular
            double s = std::sin(0.5 * au * x);
            return -2.0 * s * s * m.density(x);
        };
        // x = e^s on the head removes the x^{1-alpha} endpoint singularity
        auto f_log = [&](double s) {
            double x = std::exp(s);
            return f(x) * x;
        };
        double split = std::min(1.0, X);
        double s_lo = std::min(-40.0, -40.0 / (2.0 - m.alpha));
        double head = num::integrate(f_log, s_lo, std::log(split), rel_tol);
        if (X > split)
            head += integrate_oscillatory<double>(f, split, X, au, rel_tol);
        double tail = (m.family == MeasureFamily::TruncatedSymmetricStable)
                          ? 0.0
                          : -m.tail_one_sided(X);
        return {2.0 * (head + tail), 0.0};
    }

    // one-sided measure: keep the compensated form on B = {x : x < cutoff}
    double cut = spec.jump_cutoff;
    auto head = [&](double x) -> std::complex<double> {
        double s = std::sin(0.5 * u * x);
        std::complex<double> e(-2.0 * s * s, std::sin(u * x) - u * x);
        return e * m.density(x);
    };
    auto tail_f = [&](double x) -> std::complex<double> {
        double s = std::sin(0.5 * u * x);
        std::complex<double> e(-2.0 * s * s, std::sin(u * x));
        return e * m.density(x);
    };
    double X = std::max(2.0 * cut, 300.0 / std::min(1.0, std::fabs(u)));
    std::complex<double> res = num::integrate_complex(head, 0.0, cut, rel_tol);
    res += integrate_oscillatory<std::complex<double>>(tail_f, cut, X,
                                                       std::fabs(u), rel_tol);
    res += -m.tail_one_sided(X);  // constant part of the far tail
    return res;
}

}  // namespace subdiff
