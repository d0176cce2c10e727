#pragma once

#include <complex>
#include <optional>
#include <string>

#include "subdiff/errors.hpp"

namespace subdiff {

// Parametric Levy measures. Each family carries closed forms for the tail
// function G(w) = nu((w,inf)), the Laplace exponent (positive families), and
// the small-jump second moment used by samplers and jump operators.
//
// One-sided densities use c = alpha/Gamma(1-alpha), which makes the stable
// subordinator's Laplace exponent exactly u^alpha. Symmetric densities use
// c = Gamma(1+alpha) sin(pi alpha/2)/pi, the normalisation under which the
// symmetric stable symbol is exactly -|u|^alpha.
enum class MeasureFamily {
    OneSidedStable,            // nu(dx) = c x^{-1-alpha} dx on x > 0, alpha in (0,1)
    TemperedStable,            // nu(dx) = c e^{-lambda x} x^{-1-alpha} dx on x > 0
    SymmetricStable,           // nu(dx) = c |x|^{-1-alpha} dx, alpha in (0,2)
    TruncatedSymmetricStable,  // symmetric stable restricted to |x| <= r_max
};

enum class MeasureSupport { PositiveHalfLine, Symmetric };

struct LevyMeasureSpec {
    MeasureFamily family;
    double alpha = 0.5;
    double lambda = 0.0;  // tempering rate (TemperedStable)
    double r_max = 0.0;   // truncation radius (TruncatedSymmetricStable)

    static LevyMeasureSpec one_sided_stable(double alpha);
    static LevyMeasureSpec tempered_stable(double alpha, double lambda);
    static LevyMeasureSpec symmetric_stable(double alpha);
    static LevyMeasureSpec truncated_symmetric_stable(double alpha, double r_max);

    MeasureSupport support() const;

    // Density of nu with respect to Lebesgue measure at x != 0.
    double density(double x) const;

    // Normalisation constant in front of |x|^{-1-alpha}.
    double stable_constant() const;

    // One-sided upper tail nu((w,inf)) for w > 0. For symmetric families this
    // is the mass of one side; by symmetry nu({|x| > w}) = 2 * tail.
    double tail_one_sided(double w) const;

    // int_0^s u^2 nu(du) restricted to one side (small-jump variance).
    double second_moment_below(double s) const;

    // int_a^b u nu(du) on one side; used by compensator bookkeeping.
    double first_moment_between(double a, double b) const;

    std::string describe() const;
};

struct SubordinatorSpec {
    LevyMeasureSpec levy_measure;

    explicit SubordinatorSpec(LevyMeasureSpec m);

    // Closed-form Laplace exponent when the family has one.
    std::optional<double> closed_form_psi(double u) const;
    std::optional<std::complex<double>> closed_form_psi(std::complex<double> u) const;
};

struct JumpNoiseSpec {
    LevyMeasureSpec levy_measure;
    double jump_cutoff = 1.0;  // radius of the compensation set B

    explicit JumpNoiseSpec(LevyMeasureSpec m, double cutoff = 1.0);
};

// Psi(u) = int_0^inf (1 - e^{-ux}) nu(dx). Closed form when available,
// adaptive quadrature otherwise.
double psi_exponent(const SubordinatorSpec& spec, double u);

// Quadrature evaluation of Psi ignoring any closed form; the cross-check
// route for the identity Psi(u) = u^alpha.
double psi_exponent_quadrature(const SubordinatorSpec& spec, double u,
                               double rel_tol = 1e-8);

// G(w) = nu((w,inf)) for positive-support measures.
double tail_G(const LevyMeasureSpec& spec, double w);

// Levy symbol eta(u) = int [e^{iux} - 1 - iux 1_B(x)] nu(dx) of the
// compensated jump process. SymmetricStable returns -|u|^alpha exactly.
std::complex<double> levy_symbol(const JumpNoiseSpec& spec, double u);

// Quadrature route for the symbol (oracle cross-check path).
std::complex<double> levy_symbol_quadrature(const JumpNoiseSpec& spec, double u,
                                            double rel_tol = 1e-8);

}  // namespace subdiff
