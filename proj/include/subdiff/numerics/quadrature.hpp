#pragma once

#include <complex>
#include <functional>

namespace subdiff::num {

// Adaptive Simpson on [a, b] with a relative tolerance. Throws
// NumericalError when the recursion bottoms out without convergence.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-8, int max_depth = 48);

std::complex<double> integrate_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double rel_tol = 1e-8, int max_depth = 48);

// Integral of f over (0, inf) for integrands that are integrable at 0 and
// decay at infinity. Substitutes x = e^s on both sides of the split point
// x = 1 and truncates where |f(x)|*x falls below cut_rel times the running
// scale estimate.
double integrate_positive_axis(const std::function<double(double)>& f,
                               double rel_tol = 1e-8);

std::complex<double> integrate_positive_axis_complex(
    const std::function<std::complex<double>(double)>& f, double rel_tol = 1e-8);

}  // namespace subdiff::num
