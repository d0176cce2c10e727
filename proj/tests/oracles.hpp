// Test-only reference implementations. These stay independent of the library
// code paths they are used to check: plain composite quadrature, direct DFT,
// textbook special functions.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

// composite Simpson with fixed refinement until two halvings agree
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n = 2048) {
    if (n % 2) ++n;
    double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

inline double normal_pdf(double x, double mu = 0.0, double sigma = 1.0) {
    double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

inline double normal_cdf(double x, double mu = 0.0, double sigma = 1.0) {
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

inline double mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

inline double correlation(const std::vector<double>& a,
                          const std::vector<double>& b) {
    double ma = mean(a), mb = mean(b);
    double num = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(va * vb);
}

// two-sample Kolmogorov-Smirnov statistic
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        double fa = static_cast<double>(i) / a.size();
        double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::fabs(fa - fb));
    }
    return d;
}

// regularized upper incomplete gamma Q(a, x) (series / continued fraction)
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // P by series, Q = 1 - P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // Lentz continued fraction for Q
    double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-14) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// chi-square upper-tail p-value
inline double chi2_pvalue(double stat, int dof) {
    return gamma_q(0.5 * dof, 0.5 * stat);
}

// spectral application of -(-Delta)^{alpha/2} on a periodified grid function
// via a direct DFT (slow, test-only)
inline std::vector<double> frac_laplacian_spectral(const std::vector<double>& g,
                                                   double alpha, double dx) {
    const std::size_t n = g.size();
    const double L = n * dx;
    std::vector<std::complex<double>> ghat(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double ang = -2.0 * M_PI * static_cast<double>(k * j) / n;
            acc += g[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        ghat[k] = acc;
    }
    for (std::size_t k = 0; k < n; ++k) {
        double m = static_cast<double>(k) -
                   (k <= n / 2 ? 0.0 : static_cast<double>(n));
        double xi = 2.0 * M_PI * m / L;
        ghat[k] *= -std::pow(std::fabs(xi), alpha);
    }
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double ang = 2.0 * M_PI * static_cast<double>(k * j) / n;
            acc += ghat[k] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[j] = acc.real() / static_cast<double>(n);
    }
    return out;
}

}  // namespace oracle
