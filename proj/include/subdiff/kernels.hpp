#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "subdiff/levy.hpp"

namespace subdiff {

// Memory kernel M(t), defined through its Laplace transform 1/Psi(u).
class MemoryKernel {
public:
    // M(t) = t^{alpha-1}/Gamma(alpha), the stable-subordinator kernel.
    static MemoryKernel closed_form_stable(double alpha);

    // Numeric inversion of 1/Psi for a general subordinator (fixed-Talbot).
    static MemoryKernel laplace_inversion(SubordinatorSpec spec, int talbot_nodes = 32);

    // Direct Laplace-domain image; mostly a hook for degenerate kernels in
    // tests (e.g. Mtilde(u) = 1/u, which inverts to the constant 1).
    static MemoryKernel from_laplace(
        std::function<std::complex<double>(std::complex<double>)> mtilde,
        int talbot_nodes = 32);

    // memory_kernel_eval: requires t > 0. Throws NumericalError if the
    // Talbot evaluation is unstable at this t.
    double operator()(double t) const;

    // (t_j, M(t_j)) on a log-spaced grid; the cached-table representation.
    struct Table {
        std::vector<double> t;
        std::vector<double> m;
    };
    Table build_table(double t_min, double t_max, int n) const;

    // Numerically re-transform a table and compare against 1/Psi(u);
    // returns the worst relative error over the probe points.
    static double table_laplace_error(const Table& table,
                                      const std::function<double(double)>& psi,
                                      std::span<const double> probes);

private:
    MemoryKernel() = default;
    double talbot(double t, int n_nodes) const;

    std::optional<double> closed_alpha_;
    std::function<std::complex<double>(std::complex<double>)> mtilde_;
    int nodes_ = 32;
};

// Discrete form of the memory operator Phi_t f = d/dt int_0^t M(t-y) f(y) dy.
struct DiscreteMemoryOperator {
    enum class Kind { GrunwaldLetnikov, ConvolutionQuadrature };

    Kind kind;
    double dt;
    double beta = 0.0;  // GL order (= 1 - alpha for a stable subordinator)
    std::shared_ptr<const MemoryKernel> kernel;  // ConvolutionQuadrature only

    static DiscreteMemoryOperator grunwald_letnikov(double alpha, double dt);
    static DiscreteMemoryOperator convolution_quadrature(MemoryKernel k, double dt);

    // GL when the subordinator is one-sided stable, convolution quadrature
    // with a Talbot kernel otherwise.
    static DiscreteMemoryOperator for_subordinator(const SubordinatorSpec& spec,
                                                   double dt);

    // Weights w_j with (Phi f)(t_n) = sum_{j=0}^{n} w_j f(t_{n-j}).
    std::vector<double> weights(std::size_t count) const;
};

// GL coefficients g_0..g_n for order beta: g_0 = 1, g_j = g_{j-1} (j-1-beta)/j.
std::vector<double> gl_coefficients(double beta, std::size_t count);

// (Phi f)(t_n) for a uniformly sampled history f(t_0)..f(t_n).
double phi_apply(const DiscreteMemoryOperator& op, std::span<const double> history);

// Theta_w g = int_0^w G(w-z) g(z) dz; g is sampled at 0, delta, ..., w.
// Midpoint values of g are integrated against the exact kernel mass of each
// cell (product integration), which keeps the x^{-alpha} endpoint
// singularity of G from polluting the convergence order.
double theta_apply(const std::function<double(double)>& tail_G,
                   std::span<const double> g, double delta);
double theta_apply(const SubordinatorSpec& spec, std::span<const double> g,
                   double delta);

// Streaming convolution S_n = sum_{j=0}^{n} w_j q^{n-j} over vector-valued
// frames. Small runs use the direct O(n) per-step sum; long runs switch to
// FFT-accelerated doubling blocks (same sums up to rounding). Frames pushed
// in step order; push returns S_n for the step just appended.
class HistoryConvolution {
public:
    HistoryConvolution(std::vector<double> weights, std::size_t frame_size,
                       std::size_t expected_steps, int threads = 1);

    const std::vector<double>& push(std::span<const double> frame);

    // direct-summation reference for the same weights/history (testing)
    static std::vector<double> direct_reference(std::span<const double> weights,
                                                const std::vector<std::vector<double>>& frames);

private:
    struct Level {
        std::size_t block;                       // L_k
        std::vector<std::complex<double>> wspec; // FFT of w[L_k .. 2L_k)
        std::vector<double> staging;             // L_k frames of scheduled output
    };

    void fire_level(Level& lev, std::size_t n);

    std::vector<double> weights_;
    std::size_t effective_weights_ = 0;  // trailing zeros skipped in direct mode
    std::size_t frame_size_;
    std::size_t head_;  // direct window in steps
    bool use_fft_;
    int threads_;
    std::size_t n_ = 0;
    std::vector<double> history_;  // flat, frame-major
    std::vector<Level> levels_;
    std::vector<double> out_;
};

}  // namespace subdiff
