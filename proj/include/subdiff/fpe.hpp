#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "subdiff/exprparse.hpp"
#include "subdiff/grid.hpp"
#include "subdiff/kernels.hpp"
#include "subdiff/levy.hpp"

namespace subdiff {

enum class JumpVariant { NoJump, StableJump, SymmetricJump, GeneralSeriesJump };

struct SpatialOperatorConfig {
    JumpVariant variant = JumpVariant::NoJump;
    double stable_alpha = 1.5;                // StableJump: alpha in (0,2)\{1}
    std::optional<LevyMeasureSpec> measure;   // SymmetricJump / GeneralSeriesJump
    int series_k = 8;                         // GeneralSeriesJump truncation
    double jump_cutoff = 1.0;                 // compensation radius for the series

    void validate() const;
};

// Flux-form drift-diffusion: -d/dx[F g] + d^2/dx^2[(sigma^2/2) g], central
// differences with arithmetic face averages and absorbing (zero) ghosts.
// outflow_rate, when given, receives the boundary-flux mass loss rate.
std::vector<double> drift_diffusion_apply(std::span<const double> g,
                                          const CoefficientField& coeffs, double t,
                                          const Grid& grid,
                                          double* outflow_rate = nullptr);

// Riesz fractional Laplacian -(-Delta)^{alpha/2} by the two-sided (shifted
// for alpha > 1) Grunwald-Letnikov formula with zero extension.
class RieszGlOperator {
public:
    RieszGlOperator(double alpha, const Grid& grid);

    void apply(std::span<const double> g, std::span<double> out,
               int threads = 1) const;

    // sum_j |row coefficients| (uniform over rows by Toeplitz structure);
    // the jump contribution to the explicit-step stability number.
    double row_abs_sum() const;

    // column sums (= mass-production rate per unit density at node j);
    // negative values record leakage through the zero extension.
    const std::vector<double>& column_sums() const { return colsum_; }

    double alpha() const { return alpha_; }

private:
    double alpha_;
    int n_x_;
    std::vector<double> kernel_;  // c_d, d = -(n_x-1) .. (n_x-1)
    std::vector<double> colsum_;
};

std::vector<double> frac_laplacian_apply(std::span<const double> g, double alpha,
                                         const Grid& grid, int threads = 1);

// -(-Delta)^{alpha/2}[ sgn(h)|h|^alpha g ] (the stable-jump adjoint term).
std::vector<double> stable_jump_apply(std::span<const double> g,
                                      const CoefficientField& coeffs, double t,
                                      double alpha, const Grid& grid,
                                      int threads = 1);

// One-sided radial view of a symmetric Levy measure; the quadrature core of
// the symmetric jump operator is written against this interface so tests can
// feed it synthetic measures.
struct RadialMeasure {
    std::function<double(double)> tail;                 // nu((s,inf)), one side
    std::function<double(double)> second_moment_below;  // int_0^s u^2 nu(du)
    double s_max;  // end of support (inf -> any value past the grid span)
};

std::vector<double> symmetric_jump_apply_radial(std::span<const double> g,
                                                std::span<const double> h_nodes,
                                                const RadialMeasure& measure,
                                                const Grid& grid, int threads = 1);

// T^s g(x) = int [g(x + s h(x,t)) + g(x - s h(x,t)) - 2 g(x)] nu_+(ds):
// pointwise pushforward of a symmetric measure by h.
std::vector<double> symmetric_jump_apply(std::span<const double> g,
                                         const CoefficientField& coeffs, double t,
                                         const LevyMeasureSpec& measure,
                                         const Grid& grid, int threads = 1);

struct SeriesResult {
    std::vector<double> values;
    bool truncation_warning = false;
};

// Derivative-series form of the general jump adjoint T^{l+}: for |r| below
// the compensation radius the k=1 term cancels, so the integrand starts at
// k=2 there and at k=1 outside. Spatial derivatives are second-order central
// differences with zero extension.
SeriesResult general_series_apply(std::span<const double> g,
                                  const CoefficientField& coeffs, double t,
                                  const LevyMeasureSpec& measure, int series_k,
                                  double jump_cutoff, const Grid& grid,
                                  int threads = 1);

enum class InitialCondition { DiscreteDelta, GaussianMollifier };

struct FpeConfig {
    Grid grid;
    double dt = 1e-4;
    double t_end = 1.0;
    std::vector<double> record_times;  // subset of (0, t_end]
    SpatialOperatorConfig op;
    CoefficientField coefficients;
    SubordinatorSpec subordinator;
    InitialCondition ic = InitialCondition::DiscreteDelta;
    int threads = 1;
    double mass_tolerance = 1e-6;
    // replaces the subordinator-derived memory operator; the GL(alpha = 1)
    // identity turns the solver into the classical Fokker-Planck equation
    std::optional<DiscreteMemoryOperator> memory_override;
};

struct MassLedgerRow {
    std::size_t step;
    double time;
    double interior;  // grid mass
    double outflow;   // cumulative recorded boundary loss
};

struct FpeState {
    Grid grid;
    double dt = 0.0;
    std::vector<double> record_times;
    std::vector<std::vector<double>> solutions;  // one grid function per time
    std::vector<MassLedgerRow> ledger;
    bool truncation_warning = false;  // from the series operator, if used
};

// Explicit-step stability number; must not exceed 0.4.
double stability_number(const FpeConfig& cfg);

// q^{n+1} = q^n + dt * L_x[(Phi q)^n] with the configured memory operator and
// spatial operator; discrete-delta (or mollified) initial condition.
FpeState solve_fpe(const FpeConfig& cfg);

}  // namespace subdiff
