#include "subdiff/fpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subdiff/numerics/parallel.hpp"

namespace subdiff {

namespace {

void check_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw ContractError(std::string(what) + " evaluated non-finite");
}

// second-order central-difference coefficients for the k-th derivative on a
// symmetric stencil (k+1 points for even k, k+2 for odd k), by moment matching
std::vector<double> central_derivative_stencil(int k, double dx) {
    int m = (k % 2 == 0) ? k / 2 : (k + 1) / 2;
    int n = 2 * m + 1;
    // solve sum_j a_j j^p = k! [p == k] for p = 0..n-1
    std::vector<double> mat(n * n);
    std::vector<double> rhs(n, 0.0);
    for (int p = 0; p < n; ++p) {
        for (int j = -m; j <= m; ++j)
            mat[p * n + (j + m)] = std::pow(static_cast<double>(j), p);
        if (p == k) {
            double fact = 1.0;
            for (int q = 2; q <= k; ++q) fact *= q;
            rhs[p] = fact;
        }
    }
    // Gaussian elimination with partial pivoting (n <= 15)
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(mat[r * n + col]) > std::fabs(mat[piv * n + col])) piv = r;
        for (int c = 0; c < n; ++c) std::swap(mat[col * n + c], mat[piv * n + c]);
        std::swap(rhs[col], rhs[piv]);
        double d = mat[col * n + col];
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = mat[r * n + col] / d;
            for (int c = col; c < n; ++c) mat[r * n + c] -= f * mat[col * n + c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> a(n);
    double scale = std::pow(dx, -k);
    for (int j = 0; j < n; ++j) a[j] = rhs[j] / mat[j * n + j] * scale;
    return a;
}

double linear_interp(std::span<const double> g, const Grid& grid, double y) {
    double u = (y - grid.x_min) / grid.dx();
    if (u <= 0.0 || u >= static_cast<double>(grid.n_x - 1)) {
        // zero extension, with the end nodes ramping to zero half a cell out
        if (u > -1.0 && u <= 0.0) return g[0] * (1.0 + u);
        if (u >= grid.n_x - 1 && u < grid.n_x) {
            double frac = u - (grid.n_x - 1);
            return g[grid.n_x - 1] * (1.0 - frac);
        }
        return 0.0;
    }
    int j = static_cast<int>(u);
    double frac = u - j;
    return (1.0 - frac) * g[j] + frac * g[j + 1];
}

}  // namespace

// ---------------------------------------------------------------------------
// config validation

void SpatialOperatorConfig::validate() const {
    switch (variant) {
        case JumpVariant::NoJump:
            break;
        case JumpVariant::StableJump:
            if (!(stable_alpha > 0.0 && stable_alpha < 2.0))
                throw DomainError("stable jump alpha must lie in (0,2)");
            if (stable_alpha == 1.0)
                throw DomainError(
                    "stable jump alpha = 1 is unsupported: the Riesz "
                    "discretisation normalisation 1/(2 cos(pi alpha/2)) is singular");
            break;
        case JumpVariant::SymmetricJump:
            if (!measure) throw DomainError("symmetric jump needs a Levy measure");
            if (measure->support() != MeasureSupport::Symmetric)
                throw ContractError("symmetric jump requires a symmetric measure");
            break;
        case JumpVariant::GeneralSeriesJump:
            if (!measure) throw DomainError("series jump needs a Levy measure");
            if (series_k < 2 || series_k > 12)
                throw DomainError("series truncation K must lie in [2,12]");
            if (!(jump_cutoff > 0.0)) throw DomainError("jump_cutoff must be positive");
            break;
    }
}

// ---------------------------------------------------------------------------
// drift-diffusion

std::vector<double> drift_diffusion_apply(std::span<const double> g,
                                          const CoefficientField& coeffs, double t,
                                          const Grid& grid, double* outflow_rate) {
    const int n = grid.n_x;
    if (n < 5) throw ContractError("drift_diffusion_apply requires n_x >= 5");
    if (g.size() != static_cast<std::size_t>(n))
        throw ContractError("grid function size mismatch");
    const double dx = grid.dx();

    std::vector<double> F(n), D(n);
    for (int i = 0; i < n; ++i) {
        double x = grid.x(i);
        F[i] = coeffs.F.eval(x, t);
        double s = coeffs.sigma.eval(x, t);
        if (s < 0.0) throw ContractError("sigma(x,t) evaluated negative");
        check_finite(F[i], "F");
        check_finite(s, "sigma");
        D[i] = 0.5 * s * s;
    }
    double F_ghost_l = coeffs.F.eval(grid.x_min - dx, t);
    double F_ghost_r = coeffs.F.eval(grid.x_max + dx, t);
    check_finite(F_ghost_l, "F");
    check_finite(F_ghost_r, "F");

    std::vector<double> out(n);
    auto flux = [&](int i) {
        // advective flux through the face between nodes i and i+1 (ghosts
        // carry g = 0)
        double Fl = i < 0 ? F_ghost_l : F[i];
        double Fr = i + 1 >= n ? F_ghost_r : F[i + 1];
        double gl = i < 0 ? 0.0 : g[i];
        double gr = i + 1 >= n ? 0.0 : g[i + 1];
        return 0.5 * (Fl + Fr) * 0.5 * (gl + gr);
    };
    for (int i = 0; i < n; ++i) {
        double adv = -(flux(i) - flux(i - 1)) / dx;
        double el = i > 0 ? D[i - 1] * g[i - 1] : 0.0;
        double er = i + 1 < n ? D[i + 1] * g[i + 1] : 0.0;
        double diff = (er - 2.0 * D[i] * g[i] + el) / (dx * dx);
        out[i] = adv + diff;
    }
    if (outflow_rate) {
        // boundary accounting: net mass rate telescopes to the edge fluxes
        *outflow_rate = flux(n - 1) - flux(-1) +
                        (D[n - 1] * g[n - 1] + D[0] * g[0]) / dx;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Riesz fractional Laplacian (Grunwald-Letnikov)

RieszGlOperator::RieszGlOperator(double alpha, const Grid& grid)
    : alpha_(alpha), n_x_(grid.n_x) {
    if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0)
        throw DomainError("Riesz GL operator requires alpha in (0,2) \\ {1}");
    const double dx = grid.dx();
    // GL weights for order alpha share the recurrence used for the memory
    // operator coefficients
    std::vector<double> w = gl_coefficients(alpha, n_x_ + 2);
    // shift 1 keeps the diagonal sign right for alpha > 1; the unshifted
    // form does the same for alpha < 1
    const int shift = alpha > 1.0 ? 1 : 0;
    const double norm = -1.0 / (2.0 * std::cos(M_PI * alpha / 2.0) *
                                std::pow(dx, alpha));
    kernel_.assign(2 * n_x_ - 1, 0.0);
    for (int d = -(n_x_ - 1); d <= n_x_ - 1; ++d) {
        double v = 0.0;
        if (d <= shift) v += w[shift - d];
        if (d >= -shift) v += w[shift + d];
        kernel_[d + n_x_ - 1] = norm * v;
    }
    colsum_.assign(n_x_, 0.0);
    for (int j = 0; j < n_x_; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n_x_; ++i) acc += kernel_[j - i + n_x_ - 1];
        colsum_[j] = acc;
    }
}

void RieszGlOperator::apply(std::span<const double> g, std::span<double> out,
                            int threads) const {
    if (g.size() != static_cast<std::size_t>(n_x_) || out.size() != g.size())
        throw ContractError("RieszGlOperator: size mismatch");
    const double* ker = kernel_.data() + n_x_ - 1;
    const double* gp = g.data();
    const int n = n_x_;
    num::parallel_chunks(0, static_cast<std::size_t>(n), threads,
                         [&](std::size_t lo, std::size_t hi) {
                             for (std::size_t i = lo; i < hi; ++i) {
                                 double acc = 0.0;
                                 const double* krow = ker - static_cast<int>(i);
                                 for (int j = 0; j < n; ++j)
                                     acc += krow[j] * gp[j];
                                 out[i] = acc;
                             }
                         });
}

double RieszGlOperator::row_abs_sum() const {
    double acc = 0.0;
    for (double v : kernel_) acc += std::fabs(v);
    return acc;
}

std::vector<double> frac_laplacian_apply(std::span<const double> g, double alpha,
                                         const Grid& grid, int threads) {
    RieszGlOperator op(alpha, grid);
    std::vector<double> out(g.size());
    op.apply(g, out, threads);
    return out;
}

std::vector<double> stable_jump_apply(std::span<const double> g,
                                      const CoefficientField& coeffs, double t,
                                      double alpha, const Grid& grid, int threads) {
    std::vector<double> mg(g.size());
    for (int i = 0; i < grid.n_x; ++i) {
        double h = coeffs.h.eval(grid.x(i), t);
        check_finite(h, "h");
        double m = (h > 0.0 ? 1.0 : (h < 0.0 ? -1.0 : 0.0)) *
                   std::pow(std::fabs(h), alpha);
        mg[i] = m * g[i];
    }
    return frac_laplacian_apply(mg, alpha, grid, threads);
}

// ---------------------------------------------------------------------------
// symmetric jump operator (pointwise pushforward quadrature)

std::vector<double> symmetric_jump_apply_radial(std::span<const double> g,
                                                std::span<const double> h_nodes,
                                                const RadialMeasure& measure,
                                                const Grid& grid, int threads) {
    const int n = grid.n_x;
    if (g.size() != static_cast<std::size_t>(n) || h_nodes.size() != g.size())
        throw ContractError("symmetric_jump_apply: size mismatch");
    const double dx = grid.dx();
    const double span = grid.x_max - grid.x_min;
    constexpr double kCellsPerDecade = 48.0;

    std::vector<double> out(n, 0.0);
    num::parallel_chunks(0, static_cast<std::size_t>(n), threads,
                         [&](std::size_t lo_i, std::size_t hi_i) {
        for (std::size_t ui = lo_i; ui < hi_i; ++ui) {
            int i = static_cast<int>(ui);
            double h = h_nodes[i];
            if (h == 0.0) {
                out[i] = 0.0;
                continue;
            }
            double ah = std::fabs(h);
            double x = grid.x(i);
            double gi = g[i];

            // jumps below one grid cell: second-difference Taylor form,
            // g(x+d)+g(x-d)-2g(x) ~ d^2 g''(x)
            double s_grid = dx / ah;
            double s_taylor = std::min(s_grid, measure.s_max);
            double gl = i > 0 ? g[i - 1] : 0.0;
            double gr = i + 1 < n ? g[i + 1] : 0.0;
            double d2 = (gr - 2.0 * gi + gl) / (dx * dx);
            double acc = d2 * h * h * measure.second_moment_below(s_taylor);

            // geometric cells from the grid scale out to where the shifted
            // arguments leave the grid (or the measure support ends)
            double s_end = std::min(measure.s_max, span / ah);
            if (s_end > s_taylor) {
                double decades = std::log10(s_end / s_taylor);
                int cells = std::max(1, static_cast<int>(
                                            std::ceil(kCellsPerDecade * decades)));
                double ratio = std::pow(s_end / s_taylor, 1.0 / cells);
                double a = s_taylor;
                double tail_a = measure.tail(a);
                for (int c = 0; c < cells; ++c) {
                    double b = (c + 1 == cells) ? s_end : a * ratio;
                    double tail_b = measure.tail(b);
                    double mass = tail_a - tail_b;
                    if (mass > 0.0) {
                        double s_node = std::sqrt(a * b);
                        double jump = s_node * h;
                        double integrand = linear_interp(g, grid, x + jump) +
                                           linear_interp(g, grid, x - jump) -
                                           2.0 * gi;
                        acc += mass * integrand;
                    }
                    a = b;
                    tail_a = tail_b;
                }
            }
            // beyond s_end both shifted arguments are off-grid, so the
            // integrand is exactly -2 g(x) under zero extension
            if (s_end < measure.s_max) acc += -2.0 * gi * measure.tail(s_end);
            out[i] = acc;
        }
    });
    return out;
}

namespace {

RadialMeasure radial_of(const LevyMeasureSpec& m, const Grid& grid) {
    if (m.support() != MeasureSupport::Symmetric)
        throw ContractError("pushforward jump operator requires a symmetric measure");
    RadialMeasure rm;
    rm.tail = [m](double s) { return m.tail_one_sided(s); };
    rm.second_moment_below = [m](double s) { return m.second_moment_below(s); };
    rm.s_max = m.family == MeasureFamily::TruncatedSymmetricStable
                   ? m.r_max
                   : 2.0 * (grid.x_max - grid.x_min) + 1.0;
    return rm;
}

}  // namespace

std::vector<double> symmetric_jump_apply(std::span<const double> g,
                                         const CoefficientField& coeffs, double t,
                                         const LevyMeasureSpec& measure,
                                         const Grid& grid, int threads) {
    std::vector<double> h(grid.n_x);
    for (int i = 0; i < grid.n_x; ++i) {
        h[i] = coeffs.h.eval(grid.x(i), t);
        check_finite(h[i], "h");
    }
    RadialMeasure rm = radial_of(measure, grid);
    if (measure.family == MeasureFamily::SymmetricStable) {
        // untruncated power tail: past s_end the quadrature only sees the
        // -2g(x) term, handled analytically by tail(s_end)
        rm.s_max = std::numeric_limits<double>::infinity();
    }
    return symmetric_jump_apply_radial(g, h, rm, grid, threads);
}

// ---------------------------------------------------------------------------
// general-series jump operator

namespace {

// ((-1)^k / k!) int r^k nu(dr) with the compensation-region rule: k = 1
// integrates over |r| >= cutoff only, k >= 2 over the whole line.
std::vector<double> series_coefficients(const LevyMeasureSpec& m, int K,
                                        double jump_cutoff) {
    if (m.family != MeasureFamily::TruncatedSymmetricStable)
        throw NumericalError(
            "series jump operator needs finite moments of all orders; use a "
            "truncated measure instead of " + m.describe());
    (void)jump_cutoff;  // the k = 1 moment vanishes for symmetric measures
    std::vector<double> c(K + 1, 0.0);
    double fact = 1.0;
    for (int k = 1; k <= K; ++k) {
        fact *= k;
        if (k % 2 != 0) continue;  // odd moments vanish by symmetry
        double mk = 2.0 * m.stable_constant() *
                    std::pow(m.r_max, k - m.alpha) / (k - m.alpha);
        c[k] = mk / fact;  // (-1)^k = +1 for even k
    }
    return c;
}

}  // namespace

SeriesResult general_series_apply(std::span<const double> g,
                                  const CoefficientField& coeffs, double t,
                                  const LevyMeasureSpec& measure, int series_k,
                                  double jump_cutoff, const Grid& grid,
                                  int threads) {
    const int n = grid.n_x;
    if (series_k < 2 || series_k > 12)
        throw DomainError("series truncation K must lie in [2,12]");
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) {
        h[i] = coeffs.h.eval(grid.x(i), t);
        check_finite(h[i], "h");
    }
    std::vector<double> c = series_coefficients(measure, series_k, jump_cutoff);

    SeriesResult res;
    res.values.assign(n, 0.0);
    std::vector<double> term_norms;
    std::vector<double> hk_g(n), dk(n);
    for (int k = 1; k <= series_k; ++k) {
        if (c[k] == 0.0) continue;
        for (int i = 0; i < n; ++i) hk_g[i] = std::pow(h[i], k) * g[i];
        std::vector<double> stencil = central_derivative_stencil(k, grid.dx());
        int m = (static_cast<int>(stencil.size()) - 1) / 2;
        num::parallel_chunks(0, static_cast<std::size_t>(n), threads,
                             [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                double acc = 0.0;
                for (int j = -m; j <= m; ++j) {
                    int idx = static_cast<int>(i) + j;
                    if (idx < 0 || idx >= n) continue;  // zero extension
                    acc += stencil[j + m] * hk_g[idx];
                }
                dk[i] = acc;
            }
        });
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double term = c[k] * dk[i];
            res.values[i] += term;
            norm = std::max(norm, std::fabs(term));
        }
        term_norms.push_back(norm);
    }
    // non-convergence heuristic: the last retained term should not exceed
    // the previous one (odd terms vanish here, so compare nonzero terms)
    if (term_norms.size() >= 2 &&
        term_norms.back() > term_norms[term_norms.size() - 2])
        res.truncation_warning = true;
    return res;
}

// ---------------------------------------------------------------------------
// solver

namespace {

// per-step spatial operator with static-coefficient caching
struct SpatialOperator {
    const FpeConfig& cfg;
    bool static_coeffs;
    double built_t = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> m_nodes;  // sgn(h)|h|^alpha (stable branch)
    std::vector<double> h_nodes;
    std::optional<RieszGlOperator> riesz;
    RadialMeasure radial;

    explicit SpatialOperator(const FpeConfig& c) : cfg(c) {
        const auto& op = cfg.op;
        if (op.variant == JumpVariant::StableJump)
            riesz.emplace(op.stable_alpha, cfg.grid);
        if (op.variant == JumpVariant::SymmetricJump) {
            radial = radial_of(*op.measure, cfg.grid);
            if (op.measure->family == MeasureFamily::SymmetricStable)
                radial.s_max = std::numeric_limits<double>::infinity();
        }
        static_coeffs = !cfg.coefficients.F.uses_t() &&
                        !cfg.coefficients.sigma.uses_t() &&
                        !cfg.coefficients.h.uses_t();
        refresh(0.0);
    }

    void refresh(double t) {
        if (static_coeffs && !std::isnan(built_t)) return;
        if (built_t == t) return;
        built_t = t;
        const int n = cfg.grid.n_x;
        h_nodes.resize(n);
        m_nodes.resize(n);
        for (int i = 0; i < n; ++i) {
            double h = cfg.coefficients.h.eval(cfg.grid.x(i), t);
            check_finite(h, "h");
            h_nodes[i] = h;
            double a = cfg.op.stable_alpha;
            m_nodes[i] = (h > 0.0 ? 1.0 : (h < 0.0 ? -1.0 : 0.0)) *
                         std::pow(std::fabs(h), a);
        }
    }

    // out = L_x[phi] at time t; returns the recorded outflow rate
    double apply(std::span<const double> phi, std::vector<double>& out,
                 std::vector<double>& scratch, double t, bool* warn) {
        refresh(t);
        double outflow = 0.0;
        out = drift_diffusion_apply(phi, cfg.coefficients, t, cfg.grid, &outflow);

        switch (cfg.op.variant) {
            case JumpVariant::NoJump:
                break;
            case JumpVariant::StableJump: {
                const int n = cfg.grid.n_x;
                scratch.resize(n);
                for (int i = 0; i < n; ++i) scratch[i] = m_nodes[i] * phi[i];
                std::vector<double> jump(n);
                riesz->apply(scratch, jump, cfg.threads);
                const auto& cs = riesz->column_sums();
                double rate = 0.0;
                for (int i = 0; i < n; ++i) {
                    out[i] += jump[i];
                    rate += scratch[i] * cs[i];
                }
                outflow += -rate * cfg.grid.dx();
                break;
            }
            case JumpVariant::SymmetricJump: {
                std::vector<double> jump = symmetric_jump_apply_radial(
                    phi, h_nodes, radial, cfg.grid, cfg.threads);
                double rate = 0.0;
                for (int i = 0; i < cfg.grid.n_x; ++i) {
                    out[i] += jump[i];
                    rate += jump[i];
                }
                outflow += -rate * cfg.grid.dx();
                break;
            }
            case JumpVariant::GeneralSeriesJump: {
                SeriesResult sr = general_series_apply(
                    phi, cfg.coefficients, t, *cfg.op.measure, cfg.op.series_k,
                    cfg.op.jump_cutoff, cfg.grid, cfg.threads);
                if (sr.truncation_warning && warn) *warn = true;
                double rate = 0.0;
                for (int i = 0; i < cfg.grid.n_x; ++i) {
                    out[i] += sr.values[i];
                    rate += sr.values[i];
                }
                outflow += -rate * cfg.grid.dx();
                break;
            }
        }
        return outflow;
    }
};

// infinity-norm bound of the truncated series operator: sum over terms of
// |c_k| h^k times the stencil's absolute row sum (scales like dx^{-K})
double series_operator_norm_bound(const LevyMeasureSpec& measure, int K,
                                  double jump_cutoff, double max_h, double dx) {
    std::vector<double> c = series_coefficients(measure, K, jump_cutoff);
    double norm = 0.0;
    for (int k = 1; k <= K; ++k) {
        if (c[k] == 0.0) continue;
        std::vector<double> stencil = central_derivative_stencil(k, dx);
        double row = 0.0;
        for (double a : stencil) row += std::fabs(a);
        norm += std::fabs(c[k]) * std::pow(max_h, k) * row;
    }
    return norm;
}

std::vector<double> initial_condition(const FpeConfig& cfg) {
    const Grid& g = cfg.grid;
    std::vector<double> q(g.n_x, 0.0);
    int i0 = static_cast<int>(std::lround((0.0 - g.x_min) / g.dx()));
    i0 = std::clamp(i0, 0, g.n_x - 1);
    if (cfg.ic == InitialCondition::DiscreteDelta) {
        q[i0] = 1.0 / g.dx();
        return q;
    }
    double w = 2.0 * g.dx();
    double mass = 0.0;
    for (int i = 0; i < g.n_x; ++i) {
        double x = g.x(i);
        q[i] = std::exp(-0.5 * x * x / (w * w));
        mass += q[i];
    }
    for (auto& v : q) v /= mass * g.dx();
    return q;
}

}  // namespace

double stability_number(const FpeConfig& cfg) {
    cfg.op.validate();
    const Grid& grid = cfg.grid;
    const double dx = grid.dx();

    DiscreteMemoryOperator mem =
        cfg.memory_override
            ? *cfg.memory_override
            : DiscreteMemoryOperator::for_subordinator(cfg.subordinator, cfg.dt);
    double w0 = mem.weights(1)[0];
    double inst = cfg.dt * w0;  // = dt^alpha for the GL branch

    // max over a coarse time sample and the grid
    std::vector<double> t_samples = {0.0};
    if (cfg.coefficients.sigma.uses_t() || cfg.coefficients.h.uses_t())
        for (int s = 1; s <= 4; ++s) t_samples.push_back(cfg.t_end * s / 4.0);

    double max_d = 0.0;
    double jump_norm = 0.0;
    for (double t : t_samples) {
        for (int i = 0; i < grid.n_x; ++i) {
            double s = cfg.coefficients.sigma.eval(grid.x(i), t);
            max_d = std::max(max_d, 0.5 * s * s);
        }
        switch (cfg.op.variant) {
            case JumpVariant::NoJump:
                break;
            case JumpVariant::StableJump: {
                RieszGlOperator op(cfg.op.stable_alpha, grid);
                double max_m = 0.0;
                for (int i = 0; i < grid.n_x; ++i) {
                    double h = cfg.coefficients.h.eval(grid.x(i), t);
                    max_m = std::max(max_m,
                                     std::pow(std::fabs(h), cfg.op.stable_alpha));
                }
                jump_norm = std::max(jump_norm, max_m * op.row_abs_sum());
                break;
            }
            case JumpVariant::SymmetricJump: {
                // |T g| <= 4 h^2 I2(dx/|h|)/dx^2 |g| + 4 tail(dx/|h|) |g|
                const LevyMeasureSpec& m = *cfg.op.measure;
                for (int i = 0; i < grid.n_x; ++i) {
                    double h = cfg.coefficients.h.eval(grid.x(i), t);
                    if (h == 0.0) continue;
                    double s_gr = dx / std::fabs(h);
                    double bound = 4.0 * h * h * m.second_moment_below(s_gr) /
                                       (dx * dx) +
                                   4.0 * m.tail_one_sided(s_gr);
                    jump_norm = std::max(jump_norm, bound);
                }
                break;
            }
            case JumpVariant::GeneralSeriesJump: {
                // The K-truncated series is a differential operator of order
                // K, so the explicit step is stable only under a dt ~ dx^K
                // restriction; bound its infinity norm through the stencils.
                double max_h = 0.0;
                for (int i = 0; i < grid.n_x; ++i)
                    max_h = std::max(
                        max_h, std::fabs(cfg.coefficients.h.eval(grid.x(i), t)));
                double norm = series_operator_norm_bound(
                    *cfg.op.measure, cfg.op.series_k, cfg.op.jump_cutoff, max_h,
                    dx);
                jump_norm = std::max(jump_norm, norm);
                break;
            }
        }
    }
    return inst * (max_d / (dx * dx) + jump_norm);
}

FpeState solve_fpe(const FpeConfig& cfg) {
    cfg.op.validate();
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0))
        throw ConfigError("solver needs dt > 0 and t_end > 0");
    for (double t : cfg.record_times)
        if (t < 0.0 || t > cfg.t_end + 1e-12)
            throw ConfigError("record times must lie in [0, t_end]");

    double s_number = stability_number(cfg);
    if (!(s_number <= 0.4))
        throw ConfigError("explicit-scheme stability number " +
                          std::to_string(s_number) +
                          " exceeds 0.4; reduce dt or refine the setup");

    const Grid& grid = cfg.grid;
    const std::size_t n_steps =
        static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));

    DiscreteMemoryOperator mem =
        cfg.memory_override
            ? *cfg.memory_override
            : DiscreteMemoryOperator::for_subordinator(cfg.subordinator, cfg.dt);
    HistoryConvolution conv(mem.weights(n_steps + 1), grid.n_x, n_steps + 1,
                            cfg.threads);

    // record times -> step indices
    std::vector<std::size_t> record_steps;
    for (double t : cfg.record_times)
        record_steps.push_back(std::min<std::size_t>(
            n_steps, static_cast<std::size_t>(std::llround(t / cfg.dt))));

    FpeState state;
    state.grid = grid;
    state.dt = cfg.dt;
    state.record_times = cfg.record_times;
    state.solutions.resize(cfg.record_times.size());
    state.ledger.reserve(n_steps + 1);

    std::vector<double> q = initial_condition(cfg);
    SpatialOperator op(cfg);
    std::vector<double> lq, scratch;

    const double dx = grid.dx();
    double outflow = 0.0;
    auto interior_mass = [&]() {
        double acc = 0.0;
        for (double v : q) acc += v;
        return acc * dx;
    };

    auto record_if_due = [&](std::size_t step) {
        for (std::size_t r = 0; r < record_steps.size(); ++r)
            if (record_steps[r] == step) state.solutions[r] = q;
    };

    state.ledger.push_back({0, 0.0, interior_mass(), 0.0});
    record_if_due(0);

    for (std::size_t n = 0; n < n_steps; ++n) {
        double t_n = static_cast<double>(n) * cfg.dt;
        const std::vector<double>& phi = conv.push(q);
        double rate = op.apply(phi, lq, scratch, t_n, &state.truncation_warning);
        for (int i = 0; i < grid.n_x; ++i) q[i] += cfg.dt * lq[i];
        outflow += cfg.dt * rate;

        double mass = interior_mass();
        if (!std::isfinite(mass) ||
            std::fabs(mass + outflow - 1.0) > cfg.mass_tolerance)
            throw NumericalError(
                "mass ledger breach at step " + std::to_string(n + 1) +
                ": interior " + std::to_string(mass) + " + outflow " +
                std::to_string(outflow) + " != 1");
        state.ledger.push_back({n + 1, (n + 1) * cfg.dt, mass, outflow});
        record_if_due(n + 1);
    }
    return state;
}

}  // namespace subdiff
