#include "subdiff/kernels.hpp"

#include <cmath>
#include <cstring>

#include "subdiff/numerics/fft.hpp"
#include "subdiff/numerics/parallel.hpp"
#include "subdiff/numerics/quadrature.hpp"

namespace subdiff {

// ---------------------------------------------------------------------------
// MemoryKernel

MemoryKernel MemoryKernel::closed_form_stable(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("closed-form stable kernel requires alpha in (0,1)");
    MemoryKernel k;
    k.closed_alpha_ = alpha;
    k.mtilde_ = [alpha](std::complex<double> u) {
        return std::pow(u, std::complex<double>(-alpha));
    };
    return k;
}

MemoryKernel MemoryKernel::laplace_inversion(SubordinatorSpec spec, int talbot_nodes) {
    MemoryKernel k;
    k.nodes_ = talbot_nodes;
    k.mtilde_ = [spec = std::move(spec)](std::complex<double> u) {
        auto psi = spec.closed_form_psi(u);
        if (!psi)
            throw NumericalError(
                "Talbot inversion needs the Laplace exponent on a complex contour; "
                "no closed form available for " + spec.levy_measure.describe());
        return 1.0 / *psi;
    };
    return k;
}

MemoryKernel MemoryKernel::from_laplace(
    std::function<std::complex<double>(std::complex<double>)> mtilde,
    int talbot_nodes) {
    MemoryKernel k;
    k.nodes_ = talbot_nodes;
    k.mtilde_ = std::move(mtilde);
    return k;
}

double MemoryKernel::talbot(double t, int n) const {
    // fixed-Talbot contour (Abate-Valko): s(theta) = r theta (cot theta + i)
    // with r = 2n/(5t).
    double r = 2.0 * n / (5.0 * t);
    std::complex<double> sum = 0.5 * std::exp(r * t) * mtilde_(r);
    for (int k = 1; k < n; ++k) {
        double theta = k * M_PI / n;
        double cot = std::cos(theta) / std::sin(theta);
        std::complex<double> s(r * theta * cot, r * theta);
        double sigma = theta + (theta * cot - 1.0) * cot;
        std::complex<double> term =
            std::exp(t * s) * mtilde_(s) * std::complex<double>(1.0, sigma);
        sum += term;
    }
    return (r / n) * sum.real();
}

double MemoryKernel::operator()(double t) const {
    if (!(t > 0.0)) throw DomainError("memory kernel requires t > 0");
    if (closed_alpha_)
        return std::pow(t, *closed_alpha_ - 1.0) / std::tgamma(*closed_alpha_);
    double full = talbot(t, nodes_);
    double probe = talbot(t, nodes_ - nodes_ / 4);
    double scale = std::max({std::fabs(full), std::fabs(probe), 1e-300});
    if (std::fabs(full - probe) > 1e-3 * scale || !std::isfinite(full))
        throw NumericalError("Talbot inversion unstable at t = " + std::to_string(t));
    return full;
}

MemoryKernel::Table MemoryKernel::build_table(double t_min, double t_max,
                                              int n) const {
    if (!(t_min > 0.0) || !(t_max > t_min) || n < 2)
        throw DomainError("kernel table needs 0 < t_min < t_max and n >= 2");
    Table tab;
    tab.t.resize(n);
    tab.m.resize(n);
    double ratio = std::pow(t_max / t_min, 1.0 / (n - 1));
    for (int i = 0; i < n; ++i) {
        tab.t[i] = t_min * std::pow(ratio, i);
        tab.m[i] = (*this)(tab.t[i]);
    }
    return tab;
}

double MemoryKernel::table_laplace_error(const Table& table,
                                         const std::function<double(double)>& psi,
                                         std::span<const double> probes) {
    // trapezoid transform of the tabulated kernel, log-spaced nodes
    double worst = 0.0;
    for (double u : probes) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < table.t.size(); ++i) {
            double h = table.t[i + 1] - table.t[i];
            acc += 0.5 * h * (std::exp(-u * table.t[i]) * table.m[i] +
                              std::exp(-u * table.t[i + 1]) * table.m[i + 1]);
        }
        double target = 1.0 / psi(u);
        worst = std::max(worst, std::fabs(acc - target) / std::fabs(target));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Discrete memory operator

std::vector<double> gl_coefficients(double beta, std::size_t count) {
    std::vector<double> g(count);
    if (count == 0) return g;
    g[0] = 1.0;
    for (std::size_t j = 1; j < count; ++j)
        g[j] = g[j - 1] * (static_cast<double>(j) - 1.0 - beta) / static_cast<double>(j);
    return g;
}

DiscreteMemoryOperator DiscreteMemoryOperator::grunwald_letnikov(double alpha,
                                                                 double dt) {
    // alpha = 1 gives beta = 0 with weights (1, 0, 0, ...): the memoryless
    // identity, i.e. the classical (non-fractional) equation
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw DomainError("GL memory operator requires alpha in (0,1]");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    DiscreteMemoryOperator op;
    op.kind = Kind::GrunwaldLetnikov;
    op.dt = dt;
    op.beta = 1.0 - alpha;
    return op;
}

DiscreteMemoryOperator DiscreteMemoryOperator::convolution_quadrature(
    MemoryKernel k, double dt) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    DiscreteMemoryOperator op;
    op.kind = Kind::ConvolutionQuadrature;
    op.dt = dt;
    op.kernel = std::make_shared<MemoryKernel>(std::move(k));
    return op;
}

DiscreteMemoryOperator DiscreteMemoryOperator::for_subordinator(
    const SubordinatorSpec& spec, double dt) {
    if (spec.levy_measure.family == MeasureFamily::OneSidedStable)
        return grunwald_letnikov(spec.levy_measure.alpha, dt);
    return convolution_quadrature(MemoryKernel::laplace_inversion(spec), dt);
}

std::vector<double> DiscreteMemoryOperator::weights(std::size_t count) const {
    std::vector<double> w(count);
    if (count == 0) return w;
    if (kind == Kind::GrunwaldLetnikov) {
        w = gl_coefficients(beta, count);
        double scale = std::pow(dt, -beta);
        for (auto& v : w) v *= scale;
        return w;
    }
    // convolution quadrature: C^n = sum_j M(t_{n-j} + dt/2) f_j dt, and the
    // operator is the backward difference (C^n - C^{n-1})/dt, which folds
    // into weights w_k = m_k - m_{k-1} with m_k = M((k+1/2) dt).
    const MemoryKernel& M = *kernel;
    double prev = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        double mk = M((static_cast<double>(k) + 0.5) * dt);
        w[k] = mk - prev;
        prev = mk;
    }
    return w;
}

double phi_apply(const DiscreteMemoryOperator& op, std::span<const double> history) {
    if (history.empty())
        throw ContractError("phi_apply requires at least one history sample");
    std::size_t n = history.size() - 1;
    if (op.kind == DiscreteMemoryOperator::Kind::GrunwaldLetnikov) {
        std::vector<double> g = gl_coefficients(op.beta, history.size());
        double acc = 0.0;
        for (std::size_t j = 0; j <= n; ++j) acc += g[j] * history[n - j];
        return acc * std::pow(op.dt, -op.beta);
    }
    // midpoint-rule convolution C at t_n and t_{n-1}, then finite difference
    const MemoryKernel& M = *op.kernel;
    double dt = op.dt;
    double cn = 0.0, cn1 = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        double lag = static_cast<double>(n - j) * dt + 0.5 * dt;
        cn += M(lag) * history[j] * dt;
        if (j < n) cn1 += M(lag - dt) * history[j] * dt;
    }
    return (cn - cn1) / dt;
}

namespace {

// midpoint-in-g product integration against per-cell kernel masses
double theta_core(const std::function<double(double, double)>& cell_mass,
                  std::span<const double> g, double delta) {
    if (g.empty()) throw ContractError("theta_apply requires sampled input");
    if (!(delta > 0.0)) throw ContractError("theta_apply requires positive spacing");
    std::size_t m = g.size() - 1;  // g sampled at 0, delta, ..., m*delta
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double gm = 0.5 * (g[i] + g[i + 1]);
        double s_lo = static_cast<double>(m - i - 1) * delta;
        double s_hi = static_cast<double>(m - i) * delta;
        acc += cell_mass(s_lo, s_hi) * gm;
    }
    return acc;
}

}  // namespace

double theta_apply(const std::function<double(double)>& tail_G,
                   std::span<const double> g, double delta) {
    auto mass = [&](double a, double b) {
        if (a == 0.0) {
            // singular end cell: integrate in log space
            double s_lo = std::log(b) - 40.0;
            return num::integrate(
                [&](double s) {
                    double x = std::exp(s);
                    return tail_G(x) * x;
                },
                s_lo, std::log(b), 1e-10);
        }
        return num::integrate(tail_G, a, b, 1e-10);
    };
    return theta_core(mass, g, delta);
}

double theta_apply(const SubordinatorSpec& spec, std::span<const double> g,
                   double delta) {
    const LevyMeasureSpec& m = spec.levy_measure;
    if (m.family == MeasureFamily::OneSidedStable) {
        // int_0^s G = s^{1-alpha}/Gamma(2-alpha), exact cell masses
        double p = 1.0 - m.alpha;
        double norm = 1.0 / std::tgamma(2.0 - m.alpha);
        auto mass = [p, norm](double a, double b) {
            return norm * (std::pow(b, p) - std::pow(a, p));
        };
        return theta_core(mass, g, delta);
    }
    return theta_apply([&](double w) { return m.tail_one_sided(w); }, g, delta);
}

// ---------------------------------------------------------------------------
// HistoryConvolution

namespace {
constexpr std::size_t kHead = 128;        // direct window (steps)
constexpr std::size_t kFftThreshold = 3000;  // direct mode below this
}  // namespace

HistoryConvolution::HistoryConvolution(std::vector<double> weights,
                                       std::size_t frame_size,
                                       std::size_t expected_steps, int threads)
    : weights_(std::move(weights)),
      frame_size_(frame_size),
      head_(kHead),
      use_fft_(expected_steps > kFftThreshold),
      threads_(threads < 1 ? 1 : threads) {
    if (weights_.size() < expected_steps)
        throw ContractError("HistoryConvolution: weights shorter than the run");
    effective_weights_ = weights_.size();
    while (effective_weights_ > 0 && weights_[effective_weights_ - 1] == 0.0)
        --effective_weights_;
    if (effective_weights_ <= head_) use_fft_ = false;  // short memory
    // levels read weight blocks [L, 2L) with L up to the largest power of two
    // not exceeding the run length; pad with zeros so those reads are valid
    std::size_t lmax = 1;
    while (lmax * 2 <= std::max(expected_steps, head_)) lmax *= 2;
    weights_.resize(std::max(weights_.size(), 2 * lmax), 0.0);
    history_.reserve(expected_steps * frame_size_);
    out_.resize(frame_size_);
}

void HistoryConvolution::fire_level(Level& lev, std::size_t n) {
    const std::size_t L = lev.block;
    const std::size_t M = 2 * L;  // FFT size; exact for the middle L outputs
    // window of frames [n - 2L, n), zero-padded below step 0
    const std::ptrdiff_t w0 = static_cast<std::ptrdiff_t>(n) - static_cast<std::ptrdiff_t>(M);

    std::size_t pairs = (frame_size_ + 1) / 2;
    num::parallel_chunks(0, pairs, threads_, [&](std::size_t lo, std::size_t hi) {
        std::vector<std::complex<double>> z(M);
        for (std::size_t p = lo; p < hi; ++p) {
            std::size_t i = 2 * p;
            bool has_second = i + 1 < frame_size_;
            for (std::size_t j = 0; j < M; ++j) {
                std::ptrdiff_t step = w0 + static_cast<std::ptrdiff_t>(j);
                if (step < 0) {
                    z[j] = 0.0;
                    continue;
                }
                const double* frame =
                    &history_[static_cast<std::size_t>(step) * frame_size_];
                z[j] = {frame[i], has_second ? frame[i + 1] : 0.0};
            }
            num::fft(z.data(), M, false);
            for (std::size_t j = 0; j < M; ++j) z[j] *= lev.wspec[j];
            num::fft(z.data(), M, true);
            // linear-convolution values at positions L..2L-1 are alias-free
            // and carry the contributions for outputs n..n+L-1
            for (std::size_t d = 0; d < L; ++d) {
                lev.staging[d * frame_size_ + i] = z[L + d].real();
                if (has_second)
                    lev.staging[d * frame_size_ + i + 1] = z[L + d].imag();
            }
        }
    });
}

const std::vector<double>& HistoryConvolution::push(std::span<const double> frame) {
    if (frame.size() != frame_size_)
        throw ContractError("HistoryConvolution: frame size mismatch");
    const std::size_t n = n_++;
    history_.insert(history_.end(), frame.begin(), frame.end());

    if (!use_fft_) {
        std::size_t span = std::min(n + 1, effective_weights_);
        num::parallel_for(0, frame_size_, threads_, [&](std::size_t i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < span; ++j)
                acc += weights_[j] * history_[(n - j) * frame_size_ + i];
            out_[i] = acc;
        });
        return out_;
    }

    // create levels that become active at this step, then fire due levels
    while (true) {
        std::size_t next_block = levels_.empty() ? head_ : levels_.back().block * 2;
        if (next_block > n) break;
        Level lev;
        lev.block = next_block;
        lev.staging.assign(next_block * frame_size_, 0.0);
        std::vector<std::complex<double>> w(2 * next_block);
        for (std::size_t j = 0; j < next_block; ++j)
            w[j] = weights_[next_block + j];
        num::fft(w.data(), w.size(), false);
        lev.wspec = std::move(w);
        levels_.push_back(std::move(lev));
    }
    for (auto& lev : levels_)
        if (n >= lev.block && n % lev.block == 0) fire_level(lev, n);

    std::size_t direct = std::min(n + 1, head_);
    num::parallel_for(0, frame_size_, threads_, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < direct; ++j)
            acc += weights_[j] * history_[(n - j) * frame_size_ + i];
        for (const auto& lev : levels_)
            acc += lev.staging[(n % lev.block) * frame_size_ + i];
        out_[i] = acc;
    });
    return out_;
}

std::vector<double> HistoryConvolution::direct_reference(
    std::span<const double> weights, const std::vector<std::vector<double>>& frames) {
    if (frames.empty()) return {};
    std::size_t n = frames.size() - 1;
    std::vector<double> out(frames[0].size(), 0.0);
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += weights[j] * frames[n - j][i];
    return out;
}

}  // namespace subdiff
