#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "subdiff/exprparse.hpp"
#include "subdiff/levy.hpp"
#include "subdiff/sampling.hpp"

namespace subdiff {

// A path failed mid-integration (NaN/inf state or coefficient, negative sigma).
class PathError : public ContractError {
public:
    PathError(const std::string& msg, std::size_t step)
        : ContractError(msg + " (step " + std::to_string(step) + ")"),
          step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

// Subordinator sampled on the operational-time grid gamma_j = j * dgamma;
// values[j] = T_Psi(gamma_j), values[0] = 0, nondecreasing, and the last
// value strictly exceeds the requested horizon.
struct SubordinatorPath {
    double dgamma = 0.0;
    std::vector<double> values;
};

SubordinatorPath sample_subordinator_path(const SubordinatorSpec& spec,
                                          double dgamma, double horizon_t,
                                          RandomStream& rng,
                                          std::size_t max_steps = 100000000);

// S_Psi(t) = dgamma * min{ j : T_j > t }; right-continuous first passage on
// the discrete path. Throws RangeError past the sampled horizon.
double inverse_subordinator(const SubordinatorPath& path, double t);

// Coupled solution (Y, Z) on the gamma grid; z is the subordinator path.
struct CoupledPath {
    double dgamma = 0.0;
    std::vector<double> y;
    std::vector<double> z;
};

CoupledPath integrate_jump_sde(const CoefficientField& coeffs,
                               const SubordinatorPath& sub_path,
                               const std::optional<JumpNoiseSpec>& noise,
                               RandomStream& rng, double small_jump_eps = 0.0);

struct TimeChangedSample {
    std::vector<double> times;
    std::vector<double> values;  // X(t_k) = Y at the pre-crossing grid index
};

TimeChangedSample time_change_evaluate(const CoupledPath& cp,
                                       const SubordinatorPath& sp,
                                       const std::vector<double>& times);

struct McJob {
    CoefficientField coefficients;
    SubordinatorSpec subordinator;
    std::optional<JumpNoiseSpec> noise;
    std::vector<double> times;
    double dgamma = 1e-3;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    int threads = 1;
    std::size_t max_steps = 100000000;
    double max_failure_fraction = 0.01;
    double small_jump_eps = 0.0;  // 0 -> family default
};

struct McResult {
    std::vector<double> times;
    std::vector<double> samples;  // row-major, rows() x times.size()
    std::size_t n_requested = 0;
    std::size_t n_failed = 0;

    std::size_t rows() const {
        return times.empty() ? 0 : samples.size() / times.size();
    }
    // column k as a contiguous vector
    std::vector<double> column(std::size_t k) const;
};

// N independent paths, path i driven by stream_id i. Failed paths are
// dropped in index order; a failure fraction above the cap aborts the run.
// Output is bitwise independent of the worker count.
McResult run_monte_carlo(const McJob& job);

}  // namespace subdiff
