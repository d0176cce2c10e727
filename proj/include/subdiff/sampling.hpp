#pragma once

#include <cstdint>

#include "subdiff/levy.hpp"

namespace subdiff {

// Counter-based random stream (Philox-style 2x64, 10 rounds). The output
// sequence is a pure function of (master_seed, stream_id, counter), so
// per-path streams can be created independently in any worker order.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // uniform on the open interval (0,1); safe under log()
    double uniform01();

    // standard normal draw (Box-Muller, cached spare)
    double normal();

    // Exp(1) draw
    double exponential();

private:
    void refill();

    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
    std::uint64_t block_[2];
    int block_pos_ = 2;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// One increment of the alpha-stable subordinator over dt:
// E[e^{-uT}] = e^{-dt u^alpha}, alpha in (0,1). Exact (Kanter/CMS).
double stable_subordinator_increment(double alpha, double dt, RandomStream& rng);

// Tempered-stable increment via exponential-tilting rejection on the stable
// sampler: E[e^{-uT}] = e^{-dt ((u+lambda)^alpha - lambda^alpha)}.
double tempered_stable_increment(double alpha, double lambda, double dt,
                                 RandomStream& rng);

// Symmetric alpha-stable increment, alpha in (0,2):
// E[e^{iuL}] = e^{-dt |u|^alpha}. Exact (Chambers-Mallows-Stuck).
double symmetric_stable_increment(double alpha, double dt, RandomStream& rng);

struct TruncatedIncrement {
    double jump_sum = 0.0;          // compound-Poisson part (plus Gaussian fill-in)
    double compensator_drift = 0.0; // -dt int_{eps<|x|<cutoff} x nu(dx)
    long jump_count = 0;
};

// Compound-Poisson approximation of a truncated-symmetric-stable increment:
// jumps above eps sampled exactly, jumps below eps replaced by a centred
// Gaussian matching the small-jump variance (switchable for tests).
TruncatedIncrement truncated_symmetric_levy_increment(const JumpNoiseSpec& spec,
                                                      double dt, double eps,
                                                      RandomStream& rng,
                                                      bool gaussian_fill = true);

// Default small-jump cutoff: the radius where the small-jump variance drops
// to 1e-4 of the measure's total variance.
double default_small_jump_cutoff(const LevyMeasureSpec& measure);

// N(0, dt) draw.
double brownian_increment(double dt, RandomStream& rng);

// Poisson(mean) via cumulative Exp(1) arrivals (exact).
long poisson_count(double mean, RandomStream& rng);

}  // namespace subdiff
