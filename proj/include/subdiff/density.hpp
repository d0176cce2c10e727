#pragma once

#include <span>
#include <vector>

#include "subdiff/grid.hpp"

namespace subdiff {

enum class DensityMethod { Histogram, GaussianKde, GridSolution };

struct DensityEstimate {
    Grid grid;
    std::vector<double> values;  // q_i >= 0 at the grid nodes
    DensityMethod method = DensityMethod::Histogram;
    double bandwidth = 0.0;      // GaussianKde only
    std::size_t n_samples = 0;
    double out_of_range_mass = 0.0;  // sample/kernel mass beyond the grid

    double mass() const;  // sum q_i * dx
};

struct KdeOptions {
    double bandwidth = 0.0;  // 0 -> Silverman 1.06 min(sd, IQR/1.34) N^{-1/5}
};

DensityEstimate estimate_density_histogram(std::span<const double> samples,
                                           const Grid& grid);

DensityEstimate estimate_density_kde(std::span<const double> samples,
                                     const Grid& grid, KdeOptions opts = {});

// L1 distance sum |a_i - b_i| dx; requires identical grids.
double l1_distance(const DensityEstimate& a, const DensityEstimate& b);

// sup_{sample points} |empirical CDF - integrated grid CDF|.
double ks_distance(std::span<const double> samples,
                   const DensityEstimate& grid_solution);

struct Moment {
    double value = 0.0;
    double standard_error = 0.0;
};

// (1/N) sum x^k with its standard error.
Moment empirical_moment(std::span<const double> samples, int k);

}  // namespace subdiff
