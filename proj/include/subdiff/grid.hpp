#pragma once

#include <cmath>
#include <cstddef>

#include "subdiff/errors.hpp"

namespace subdiff {

// Uniform node grid on [x_min, x_max]. Node i sits at x_min + i*dx with
// dx = (x_max - x_min)/(n_x - 1), so both endpoints are nodes. Histogram
// bins are the cells [x_i - dx/2, x_i + dx/2) centred on the nodes.
struct Grid {
    double x_min = -10.0;
    double x_max = 10.0;
    int n_x = 1001;

    Grid() = default;
    Grid(double lo, double hi, int n) : x_min(lo), x_max(hi), n_x(n) {
        if (!(x_max > x_min) || n_x < 2)
            throw DomainError("Grid: need x_max > x_min and n_x >= 2");
    }

    double dx() const { return (x_max - x_min) / (n_x - 1); }

    // endpoint-weighted form: exact at both ends, and symmetric grids hit
    // zero exactly at the middle node
    double x(int i) const {
        double w = static_cast<double>(i) / (n_x - 1);
        return x_min * (1.0 - w) + x_max * w;
    }

    // Index of the bin containing v, or -1 if outside [x_min-dx/2, x_max+dx/2).
    int bin(double v) const {
        if (!std::isfinite(v)) return -1;
        double u = (v - x_min) / dx();
        long i = std::lround(u);
        if (i < 0 || i >= n_x) return -1;
        // lround ties go away from zero; re-check the half-open convention
        if (v - (x_min + i * dx()) >= 0.5 * dx()) ++i;
        if (v - (x_min + i * dx()) < -0.5 * dx()) --i;
        if (i < 0 || i >= n_x) return -1;
        return static_cast<int>(i);
    }

    bool operator==(const Grid& o) const {
        return x_min == o.x_min && x_max == o.x_max && n_x == o.n_x;
    }
};

}  // namespace subdiff
