#pragma once

#include <optional>
#include <string>

#include "subdiff/config.hpp"
#include "subdiff/density.hpp"

namespace subdiff {

struct RunOptions {
    int threads = 1;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_dir_override;
};

// shortest round-trip decimal rendering ('.' separator, no locale)
std::string format_double(double v);

// writes samples.csv, density_t*.csv and moments.csv
int cmd_simulate(ExperimentConfig cfg, const RunOptions& opts);

// writes fpe_t*.csv and mass_ledger.csv
int cmd_solve(ExperimentConfig cfg, const RunOptions& opts);

// writes report.csv; returns 4 when the configured L1 threshold is breached
int cmd_compare(ExperimentConfig cfg, const RunOptions& opts);

// writes kernel_table.csv with (t, M(t), G(t))
int cmd_kernel_table(ExperimentConfig cfg, const RunOptions& opts);

// Cartesian product over sweep.parameters, one compare row per cell
int cmd_sweep(ExperimentConfig cfg, const RunOptions& opts);

// comparison metrics shared by cmd_compare / cmd_sweep
struct CompareRow {
    double t;
    double l1;
    double ks;
    double mean_gap;
    std::optional<double> second_moment_gap;  // absent for infinite variance
};
std::vector<CompareRow> compare_metrics(const ExperimentConfig& cfg, int threads);

// turn an FPE snapshot into the shared density representation
DensityEstimate fpe_as_density(const Grid& grid, const std::vector<double>& q);

}  // namespace subdiff
