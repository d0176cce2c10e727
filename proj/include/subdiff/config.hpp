#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subdiff/fpe.hpp"
#include "subdiff/paths.hpp"

namespace subdiff {

inline constexpr const char* kToolVersion = "subdiff 0.1.0";

enum class DensityKind { Histogram, Kde };

// One experiment: a subordinator, a driving noise, coefficient expressions,
// grids, and solver/MC parameters. Parsed from a strict JSON schema (unknown
// keys are errors; validation reports every violation, not just the first).
struct ExperimentConfig {
    LevyMeasureSpec subordinator_measure = LevyMeasureSpec::one_sided_stable(0.5);
    std::optional<LevyMeasureSpec> noise_measure;
    double noise_cutoff = 1.0;

    std::string f_expr = "0";
    std::string sigma_expr = "1";
    std::string h_expr = "0";

    Grid grid{-10.0, 10.0, 1001};
    double t_end = 1.0;
    double dt = 1e-4;
    double dgamma = 1e-3;
    std::vector<double> observe = {1.0};

    std::size_t mc_paths = 10000;
    std::uint64_t seed = 0;
    DensityKind density = DensityKind::Kde;
    double kde_bandwidth = 0.0;  // 0 -> Silverman

    JumpVariant variant = JumpVariant::NoJump;
    int series_k = 8;
    InitialCondition ic = InitialCondition::DiscreteDelta;

    std::optional<double> l1_threshold;

    struct KernelTableRange {
        double t_min = 0.01;
        double t_max = 5.0;
        int n = 200;
    } kernel_table;

    // sweep parameter grids: dotted config path -> values (JSON scalars
    // kept as their serialized text)
    std::map<std::string, std::vector<std::string>> sweep_parameters;

    std::string output_dir = "out";

    // derived objects
    SubordinatorSpec subordinator() const;
    std::optional<JumpNoiseSpec> noise() const;
    CoefficientField coefficients() const;
    SpatialOperatorConfig op_config() const;
    McJob mc_job(int threads) const;
    FpeConfig fpe_config(int threads) const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Canonical single-line JSON (sorted keys, shortest round-trip numbers).
// serialize(parse(s)) == s whenever s is already canonical.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace subdiff
