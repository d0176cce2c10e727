#include "subdiff/runner.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "subdiff/fpe.hpp"
#include "subdiff/kernels.hpp"

namespace subdiff {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

void apply_overrides(ExperimentConfig& cfg, const RunOptions& opts) {
    if (opts.seed_override) cfg.seed = *opts.seed_override;
    if (opts.out_dir_override) cfg.output_dir = *opts.out_dir_override;
}

class CsvFile {
public:
    CsvFile(const fs::path& path, const ExperimentConfig& cfg) {
        fs::create_directories(path.parent_path());
        out_.open(path, std::ios::binary);  // LF endings on every platform
        if (!out_) throw ConfigError("cannot open output file: " + path.string());
        out_ << "# " << kToolVersion << "\n";
        out_ << "# config: " << serialize_config(cfg) << "\n";
    }

    void comment(const std::string& line) { out_ << "# " << line << "\n"; }
    void header(const std::string& line) { out_ << line << "\n"; }

    void row(std::initializer_list<double> vals) {
        bool first = true;
        for (double v : vals) {
            if (!first) out_ << ',';
            out_ << format_double(v);
            first = false;
        }
        out_ << '\n';
    }

    std::ofstream& raw() { return out_; }

private:
    std::ofstream out_;
};

std::string time_tag(double t) { return format_double(t); }

DensityEstimate estimate_for_config(const ExperimentConfig& cfg,
                                    const std::vector<double>& column) {
    if (cfg.density == DensityKind::Histogram)
        return estimate_density_histogram(column, cfg.grid);
    KdeOptions opts;
    opts.bandwidth = cfg.kde_bandwidth;
    return estimate_density_kde(column, cfg.grid, opts);
}

void write_density_csv(const fs::path& path, const ExperimentConfig& cfg,
                       const DensityEstimate& est) {
    CsvFile f(path, cfg);
    f.comment("grid: x_min=" + format_double(est.grid.x_min) +
              " x_max=" + format_double(est.grid.x_max) +
              " n_x=" + std::to_string(est.grid.n_x));
    f.comment("n_samples: " + std::to_string(est.n_samples));
    f.comment(std::string("method: ") +
              (est.method == DensityMethod::Histogram
                   ? "histogram"
                   : (est.method == DensityMethod::GaussianKde ? "kde"
                                                               : "grid_solution")));
    if (est.method == DensityMethod::GaussianKde)
        f.comment("bandwidth: " + format_double(est.bandwidth));
    f.comment("out_of_range_mass: " + format_double(est.out_of_range_mass));
    f.header("x,q");
    for (int i = 0; i < est.grid.n_x; ++i)
        f.row({est.grid.x(i), est.values[i]});
}

bool finite_variance_config(const ExperimentConfig& cfg) {
    // unsubordinated symmetric-stable noise has infinite variance; moment
    // based comparisons are disabled there
    return !cfg.noise_measure ||
           cfg.noise_measure->family == MeasureFamily::TruncatedSymmetricStable;
}

}  // namespace

DensityEstimate fpe_as_density(const Grid& grid, const std::vector<double>& q) {
    DensityEstimate est;
    est.grid = grid;
    est.values = q;
    // explicit fractional stepping can undershoot slightly around a delta
    // initial condition; a density estimate must be nonnegative
    for (auto& v : est.values) v = std::max(v, 0.0);
    est.method = DensityMethod::GridSolution;
    double mass = est.mass();
    est.out_of_range_mass = std::max(0.0, 1.0 - mass);
    return est;
}

int cmd_simulate(ExperimentConfig cfg, const RunOptions& opts) {
    apply_overrides(cfg, opts);
    McResult mc = run_monte_carlo(cfg.mc_job(opts.threads));
    fs::path dir(cfg.output_dir);

    {
        CsvFile f(dir / "samples.csv", cfg);
        f.comment("rows: one path per row; columns: X(t) per observation time");
        f.comment("paths_requested: " + std::to_string(mc.n_requested) +
                  " failed: " + std::to_string(mc.n_failed));
        std::string hdr;
        for (std::size_t k = 0; k < mc.times.size(); ++k) {
            if (k) hdr += ',';
            hdr += "x_t" + time_tag(mc.times[k]);
        }
        f.header(hdr);
        std::size_t n = mc.rows();
        for (std::size_t i = 0; i < n; ++i) {
            auto& out = f.raw();
            for (std::size_t k = 0; k < mc.times.size(); ++k) {
                if (k) out << ',';
                out << format_double(mc.samples[i * mc.times.size() + k]);
            }
            out << '\n';
        }
    }

    for (std::size_t k = 0; k < mc.times.size(); ++k) {
        DensityEstimate est = estimate_for_config(cfg, mc.column(k));
        write_density_csv(dir / ("density_t" + time_tag(mc.times[k]) + ".csv"),
                          cfg, est);
    }

    {
        CsvFile f(dir / "moments.csv", cfg);
        f.header("t,m1,m1_se,m2,m2_se,n_samples");
        for (std::size_t k = 0; k < mc.times.size(); ++k) {
            std::vector<double> col = mc.column(k);
            Moment m1 = empirical_moment(col, 1);
            Moment m2 = empirical_moment(col, 2);
            f.row({mc.times[k], m1.value, m1.standard_error, m2.value,
                   m2.standard_error, static_cast<double>(col.size())});
        }
    }
    return 0;
}

int cmd_solve(ExperimentConfig cfg, const RunOptions& opts) {
    apply_overrides(cfg, opts);
    FpeState st = solve_fpe(cfg.fpe_config(opts.threads));
    fs::path dir(cfg.output_dir);

    for (std::size_t r = 0; r < st.record_times.size(); ++r) {
        CsvFile f(dir / ("fpe_t" + time_tag(st.record_times[r]) + ".csv"), cfg);
        f.comment("grid: x_min=" + format_double(st.grid.x_min) +
                  " x_max=" + format_double(st.grid.x_max) +
                  " n_x=" + std::to_string(st.grid.n_x));
        if (st.truncation_warning)
            f.comment("warning: series truncation did not contract");
        f.header("x,q");
        for (int i = 0; i < st.grid.n_x; ++i)
            f.row({st.grid.x(i), st.solutions[r][i]});
    }

    {
        CsvFile f(dir / "mass_ledger.csv", cfg);
        f.header("step,time,interior,outflow");
        for (const auto& row : st.ledger)
            f.row({static_cast<double>(row.step), row.time, row.interior,
                   row.outflow});
    }
    return 0;
}

std::vector<CompareRow> compare_metrics(const ExperimentConfig& cfg, int threads) {
    McResult mc = run_monte_carlo(cfg.mc_job(threads));
    FpeState st = solve_fpe(cfg.fpe_config(threads));
    bool with_m2 = finite_variance_config(cfg);

    std::vector<CompareRow> rows;
    for (std::size_t k = 0; k < cfg.observe.size(); ++k) {
        std::vector<double> col = mc.column(k);
        DensityEstimate mc_est = estimate_for_config(cfg, col);
        DensityEstimate pde = fpe_as_density(st.grid, st.solutions[k]);

        CompareRow row;
        row.t = cfg.observe[k];
        row.l1 = l1_distance(mc_est, pde);
        row.ks = ks_distance(col, pde);

        double m1_grid = 0.0, m2_grid = 0.0;
        for (int i = 0; i < st.grid.n_x; ++i) {
            double x = st.grid.x(i);
            m1_grid += x * pde.values[i];
            m2_grid += x * x * pde.values[i];
        }
        m1_grid *= st.grid.dx();
        m2_grid *= st.grid.dx();
        row.mean_gap = std::fabs(empirical_moment(col, 1).value - m1_grid);
        if (with_m2)
            row.second_moment_gap =
                std::fabs(empirical_moment(col, 2).value - m2_grid);
        rows.push_back(row);
    }
    return rows;
}

int cmd_compare(ExperimentConfig cfg, const RunOptions& opts) {
    apply_overrides(cfg, opts);
    std::vector<CompareRow> rows = compare_metrics(cfg, opts.threads);

    fs::path dir(cfg.output_dir);
    CsvFile f(dir / "report.csv", cfg);
    f.header("t,l1,ks,mean_gap,m2_gap");
    bool breach = false;
    for (const auto& r : rows) {
        auto& out = f.raw();
        out << format_double(r.t) << ',' << format_double(r.l1) << ','
            << format_double(r.ks) << ',' << format_double(r.mean_gap) << ',';
        if (r.second_moment_gap) out << format_double(*r.second_moment_gap);
        out << '\n';
        if (cfg.l1_threshold && r.l1 > *cfg.l1_threshold) breach = true;
    }
    return breach ? 4 : 0;
}

int cmd_kernel_table(ExperimentConfig cfg, const RunOptions& opts) {
    apply_overrides(cfg, opts);
    SubordinatorSpec spec = cfg.subordinator();
    MemoryKernel kernel =
        spec.levy_measure.family == MeasureFamily::OneSidedStable
            ? MemoryKernel::closed_form_stable(spec.levy_measure.alpha)
            : MemoryKernel::laplace_inversion(spec);

    const auto& kt = cfg.kernel_table;
    MemoryKernel::Table tab = kernel.build_table(kt.t_min, kt.t_max, kt.n);

    fs::path dir(cfg.output_dir);
    CsvFile f(dir / "kernel_table.csv", cfg);
    f.header("t,M,G");
    for (std::size_t i = 0; i < tab.t.size(); ++i)
        f.row({tab.t[i], tab.m[i], tail_G(spec.levy_measure, tab.t[i])});
    return 0;
}

int cmd_sweep(ExperimentConfig cfg, const RunOptions& opts) {
    apply_overrides(cfg, opts);
    if (cfg.sweep_parameters.empty())
        throw ConfigError("sweep requires a sweep.parameters block");

    using nlohmann::json;
    json base = json::parse(serialize_config(cfg));
    base.erase("sweep");  // cells are plain experiments

    // deterministic Cartesian product in key order
    std::vector<std::string> keys;
    std::vector<std::vector<std::string>> values;
    for (const auto& [k, vals] : cfg.sweep_parameters) {
        keys.push_back(k);
        values.push_back(vals);
    }
    std::vector<std::size_t> idx(keys.size(), 0);

    fs::path dir(cfg.output_dir);
    CsvFile f(dir / "sweep_report.csv", cfg);
    std::string hdr;
    for (const auto& k : keys) hdr += k + ",";
    hdr += "t,l1,ks,mean_gap,m2_gap";
    f.header(hdr);

    while (true) {
        json cell = base;
        for (std::size_t p = 0; p < keys.size(); ++p) {
            std::string ptr = "/" + keys[p];
            for (auto& ch : ptr)
                if (ch == '.') ch = '/';
            cell[json::json_pointer(ptr)] = json::parse(values[p][idx[p]]);
        }
        ExperimentConfig cell_cfg = parse_config_text(cell.dump());
        std::vector<CompareRow> rows = compare_metrics(cell_cfg, opts.threads);
        for (const auto& r : rows) {
            auto& out = f.raw();
            for (std::size_t p = 0; p < keys.size(); ++p)
                out << values[p][idx[p]] << ',';
            out << format_double(r.t) << ',' << format_double(r.l1) << ','
                << format_double(r.ks) << ',' << format_double(r.mean_gap) << ',';
            if (r.second_moment_gap) out << format_double(*r.second_moment_gap);
            out << '\n';
        }

        std::size_t p = 0;
        for (; p < keys.size(); ++p) {
            if (++idx[p] < values[p].size()) break;
            idx[p] = 0;
        }
        if (p == keys.size()) break;
    }
    return 0;
}

}  // namespace subdiff
