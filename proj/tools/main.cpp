#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "subdiff/runner.hpp"

namespace {

int dispatch(const std::string& cmd, const std::string& config_path,
             const subdiff::RunOptions& opts) {
    subdiff::ExperimentConfig cfg = subdiff::load_config(config_path);
    if (cmd == "simulate") return subdiff::cmd_simulate(cfg, opts);
    if (cmd == "solve-fpe") return subdiff::cmd_solve(cfg, opts);
    if (cmd == "compare") return subdiff::cmd_compare(cfg, opts);
    if (cmd == "kernel-table") return subdiff::cmd_kernel_table(cfg, opts);
    if (cmd == "sweep") return subdiff::cmd_sweep(cfg, opts);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "subdiff: Monte Carlo simulation of time-changed jump SDEs and "
        "fractional Fokker-Planck grid solutions"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    bool out_set = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("--threads", threads, "worker threads (output-invariant)");
        sub->add_option("--seed", seed, "master seed override")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out", out_dir, "output directory override")
            ->each([&](const std::string&) { out_set = true; });
    };

    add_common(app.add_subcommand("simulate",
                                  "sample paths, write samples/densities/moments"));
    add_common(app.add_subcommand("solve-fpe",
                                  "solve the fractional Fokker-Planck equation"));
    add_common(app.add_subcommand("compare",
                                  "run both routes and report L1/KS/moment gaps"));
    add_common(app.add_subcommand("kernel-table",
                                  "dump (t, M(t), G(t)) for the subordinator"));
    add_common(app.add_subcommand("sweep",
                                  "Cartesian parameter sweep of compare runs"));

    CLI11_PARSE(app, argc, argv);

    subdiff::RunOptions opts;
    opts.threads = threads;
    if (seed_set) opts.seed_override = seed;
    if (out_set) opts.out_dir_override = out_dir;

    try {
        return dispatch(app.get_subcommands().front()->get_name(), config_path,
                        opts);
    } catch (const subdiff::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const subdiff::SyntaxError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const subdiff::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const subdiff::ContractError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const subdiff::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
