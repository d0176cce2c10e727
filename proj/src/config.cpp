#include "subdiff/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace subdiff {

using nlohmann::json;

namespace {

struct Validator {
    std::vector<std::string> errors;

    void err(const std::string& path, const std::string& msg) {
        errors.push_back(path + ": " + msg);
    }

    void finish() {
        if (errors.empty()) return;
        std::ostringstream os;
        os << "invalid configuration (" << errors.size() << " violation"
           << (errors.size() == 1 ? "" : "s") << "):";
        for (const auto& e : errors) os << "\n  - " << e;
        throw ConfigError(os.str());
    }

    // rejects unknown keys (strict schema)
    void check_keys(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            err(path, "expected an object");
            return;
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const char* k : allowed)
                if (it.key() == k) known = true;
            if (!known) err(path + "." + it.key(), "unknown key");
        }
    }

    template <class T>
    std::optional<T> get(const json& j, const std::string& path, const char* key) {
        if (!j.is_object() || !j.contains(key)) return std::nullopt;
        const json& v = j.at(key);
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) {
                err(path + "." + key, "expected a number");
                return std::nullopt;
            }
            return v.get<double>();
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
            if (!v.is_number_integer()) {
                err(path + "." + key, "expected an integer");
                return std::nullopt;
            }
            return v.get<std::int64_t>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_unsigned() && !v.is_number_integer()) {
                err(path + "." + key, "expected a nonnegative integer");
                return std::nullopt;
            }
            if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
                err(path + "." + key, "expected a nonnegative integer");
                return std::nullopt;
            }
            return v.get<std::uint64_t>();
        } else {
            if (!v.is_string()) {
                err(path + "." + key, "expected a string");
                return std::nullopt;
            }
            return v.get<std::string>();
        }
    }
};

std::optional<LevyMeasureSpec> parse_measure(Validator& v, const json& j,
                                             const std::string& path,
                                             bool subordinator_role) {
    v.check_keys(j, path, {"family", "alpha", "lambda", "r_max", "cutoff"});
    auto family = v.get<std::string>(j, path, "family");
    auto alpha = v.get<double>(j, path, "alpha");
    if (!family) {
        v.err(path + ".family", "required");
        return std::nullopt;
    }
    if (!alpha) {
        v.err(path + ".alpha", "required");
        return std::nullopt;
    }

    auto need_alpha01 = [&](const char* who) -> bool {
        if (!(*alpha > 0.0 && *alpha < 1.0)) {
            v.err(path + ".alpha",
                  std::string(who) + " alpha must lie in (0,1)");
            return false;
        }
        return true;
    };
    auto need_alpha02 = [&]() -> bool {
        if (!(*alpha > 0.0 && *alpha < 2.0)) {
            v.err(path + ".alpha", "alpha must lie in (0,2)");
            return false;
        }
        return true;
    };

    const char* role = subordinator_role ? "subordinator" : "jump noise";
    if (*family == "one_sided_stable") {
        if (!need_alpha01(role)) return std::nullopt;
        return LevyMeasureSpec::one_sided_stable(*alpha);
    }
    if (*family == "tempered_stable") {
        auto lambda = v.get<double>(j, path, "lambda");
        if (!lambda) {
            v.err(path + ".lambda", "required for tempered_stable");
            return std::nullopt;
        }
        if (!need_alpha01(role)) return std::nullopt;
        if (!(*lambda > 0.0)) {
            v.err(path + ".lambda", "must be positive");
            return std::nullopt;
        }
        return LevyMeasureSpec::tempered_stable(*alpha, *lambda);
    }
    if (subordinator_role) {
        v.err(path + ".family",
              "subordinator family must be one_sided_stable or tempered_stable");
        return std::nullopt;
    }
    if (*family == "symmetric_stable") {
        if (!need_alpha02()) return std::nullopt;
        return LevyMeasureSpec::symmetric_stable(*alpha);
    }
    if (*family == "truncated_symmetric_stable") {
        auto r_max = v.get<double>(j, path, "r_max");
        if (!r_max) {
            v.err(path + ".r_max", "required for truncated_symmetric_stable");
            return std::nullopt;
        }
        if (!need_alpha02()) return std::nullopt;
        if (!(*r_max > 0.0)) {
            v.err(path + ".r_max", "must be positive");
            return std::nullopt;
        }
        return LevyMeasureSpec::truncated_symmetric_stable(*alpha, *r_max);
    }
    v.err(path + ".family", "unknown family '" + *family + "'");
    return std::nullopt;
}

json measure_to_json(const LevyMeasureSpec& m, std::optional<double> cutoff) {
    json j;
    switch (m.family) {
        case MeasureFamily::OneSidedStable:
            j["family"] = "one_sided_stable";
            j["alpha"] = m.alpha;
            break;
        case MeasureFamily::TemperedStable:
            j["family"] = "tempered_stable";
            j["alpha"] = m.alpha;
            j["lambda"] = m.lambda;
            break;
        case MeasureFamily::SymmetricStable:
            j["family"] = "symmetric_stable";
            j["alpha"] = m.alpha;
            break;
        case MeasureFamily::TruncatedSymmetricStable:
            j["family"] = "truncated_symmetric_stable";
            j["alpha"] = m.alpha;
            j["r_max"] = m.r_max;
            break;
    }
    if (cutoff) j["cutoff"] = *cutoff;
    return j;
}

const char* variant_name(JumpVariant v) {
    switch (v) {
        case JumpVariant::NoJump: return "no_jump";
        case JumpVariant::StableJump: return "stable_jump";
        case JumpVariant::SymmetricJump: return "symmetric_jump";
        case JumpVariant::GeneralSeriesJump: return "general_series";
    }
    return "no_jump";
}

ExperimentConfig parse_config_json(const json& root) {
    Validator v;
    ExperimentConfig cfg;

    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    v.check_keys(root, "config",
                 {"subordinator", "jump_noise", "coefficients", "grid", "time",
                  "mc", "solver", "compare", "kernel_table", "sweep",
                  "output_dir"});

    // subordinator (required)
    if (root.contains("subordinator")) {
        if (auto m = parse_measure(v, root["subordinator"], "subordinator", true))
            cfg.subordinator_measure = *m;
    } else {
        v.err("subordinator", "required");
    }

    // jump noise (optional)
    if (root.contains("jump_noise") && !root["jump_noise"].is_null()) {
        const json& jn = root["jump_noise"];
        if (auto m = parse_measure(v, jn, "jump_noise", false)) {
            cfg.noise_measure = *m;
            if (auto c = v.get<double>(jn, "jump_noise", "cutoff")) {
                if (!(*c > 0.0))
                    v.err("jump_noise.cutoff", "must be positive");
                else
                    cfg.noise_cutoff = *c;
            }
        }
    }

    // coefficients (required)
    if (root.contains("coefficients")) {
        const json& c = root["coefficients"];
        v.check_keys(c, "coefficients", {"F", "sigma", "h"});
        auto get_expr = [&](const char* key, std::string& dst) {
            if (auto s = v.get<std::string>(c, "coefficients", key)) {
                try {
                    Expr::parse(*s);
                    dst = *s;
                } catch (const SyntaxError& e) {
                    v.err(std::string("coefficients.") + key, e.what());
                }
            } else if (!c.contains(key)) {
                v.err(std::string("coefficients.") + key, "required");
            }
        };
        get_expr("F", cfg.f_expr);
        get_expr("sigma", cfg.sigma_expr);
        get_expr("h", cfg.h_expr);
    } else {
        v.err("coefficients", "required");
    }

    // grid
    if (root.contains("grid")) {
        const json& g = root["grid"];
        v.check_keys(g, "grid", {"x_min", "x_max", "n_x"});
        auto x_min = v.get<double>(g, "grid", "x_min");
        auto x_max = v.get<double>(g, "grid", "x_max");
        auto n_x = v.get<std::int64_t>(g, "grid", "n_x");
        double lo = x_min.value_or(cfg.grid.x_min);
        double hi = x_max.value_or(cfg.grid.x_max);
        std::int64_t n = n_x.value_or(cfg.grid.n_x);
        if (!(hi > lo)) v.err("grid", "x_max must exceed x_min");
        if (n < 5) v.err("grid.n_x", "must be at least 5");
        if (hi > lo && n >= 5)
            cfg.grid = Grid(lo, hi, static_cast<int>(n));
    }

    // time
    if (root.contains("time")) {
        const json& t = root["time"];
        v.check_keys(t, "time", {"t_end", "dt", "dgamma", "observe"});
        if (auto x = v.get<double>(t, "time", "t_end")) {
            if (!(*x > 0.0)) v.err("time.t_end", "must be positive");
            else cfg.t_end = *x;
        }
        if (auto x = v.get<double>(t, "time", "dt")) {
            if (!(*x > 0.0)) v.err("time.dt", "must be positive");
            else cfg.dt = *x;
        }
        if (auto x = v.get<double>(t, "time", "dgamma")) {
            if (!(*x > 0.0)) v.err("time.dgamma", "must be positive");
            else cfg.dgamma = *x;
        }
        if (t.contains("observe")) {
            if (!t["observe"].is_array() || t["observe"].empty()) {
                v.err("time.observe", "expected a nonempty array of times");
            } else {
                cfg.observe.clear();
                for (const auto& e : t["observe"]) {
                    if (!e.is_number()) {
                        v.err("time.observe", "expected numbers");
                        break;
                    }
                    cfg.observe.push_back(e.get<double>());
                }
            }
        } else {
            cfg.observe = {cfg.t_end};
        }
    } else {
        cfg.observe = {cfg.t_end};
    }
    for (double tv : cfg.observe)
        if (!(tv > 0.0 && tv <= cfg.t_end + 1e-12))
            v.err("time.observe",
                  "observation times must lie in (0, t_end]");

    // mc
    if (root.contains("mc")) {
        const json& m = root["mc"];
        v.check_keys(m, "mc", {"paths", "seed", "density", "bandwidth"});
        if (auto p = v.get<std::int64_t>(m, "mc", "paths")) {
            if (*p < 1) v.err("mc.paths", "must be at least 1");
            else cfg.mc_paths = static_cast<std::size_t>(*p);
        }
        if (auto s = v.get<std::uint64_t>(m, "mc", "seed")) cfg.seed = *s;
        if (auto d = v.get<std::string>(m, "mc", "density")) {
            if (*d == "histogram") cfg.density = DensityKind::Histogram;
            else if (*d == "kde") cfg.density = DensityKind::Kde;
            else v.err("mc.density", "must be 'histogram' or 'kde'");
        }
        if (auto b = v.get<double>(m, "mc", "bandwidth")) {
            if (*b < 0.0) v.err("mc.bandwidth", "must be nonnegative");
            else cfg.kde_bandwidth = *b;
        }
    }

    // solver
    if (root.contains("solver")) {
        const json& s = root["solver"];
        v.check_keys(s, "solver", {"variant", "series_k", "ic"});
        if (auto var = v.get<std::string>(s, "solver", "variant")) {
            if (*var == "no_jump") cfg.variant = JumpVariant::NoJump;
            else if (*var == "stable_jump") cfg.variant = JumpVariant::StableJump;
            else if (*var == "symmetric_jump") cfg.variant = JumpVariant::SymmetricJump;
            else if (*var == "general_series")
                cfg.variant = JumpVariant::GeneralSeriesJump;
            else
                v.err("solver.variant",
                      "must be one of no_jump, stable_jump, symmetric_jump, "
                      "general_series");
        }
        if (auto k = v.get<std::int64_t>(s, "solver", "series_k")) {
            if (*k < 2 || *k > 12) v.err("solver.series_k", "must lie in [2,12]");
            else cfg.series_k = static_cast<int>(*k);
        }
        if (auto ic = v.get<std::string>(s, "solver", "ic")) {
            if (*ic == "delta") cfg.ic = InitialCondition::DiscreteDelta;
            else if (*ic == "gaussian") cfg.ic = InitialCondition::GaussianMollifier;
            else v.err("solver.ic", "must be 'delta' or 'gaussian'");
        }
    }

    // variant/noise consistency
    if (cfg.variant == JumpVariant::StableJump) {
        if (!cfg.noise_measure ||
            cfg.noise_measure->family != MeasureFamily::SymmetricStable)
            v.err("solver.variant",
                  "stable_jump requires jump_noise.family = symmetric_stable");
        else if (cfg.noise_measure->alpha == 1.0)
            v.err("jump_noise.alpha",
                  "stable_jump excludes alpha = 1 (singular Riesz normalisation)");
    }
    if (cfg.variant == JumpVariant::SymmetricJump) {
        if (!cfg.noise_measure ||
            cfg.noise_measure->support() != MeasureSupport::Symmetric)
            v.err("solver.variant",
                  "symmetric_jump requires a symmetric jump_noise measure");
    }
    if (cfg.variant == JumpVariant::GeneralSeriesJump) {
        if (!cfg.noise_measure ||
            cfg.noise_measure->family != MeasureFamily::TruncatedSymmetricStable)
            v.err("solver.variant",
                  "general_series requires jump_noise.family = "
                  "truncated_symmetric_stable (finite moments)");
    }

    // compare
    if (root.contains("compare")) {
        const json& c = root["compare"];
        v.check_keys(c, "compare", {"l1_threshold"});
        if (auto x = v.get<double>(c, "compare", "l1_threshold")) {
            if (!(*x > 0.0)) v.err("compare.l1_threshold", "must be positive");
            else cfg.l1_threshold = *x;
        }
    }

    // kernel_table
    if (root.contains("kernel_table")) {
        const json& k = root["kernel_table"];
        v.check_keys(k, "kernel_table", {"t_min", "t_max", "n"});
        if (auto x = v.get<double>(k, "kernel_table", "t_min")) cfg.kernel_table.t_min = *x;
        if (auto x = v.get<double>(k, "kernel_table", "t_max")) cfg.kernel_table.t_max = *x;
        if (auto x = v.get<std::int64_t>(k, "kernel_table", "n"))
            cfg.kernel_table.n = static_cast<int>(*x);
        if (!(cfg.kernel_table.t_min > 0.0) ||
            !(cfg.kernel_table.t_max > cfg.kernel_table.t_min) ||
            cfg.kernel_table.n < 2)
            v.err("kernel_table", "need 0 < t_min < t_max and n >= 2");
    }

    // sweep
    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        v.check_keys(s, "sweep", {"parameters"});
        if (s.contains("parameters")) {
            if (!s["parameters"].is_object()) {
                v.err("sweep.parameters", "expected an object of path -> value list");
            } else {
                for (auto it = s["parameters"].begin(); it != s["parameters"].end();
                     ++it) {
                    if (!it.value().is_array() || it.value().empty()) {
                        v.err("sweep.parameters." + it.key(),
                              "expected a nonempty array of values");
                        continue;
                    }
                    std::vector<std::string> vals;
                    for (const auto& e : it.value()) vals.push_back(e.dump());
                    cfg.sweep_parameters[it.key()] = std::move(vals);
                }
            }
        }
    }

    if (root.contains("output_dir")) {
        if (!root["output_dir"].is_string())
            v.err("output_dir", "expected a string");
        else
            cfg.output_dir = root["output_dir"].get<std::string>();
    }

    v.finish();
    return cfg;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config_json(root);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json root;
    root["subordinator"] = measure_to_json(cfg.subordinator_measure, std::nullopt);
    if (cfg.noise_measure)
        root["jump_noise"] = measure_to_json(*cfg.noise_measure, cfg.noise_cutoff);
    root["coefficients"] = {{"F", cfg.f_expr}, {"sigma", cfg.sigma_expr},
                            {"h", cfg.h_expr}};
    root["grid"] = {{"x_min", cfg.grid.x_min}, {"x_max", cfg.grid.x_max},
                    {"n_x", cfg.grid.n_x}};
    root["time"] = {{"t_end", cfg.t_end}, {"dt", cfg.dt},
                    {"dgamma", cfg.dgamma}, {"observe", cfg.observe}};
    root["mc"] = {{"paths", cfg.mc_paths}, {"seed", cfg.seed},
                  {"density", cfg.density == DensityKind::Kde ? "kde" : "histogram"},
                  {"bandwidth", cfg.kde_bandwidth}};
    root["solver"] = {{"variant", variant_name(cfg.variant)},
                      {"series_k", cfg.series_k},
                      {"ic", cfg.ic == InitialCondition::DiscreteDelta ? "delta"
                                                                       : "gaussian"}};
    if (cfg.l1_threshold)
        root["compare"] = {{"l1_threshold", *cfg.l1_threshold}};
    root["kernel_table"] = {{"t_min", cfg.kernel_table.t_min},
                            {"t_max", cfg.kernel_table.t_max},
                            {"n", cfg.kernel_table.n}};
    if (!cfg.sweep_parameters.empty()) {
        json params = json::object();
        for (const auto& [k, vals] : cfg.sweep_parameters) {
            json arr = json::array();
            for (const auto& vtext : vals) arr.push_back(json::parse(vtext));
            params[k] = arr;
        }
        root["sweep"] = {{"parameters", params}};
    }
    root["output_dir"] = cfg.output_dir;
    return root.dump();
}

SubordinatorSpec ExperimentConfig::subordinator() const {
    return SubordinatorSpec(subordinator_measure);
}

std::optional<JumpNoiseSpec> ExperimentConfig::noise() const {
    if (!noise_measure) return std::nullopt;
    return JumpNoiseSpec(*noise_measure, noise_cutoff);
}

CoefficientField ExperimentConfig::coefficients() const {
    return CoefficientField::from_strings(f_expr, sigma_expr, h_expr);
}

SpatialOperatorConfig ExperimentConfig::op_config() const {
    SpatialOperatorConfig op;
    op.variant = variant;
    op.series_k = series_k;
    op.jump_cutoff = noise_cutoff;
    if (variant == JumpVariant::StableJump) {
        op.stable_alpha = noise_measure ? noise_measure->alpha : 1.5;
    }
    if (variant == JumpVariant::SymmetricJump ||
        variant == JumpVariant::GeneralSeriesJump)
        op.measure = noise_measure;
    return op;
}

McJob ExperimentConfig::mc_job(int threads) const {
    McJob job{coefficients(), subordinator(), noise(), observe};
    job.dgamma = dgamma;
    job.n_paths = mc_paths;
    job.seed = seed;
    job.threads = threads;
    return job;
}

FpeConfig ExperimentConfig::fpe_config(int threads) const {
    FpeConfig f{grid, dt, t_end, observe, op_config(), coefficients(),
                subordinator(), ic, threads, 1e-6, std::nullopt};
    return f;
}

}  // namespace subdiff
