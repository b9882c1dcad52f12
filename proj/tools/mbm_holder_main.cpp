#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mbholder/cli.hpp"
#include "mbholder/stats.hpp"

namespace fs = std::filesystem;
using namespace mbh;

namespace {

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
    std::string out_dir;
    bool unit_variance = false;
    bool unit_variance_set = false;
    bool midpoint = false;
    bool midpoint_set = false;
    std::string wavelet;
    std::string input;
    std::string column;
    bool resample = false;
    std::string coeffs_j;
    std::string coeffs_jp1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "key = value experiment file");
    cmd->add_option("--seed", f.seed, "root seed")->each([&](const std::string&) { f.seed_set = true; });
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_flag("--unit-variance", f.unit_variance, "rescale the hidden field pointwise")
        ->each([&](const std::string&) { f.unit_variance_set = true; });
    cmd->add_flag("--midpoint-cells", f.midpoint, "midpoint cell integrals instead of exact ones")
        ->each([&](const std::string&) { f.midpoint_set = true; });
    cmd->add_option("--wavelet", f.wavelet, "haar | legendre2");
    cmd->add_option("--input", f.input, "external series CSV");
    cmd->add_option("--column", f.column, "series column name or index");
    cmd->add_flag("--resample", f.resample, "interpolate non-dyadic series lengths");
}

ExperimentConfig resolve(const CommonFlags& f, const char* command) {
    KeyValueConfig kv = f.config_path.empty() ? KeyValueConfig::parse_text("")
                                              : KeyValueConfig::parse_file(f.config_path);
    ExperimentConfig cfg = ExperimentConfig::from_kv(kv);
    cfg.command = command;
    if (f.seed_set) cfg.root_seed = f.seed;
    if (f.threads >= 0) cfg.threads = static_cast<unsigned>(f.threads);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.unit_variance_set) cfg.unit_variance = f.unit_variance;
    if (f.midpoint_set) cfg.midpoint_cells = f.midpoint;
    if (!f.wavelet.empty()) cfg.wavelet = f.wavelet;
    if (!f.input.empty()) cfg.input_path = f.input;
    if (!f.column.empty()) cfg.input_column = f.column;
    if (f.resample) cfg.resample = true;
    fs::create_directories(cfg.out_dir);
    return cfg;
}

std::string out_file(const ExperimentConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

SamplePath obtain_series(const ExperimentConfig& cfg, bool& external) {
    if (!cfg.input_path.empty()) {
        external = true;
        return ingest_series(cfg.input_path, cfg.input_column, cfg.resample);
    }
    external = false;
    const ModelSpec model = cfg.model();
    const CovarianceFactor factor = build_covariance(model);
    return sample_path(factor, model.link, cfg.root_seed);
}

int cmd_simulate(const ExperimentConfig& cfg, bool with_hidden, bool write_factor) {
    const ModelSpec model = cfg.model();
    for (const auto& v : validate_model(model)) std::fprintf(stderr, "note: %s\n", v.c_str());
    const CovarianceFactor factor = build_covariance(model);
    if (write_factor) {
        char name[64];
        std::snprintf(name, sizeof name, "factor_%016llx.bin",
                      static_cast<unsigned long long>(factor.model_hash));
        write_factor_cache(factor, out_file(cfg, name));
    }
    for (int r = 0; r < cfg.reps; ++r) {
        const SamplePath p =
            sample_path(factor, model.link, derive_seed(cfg.root_seed, fnv1a("simulate"), r));
        char name[64];
        std::snprintf(name, sizeof name, "path_%03d.csv", r);
        write_path_csv(p, out_file(cfg, name), with_hidden);
    }
    std::printf("simulate: wrote %d path(s), jitter=%.3g\n", cfg.reps, factor.jitter_used);
    return kExitOk;
}

// Estimation directly from externally supplied coefficient sets at two
// consecutive scales (the coefficients-observed workflow).
int cmd_estimate_from_coeffs(const ExperimentConfig& cfg_in, const std::string& file_j,
                             const std::string& file_jp1) {
    ExperimentConfig cfg = cfg_in;
    if (cfg.t0_list.empty()) cfg.t0_list = {0.5};
    const auto psi = cfg.make_wavelet_ptr();
    const auto cj = read_coefficients_csv(file_j, psi);
    const auto cjp1 = read_coefficients_csv(file_jp1, psi);
    EstimationConfig ec = select_parameters(cfg.tau1, std::max(cfg.n, cj.j + 2));
    if (cfg.gamma_override) {
        ec.gamma = *cfg.gamma_override;
        ec.c0_ratio = std::exp2(-ec.gamma);
    }
    ec.wavelet = psi;

    std::ofstream out(out_file(cfg, "estimates.csv"));
    out << "t0,h_hat,ci_low,ci_high,V_j,V_jp1,J_n,n,outside_unit_interval,theta_sq,ci_mode\n";
    char buf[384];
    for (double t0 : cfg.t0_list) {
        HolderEstimate est = estimate_H_from_coeffs(cj, cjp1, t0, ec);
        std::string ci_mode = "none";
        try {
            if (est.h_hat > 0.0 && est.h_hat < 1.0) {
                ModelSpec local(HurstProfile::constant(est.h_hat), ScaleFunction::constant(1.0),
                                LinkFunction::identity(), 10);
                const ConstantsBundle bundle = constants_bundle(t0, local, *psi, ec.c0_ratio);
                auto [lo, hi] = confidence_interval(est, bundle, cfg.ci_level);
                est.ci_low = lo;
                est.ci_high = hi;
                est.has_ci = true;
                ci_mode = "plugin-approximate";
            }
        } catch (const std::exception& ex) {
            std::fprintf(stderr, "note: no interval at t0=%g (%s)\n", t0, ex.what());
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%.17g,%s\n",
                      t0, est.h_hat, est.ci_low, est.ci_high, est.V_j, est.V_jp1, est.J_n, cj.j,
                      est.outside_unit_interval ? 1 : 0, std::nan(""), ci_mode.c_str());
        out << buf;
        std::printf("t0=%-6g h=%.4f (from coefficient sets at scales %d, %d)\n", t0, est.h_hat,
                    cj.j, cjp1.j);
    }
    if (!out) throw IoError("write failed for estimates.csv");
    return kExitOk;
}

int cmd_estimate(const ExperimentConfig& cfg_in, bool want_theta) {
    ExperimentConfig cfg = cfg_in;
    if (cfg.t0_list.empty()) cfg.t0_list = {0.5};
    bool external = false;
    SamplePath series = obtain_series(cfg, external);
    ExperimentConfig cfg2 = cfg;
    cfg2.n = series.n;

    std::ofstream out(out_file(cfg, "estimates.csv"));
    out << "t0,h_hat,ci_low,ci_high,V_j,V_jp1,J_n,n,outside_unit_interval,theta_sq,ci_mode\n";
    std::string json = "[\n";
    char buf[512];
    for (double t0 : cfg.t0_list) {
        const EstimationConfig est_cfg = cfg2.estimation(t0);
        HolderEstimate est = estimate_H_from_path(series, est_cfg);
        std::string ci_mode = "none";
        double theta_sq = std::nan("");
        try {
            // Known-model constants when the series was simulated here; plug-in
            // (h_hat in place of H(t0)) for external data, labelled approximate.
            const double h_for_constants = external ? est.h_hat : cfg2.hurst(t0);
            if (h_for_constants > 0.0 && h_for_constants < 1.0) {
                ModelSpec local(HurstProfile::constant(h_for_constants),
                                ScaleFunction::constant(external ? 1.0 : cfg2.theta(t0)),
                                LinkFunction::identity(), series.n, cfg2.unit_variance);
                const ConstantsBundle bundle =
                    constants_bundle(t0, local, *est_cfg.wavelet, est_cfg.c0_ratio);
                auto [lo, hi] = confidence_interval(est, bundle, cfg.ci_level);
                est.ci_low = lo;
                est.ci_high = hi;
                est.has_ci = true;
                ci_mode = external ? "plugin-approximate" : "known-constants";
            }
        } catch (const std::exception& ex) {
            std::fprintf(stderr, "note: no interval at t0=%g (%s)\n", t0, ex.what());
        }
        if (want_theta) {
            try {
                theta_sq = estimate_theta_sq(series, est, *est_cfg.wavelet).theta_sq_hat;
            } catch (const std::exception& ex) {
                std::fprintf(stderr, "note: no amplitude at t0=%g (%s)\n", t0, ex.what());
            }
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%.17g,%s\n",
                      t0, est.h_hat, est.ci_low, est.ci_high, est.V_j, est.V_jp1, est.J_n, est.n,
                      est.outside_unit_interval ? 1 : 0, theta_sq, ci_mode.c_str());
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "  {\"t0\": %.17g, \"h_hat\": %.17g, \"ci_low\": %.17g, \"ci_high\": %.17g, "
                      "\"V_j\": %.17g, \"V_jp1\": %.17g, \"J_n\": %d, \"n\": %d, "
                      "\"outside_unit_interval\": %s, \"ci_mode\": \"%s\"},\n",
                      t0, est.h_hat, est.ci_low, est.ci_high, est.V_j, est.V_jp1, est.J_n, est.n,
                      est.outside_unit_interval ? "true" : "false", ci_mode.c_str());
        json += buf;
        std::printf("t0=%-6g h=%.4f%s\n", t0, est.h_hat,
                    est.outside_unit_interval ? " (outside (0,1))" : "");
    }
    if (json.size() > 2) json.erase(json.size() - 2, 1);  // trailing comma
    json += "]\n";
    write_text(out_file(cfg, "estimates.json"), json);
    if (!out) throw IoError("write failed for estimates.csv");
    return kExitOk;
}

int cmd_profile(const ExperimentConfig& cfg) {
    bool external = false;
    SamplePath series = obtain_series(cfg, external);
    ExperimentConfig cfg2 = cfg;
    cfg2.n = series.n;
    std::vector<double> grid = cfg.t0_list;
    if (grid.size() <= 1) {
        grid.clear();
        for (int i = 1; i <= 19; ++i) grid.push_back(i * 0.05);
    }
    const EstimationConfig est_cfg = cfg2.estimation(grid.front());
    const auto points = holder_profile(series, grid, est_cfg);
    std::ofstream out(out_file(cfg, "profile.csv"));
    out << "t0,h_hat,ci_low,ci_high,V_j,V_jp1,J_n,n,ok,error\n";
    char buf[384];
    for (const auto& p : points) {
        const auto& e = p.estimate;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%s\n", p.t0,
                      p.ok ? e.h_hat : std::nan(""), e.ci_low, e.ci_high, e.V_j, e.V_jp1, e.J_n,
                      series.n, p.ok ? 1 : 0, p.ok ? "" : p.error.c_str());
        out << buf;
    }
    if (!out) throw IoError("write failed for profile.csv");
    std::printf("profile: %zu points\n", points.size());
    return kExitOk;
}

int cmd_table1(const ExperimentConfig& cfg) {
    const ResultTable table = run_table1(cfg);
    table.write_csv(out_file(cfg, "table1.csv"));
    write_text(out_file(cfg, "table1_meta.json"), table.metadata_json());
    for (const auto& r : table.rows)
        std::printf("%-5s %-3s t0=%-4g mean=%.4f std=%.4f true=%.4f%s\n", r.phi.c_str(),
                    r.hurst.c_str(), r.t0, r.mean, r.std, r.true_h, r.valid ? "" : " [invalid]");
    return kExitOk;
}

int cmd_qq(const ExperimentConfig& cfg) {
    const QqResult q = run_qq(cfg);
    write_qq_csv(q, out_file(cfg, "qq.csv"));
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"ks\": %.6g,\n  \"coverage\": %.6g,\n  \"J_n\": %d,\n  \"epsilon\": %.17g,\n  \"ctilde\": %.17g\n}\n",
                  q.ks, q.coverage, q.J_n, q.epsilon, q.ctilde);
    write_text(out_file(cfg, "qq_meta.json"), buf);
    std::printf("qq: reps=%zu ks=%.4f coverage=%.3f\n", q.standardized.size(), q.ks, q.coverage);
    return kExitOk;
}

int cmd_constants(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    if (cfg.t0_list.empty()) cfg.t0_list = {0.5};
    for (double t0 : cfg.t0_list) {
        const EstimationConfig est_cfg = cfg.estimation(t0);
        const QuadratureSettings qs;
        const std::uint64_t key =
            bundle_cache_key(t0, cfg.model(), *est_cfg.wavelet, est_cfg.c0_ratio, qs);
        char name[64];
        std::snprintf(name, sizeof name, "constants_%016llx.json",
                      static_cast<unsigned long long>(key));
        const std::string path = out_file(cfg, name);
        if (fs::exists(path)) {
            std::printf("constants: cache hit %s\n", name);
            continue;
        }
        const ConstantsBundle b = run_constants(cfg, t0);
        write_text(path, b.to_json() + "\n");
        std::printf("constants: t0=%g ctilde=%.6g -> %s\n", t0, b.ctilde, name);
    }
    return kExitOk;
}

int cmd_convergence(const ExperimentConfig& cfg) {
    const auto rows = run_convergence(cfg);
    std::ofstream out(out_file(cfg, "convergence.csv"));
    out << "n,mean,std,rmse,failures\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d\n", r.n, r.mean, r.std, r.rmse,
                      r.failures);
        out << buf;
        std::printf("n=%d mean=%.4f std=%.4f rmse=%.4f\n", r.n, r.mean, r.std, r.rmse);
    }
    if (!out) throw IoError("write failed for convergence.csv");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pointwise regularity estimation for hidden multifractional models"};
    app.require_subcommand(1);

    CommonFlags flags;
    bool with_hidden = false, write_factor = false, want_theta = false;

    auto* sim = app.add_subcommand("simulate", "sample model paths to CSV");
    add_common(sim, flags);
    sim->add_flag("--with-hidden", with_hidden, "include the hidden column x");
    sim->add_flag("--write-factor", write_factor, "persist the covariance factor");

    auto* est = app.add_subcommand("estimate", "pointwise exponent estimates on one series");
    add_common(est, flags);
    est->add_flag("--theta", want_theta, "also recover the squared amplitude");
    est->add_option("--coeffs-j", flags.coeffs_j, "coefficient CSV at the coarser scale");
    est->add_option("--coeffs-jp1", flags.coeffs_jp1, "coefficient CSV at the finer scale");

    auto* prof = app.add_subcommand("profile", "exponent sweep over a t grid");
    add_common(prof, flags);

    auto* tab = app.add_subcommand("table1", "Monte Carlo mean/std sweep over model cells");
    add_common(tab, flags);

    auto* qq = app.add_subcommand("qq", "standardized estimator sample vs normal quantiles");
    add_common(qq, flags);

    auto* cons = app.add_subcommand("constants", "asymptotic constants bundle (JSON cache)");
    add_common(cons, flags);

    auto* conv = app.add_subcommand("convergence", "estimator statistics across resolutions");
    add_common(conv, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(resolve(flags, "simulate"), with_hidden, write_factor);
        if (est->parsed()) {
            const ExperimentConfig cfg = resolve(flags, "estimate");
            if (!flags.coeffs_j.empty() || !flags.coeffs_jp1.empty()) {
                if (flags.coeffs_j.empty() || flags.coeffs_jp1.empty())
                    throw ConfigError("both --coeffs-j and --coeffs-jp1 are required");
                return cmd_estimate_from_coeffs(cfg, flags.coeffs_j, flags.coeffs_jp1);
            }
            return cmd_estimate(cfg, want_theta);
        }
        if (prof->parsed()) return cmd_profile(resolve(flags, "profile"));
        if (tab->parsed()) return cmd_table1(resolve(flags, "table1"));
        if (qq->parsed()) return cmd_qq(resolve(flags, "qq"));
        if (cons->parsed()) return cmd_constants(resolve(flags, "constants"));
        if (conv->parsed()) return cmd_convergence(resolve(flags, "convergence"));
    } catch (const ConfigError& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return kExitConfig;
    } catch (const std::domain_error& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return kExitConfig;
    } catch (const IoError& ex) {
        std::fprintf(stderr, "io error: %s\n", ex.what());
        return kExitIo;
    } catch (const NumericError& ex) {
        std::fprintf(stderr, "numeric error: %s\n", ex.what());
        return kExitNumeric;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return kExitNumeric;
    }
    return kExitOk;
}
