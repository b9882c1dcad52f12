#include "mbholder/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mbholder/stats.hpp"

namespace mbh {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "config line %zu has no '='", lineno);
            throw ConfigError(buf);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line with empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end() || it->second.empty()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: '" + it->second + "'");
    }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end() || it->second.empty()) return fallback;
    try {
        std::size_t used = 0;
        const int v = std::stoi(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an integer: '" + it->second + "'");
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end() || it->second.empty()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    std::istringstream ss(get(key));
    double v;
    while (ss >> v) out.push_back(v);
    return out;
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream ss(get(key));
    std::string v;
    while (ss >> v) out.push_back(v);
    return out;
}

HurstProfile hurst_by_name(const std::string& name, const std::vector<double>& params) {
    auto need = [&](std::size_t k) {
        if (params.size() != k)
            throw ConfigError("hurst kind '" + name + "' needs " + std::to_string(k) + " params");
    };
    if (name == "h1") return HurstProfile::linear(0.1, 0.8);
    if (name == "h2") return HurstProfile::sinusoidal(0.5, 0.4, 5.0);
    if (name == "h3") return HurstProfile::damped_sine(0.1, 0.8, 10.0);
    if (name == "constant") {
        need(1);
        return HurstProfile::constant(params[0]);
    }
    if (name == "linear") {
        need(2);
        return HurstProfile::linear(params[0], params[1]);
    }
    if (name == "sinusoidal") {
        need(3);
        return HurstProfile::sinusoidal(params[0], params[1], params[2]);
    }
    if (name == "damped-sine") {
        need(3);
        return HurstProfile::damped_sine(params[0], params[1], params[2]);
    }
    throw ConfigError("unknown hurst kind '" + name + "'");
}

LinkFunction link_by_name(const std::string& name) {
    if (name == "identity" || name == "phi1") return LinkFunction::identity();
    if (name == "exp" || name == "phi2") return LinkFunction::exp_link();
    if (name == "sin4x" || name == "phi3") return LinkFunction::sin4x();
    if (name == "xsin2_4x" || name == "phi4") return LinkFunction::x_sin2_4x();
    throw ConfigError("unknown link '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
    const int version = kv.get_int("config_version", 1);
    if (version != 1) throw ConfigError("unsupported config_version");

    ExperimentConfig c;
    c.command = kv.get("command", "");

    const std::string hkind = kv.get("model.hurst.kind", "h1");
    c.hurst = hurst_by_name(hkind, kv.get_doubles("model.hurst.params"));
    if (hkind == "tabulated") {
        auto knots = kv.get_doubles("model.hurst.knots");
        auto values = kv.get_doubles("model.hurst.values");
        c.hurst = HurstProfile::tabulated(knots, values, kv.get_double("model.hurst.tau1", 0.0),
                                          kv.get_double("model.hurst.tau2", 1.0));
    }

    const std::string tkind = kv.get("model.theta.kind", "constant");
    if (tkind == "constant") {
        c.theta = ScaleFunction::constant(kv.get_double("model.theta.value", 1.0));
    } else if (tkind == "expression") {
        c.theta = ScaleFunction::expression(kv.get("model.theta.expr", "1"));
    } else if (tkind == "tabulated") {
        c.theta = ScaleFunction::tabulated(kv.get_doubles("model.theta.knots"),
                                           kv.get_doubles("model.theta.values"));
    } else {
        throw ConfigError("unknown theta kind '" + tkind + "'");
    }

    c.phi = link_by_name(kv.get("model.phi", "identity"));
    c.n = kv.get_int("model.n", 13);
    c.unit_variance = kv.get_bool("model.unit_variance", false);

    c.tau1 = kv.get_double("estimation.tau1", c.hurst.tau1());
    if (kv.has("estimation.t0")) c.t0_list = kv.get_doubles("estimation.t0");
    if (kv.has("estimation.beta")) c.beta_override = kv.get_double("estimation.beta", 0.0);
    if (kv.has("estimation.gamma")) c.gamma_override = kv.get_double("estimation.gamma", 0.0);
    c.wavelet = kv.get("estimation.wavelet", "haar");
    c.midpoint_cells = kv.get_bool("estimation.midpoint_cells", false);
    c.ci_level = kv.get_double("estimation.level", 0.90);

    c.reps = kv.get_int("reps", 100);
    if (c.reps < 1) throw ConfigError("reps must be >= 1");
    c.root_seed = static_cast<std::uint64_t>(kv.get_int("root_seed", 20240101));
    c.threads = static_cast<unsigned>(kv.get_int("threads", 0));
    c.out_dir = kv.get("out_dir", ".");

    if (kv.has("table1.phis")) c.table_phis = kv.get_strings("table1.phis");
    if (kv.has("table1.hursts")) c.table_hursts = kv.get_strings("table1.hursts");

    c.input_path = kv.get("input.path", "");
    c.input_column = kv.get("input.column", "y");
    c.resample = kv.get_bool("input.resample", false);

    if (kv.has("convergence.n_list")) {
        for (double v : kv.get_doubles("convergence.n_list"))
            c.n_list.push_back(static_cast<int>(v));
    }
    return c;
}

ModelSpec ExperimentConfig::model() const { return ModelSpec(hurst, theta, phi, n, unit_variance); }

std::shared_ptr<const MotherWavelet> ExperimentConfig::make_wavelet_ptr() const {
    if (wavelet == "haar") return std::make_shared<MotherWavelet>(MotherWavelet::haar());
    if (wavelet == "legendre2") return std::make_shared<MotherWavelet>(MotherWavelet::legendre2());
    throw ConfigError("unknown wavelet '" + wavelet + "'");
}

EstimationConfig ExperimentConfig::estimation(double t0) const {
    EstimationConfig e = select_parameters(tau1, n);
    if (beta_override) {
        e.beta = *beta_override;
        e.J_n = static_cast<int>(std::floor(e.beta * n));
    }
    if (gamma_override) {
        e.gamma = *gamma_override;
        e.c0_ratio = std::exp2(-e.gamma);
    }
    e.t0 = t0;
    e.n = n;
    e.wavelet = make_wavelet_ptr();
    e.midpoint_cells = midpoint_cells;
    e.validate();
    return e;
}

unsigned ExperimentConfig::effective_threads() const {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// ------------------------------------------------------------------- table 1

void ResultTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "phi,hurst,t0,true_H,mean,std,reps,failures,n,valid,degenerate\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%d\n",
                      r.phi.c_str(), r.hurst.c_str(), r.t0, r.true_h, r.mean, r.std, r.reps,
                      r.failures, r.n, r.valid ? 1 : 0, r.degenerate ? 1 : 0);
        out << buf;
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string ResultTable::metadata_json() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"version\": \"%s\",\n  \"root_seed\": %llu,\n  \"wavelet\": \"%s\",\n  \"cells\": %zu\n}\n",
                  version.c_str(), static_cast<unsigned long long>(root_seed), wavelet.c_str(),
                  rows.size());
    return buf;
}

ResultTable run_table1(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    if (config.t0_list.empty()) config.t0_list = {0.1, 0.3, 0.5, 0.7, 0.9};
    for (double t0 : config.t0_list)
        if (!(t0 > 0.0 && t0 < 1.0)) throw ConfigError("table t0 values must lie in (0,1)");

    ResultTable table;
    table.root_seed = config.root_seed;
    table.wavelet = config.wavelet;

    const unsigned threads = config.effective_threads();
    const std::size_t reps = static_cast<std::size_t>(config.reps);

    for (const std::string& hname : config.table_hursts) {
        const HurstProfile H = hurst_by_name(hname);
        ModelSpec base(H, config.theta, LinkFunction::identity(), config.n, config.unit_variance);
        const CovarianceFactor factor = build_covariance(base);
        const std::uint64_t cell = fnv1a("table1/" + hname);

        // One hidden path per repetition, shared across links and t0 columns.
        struct RepResult {
            std::vector<double> h;  // per (phi, t0), flattened
            std::vector<char> ok;
        };
        const std::size_t cols = config.table_phis.size() * config.t0_list.size();
        std::vector<RepResult> per_rep(reps);

        std::vector<LinkFunction> links;
        links.reserve(config.table_phis.size());
        for (const auto& p : config.table_phis) links.push_back(link_by_name(p));

        std::vector<EstimationConfig> est_cfgs;
        est_cfgs.reserve(config.t0_list.size());
        for (double t0 : config.t0_list) est_cfgs.push_back(config.estimation(t0));

        parallel_for(reps, threads, [&](std::size_t r) {
            RepResult& out = per_rep[r];
            out.h.assign(cols, 0.0);
            out.ok.assign(cols, 0);
            const SamplePath x = sample_path(factor, LinkFunction::identity(),
                                             derive_seed(config.root_seed, cell, r));
            for (std::size_t pi = 0; pi < links.size(); ++pi) {
                SamplePath y = x;
                for (std::size_t u = 0; u < y.y_values.size(); ++u)
                    y.y_values[u] = links[pi](x.x_values[u]);
                for (std::size_t ti = 0; ti < est_cfgs.size(); ++ti) {
                    const std::size_t col = pi * est_cfgs.size() + ti;
                    try {
                        const HolderEstimate est = estimate_H_from_path(y, est_cfgs[ti]);
                        out.h[col] = est.h_hat;
                        out.ok[col] = 1;
                    } catch (const std::exception&) {
                        out.ok[col] = 0;
                    }
                }
            }
        });

        for (std::size_t pi = 0; pi < config.table_phis.size(); ++pi) {
            for (std::size_t ti = 0; ti < config.t0_list.size(); ++ti) {
                const std::size_t col = pi * config.t0_list.size() + ti;
                std::vector<double> vals;
                vals.reserve(reps);
                int failures = 0;
                for (std::size_t r = 0; r < reps; ++r) {
                    if (per_rep[r].ok[col])
                        vals.push_back(per_rep[r].h[col]);
                    else
                        ++failures;
                }
                const MeanStd ms = mean_std(vals);
                ResultCell rc;
                rc.phi = config.table_phis[pi];
                rc.hurst = hname;
                rc.t0 = config.t0_list[ti];
                rc.true_h = H(rc.t0);
                rc.mean = ms.mean;
                rc.std = vals.size() < 2 ? 0.0 : ms.std;
                rc.degenerate = vals.size() < 2;
                rc.reps = static_cast<int>(vals.size());
                rc.failures = failures;
                rc.n = config.n;
                rc.valid = failures <= config.reps / 20;  // > 5% failed marks invalid
                table.rows.push_back(std::move(rc));
            }
        }
    }
    return table;
}

// ----------------------------------------------------------------------- qq

QqResult run_qq(const ExperimentConfig& config) {
    if (config.reps < 100) throw ConfigError("qq requires reps >= 100");
    if (config.t0_list.size() > 1) throw ConfigError("qq uses exactly one t0");
    const double t0 = config.t0_list.empty() ? 0.5 : config.t0_list.front();

    const EstimationConfig est_cfg = config.estimation(t0);
    const ModelSpec model = config.model();

    // The CLT constants are functions of the local values H(t0), theta(t0);
    // the bundle is evaluated on the localized model.
    ModelSpec local(HurstProfile::constant(model.hurst(t0)),
                    ScaleFunction::constant(model.scale(t0)), LinkFunction::identity(), config.n,
                    model.unit_variance);
    const ConstantsBundle bundle =
        constants_bundle(t0, local, *est_cfg.wavelet, est_cfg.c0_ratio);

    const CovarianceFactor factor = build_covariance(model);
    const double h_true = model.hurst(t0);
    const double eps = est_cfg.epsilon(est_cfg.J_n);
    const double denom = std::exp2(est_cfg.J_n + 1) * eps;
    const double norm = std::sqrt(denom / bundle.ctilde);
    const double half = normal_quantile(0.5 * (1.0 + config.ci_level)) *
                        std::sqrt(bundle.ctilde / denom);

    const std::size_t reps = static_cast<std::size_t>(config.reps);
    std::vector<double> standardized(reps, 0.0);
    std::vector<char> covered(reps, 0);
    const std::uint64_t cell = fnv1a("qq");
    parallel_for(reps, config.effective_threads(), [&](std::size_t r) {
        const SamplePath y =
            sample_path(factor, model.link, derive_seed(config.root_seed, cell, r));
        const HolderEstimate est = estimate_H_from_path(y, est_cfg);
        standardized[r] = norm * (est.h_hat - h_true);
        covered[r] = std::abs(est.h_hat - h_true) <= half ? 1 : 0;
    });

    QqResult q;
    q.J_n = est_cfg.J_n;
    q.epsilon = eps;
    q.ctilde = bundle.ctilde;
    q.ks = ks_distance_to_normal(standardized);
    double cov = 0.0;
    for (char c : covered) cov += c;
    q.coverage = cov / static_cast<double>(reps);
    std::sort(standardized.begin(), standardized.end());
    q.standardized = std::move(standardized);
    return q;
}

void write_qq_csv(const QqResult& qq, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "rank,empirical,normal\n";
    const std::size_t n = qq.standardized.size();
    char buf[96];
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, qq.standardized[i],
                      normal_quantile(p));
        out << buf;
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

// -------------------------------------------------------------------- ingest

SamplePath ingest_series(const std::string& path, const std::string& column_spec, bool resample) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty series file '" + path + "'");

    // header: resolve the column index
    std::vector<std::string> header;
    {
        std::istringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) header.push_back(trim(col));
    }
    int col_idx = -1;
    try {
        col_idx = std::stoi(column_spec);
    } catch (const std::exception&) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == column_spec) col_idx = static_cast<int>(i);
    }
    if (col_idx < 0 || static_cast<std::size_t>(col_idx) >= header.size())
        throw ConfigError("series column '" + column_spec + "' not found");

    std::vector<double> values;
    std::vector<std::size_t> bad_rows;
    std::size_t rowno = 1;
    while (std::getline(in, line)) {
        ++rowno;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string cellv;
        int i = 0;
        double v = std::nan("");
        bool parsed = false;
        while (std::getline(ss, cellv, ',')) {
            if (i++ == col_idx) {
                try {
                    std::size_t used = 0;
                    v = std::stod(trim(cellv), &used);
                    parsed = used > 0;
                } catch (const std::exception&) {
                    parsed = false;
                }
            }
        }
        if (!parsed || !std::isfinite(v))
            bad_rows.push_back(rowno);
        else
            values.push_back(v);
    }
    if (!bad_rows.empty()) {
        std::string msg = "series has missing or non-numeric cells at row(s):";
        for (std::size_t i = 0; i < bad_rows.size() && i < 12; ++i)
            msg += " " + std::to_string(bad_rows[i]);
        if (bad_rows.size() > 12) msg += " ...";
        throw IoError(msg);
    }
    if (values.size() < 17) throw ConfigError("series too short: need at least 2^4 + 1 rows");

    const std::size_t count = values.size();
    int n = 0;
    while ((std::size_t{1} << (n + 1)) + 1 <= count) ++n;
    const bool dyadic = (std::size_t{1} << n) + 1 == count;
    if (!dyadic && !resample)
        throw ConfigError("series length " + std::to_string(count) +
                          " is not 2^n + 1; pass the resample flag to interpolate");

    SamplePath p;
    if (dyadic) {
        p.n = n;
        p.y_values = std::move(values);
    } else {
        // linear interpolation onto the largest dyadic grid below the length
        p.n = n;
        const std::size_t N = std::size_t{1} << n;
        p.y_values.resize(N + 1);
        for (std::size_t u = 0; u <= N; ++u) {
            const double pos = static_cast<double>(u) * static_cast<double>(count - 1) /
                               static_cast<double>(N);
            const std::size_t i = std::min(static_cast<std::size_t>(pos), count - 2);
            const double w = pos - static_cast<double>(i);
            p.y_values[u] = (1.0 - w) * values[i] + w * values[i + 1];
        }
    }
    p.x_values.assign(p.y_values.size(), 0.0);  // hidden field unobserved
    p.seed = 0;
    return p;
}

// ------------------------------------------------------------------ constants

ConstantsBundle run_constants(const ExperimentConfig& config, double t0) {
    const EstimationConfig est = config.estimation(t0);
    return constants_bundle(t0, config.model(), *est.wavelet, est.c0_ratio);
}

// ---------------------------------------------------------------- convergence

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& config) {
    if (config.t0_list.size() > 1) throw ConfigError("convergence uses exactly one t0");
    const double t0 = config.t0_list.empty() ? 0.5 : config.t0_list.front();
    std::vector<int> ns = config.n_list;
    if (ns.empty()) ns = {10, 11, 12, 13};

    std::vector<ConvergenceRow> out;
    for (int n : ns) {
        ExperimentConfig c = config;
        c.n = n;
        const ModelSpec model = c.model();
        const EstimationConfig est_cfg = c.estimation(t0);
        const CovarianceFactor factor = build_covariance(model);
        const double h_true = model.hurst(t0);
        const std::size_t reps = static_cast<std::size_t>(config.reps);
        std::vector<double> vals(reps, std::nan(""));
        // the cell id is shared across resolutions so repetition r is paired
        const std::uint64_t cell = fnv1a(std::string("convergence"));
        parallel_for(reps, config.effective_threads(), [&](std::size_t r) {
            const SamplePath y =
                sample_path(factor, model.link, derive_seed(config.root_seed, cell, r));
            try {
                vals[r] = estimate_H_from_path(y, est_cfg).h_hat;
            } catch (const std::exception&) {
            }
        });
        std::vector<double> good;
        int failures = 0;
        for (double v : vals)
            if (std::isnan(v))
                ++failures;
            else
                good.push_back(v);
        const MeanStd ms = mean_std(good);
        double sq = 0.0;
        for (double v : good) sq += (v - h_true) * (v - h_true);
        ConvergenceRow row;
        row.n = n;
        row.mean = ms.mean;
        row.std = ms.std;
        row.rmse = good.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(good.size()));
        row.failures = failures;
        out.push_back(row);
    }
    return out;
}

}  // namespace mbh
