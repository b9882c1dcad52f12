#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbholder/estimator.hpp"
#include "mbholder/model.hpp"
#include "mbholder/simulate.hpp"

namespace mbh {

inline constexpr const char* kVersion = "0.1.0";

// `key = value` text with '#' comments. Later duplicates win; lists are
// whitespace separated.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_text(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

private:
    std::map<std::string, std::string> kv_;
};

// Resolved experiment description (file keys plus flag overrides).
struct ExperimentConfig {
    std::string command;
    HurstProfile hurst = HurstProfile::linear(0.1, 0.8);
    ScaleFunction theta = ScaleFunction::constant(1.0);
    LinkFunction phi = LinkFunction::identity();
    int n = 13;
    bool unit_variance = false;

    double tau1 = 0.1;
    std::vector<double> t0_list;  // commands fill their own default when empty
    std::optional<double> beta_override;
    std::optional<double> gamma_override;
    std::string wavelet = "haar";
    bool midpoint_cells = false;
    double ci_level = 0.90;

    int reps = 100;
    std::uint64_t root_seed = 20240101;
    unsigned threads = 0;  // 0: hardware concurrency
    std::string out_dir = ".";

    // table1 cell lists
    std::vector<std::string> table_phis{"phi1", "phi2"};
    std::vector<std::string> table_hursts{"h1", "h2", "h3"};

    // external series
    std::string input_path;
    std::string input_column = "y";
    bool resample = false;

    std::vector<int> n_list;  // convergence sweeps

    static ExperimentConfig from_kv(const KeyValueConfig& kv);
    ModelSpec model() const;
    EstimationConfig estimation(double t0) const;
    std::shared_ptr<const MotherWavelet> make_wavelet_ptr() const;
    unsigned effective_threads() const;
};

HurstProfile hurst_by_name(const std::string& name, const std::vector<double>& params = {});
LinkFunction link_by_name(const std::string& name);

struct ResultCell {
    std::string phi;
    std::string hurst;
    double t0 = 0.0;
    double true_h = 0.0;
    double mean = 0.0;
    double std = 0.0;
    int reps = 0;
    int failures = 0;
    int n = 0;
    bool valid = true;       // > 5% failed repetitions marks the cell invalid
    bool degenerate = false; // fewer than 2 successful repetitions: std is meaningless
};

struct ResultTable {
    std::vector<ResultCell> rows;
    std::uint64_t root_seed = 0;
    std::string wavelet;
    std::string version = kVersion;

    void write_csv(const std::string& path) const;
    std::string metadata_json() const;
};

// Monte Carlo sweep over (phi, hurst, t0) cells with one covariance factor per
// Hurst profile, reused across links and repetitions.
ResultTable run_table1(const ExperimentConfig& config);

struct QqResult {
    std::vector<double> standardized;  // sorted
    double ks = 0.0;
    double coverage = 0.0;  // CI coverage at config.ci_level
    int J_n = 0;
    double epsilon = 0.0;
    double ctilde = 0.0;
};

QqResult run_qq(const ExperimentConfig& config);
void write_qq_csv(const QqResult& qq, const std::string& path);

// Validated external series; x stays zero (the hidden field is unobserved).
SamplePath ingest_series(const std::string& path, const std::string& column_spec, bool resample);

ConstantsBundle run_constants(const ExperimentConfig& config, double t0);

struct ConvergenceRow {
    int n = 0;
    double mean = 0.0;
    double std = 0.0;
    double rmse = 0.0;
    int failures = 0;
};
std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& config);

}  // namespace mbh
