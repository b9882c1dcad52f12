#include "mbholder/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mbholder/stats.hpp"

namespace mbh {

namespace {
constexpr double kTwoLog2 = 1.3862943611198906;  // 2 log 2
}

void EstimationConfig::validate() const {
    if (!(t0 > 0.0 && t0 < 1.0)) throw ConfigError("t0 must lie in (0,1)");
    if (!(gamma > 0.5 && gamma < 1.0))
        throw ConfigError("bandwidth exponent gamma must lie in (1/2,1)");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("scale fraction beta must lie in (0,1)");
    if (J_n < 2) throw ConfigError("J_n below 2; the grid exponent n is too small");
    if (J_n + 1 > n) throw ConfigError("J_n + 1 exceeds the path resolution n");
    if (!wavelet) throw ConfigError("estimation config lacks a wavelet");
}

EstimationConfig select_parameters(double tau1, int n) {
    if (!(tau1 > 0.0 && tau1 < 1.0)) throw ConfigError("tau1 must lie in (0,1)");
    if (n < 6) throw ConfigError("parameter selection requires n >= 6");
    EstimationConfig c;
    c.tau1 = tau1;
    c.n = n;
    c.beta = (4.0 * tau1 + 1.0) / (4.0 * tau1 + 2.0);
    c.gamma = 1.0 / (2.0 * c.beta);
    c.J_n = static_cast<int>(std::floor(c.beta * n));
    c.c0_ratio = std::exp2(-c.gamma);
    if (c.J_n < 2) throw ConfigError("n too small: floor(beta n) < 2");
    return c;
}

Neighborhood neighborhood(double t0, int j, double epsilon_j) {
    if (j < 0 || j > 30) throw ConfigError("neighborhood scale j out of range");
    if (!(epsilon_j > 0.0)) throw ConfigError("neighborhood radius must be positive");
    if (std::exp2(j) * epsilon_j < 1.0)
        throw ConfigError("neighborhood precondition 2^j eps_j >= 1 violated");
    Neighborhood nu;
    nu.t0 = t0;
    nu.j = j;
    nu.epsilon_j = epsilon_j;
    const double scale = std::exp2(j);
    const int kmax = (1 << j) - 1;
    int lo = static_cast<int>(std::floor(scale * (t0 - epsilon_j))) - 1;
    int hi = static_cast<int>(std::ceil(scale * (t0 + epsilon_j))) + 1;
    lo = std::max(lo, 0);
    hi = std::min(hi, kmax);
    for (int k = lo; k <= hi; ++k) {
        if (std::abs(t0 - static_cast<double>(k) / scale) <= epsilon_j) nu.indices.push_back(k);
    }
    if (nu.indices.empty())
        throw NumericError("empty neighborhood; increase the scale j or the radius eps");
    return nu;
}

DD quadratic_functional_dd(const WaveletCoefficientSet& coeffs, const Neighborhood& nu) {
    if (nu.j != coeffs.j) throw ConfigError("neighborhood and coefficient scales differ");
    DD acc{0.0, 0.0};
    for (int k : nu.indices) {
        if (k < 0 || static_cast<std::size_t>(k) >= coeffs.base.size())
            throw ConfigError("neighborhood index outside the coefficient range");
        acc = dd_add(acc, two_prod(coeffs.base[k], coeffs.base[k]));
    }
    const double scale = std::exp2(coeffs.base_scale_log2);
    return DD{acc.hi * scale, acc.lo * scale};  // power-of-two scale, exact
}

double quadratic_functional(const WaveletCoefficientSet& coeffs, const Neighborhood& nu) {
    return dd_value(quadratic_functional_dd(coeffs, nu));
}

double holder_from_v(double V_j, double V_jp1, double eps_j, double eps_jp1) {
    if (!(V_j > 0.0) || !(V_jp1 > 0.0))
        throw NumericError("degenerate data: quadratic functional not positive");
    return (std::log(eps_jp1 / eps_j) + std::log(V_j / V_jp1)) / kTwoLog2;
}

namespace {

HolderEstimate estimate_from_sets(const WaveletCoefficientSet& cj, const WaveletCoefficientSet& cjp1,
                                  double t0, const EstimationConfig& config) {
    if (cjp1.j != cj.j + 1) throw ConfigError("coefficient scales must differ by exactly 1");
    HolderEstimate e;
    e.t0 = t0;
    e.j_used = cj.j;
    e.J_n = cj.j;
    e.n = config.n;
    e.epsilon_j = config.epsilon(cj.j);
    e.epsilon_jp1 = config.epsilon(cj.j + 1);

    const Neighborhood nu_j = neighborhood(t0, cj.j, e.epsilon_j);
    const Neighborhood nu_jp1 = neighborhood(t0, cjp1.j, e.epsilon_jp1);
    if (nu_jp1.card() < 2)
        throw NumericError("neighborhood at the finer scale has fewer than 2 indices");
    e.card_j = nu_j.card();
    e.card_jp1 = nu_jp1.card();

    e.V_j_dd = quadratic_functional_dd(cj, nu_j);
    e.V_jp1_dd = quadratic_functional_dd(cjp1, nu_jp1);
    e.V_j = dd_value(e.V_j_dd);
    e.V_jp1 = dd_value(e.V_jp1_dd);
    if (!(e.V_j > 0.0) || !(e.V_jp1 > 0.0))
        throw NumericError("degenerate data: quadratic functional not positive");

    // The ratio is carried through the error-free accumulation and rounded once.
    const double ratio = dd_value(dd_div(e.V_j_dd, e.V_jp1_dd));
    e.h_hat = (std::log(e.epsilon_jp1 / e.epsilon_j) + std::log(ratio)) / kTwoLog2;
    e.outside_unit_interval = !(e.h_hat > 0.0 && e.h_hat < 1.0);
    return e;
}

}  // namespace

HolderEstimate estimate_H_from_coeffs(const WaveletCoefficientSet& coeffs_j,
                                      const WaveletCoefficientSet& coeffs_jp1, double t0,
                                      const EstimationConfig& config) {
    return estimate_from_sets(coeffs_j, coeffs_jp1, t0, config);
}

HolderEstimate estimate_H_from_path(const SamplePath& y, const EstimationConfig& config) {
    config.validate();
    if (config.n != y.n) throw ConfigError("config resolution differs from the path resolution");
    const auto cj = coefficients_from_path(y, config.J_n, config.wavelet, config.midpoint_cells);
    const auto cjp1 =
        coefficients_from_path(y, config.J_n + 1, config.wavelet, config.midpoint_cells);
    return estimate_from_sets(cj, cjp1, config.t0, config);
}

std::pair<double, double> confidence_interval(const HolderEstimate& est,
                                              const ConstantsBundle& bundle, double level) {
    if (!(bundle.ctilde > 0.0)) throw NumericError("asymptotic variance ctilde not positive");
    if (!(level >= 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in [0,1)");
    const double denom = std::exp2(est.J_n + 1) * est.epsilon_j;
    const double half = level == 0.0
                            ? 0.0
                            : normal_quantile(0.5 * (1.0 + level)) * std::sqrt(bundle.ctilde / denom);
    return {est.h_hat - half, est.h_hat + half};
}

ThetaEstimate estimate_theta_sq(const SamplePath& y, const HolderEstimate& est,
                                const MotherWavelet& psi, const QuadratureSettings& settings) {
    const double h = est.h_hat;
    if (!(h > 0.0 && h < 1.0))
        throw NumericError("amplitude recovery needs an exponent estimate inside (0,1)");
    if (!(est.V_j > 0.0)) throw NumericError("amplitude recovery needs a positive V");
    const double alpha = 2.0 * h;
    // \int\int psi psi |t-s|^{2h}: reuse the leading-covariance integral, which
    // already carries the factor -(C0/2).
    const double lead = wavelet_cov_leading(0, alpha, psi, settings);
    const double c0 = c0_alpha(alpha, settings);
    const double double_integral = lead / (-0.5 * c0);
    const double denom = c0 * double_integral;
    if (!(denom < 0.0))
        throw NumericError("wavelet/exponent inconsistency: denominator not negative");
    const double value = -std::exp2(2.0 * est.J_n * h) * est.V_j / (est.epsilon_j * denom);
    ThetaEstimate t;
    t.t0 = est.t0;
    t.theta_sq_hat = value;
    t.inputs_digest = hash_combine(fnv1a(std::string("theta")),
                                   hash_combine(y.seed, static_cast<std::uint64_t>(est.J_n)));
    return t;
}

std::vector<ProfilePoint> holder_profile(const SamplePath& y, const std::vector<double>& t_grid,
                                         const EstimationConfig& config) {
    config.validate();
    if (config.n != y.n) throw ConfigError("config resolution differs from the path resolution");
    const auto cj = coefficients_from_path(y, config.J_n, config.wavelet, config.midpoint_cells);
    const auto cjp1 =
        coefficients_from_path(y, config.J_n + 1, config.wavelet, config.midpoint_cells);
    std::vector<ProfilePoint> out;
    out.reserve(t_grid.size());
    for (double t0 : t_grid) {
        ProfilePoint p;
        p.t0 = t0;
        try {
            if (!(t0 > 0.0 && t0 < 1.0)) throw ConfigError("profile point outside (0,1)");
            p.estimate = estimate_from_sets(cj, cjp1, t0, config);
            p.ok = true;
        } catch (const std::exception& ex) {
            p.ok = false;
            p.error = ex.what();
        }
        out.push_back(std::move(p));
    }
    return out;
}

CltDiagnostic clt_diagnostic(const ModelSpec& model, const EstimationConfig& config,
                             const ConstantsBundle& bundle, int reps, std::uint64_t seed,
                             unsigned threads) {
    if (reps < 100) throw ConfigError("CLT diagnostic needs at least 100 repetitions");
    config.validate();
    if (!(bundle.ctilde > 0.0)) throw NumericError("asymptotic variance ctilde not positive");

    const CovarianceFactor factor = build_covariance(model);
    const double h_true = model.hurst(config.t0);
    const double norm =
        std::sqrt(std::exp2(config.J_n + 1) * config.epsilon(config.J_n) / bundle.ctilde);

    CltDiagnostic d;
    d.standardized.assign(static_cast<std::size_t>(reps), 0.0);
    const std::uint64_t cell = fnv1a("clt-diagnostic");
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
        const SamplePath path = sample_path(factor, model.link, derive_seed(seed, cell, r));
        const HolderEstimate est = estimate_H_from_path(path, config);
        d.standardized[r] = norm * (est.h_hat - h_true);
    });
    d.ks_statistic = ks_distance_to_normal(d.standardized);
    return d;
}

}  // namespace mbh
