#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mbholder/model.hpp"
#include "mbholder/simulate.hpp"
#include "mbholder/specfun.hpp"
#include "mbholder/wavelet.hpp"

namespace mbh {

// Bandwidth sequence eps_j = 2^{-j gamma}; the power form keeps the ratio
// constant (eps_{j+1}/eps_j = 2^{-gamma}) which the CLT constants require.
struct EstimationConfig {
    double t0 = 0.5;
    double tau1 = 0.1;
    double beta = 0.0;
    double gamma = 0.0;
    int n = 0;
    int J_n = 0;
    double c0_ratio = 0.0;     // 2^{-gamma}
    std::shared_ptr<const MotherWavelet> wavelet;
    bool midpoint_cells = false;

    double epsilon(int j) const { return std::exp2(-gamma * j); }
    void validate() const;
};

// Parameter selection from the known lower Hurst bound:
//   beta = (4 tau1 + 1) / (4 tau1 + 2),  gamma = 1 / (2 beta),  J_n = floor(beta n).
EstimationConfig select_parameters(double tau1, int n);

struct Neighborhood {
    double t0 = 0.0;
    int j = 0;
    double epsilon_j = 0.0;
    std::vector<int> indices;  // k with |t0 - k 2^-j| <= eps_j, 0 <= k < 2^j

    int card() const { return static_cast<int>(indices.size()); }
};

// Indices within eps_j of t0 at scale j, boundary inclusive. Throws
// NumericError when empty (larger j or eps needed).
Neighborhood neighborhood(double t0, int j, double epsilon_j);

// V = sum of squared coefficients over the neighborhood. Accumulated through
// error-free transforms; the returned .hi/.lo pair feeds the ratio computation.
DD quadratic_functional_dd(const WaveletCoefficientSet& coeffs, const Neighborhood& nu);
double quadratic_functional(const WaveletCoefficientSet& coeffs, const Neighborhood& nu);

struct HolderEstimate {
    double t0 = 0.0;
    double h_hat = 0.0;
    int j_used = 0;            // coarser of the two scales
    int J_n = 0;
    int n = 0;
    double V_j = 0.0;
    double V_jp1 = 0.0;
    double epsilon_j = 0.0;
    double epsilon_jp1 = 0.0;
    int card_j = 0;
    int card_jp1 = 0;
    bool outside_unit_interval = false;  // raw value left (0,1); no clamping
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool has_ci = false;
    double ctilde = 0.0;

    DD V_j_dd{}, V_jp1_dd{};   // exact accumulations, used by the ratio
};

// Core scale-ratio estimator
//   h = [ log(eps_{j+1}/eps_j) + log(V_j / V_{j+1}) ] / (2 log 2)
// on exact synthetic inputs; shared by the coefficient and path front ends.
double holder_from_v(double V_j, double V_jp1, double eps_j, double eps_jp1);

// Estimate from observed coefficient sets at consecutive scales.
HolderEstimate estimate_H_from_coeffs(const WaveletCoefficientSet& coeffs_j,
                                      const WaveletCoefficientSet& coeffs_jp1, double t0,
                                      const EstimationConfig& config);

// Estimate from a discretized trajectory: coefficients at scales J_n and J_n+1,
// neighborhoods at eps_{J_n}, eps_{J_n+1}, then the ratio formula.
HolderEstimate estimate_H_from_path(const SamplePath& y, const EstimationConfig& config);

// Two-sided interval from the asymptotic normal law; half-width
//   z_{(1+level)/2} sqrt( ctilde / (2^{J_n+1} eps_{J_n}) ).
std::pair<double, double> confidence_interval(const HolderEstimate& est,
                                              const ConstantsBundle& bundle, double level);

struct ThetaEstimate {
    double t0 = 0.0;
    double theta_sq_hat = 0.0;
    std::uint64_t inputs_digest = 0;
};

// Amplitude recovery
//   theta^2 = -4^{J_n h} eps^{-1} V / ( C0(2h) \int\int psi psi |t-s|^{2h} ),
// evaluated at h = est.h_hat. Requires h in (0,1) and V > 0.
ThetaEstimate estimate_theta_sq(const SamplePath& y, const HolderEstimate& est,
                                const MotherWavelet& psi, const QuadratureSettings& settings = {});

struct ProfilePoint {
    double t0 = 0.0;
    bool ok = false;
    std::string error;
    HolderEstimate estimate;
};

// Pointwise sweep; coefficient sets are computed once per scale and reused.
std::vector<ProfilePoint> holder_profile(const SamplePath& y, const std::vector<double>& t_grid,
                                         const EstimationConfig& config);

struct CltDiagnostic {
    std::vector<double> standardized;  // sqrt(2^{J_n+1} eps) (h_r - H(t0)) / sqrt(ctilde)
    double ks_statistic = 0.0;
};

// Monte Carlo normality check of the estimator against the asymptotic law.
CltDiagnostic clt_diagnostic(const ModelSpec& model, const EstimationConfig& config,
                             const ConstantsBundle& bundle, int reps, std::uint64_t seed,
                             unsigned threads = 1);

}  // namespace mbh
