#pragma once

#include <cstdint>
#include <string>

#include "mbholder/model.hpp"
#include "mbholder/quadrature.hpp"
#include "mbholder/wavelet.hpp"

namespace mbh {

// C0(alpha) = \int_R |e^{iu}-1|^2 / |u|^{alpha+1} du, alpha in (0,2).
// Adaptive quadrature with a series expansion near u=0 and an asymptotic
// tail correction beyond settings.tail_cut.
double c0_alpha(double alpha, const QuadratureSettings& settings = {});

// Analytic identity 2 pi / (Gamma(alpha+1) sin(pi alpha / 2)); used for bulk
// kernel assembly where millions of evaluations are needed. The quadrature
// route above is checked against it.
double c0_alpha_closed(double alpha);

// Log-weighted variant: binom(p,l) * \int_R |e^{iu}-1|^2 (log|u|)^l / |u|^{alpha+1} du.
// cl_alpha(0, p, alpha) == c0_alpha(alpha) for every p.
double cl_alpha(int l, int p, double alpha, const QuadratureSettings& settings = {});

// Covariance kernel of the harmonizable field at times s,t:
//   (C0(H(s)+H(t)) / 2) * (|s|^a + |t|^a - |s-t|^a),  a = H(s)+H(t).
double mbm_covariance(double s, double t, const HurstProfile& hurst,
                      const QuadratureSettings& settings = {});

// Leading same-scale coefficient covariance before scale factors:
//   I(delta, alpha) = -(C0(alpha)/2) * \int\int psi(t) psi(s) |t-s+delta|^alpha dt ds.
// For delta >= 1 the Taylor polynomial of |u+delta|^alpha up to degree 2Q-1 is
// subtracted under the integral (the wavelet annihilates it), which removes the
// catastrophic cancellation at large lags.
double wavelet_cov_leading(int delta, double alpha, const MotherWavelet& psi,
                           const QuadratureSettings& settings = {});

// Variance-type constant at scale ratio rho:
//   C2 = -theta(t0)^2 (C0(2H(t0))/2) \int\int psi(t) psi(s) |t - rho s|^{2H(t0)} dt ds.
// Throws NumericError if the result is not positive (inadmissible wavelet).
double c2_const(double t0, double rho, const HurstProfile& hurst, const ScaleFunction& theta,
                const MotherWavelet& psi, const QuadratureSettings& settings = {});

// Limit of |delta|^{2Q-alpha} I(delta, alpha) for large lags, by Richardson
// extrapolation on delta in {32,64,128}.
double c1_limit(double alpha, const MotherWavelet& psi, const QuadratureSettings& settings = {});

// Everything the confidence intervals and the CLT diagnostic need, evaluated at
// one point t0.
struct ConstantsBundle {
    double t0 = 0.0;
    double alpha = 0.0;       // 2 H(t0)
    double C0 = 0.0;          // C0(2H(t0))
    double c1 = 0.0;          // lag-covariance constant, includes theta(t0)^2
    double c2 = 0.0;          // variance constant at ratio 1, includes theta(t0)^2
    double C2_half = 0.0;     // variance-type constant at ratio 1/2
    double c3 = 0.0;          // 4 (c2^2 + c1^2 lag_series)
    double c4 = 0.0;          // cross-scale CLT covariance
    double c0_ratio = 0.0;    // limit eps_{j+1}/eps_j of the bandwidth sequence
    double ctilde = 0.0;      // asymptotic variance of the normalized estimator
    int Q = 0;
    double lag_series = 0.0;  // sum_{l != 0} |l|^{4H-4Q}

    std::string to_json() const;
    static ConstantsBundle from_json(const std::string& text);
    std::uint64_t digest() const;
};

// Assembles the bundle. Requires Q >= 2, or Q == 1 with sup H < 3/4 (rule (A0));
// violations throw ConfigError naming the rule.
ConstantsBundle constants_bundle(double t0, const ModelSpec& model, const MotherWavelet& psi,
                                 double c0_ratio, const QuadratureSettings& settings = {});

// Cache key for bundle files.
std::uint64_t bundle_cache_key(double t0, const ModelSpec& model, const MotherWavelet& psi,
                               double c0_ratio, const QuadratureSettings& settings);

}  // namespace mbh
