#include "mbholder/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "json.hpp"

namespace mbh {
namespace {

constexpr double kTwoLog2Sq = 1.9218120556728055;  // (2 log 2)^2
constexpr double kSeriesCut = 1e-3;                // series/quadrature split for the u->0 end

// int_0^d u^beta log(u)^l du, beta > -1.
double power_log_moment(double beta, int l, double d) {
    if (l == 0) return std::pow(d, beta + 1) / (beta + 1);
    return std::pow(d, beta + 1) * std::pow(std::log(d), l) / (beta + 1) -
           (l / (beta + 1)) * power_log_moment(beta, l - 1, d);
}

// 2(1-cos u) = sum_{k>=1} (-1)^{k+1} 2 u^{2k} / (2k)!
double series_head(double alpha, int l, double d) {
    double sum = 0.0;
    double fact = 1.0;  // (2k)!
    for (int k = 1; k <= 10; ++k) {
        fact *= (2.0 * k - 1.0) * (2.0 * k);
        const double coef = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) / fact;
        const double term = coef * power_log_moment(2.0 * k - 1.0 - alpha, l, d);
        sum += term;
        if (std::abs(term) < 1e-22 * std::abs(sum)) break;
    }
    return sum;
}

// F(u) = log(u)^l u^{-1-alpha} and derivatives, represented as a coefficient
// vector over log-powers at a fixed u-power.
struct LogPoly {
    std::vector<double> coef;  // coef[i] multiplies log(u)^i
    double power;              // common power of u

    double eval(double u) const {
        const double lu = std::log(u);
        double acc = 0.0, lp = 1.0;
        for (double c : coef) {
            acc += c * lp;
            lp *= lu;
        }
        return acc * std::pow(u, power);
    }

    LogPoly derivative() const {
        LogPoly d;
        d.power = power - 1.0;
        d.coef.assign(coef.size(), 0.0);
        for (std::size_t i = 0; i < coef.size(); ++i) {
            d.coef[i] += power * coef[i];
            if (i > 0) d.coef[i - 1] += static_cast<double>(i) * coef[i];
        }
        return d;
    }
};

// int_T^inf cos(u) F(u) du by repeated integration by parts:
//   -sin(T)F - cos(T)F' + sin(T)F'' + cos(T)F''' - ...
double oscillatory_tail(const LogPoly& f0, double T) {
    LogPoly f = f0;
    const double s = std::sin(T), c = std::cos(T);
    static const double signs[4][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1}};  // (sin, cos) factors
    double acc = 0.0;
    for (int m = 0; m < 6; ++m) {
        const double v = f.eval(T);
        acc += signs[m % 4][0] * s * v + signs[m % 4][1] * c * v;
        f = f.derivative();
    }
    return acc;
}

// int_T^inf log(u)^l u^{-1-alpha} du  =  T^{-alpha} log(T)^l / alpha + (l/alpha) * (same with l-1)
double plain_tail(double alpha, int l, double T) {
    double acc = 0.0;
    for (int i = l; i >= 0; --i) {
        double perm = 1.0;  // l (l-1) ... (i+1)
        for (int k = l; k > i; --k) perm *= k;
        acc += perm * std::pow(std::log(T), i) / std::pow(alpha, l - i + 1);
    }
    return std::pow(T, -alpha) * acc;
}

double binom_real(double alpha, int m) {
    double b = 1.0;
    for (int i = 0; i < m; ++i) b *= (alpha - i) / (i + 1);
    return b;
}

double binom_int(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "alpha=%.17g outside (0,2)", alpha);
        throw std::domain_error(buf);
    }
}

// Inner integral over t of psi(t) * g(t - s), kinks passed explicitly.
double psi_weighted_inner(const MotherWavelet& psi, const std::function<double(double)>& g,
                          double kink, const QuadratureSettings& inner_settings) {
    std::vector<double> cuts = psi.breakpoints();
    if (kink > 0.0 && kink < 1.0) cuts.push_back(kink);
    return integrate_gk_split([&](double t) { return psi(t) * g(t); }, 0.0, 1.0, cuts,
                              inner_settings);
}

// \int\int psi(t) psi(s) kernel(t, s) dt ds with a per-s kink location.
double psi_psi_double_integral(const MotherWavelet& psi,
                               const std::function<double(double, double)>& kernel,
                               const std::function<double(double)>& kink_at,
                               const QuadratureSettings& settings) {
    QuadratureSettings inner = settings;
    inner.abs_tol = std::max(settings.abs_tol * 0.05, 1e-16);
    inner.rel_tol = std::max(settings.rel_tol * 0.05, 1e-14);
    return integrate_gk_split(
        [&](double s) {
            const double inner_val = psi_weighted_inner(
                psi, [&](double t) { return kernel(t, s); }, kink_at(s), inner);
            return psi(s) * inner_val;
        },
        0.0, 1.0, psi.breakpoints(), settings);
}

// |u + delta|^alpha with the first 2Q Taylor terms at u=0 removed; written as a
// tail series in u/delta so no cancellation occurs at large delta.
double shifted_power_remainder(double u, int delta, double alpha, int Q) {
    const double x = u / delta;
    const double scale = std::pow(static_cast<double>(delta), alpha);
    if (std::abs(x) <= 0.5) {
        double term = binom_real(alpha, 2 * Q) * std::pow(x, 2 * Q);
        double acc = term;
        double b = binom_real(alpha, 2 * Q);
        for (int m = 2 * Q + 1; m < 2 * Q + 400; ++m) {
            b *= (alpha - (m - 1)) / m;
            term = b * std::pow(x, m);
            acc += term;
            if (std::abs(term) <= 1e-19 * std::abs(acc) + 1e-300) break;
        }
        return scale * acc;
    }
    double poly = 0.0;
    for (int m = 0; m < 2 * Q; ++m) poly += binom_real(alpha, m) * std::pow(x, m);
    return scale * (std::pow(std::abs(1.0 + x), alpha) - poly);
}

}  // namespace

double c0_alpha_closed(double alpha) {
    require_alpha(alpha);
    return 2.0 * 3.14159265358979323846 /
           (std::tgamma(alpha + 1.0) * std::sin(1.5707963267948966 * alpha));
}

double c0_alpha(double alpha, const QuadratureSettings& settings) {
    require_alpha(alpha);
    settings.validate();
    const double d = kSeriesCut, T = settings.tail_cut;
    const double head = series_head(alpha, 0, d);
    const double mid = integrate_gk(
        [alpha](double u) { return 2.0 * (1.0 - std::cos(u)) * std::pow(u, -1.0 - alpha); }, d, T,
        settings);
    LogPoly F{{1.0}, -1.0 - alpha};
    const double tail = 2.0 * plain_tail(alpha, 0, T) - 2.0 * oscillatory_tail(F, T);
    return 2.0 * (head + mid + tail);
}

double cl_alpha(int l, int p, double alpha, const QuadratureSettings& settings) {
    require_alpha(alpha);
    if (l < 0 || p < l) throw std::domain_error("cl_alpha requires 0 <= l <= p");
    settings.validate();
    const double d = kSeriesCut, T = settings.tail_cut;
    const double head = series_head(alpha, l, d);
    const double mid = integrate_gk(
        [alpha, l](double u) {
            return 2.0 * (1.0 - std::cos(u)) * std::pow(std::log(u), l) * std::pow(u, -1.0 - alpha);
        },
        d, T, settings);
    std::vector<double> c(l + 1, 0.0);
    c[l] = 1.0;
    LogPoly F{c, -1.0 - alpha};
    const double tail = 2.0 * plain_tail(alpha, l, T) - 2.0 * oscillatory_tail(F, T);
    return binom_int(p, l) * 2.0 * (head + mid + tail);
}

double mbm_covariance(double s, double t, const HurstProfile& hurst,
                      const QuadratureSettings& settings) {
    if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0))
        throw std::domain_error("mbm_covariance arguments must lie in [0,1]");
    if (s == 0.0 || t == 0.0) return 0.0;
    const double a = hurst(s) + hurst(t);
    const double c0 = c0_alpha(a, settings);
    return 0.5 * c0 * (std::pow(s, a) + std::pow(t, a) - std::pow(std::abs(s - t), a));
}

double wavelet_cov_leading(int delta, double alpha, const MotherWavelet& psi,
                           const QuadratureSettings& settings) {
    require_alpha(alpha);
    if (delta < 0) throw std::domain_error("wavelet_cov_leading requires delta >= 0");
    const double c0 = c0_alpha(alpha, settings);
    const int Q = psi.Q();
    double integral;
    if (delta == 0) {
        integral = psi_psi_double_integral(
            psi, [alpha](double t, double s) { return std::pow(std::abs(t - s), alpha); },
            [](double s) { return s; }, settings);
    } else {
        QuadratureSettings scaled = settings;
        // the remainder kernel is of size delta^{alpha-2Q}; track it, not |u+delta|^alpha
        scaled.abs_tol = std::max(
            settings.abs_tol * std::pow(static_cast<double>(delta), alpha - 2 * Q), 1e-300);
        integral = psi_psi_double_integral(
            psi,
            [alpha, delta, Q](double t, double s) {
                return shifted_power_remainder(t - s, delta, alpha, Q);
            },
            [](double) { return -1.0; }, scaled);
    }
    return -0.5 * c0 * integral;
}

double c2_const(double t0, double rho, const HurstProfile& hurst, const ScaleFunction& theta,
                const MotherWavelet& psi, const QuadratureSettings& settings) {
    if (!(t0 > 0.0 && t0 < 1.0)) throw std::domain_error("c2_const requires t0 in (0,1)");
    if (!(rho > 0.0)) throw std::domain_error("c2_const requires rho > 0");
    const double alpha = 2.0 * hurst(t0);
    const double th = theta(t0);
    const double c0 = c0_alpha(alpha, settings);
    const double integral = psi_psi_double_integral(
        psi, [alpha, rho](double t, double s) { return std::pow(std::abs(t - rho * s), alpha); },
        [rho](double s) { return rho * s; }, settings);
    const double value = -th * th * 0.5 * c0 * integral;
    // Positivity is guaranteed at rho = 1 (the quantity is a variance); at other
    // ratios it is a covariance and its sign is unconstrained.
    if (rho == 1.0 && !(value > 0.0)) {
        char buf[120];
        std::snprintf(buf, sizeof buf,
                      "variance constant not positive (%.6g); wavelet inadmissible at alpha=%.6g",
                      value, alpha);
        throw NumericError(buf);
    }
    return value;
}

double c1_limit(double alpha, const MotherWavelet& psi, const QuadratureSettings& settings) {
    const int Q = psi.Q();
    // Richardson on lags {32, 64, 128}: the scaled integral behaves like
    // L + a/delta + b/delta^2 + ...
    const int lags[3] = {32, 64, 128};
    double f[3];
    for (int i = 0; i < 3; ++i) {
        f[i] = wavelet_cov_leading(lags[i], alpha, psi, settings) *
               std::pow(static_cast<double>(lags[i]), 2.0 * Q - alpha);
    }
    const double g1 = 2.0 * f[1] - f[0];
    const double g2 = 2.0 * f[2] - f[1];
    return (4.0 * g2 - g1) / 3.0;
}

ConstantsBundle constants_bundle(double t0, const ModelSpec& model, const MotherWavelet& psi,
                                 double c0_ratio, const QuadratureSettings& settings) {
    if (!(t0 > 0.0 && t0 < 1.0)) throw std::domain_error("constants_bundle requires t0 in (0,1)");
    if (!(c0_ratio > 0.0 && c0_ratio < 1.0))
        throw ConfigError("bandwidth ratio c0 must lie in (0,1)");
    const int Q = psi.Q();
    const double sup_h = model.hurst.tau2();
    if (!(Q >= 2 || (Q == 1 && sup_h < 0.75))) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "(A0) violated: requires Q >= 2, or Q = 1 with sup H < 3/4 (got Q=%d, sup H=%.6g)",
                      Q, sup_h);
        throw ConfigError(buf);
    }

    ConstantsBundle b;
    b.t0 = t0;
    b.Q = Q;
    b.c0_ratio = c0_ratio;
    const double h0 = model.hurst(t0);
    b.alpha = 2.0 * h0;
    b.C0 = c0_alpha(b.alpha, settings);

    // The unit-variance option rescales the hidden field pointwise, which acts
    // on the constants as an effective amplitude at t0.
    double th2 = model.scale(t0) * model.scale(t0);
    if (model.unit_variance) th2 *= 2.0 / b.C0;

    {
        // c2_const carries theta^2; rebuild with the effective amplitude.
        ScaleFunction eff = ScaleFunction::constant(std::sqrt(th2));
        b.c2 = c2_const(t0, 1.0, model.hurst, eff, psi, settings);
        b.C2_half = c2_const(t0, 0.5, model.hurst, eff, psi, settings);
    }
    const double c1lim = c1_limit(b.alpha, psi, settings);
    b.c1 = c1lim * th2;

    // lag_series = sum_{l != 0} |l|^{4H - 4Q}, truncated with a midpoint
    // integral bound for the tail; summed ascending for accuracy.
    const double p = 4.0 * Q - 2.0 * b.alpha;
    if (!(p > 1.0)) throw NumericError("lag series exponent must exceed 1");
    {
        const long L = 100000;
        double s = 0.0;
        for (long l = L; l >= 1; --l) s += std::pow(static_cast<double>(l), -p);
        const double tail = std::pow(L + 0.5, 1.0 - p) / (p - 1.0);
        b.lag_series = 2.0 * (s + tail);
    }

    b.c3 = 4.0 * (b.c2 * b.c2 + b.c1 * b.c1 * b.lag_series);

    const double s2 = b.lag_series - 2.0;  // sum over |l| >= 2
    const double two_c0 = 2.0 * c0_ratio;
    b.c4 = std::sqrt(two_c0) *
           (b.C2_half * b.C2_half * std::exp2(b.alpha + 1.0) + 2.0 * b.c1 * b.c1 +
            std::exp2(2.0 * Q - b.alpha + 1.0) * c1lim * c1lim * th2 * th2 * s2) /
           (b.c2 * b.c2);

    // Asymptotic estimator variance. The normalized quadratic functional has
    // limiting variance c3 / (2 c2^2): Var V = c3 2^{-j(4H+1)} eps and
    // E V = 2 c2 2^{-2jH} eps give card * Var V / (E V)^2 -> c3 / (2 c2^2).
    const double sigma11 = b.c3 / (2.0 * b.c2 * b.c2);
    b.ctilde = ((1.0 / two_c0 + 1.0) * sigma11 - 2.0 / std::sqrt(two_c0) * b.c4) / kTwoLog2Sq;

    if (!(b.C0 > 0.0) || !(b.c3 > 0.0) || !(b.lag_series > 0.0) || !(b.ctilde > 0.0))
        throw NumericError("constants bundle failed positivity checks");
    return b;
}

std::string ConstantsBundle::to_json() const {
    nlohmann::ordered_json j;
    char buf[32];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        j[key] = nlohmann::json::parse(buf);
    };
    put("t0", t0);
    put("alpha", alpha);
    put("C0", C0);
    put("c1", c1);
    put("c2", c2);
    put("C2_half", C2_half);
    put("c3", c3);
    put("c4", c4);
    put("c0_ratio", c0_ratio);
    put("ctilde", ctilde);
    j["Q"] = Q;
    put("lag_series", lag_series);
    return j.dump(2);
}

ConstantsBundle ConstantsBundle::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ConstantsBundle b;
    b.t0 = j.at("t0");
    b.alpha = j.at("alpha");
    b.C0 = j.at("C0");
    b.c1 = j.at("c1");
    b.c2 = j.at("c2");
    b.C2_half = j.at("C2_half");
    b.c3 = j.at("c3");
    b.c4 = j.at("c4");
    b.c0_ratio = j.at("c0_ratio");
    b.ctilde = j.at("ctilde");
    b.Q = j.at("Q");
    b.lag_series = j.at("lag_series");
    return b;
}

std::uint64_t ConstantsBundle::digest() const { return fnv1a(to_json()); }

std::uint64_t bundle_cache_key(double t0, const ModelSpec& model, const MotherWavelet& psi,
                               double c0_ratio, const QuadratureSettings& settings) {
    std::uint64_t d = model.digest();
    d = hash_combine(d, psi.digest());
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof t0);
    std::memcpy(&bits, &t0, sizeof bits);
    d = hash_combine(d, bits);
    std::memcpy(&bits, &c0_ratio, sizeof bits);
    d = hash_combine(d, bits);
    std::memcpy(&bits, &settings.rel_tol, sizeof bits);
    d = hash_combine(d, bits);
    std::memcpy(&bits, &settings.abs_tol, sizeof bits);
    d = hash_combine(d, bits);
    std::memcpy(&bits, &settings.tail_cut, sizeof bits);
    d = hash_combine(d, bits);
    return d;
}

}  // namespace mbh
