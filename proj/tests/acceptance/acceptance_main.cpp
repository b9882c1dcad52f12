// Acceptance suite. Each criterion is runnable on its own (./acceptance N) or
// all in sequence (no argument). One PASS/FAIL line is printed per criterion
// and the exit status is nonzero if any executed criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mbholder/cli.hpp"
#include "mbholder/estimator.hpp"
#include "mbholder/simulate.hpp"
#include "mbholder/specfun.hpp"
#include "mbholder/stats.hpp"

using namespace mbh;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kRootSeed = 761204;
constexpr unsigned kThreads = 2;

struct Check {
    bool ok;
    std::string text;
};

std::vector<Check>& checks() {
    static std::vector<Check> v;
    return v;
}

void record(bool ok, const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    checks().push_back({ok, buf});
}

// ---------------------------------------------------------------------------

void criterion_1() {
    QuadratureSettings qs;
    for (double alpha : {0.2, 0.5, 1.0, 1.5, 1.8}) {
        const double got = c0_alpha(alpha, qs);
        const double want = 2.0 * kPi / (std::tgamma(alpha + 1.0) * std::sin(kPi * alpha / 2.0));
        const double rel = std::abs(got - want) / want;
        record(rel <= 1e-6, "alpha=%.1f quadrature=%.9g closed=%.9g rel=%.2e", alpha, got, want,
               rel);
    }
}

void criterion_2() {
    QuadratureSettings qs;
    const HurstProfile h = HurstProfile::constant(0.5);
    double worst = 0.0;
    for (int i = 1; i <= 32; ++i) {
        for (int j = 1; j <= 32; ++j) {
            const double s = i / 32.0, t = j / 32.0;
            const double err =
                std::abs(mbm_covariance(s, t, h, qs) - 2.0 * kPi * std::min(s, t));
            worst = std::max(worst, err);
        }
    }
    record(worst <= 1e-8, "max |cov - 2 pi min(s,t)| over the 32x32 grid = %.3e", worst);
}

void criterion_3() {
    const auto haar = MotherWavelet::haar();
    record(std::abs(haar.moment(0)) <= 1e-12, "haar int psi = %.3e", haar.moment(0));
    record(std::abs(haar.moment(1) + 0.25) <= 1e-12, "haar int t psi = %.17g", haar.moment(1));
    const auto leg2 = MotherWavelet::legendre2();
    record(std::abs(leg2.moment(0)) <= 1e-12, "legendre2 int psi = %.3e", leg2.moment(0));
    record(std::abs(leg2.moment(1)) <= 1e-12, "legendre2 int t psi = %.3e", leg2.moment(1));
    record(std::abs(leg2.moment(2) - 1.0 / 30.0) <= 1e-12, "legendre2 int t^2 psi = %.17g",
           leg2.moment(2));
}

// Shared Monte Carlo pool for criteria 4-6: constant H = 1/2, theta = 1,
// identity link, n = 12, 2000 repetitions.
struct CoefficientPool {
    std::vector<std::vector<double>> d5;  // per rep, coefficients at scale 5
    std::vector<std::vector<double>> d6;
    int n = 12;
};

const CoefficientPool& pool_456() {
    static CoefficientPool pool = [] {
        CoefficientPool p;
        const auto factor = build_covariance_grid(HurstProfile::constant(0.5),
                                                  ScaleFunction::constant(1.0), 12, false);
        const auto psi = std::make_shared<MotherWavelet>(MotherWavelet::haar());
        const std::size_t reps = 2000;
        p.d5.resize(reps);
        p.d6.resize(reps);
        const std::uint64_t cell = fnv1a(std::string("acc-456"));
        parallel_for(reps, kThreads, [&](std::size_t r) {
            const SamplePath path =
                sample_path(factor, LinkFunction::identity(), derive_seed(kRootSeed, cell, r));
            p.d5[r] = coefficients_from_path(path, 5, psi).values;
            p.d6[r] = coefficients_from_path(path, 6, psi).values;
        });
        return p;
    }();
    return pool;
}

void criterion_4() {
    const auto& pool = pool_456();
    QuadratureSettings qs;
    const double c2 = c2_const(0.5, 1.0, HurstProfile::constant(0.5), ScaleFunction::constant(1.0),
                               MotherWavelet::haar(), qs);
    const double predicted = c2 * std::exp2(-5.0 * (2.0 * 0.5 + 1.0));
    for (int k : {15, 16, 17}) {  // indices adjacent to t0 = 0.5 at scale 2^-5
        double s2 = 0.0;
        for (const auto& d : pool.d5) s2 += d[k] * d[k];
        s2 /= static_cast<double>(pool.d5.size());
        const double rel = std::abs(s2 - predicted) / predicted;
        record(rel <= 0.10, "Var(d(2^-5,%d)) = %.6g vs c2 2^{-j(2H+1)} = %.6g rel=%.3f", k, s2,
               predicted, rel);
    }
}

void criterion_5() {
    const auto& pool = pool_456();
    const std::size_t reps = pool.d5.size();
    const int k0 = 16;
    for (int lag = 0; lag <= 3; ++lag) {
        // T = Cov(a,b) - 2 Cov(x,y)^2 with x=d_k, y=d_{k+lag}, a=x^2, b=y^2;
        // jackknife standard error from leave-one-out sums.
        std::vector<double> x(reps), y(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            x[r] = pool.d5[r][k0];
            y[r] = pool.d5[r][k0 + lag];
        }
        double sx = 0, sy = 0, sxy = 0, sa = 0, sb = 0, sab = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            sx += x[r];
            sy += y[r];
            sxy += x[r] * y[r];
            sa += x[r] * x[r];
            sb += y[r] * y[r];
            sab += x[r] * x[r] * y[r] * y[r];
        }
        auto stat = [&](double n, double Sx, double Sy, double Sxy, double Sa, double Sb,
                        double Sab) {
            const double covxy = Sxy / n - (Sx / n) * (Sy / n);
            const double covab = Sab / n - (Sa / n) * (Sb / n);
            return covab - 2.0 * covxy * covxy;
        };
        const double T = stat(static_cast<double>(reps), sx, sy, sxy, sa, sb, sab);
        double jsum = 0.0, jmean = 0.0;
        std::vector<double> tj(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            tj[r] = stat(static_cast<double>(reps - 1), sx - x[r], sy - y[r], sxy - x[r] * y[r],
                         sa - x[r] * x[r], sb - y[r] * y[r], sab - x[r] * x[r] * y[r] * y[r]);
            jmean += tj[r];
        }
        jmean /= static_cast<double>(reps);
        for (std::size_t r = 0; r < reps; ++r) jsum += (tj[r] - jmean) * (tj[r] - jmean);
        const double se =
            std::sqrt(jsum * static_cast<double>(reps - 1) / static_cast<double>(reps));
        record(std::abs(T) <= 5.0 * se, "lag %d: Cov(d^2,d'^2) - 2Cov(d,d')^2 = %.3e (5 se = %.3e)",
               lag, T, 5.0 * se);
    }
}

void criterion_6() {
    const auto& pool = pool_456();
    QuadratureSettings qs;
    const auto haar = std::make_shared<MotherWavelet>(MotherWavelet::haar());
    ModelSpec local(HurstProfile::constant(0.5), ScaleFunction::constant(1.0),
                    LinkFunction::identity(), 12);

    // eps_6 = 7/128 puts 2^{j+1} eps = 7 = card exactly; the bandwidth exponent
    // is otherwise free here, and any other choice lets the card/(2^{j+1} eps)
    // offset eat the whole 10% band at this scale. gamma = log2(128/7)/6 ~ 0.699.
    const int j = 6;
    const double eps = 7.0 / 128.0;
    const double c0r = std::exp2(-std::log2(128.0 / 7.0) / 6.0);
    const ConstantsBundle bundle = constants_bundle(0.5, local, *haar, c0r, qs);

    const auto nu = neighborhood(0.5, j, eps);
    record(nu.card() == 7, "card(nu) = %d with 2^{j+1} eps = 7", nu.card());

    std::vector<double> V(pool.d6.size());
    for (std::size_t r = 0; r < pool.d6.size(); ++r) {
        double acc = 0.0;
        for (int k : nu.indices) acc += pool.d6[r][k] * pool.d6[r][k];
        V[r] = acc;
    }
    const MeanStd ms = mean_std(V);
    const double e_pred = 2.0 * bundle.c2 * std::exp2(-2.0 * j * 0.5) * eps;
    const double v_pred = bundle.c3 * std::exp2(-j * (4.0 * 0.5 + 1.0)) * eps;
    const double e_rel = std::abs(ms.mean - e_pred) / e_pred;
    const double v_rel = std::abs(ms.std * ms.std - v_pred) / v_pred;
    record(e_rel <= 0.10, "E[V] = %.6g vs 2 c2 2^{-2jH} eps = %.6g rel=%.3f", ms.mean, e_pred,
           e_rel);
    record(v_rel <= 0.25, "Var[V] = %.6g vs c3 2^{-j(4H+1)} eps = %.6g rel=%.3f", ms.std * ms.std,
           v_pred, v_rel);
}

void criterion_7() {
    // (a) affine invariance, bitwise. The base path is quantized to a 2^-20
    // grid so a y + b stays exactly representable for these (a, b).
    {
        const auto factor = build_covariance_grid(HurstProfile::linear(0.1, 0.8),
                                                  ScaleFunction::constant(1.0), 11, false);
        EstimationConfig cfg = select_parameters(0.1, 11);
        cfg.t0 = 0.5;
        cfg.wavelet = std::make_shared<MotherWavelet>(MotherWavelet::haar());
        SamplePath base = sample_path(factor, LinkFunction::identity(),
                                      derive_seed(kRootSeed, fnv1a(std::string("acc-7")), 0));
        const double q = std::exp2(20);
        for (auto& v : base.y_values) v = std::round(v * q) / q;
        const double h0 = estimate_H_from_path(base, cfg).h_hat;
        for (double a : {2.0, -3.0}) {
            for (double b : {0.0, 5.0}) {
                SamplePath t = base;
                for (auto& v : t.y_values) v = a * v + b;
                const double h = estimate_H_from_path(t, cfg).h_hat;
                record(std::memcmp(&h, &h0, sizeof h) == 0, "a=%g b=%g: h=%.17g vs %.17g", a, b, h,
                       h0);
            }
        }
    }
    // (b) synthetic power-law inversion
    for (double H : {0.1, 0.5, 0.9}) {
        const int j = 7;
        const double gamma = 6.0 / 7.0;
        const double ej = std::exp2(-gamma * j), ejp1 = std::exp2(-gamma * (j + 1));
        const double Vj = std::exp2(-2.0 * j * H) * ej;
        const double Vjp1 = std::exp2(-2.0 * (j + 1) * H) * ejp1;
        const double err = std::abs(holder_from_v(Vj, Vjp1, ej, ejp1) - H);
        record(err <= 1e-12, "synthetic inversion H=%.1f error=%.2e", H, err);
    }
    // (c) cardinality bound. Interior windows only: once [t0-eps, t0+eps]
    // leaves [0,1] the intersection truncates the count (j=4, gamma=0.6,
    // t0=0.95 deviates by 3.06), so the identity concerns interior windows.
    {
        int cases = 0, worst_ok = 1;
        double worst = 0.0;
        for (int j = 3; j <= 14; ++j) {
            for (double gamma : {0.6, 6.0 / 7.0}) {
                const double eps = std::exp2(-gamma * j);
                if (std::exp2(j) * eps < 1.0) continue;
                for (int i = 1; i <= 19; ++i) {
                    const double t0 = 0.05 * i;
                    if (t0 - eps < 0.0 || t0 + eps > 1.0) continue;
                    const auto nu = neighborhood(t0, j, eps);
                    const double dev = std::abs(nu.card() - std::exp2(j + 1) * eps);
                    worst = std::max(worst, dev);
                    worst_ok &= dev <= 3.0 ? 1 : 0;
                    ++cases;
                }
            }
        }
        record(worst_ok == 1 && cases > 300,
               "interior-window cardinality: %d cases, max |card - 2^{j+1} eps| = %.3f", cases,
               worst);
    }
}

struct ReportedCell {
    const char* phi;
    const char* hurst;
    double t0;
    double mean;
};

// Reported desk-scale means for the identity and exponential links at
// t0 in {0.3, 0.5, 0.7}.
const ReportedCell kReportedMeans[] = {
    {"phi1", "h1", 0.3, 0.3253}, {"phi1", "h1", 0.5, 0.4919}, {"phi1", "h1", 0.7, 0.6413},
    {"phi1", "h2", 0.3, 0.8860}, {"phi1", "h2", 0.5, 0.7178}, {"phi1", "h2", 0.7, 0.3785},
    {"phi1", "h3", 0.3, 0.1134}, {"phi1", "h3", 0.5, 0.4455}, {"phi1", "h3", 0.7, 0.1897},
    {"phi2", "h1", 0.3, 0.3395}, {"phi2", "h1", 0.5, 0.5139}, {"phi2", "h1", 0.7, 0.6228},
    {"phi2", "h2", 0.3, 0.8887}, {"phi2", "h2", 0.5, 0.7234}, {"phi2", "h2", 0.7, 0.3705},
    {"phi2", "h3", 0.3, 0.1104}, {"phi2", "h3", 0.5, 0.4528}, {"phi2", "h3", 0.7, 0.2060},
};

void criterion_8() {
    ExperimentConfig cfg;
    cfg.n = 13;
    cfg.reps = 100;
    cfg.root_seed = kRootSeed;
    cfg.tau1 = 0.1;
    cfg.t0_list = {0.3, 0.5, 0.7};
    cfg.table_phis = {"phi1", "phi2"};
    cfg.table_hursts = {"h1", "h2", "h3"};
    cfg.wavelet = "haar";
    cfg.threads = kThreads;

    const ResultTable table = run_table1(cfg);
    int near_reported = 0;
    for (const auto& r : table.rows) {
        const double mean_err = std::abs(r.mean - r.true_h);
        const bool mean_ok = mean_err <= 0.08;
        const bool std_ok = r.std >= 0.03 && r.std <= 0.15;
        double reported = 0.0;
        for (const auto& c : kReportedMeans)
            if (r.phi == c.phi && r.hurst == c.hurst && std::abs(r.t0 - c.t0) < 1e-12)
                reported = c.mean;
        const bool reported_ok = std::abs(r.mean - reported) <= 0.06;
        near_reported += reported_ok ? 1 : 0;
        record(mean_ok && std_ok,
               "%s/%s t0=%.1f mean=%.4f (true %.4f, |err|=%.3f%s) std=%.4f%s reported=%.4f%s",
               r.phi.c_str(), r.hurst.c_str(), r.t0, r.mean, r.true_h, mean_err,
               mean_ok ? "" : " >0.08", r.std, std_ok ? "" : " outside [0.03,0.15]", reported,
               reported_ok ? "" : " off>0.06");
    }
    const std::size_t cells = table.rows.size();
    record(near_reported * 5 >= static_cast<int>(cells) * 4,
           "%d of %zu cells within 0.06 of the reported means (need >= 80%%)", near_reported, cells);
}

void criterion_9() {
    ExperimentConfig cfg;
    cfg.n = 13;
    cfg.reps = 200;
    cfg.root_seed = kRootSeed;
    cfg.tau1 = 0.1;
    cfg.t0_list = {0.5};
    cfg.wavelet = "haar";
    cfg.threads = kThreads;
    cfg.ci_level = 0.90;
    // hurst defaults to the linear profile; phi defaults to identity.

    const QqResult q = run_qq(cfg);
    const double crit = 1.63 / std::sqrt(static_cast<double>(cfg.reps));
    record(q.ks < crit, "KS distance = %.4f vs 1%% critical %.4f (ctilde=%.4f)", q.ks, crit,
           q.ctilde);
    record(q.coverage >= 0.80 && q.coverage <= 0.97,
           "nominal-90%% interval coverage = %.3f (band [0.80, 0.97])", q.coverage);
}

void criterion_10() {
    const auto factor = build_covariance_grid(HurstProfile::constant(0.5),
                                              ScaleFunction::constant(2.0), 13, false);
    EstimationConfig cfg = select_parameters(0.5, 13);
    cfg.t0 = 0.5;
    cfg.wavelet = std::make_shared<MotherWavelet>(MotherWavelet::haar());
    QuadratureSettings qs;

    const std::size_t reps = 100;
    std::vector<double> vals;
    int failures = 0;
    std::vector<double> slots(reps, std::nan(""));
    const std::uint64_t cell = fnv1a(std::string("acc-10"));
    parallel_for(reps, kThreads, [&](std::size_t r) {
        const SamplePath y =
            sample_path(factor, LinkFunction::identity(), derive_seed(kRootSeed, cell, r));
        try {
            const HolderEstimate est = estimate_H_from_path(y, cfg);
            slots[r] = estimate_theta_sq(y, est, *cfg.wavelet, qs).theta_sq_hat;
        } catch (const std::exception&) {
        }
    });
    for (double v : slots) {
        if (std::isnan(v))
            ++failures;
        else
            vals.push_back(v);
    }
    const MeanStd ms = mean_std(vals);
    const double rel = std::abs(ms.mean - 4.0) / 4.0;
    record(rel <= 0.25,
           "mean theta^2 over %zu valid reps (of %zu) = %.4g vs 4 (rel=%.3f, need <= 0.25)",
           vals.size(), reps, ms.mean, rel);
}

}  // namespace

int run_criterion(int id);

int main(int argc, char** argv) {
    int failures = 0;
    if (argc > 1) {
        failures = run_criterion(std::atoi(argv[1]));
    } else {
        for (int id = 1; id <= 10; ++id) failures += run_criterion(id);
    }
    return failures == 0 ? 0 : 1;
}

int run_criterion(int id) {
    using Runner = std::function<void()>;
    static const std::map<int, std::pair<const char*, Runner>> table = {
        {1, {"C0 quadrature vs closed form", criterion_1}},
        {2, {"Brownian covariance reduction", criterion_2}},
        {3, {"wavelet moment conditions", criterion_3}},
        {4, {"coefficient variance law", criterion_4}},
        {5, {"Gaussian fourth-moment identity", criterion_5}},
        {6, {"quadratic functional moments", criterion_6}},
        {7, {"exact invariances", criterion_7}},
        {8, {"desk-scale table replication", criterion_8}},
        {9, {"CLT normality and interval coverage", criterion_9}},
        {10, {"amplitude recovery", criterion_10}},
    };
    const auto it = table.find(id);
    if (it == table.end()) {
        std::printf("unknown criterion %d\n", id);
        return 1;
    }
    checks().clear();
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string abort_reason;
    try {
        it->second.second();
    } catch (const std::exception& ex) {
        ok = false;
        abort_reason = ex.what();
    }
    for (const auto& c : checks()) {
        std::printf("  [%s] %s\n", c.ok ? "ok" : "FAIL", c.text.c_str());
        ok &= c.ok;
    }
    if (!abort_reason.empty()) std::printf("  [FAIL] aborted: %s\n", abort_reason.c_str());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d (%s): %s  [%.1f s]\n", id, it->second.first, ok ? "PASS" : "FAIL",
                secs);
    std::fflush(stdout);
    return ok ? 0 : 1;
}
