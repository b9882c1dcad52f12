// Monte Carlo properties that exercise the whole pipeline; heavier than the
// unit cases but still minutes, not hours.

#include <cmath>

#include "doctest.h"
#include "mbholder/estimator.hpp"
#include "mbholder/simulate.hpp"
#include "mbholder/specfun.hpp"
#include "mbholder/stats.hpp"

using namespace mbh;

namespace {

std::shared_ptr<const MotherWavelet> haar_ptr() {
    static auto w = std::make_shared<MotherWavelet>(MotherWavelet::haar());
    return w;
}

}  // namespace

TEST_CASE("same-scale covariance decay follows the lag constant") {
    // constant H = 0.7 keeps the lag constant away from zero (it vanishes at
    // H = 1/2 where coefficients over disjoint supports are independent)
    const double H = 0.7;
    const int n = 12, j = 5, reps = 2000;
    const auto factor =
        build_covariance_grid(HurstProfile::constant(H), ScaleFunction::constant(1.0), n, false);
    QuadratureSettings qs;
    const double c1 = c1_limit(2.0 * H, *haar_ptr(), qs);

    const int k0 = 16;
    std::vector<std::vector<double>> d(reps);
    for (int r = 0; r < reps; ++r) {
        const auto p = sample_path(factor, LinkFunction::identity(),
                                   derive_seed(555, fnv1a(std::string("lagcov")), r));
        d[r] = coefficients_from_path(p, j, haar_ptr()).values;
    }
    for (int lag = 2; lag <= 4; ++lag) {
        double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
        for (int r = 0; r < reps; ++r) {
            const double x = d[r][k0], y = d[r][k0 + lag];
            sx += x;
            sy += y;
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        const double mx = sx / reps, my = sy / reps;
        const double cov = sxy / reps - mx * my;
        const double vx = sxx / reps - mx * mx, vy = syy / reps - my * my;
        const double se = std::sqrt((vx * vy + cov * cov) / reps);
        const double lead =
            c1 * std::exp2(-j * (1.0 + 2.0 * H)) / std::pow(static_cast<double>(lag), 2.0 - 2.0 * H);
        CHECK(std::abs(cov - lead) <= 5.0 * se);
    }
}

TEST_CASE("coefficient-set estimation is unbiased on rough constant-H data") {
    // H = 0.7, Q = 2 wavelet, scales (7, 8) from an n = 12 path
    const double H = 0.7;
    const int n = 12, j = 7, reps = 100;
    const auto factor =
        build_covariance_grid(HurstProfile::constant(H), ScaleFunction::constant(1.0), n, false);
    const auto leg2 = std::make_shared<MotherWavelet>(MotherWavelet::legendre2());
    EstimationConfig cfg = select_parameters(H, n);
    cfg.wavelet = leg2;

    std::vector<double> hs;
    for (int r = 0; r < reps; ++r) {
        const auto p = sample_path(factor, LinkFunction::identity(),
                                   derive_seed(2222, fnv1a(std::string("coeffest")), r));
        const auto cj = coefficients_from_path(p, j, leg2);
        const auto cjp1 = coefficients_from_path(p, j + 1, leg2);
        hs.push_back(estimate_H_from_coeffs(cj, cjp1, 0.5, cfg).h_hat);
    }
    const auto ms = mean_std(hs);
    CHECK(std::abs(ms.mean - H) <= 0.08);
}

TEST_CASE("finer resolutions do not lose precision (paired seeds)") {
    const int reps = 100;
    std::vector<double> h10, h13;
    for (int n : {10, 13}) {
        const auto factor = build_covariance_grid(HurstProfile::linear(0.1, 0.8),
                                                  ScaleFunction::constant(1.0), n, false);
        EstimationConfig cfg = select_parameters(0.1, n);
        cfg.t0 = 0.5;
        cfg.wavelet = haar_ptr();
        auto& out = (n == 10) ? h10 : h13;
        for (int r = 0; r < reps; ++r) {
            const auto p = sample_path(factor, LinkFunction::identity(),
                                       derive_seed(777, fnv1a(std::string("paired")), r));
            out.push_back(estimate_H_from_path(p, cfg).h_hat);
        }
    }
    CHECK(mean_std(h13).std <= mean_std(h10).std);
}

TEST_CASE("constant exponent gives a flat profile of means") {
    const int n = 13, reps = 50;
    const auto factor =
        build_covariance_grid(HurstProfile::constant(0.5), ScaleFunction::constant(1.0), n, false);
    EstimationConfig cfg = select_parameters(0.5, n);
    cfg.t0 = 0.5;
    cfg.wavelet = haar_ptr();
    std::vector<double> grid;
    for (int i = 4; i <= 16; ++i) grid.push_back(0.05 * i);  // 0.2 .. 0.8

    std::vector<double> mean(grid.size(), 0.0);
    for (int r = 0; r < reps; ++r) {
        const auto p = sample_path(factor, LinkFunction::identity(),
                                   derive_seed(888, fnv1a(std::string("flat")), r));
        const auto prof = holder_profile(p, grid, cfg);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            REQUIRE(prof[i].ok);
            mean[i] += prof[i].estimate.h_hat;
        }
    }
    for (auto& m : mean) m /= reps;
    double mu = 0.0;
    for (double m : mean) mu += m;
    mu /= static_cast<double>(mean.size());
    double var = 0.0;
    for (double m : mean) var += (m - mu) * (m - mu);
    var /= static_cast<double>(mean.size());
    CHECK(var < 0.02);
}

TEST_CASE("profile means track a linear exponent ramp") {
    const int n = 13, reps = 100;
    const auto factor = build_covariance_grid(HurstProfile::linear(0.1, 0.8),
                                              ScaleFunction::constant(1.0), n, false);
    EstimationConfig cfg = select_parameters(0.1, n);
    cfg.t0 = 0.5;
    cfg.wavelet = haar_ptr();
    std::vector<double> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back(0.1 * i);

    std::vector<double> mean(grid.size(), 0.0);
    for (int r = 0; r < reps; ++r) {
        const auto p = sample_path(factor, LinkFunction::identity(),
                                   derive_seed(999, fnv1a(std::string("ramp")), r));
        const auto prof = holder_profile(p, grid, cfg);
        for (std::size_t i = 0; i < grid.size(); ++i) mean[i] += prof[i].estimate.h_hat;
    }
    for (auto& m : mean) m /= reps;

    double st = 0, sm = 0, stt = 0, stm = 0;
    const double m = static_cast<double>(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        st += grid[i];
        sm += mean[i];
        stt += grid[i] * grid[i];
        stm += grid[i] * mean[i];
    }
    const double slope = (m * stm - st * sm) / (m * stt - st * st);
    CHECK(slope == doctest::Approx(0.8).epsilon(0.25));
}
