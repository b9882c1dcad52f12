#include <cmath>
#include <cstring>

#include "doctest.h"
#include "mbholder/model.hpp"

using namespace mbh;

namespace {
const HurstProfile kH1 = HurstProfile::linear(0.1, 0.8);
const HurstProfile kH2 = HurstProfile::sinusoidal(0.5, 0.4, 5.0);
const HurstProfile kH3 = HurstProfile::damped_sine(0.1, 0.8, 10.0);
}  // namespace

TEST_CASE("built-in profiles evaluate exactly") {
    CHECK(eval_hurst(kH1, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(eval_hurst(kH2, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    const double s3 = std::sin(3.0);
    CHECK(eval_hurst(kH3, 0.3) == doctest::Approx(0.1 + 0.8 * 0.7 * s3 * s3).epsilon(1e-15));
    CHECK(eval_hurst(kH3, 0.3) == doctest::Approx(0.111152).epsilon(1e-4));
}

TEST_CASE("evaluation is pure") {
    const double a = kH2(0.377), b = kH2(0.377);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("domain errors outside [0,1]") {
    CHECK_THROWS_AS(eval_hurst(kH1, -0.01), std::domain_error);
    CHECK_THROWS_AS(eval_hurst(kH1, 1.5), std::domain_error);
}

TEST_CASE("tau bounds match grid extrema") {
    CHECK(kH1.tau1() == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(kH1.tau2() == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(kH2.tau1() == doctest::Approx(0.1).epsilon(1e-6));   // sin attains -1 inside [0,1]
    CHECK(kH2.tau2() == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(kH3.tau1() == doctest::Approx(0.1).epsilon(1e-4));
}

TEST_CASE("validation passes the reference model") {
    ModelSpec spec(kH1, ScaleFunction::constant(1.0), LinkFunction::identity(), 10);
    CHECK(validate_model(spec).empty());
}

TEST_CASE("H touching zero is flagged") {
    ModelSpec spec(HurstProfile::linear(0.0, 1.0), ScaleFunction::constant(1.0),
                   LinkFunction::identity(), 10);
    const auto violations = validate_model(spec);
    bool tau_violation = false;
    for (const auto& v : violations) tau_violation |= v.find("tau1") != std::string::npos;
    CHECK(tau_violation);
}

TEST_CASE("theta grid zero is flagged but not fatal") {
    ModelSpec spec(kH1, ScaleFunction::expression("t - 0.5"), LinkFunction::identity(), 10);
    const auto violations = validate_model(spec);
    bool theta_flag = false;
    for (const auto& v : violations) theta_flag |= v.find("theta vanishes") != std::string::npos;
    CHECK(theta_flag);
}

TEST_CASE("expression scale parses and evaluates") {
    const auto f = ScaleFunction::expression("1 + 0.5*sin(3*t)");
    CHECK(f(0.0) == doctest::Approx(1.0));
    CHECK(f(0.5) == doctest::Approx(1.0 + 0.5 * std::sin(1.5)).epsilon(1e-15));
    CHECK_THROWS_AS(ScaleFunction::expression("bogus(t)"), ConfigError);
}

TEST_CASE("links evaluate to their formulas") {
    CHECK(LinkFunction::identity()(1.7) == 1.7);
    CHECK(LinkFunction::exp_link()(0.3) == doctest::Approx(std::exp(0.3)));
    CHECK(LinkFunction::sin4x()(0.2) == doctest::Approx(std::sin(0.8)));
    CHECK(LinkFunction::x_sin2_4x()(0.2) ==
          doctest::Approx(0.2 * std::sin(0.8) * std::sin(0.8)));
}

TEST_CASE("tabulated profile requires explicit bounds and is flagged") {
    auto tab = HurstProfile::tabulated({0.0, 0.5, 1.0}, {0.3, 0.5, 0.4}, 0.3, 0.5);
    CHECK(tab(0.5) == doctest::Approx(0.5));
    ModelSpec spec(tab, ScaleFunction::constant(1.0), LinkFunction::identity(), 10);
    const auto violations = validate_model(spec);
    bool interp_flag = false;
    for (const auto& v : violations) interp_flag |= v.find("C1 interpolated") != std::string::npos;
    CHECK(interp_flag);
}

TEST_CASE("model digest responds to every component") {
    ModelSpec a(kH1, ScaleFunction::constant(1.0), LinkFunction::identity(), 10);
    ModelSpec b(kH1, ScaleFunction::constant(2.0), LinkFunction::identity(), 10);
    ModelSpec c(kH1, ScaleFunction::constant(1.0), LinkFunction::exp_link(), 10);
    ModelSpec d(kH1, ScaleFunction::constant(1.0), LinkFunction::identity(), 11);
    CHECK(a.digest() != b.digest());
    CHECK(a.digest() != c.digest());
    CHECK(a.digest() != d.digest());
}
