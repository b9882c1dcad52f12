#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mbholder/common.hpp"

namespace mbh {

// Time-varying regularity profile H(.) on [0,1].
class HurstProfile {
public:
    enum class Kind { Constant, Linear, Sinusoidal, DampedSine, Tabulated };

    // Built-ins (params meaning):
    //   Constant   {h}              H(t) = h
    //   Linear     {a,b}            H(t) = a + b t
    //   Sinusoidal {a,b,w}          H(t) = a + b sin(w t)
    //   DampedSine {a,b,w}          H(t) = a + b (1-t) sin^2(w t)
    // Tabulated takes knots/values on [0,1] plus known bounds tau1, tau2.
    static HurstProfile constant(double h);
    static HurstProfile linear(double a, double b);
    static HurstProfile sinusoidal(double a, double b, double w);
    static HurstProfile damped_sine(double a, double b, double w);
    static HurstProfile tabulated(std::vector<double> knots, std::vector<double> values,
                                  double tau1, double tau2);

    double operator()(double t) const;  // throws std::domain_error outside [0,1]

    Kind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }
    double tau1() const { return tau1_; }
    double tau2() const { return tau2_; }
    bool interpolated() const { return kind_ == Kind::Tabulated; }

    std::string describe() const;
    std::uint64_t digest() const;

private:
    HurstProfile() = default;
    double eval_raw(double t) const;
    void compute_bounds_on_grid();

    Kind kind_ = Kind::Constant;
    std::vector<double> params_;
    std::vector<double> knots_, values_, slopes_;  // tabulated: C1 Hermite data
    double tau1_ = 0.0, tau2_ = 0.0;
};

double eval_hurst(const HurstProfile& profile, double t);

// Deterministic amplitude theta(.) on [0,1].
class ScaleFunction {
public:
    enum class Kind { Constant, Tabulated, Expression };

    static ScaleFunction constant(double value);
    static ScaleFunction tabulated(std::vector<double> knots, std::vector<double> values);
    // Tiny expression grammar over t: numbers, + - * / ^, parentheses,
    // sin cos exp sqrt abs. Example: "1 + 0.5*sin(3*t)".
    static ScaleFunction expression(const std::string& text);

    double operator()(double t) const;
    Kind kind() const { return kind_; }
    std::string describe() const;
    std::uint64_t digest() const;

private:
    ScaleFunction() = default;
    Kind kind_ = Kind::Constant;
    double value_ = 1.0;
    std::vector<double> knots_, values_, slopes_;
    std::string text_;
    std::function<double(double)> compiled_;
};

// Observation link Phi. Built-ins follow the usual experiment set; custom links
// carry their own evaluator and optional derivative bounds.
class LinkFunction {
public:
    enum class Kind { Identity, Exp, Sin4x, XSin2_4x, Custom };

    static LinkFunction identity();
    static LinkFunction exp_link();
    static LinkFunction sin4x();
    static LinkFunction x_sin2_4x();
    static LinkFunction custom(std::string name, std::function<double(double)> f,
                               std::optional<double> c1 = std::nullopt,
                               std::optional<double> c2 = std::nullopt);

    double operator()(double x) const;
    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    // Global bounds 0 < c1 <= |Phi'| <= c2 when known.
    std::optional<double> derivative_lower() const { return c1_; }
    std::optional<double> derivative_upper() const { return c2_; }

    std::uint64_t digest() const;

private:
    LinkFunction() = default;
    Kind kind_ = Kind::Identity;
    std::string name_ = "identity";
    std::function<double(double)> f_;
    std::optional<double> c1_, c2_;
};

// The full data-generating process Y(t) = Phi(theta(t) X_H(t)) observed on the
// dyadic grid {u/2^n}.
struct ModelSpec {
    HurstProfile hurst;
    ScaleFunction scale;
    LinkFunction link;
    int n = 10;                 // grid {u/2^n, u=0..2^n}
    bool unit_variance = false; // rescale the hidden field to unit spectral amplitude

    ModelSpec(HurstProfile h, ScaleFunction s, LinkFunction l, int n_, bool unit_var = false);

    std::size_t grid_size() const { return (std::size_t{1} << n) + 1; }
    std::uint64_t digest() const;
};

// Diagnostic checks; empty result means every modelling assumption verified on
// a dense grid. Violations never throw (estimation away from flagged points is
// still meaningful).
std::vector<std::string> validate_model(const ModelSpec& spec);

}  // namespace mbh
