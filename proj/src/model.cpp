#include "mbholder/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

namespace mbh {
namespace {

constexpr int kBoundsGrid = 10000;  // tau1/tau2 scan resolution for built-ins

void check_unit_interval(double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "argument t=%.17g outside [0,1]", t);
        throw std::domain_error(buf);
    }
}

// C1 piecewise-cubic Hermite with finite-difference slopes.
std::vector<double> hermite_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0)
            m[i] = (y[1] - y[0]) / (x[1] - x[0]);
        else if (i + 1 == n)
            m[i] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
        else
            m[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
    }
    return m;
}

double hermite_eval(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& m, double t) {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    if (i + 1 >= x.size()) i = x.size() - 2;
    const double h = x[i + 1] - x[i];
    const double s = (t - x[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * h * m[i] +
           (-2 * s3 + 3 * s2) * y[i + 1] + (s3 - s2) * h * m[i + 1];
}

void append_doubles(std::string& s, const std::vector<double>& v) {
    char buf[40];
    for (double d : v) {
        std::snprintf(buf, sizeof buf, "%.17g,", d);
        s += buf;
    }
}

}  // namespace

// ---------------------------------------------------------------------- Hurst

HurstProfile HurstProfile::constant(double h) {
    HurstProfile p;
    p.kind_ = Kind::Constant;
    p.params_ = {h};
    p.compute_bounds_on_grid();
    return p;
}

HurstProfile HurstProfile::linear(double a, double b) {
    HurstProfile p;
    p.kind_ = Kind::Linear;
    p.params_ = {a, b};
    p.compute_bounds_on_grid();
    return p;
}

HurstProfile HurstProfile::sinusoidal(double a, double b, double w) {
    HurstProfile p;
    p.kind_ = Kind::Sinusoidal;
    p.params_ = {a, b, w};
    p.compute_bounds_on_grid();
    return p;
}

HurstProfile HurstProfile::damped_sine(double a, double b, double w) {
    HurstProfile p;
    p.kind_ = Kind::DampedSine;
    p.params_ = {a, b, w};
    p.compute_bounds_on_grid();
    return p;
}

HurstProfile HurstProfile::tabulated(std::vector<double> knots, std::vector<double> values,
                                     double tau1, double tau2) {
    if (knots.size() != values.size() || knots.size() < 2)
        throw ConfigError("tabulated Hurst profile needs matching knots/values, at least 2");
    if (!std::is_sorted(knots.begin(), knots.end()))
        throw ConfigError("tabulated Hurst profile knots must be sorted");
    if (knots.front() != 0.0 || knots.back() != 1.0)
        throw ConfigError("tabulated Hurst profile must cover [0,1]");
    HurstProfile p;
    p.kind_ = Kind::Tabulated;
    p.knots_ = std::move(knots);
    p.values_ = std::move(values);
    p.slopes_ = hermite_slopes(p.knots_, p.values_);
    p.tau1_ = tau1;  // bounds are part of the user's knowledge, not recomputed
    p.tau2_ = tau2;
    return p;
}

double HurstProfile::eval_raw(double t) const {
    switch (kind_) {
        case Kind::Constant:
            return params_[0];
        case Kind::Linear:
            return params_[0] + params_[1] * t;
        case Kind::Sinusoidal:
            return params_[0] + params_[1] * std::sin(params_[2] * t);
        case Kind::DampedSine: {
            const double s = std::sin(params_[2] * t);
            return params_[0] + params_[1] * (1.0 - t) * s * s;
        }
        case Kind::Tabulated:
            return hermite_eval(knots_, values_, slopes_, t);
    }
    return 0.0;
}

double HurstProfile::operator()(double t) const {
    check_unit_interval(t);
    return eval_raw(t);
}

void HurstProfile::compute_bounds_on_grid() {
    double lo = eval_raw(0.0), hi = lo;
    for (int i = 1; i <= kBoundsGrid; ++i) {
        const double v = eval_raw(static_cast<double>(i) / kBoundsGrid);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    tau1_ = lo;
    tau2_ = hi;
}

std::string HurstProfile::describe() const {
    std::string s = "hurst:";
    switch (kind_) {
        case Kind::Constant: s += "constant:"; break;
        case Kind::Linear: s += "linear:"; break;
        case Kind::Sinusoidal: s += "sinusoidal:"; break;
        case Kind::DampedSine: s += "damped-sine:"; break;
        case Kind::Tabulated: s += "tabulated:"; break;
    }
    append_doubles(s, params_);
    append_doubles(s, knots_);
    append_doubles(s, values_);
    return s;
}

std::uint64_t HurstProfile::digest() const { return fnv1a(describe()); }

double eval_hurst(const HurstProfile& profile, double t) { return profile(t); }

// ---------------------------------------------------------------- ScaleFunction

namespace expr {

// Recursive-descent parser for the small theta(t) grammar.
struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool consume(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    using Node = std::function<double(double)>;

    Node parse() {
        Node e = sum();
        skip();
        if (pos != s.size()) throw ConfigError("expression parse error near '" + s.substr(pos) + "'");
        return e;
    }

    Node sum() {
        Node left = product();
        for (;;) {
            if (consume('+')) {
                Node right = product();
                left = [left, right](double t) { return left(t) + right(t); };
            } else if (consume('-')) {
                Node right = product();
                left = [left, right](double t) { return left(t) - right(t); };
            } else {
                return left;
            }
        }
    }

    Node product() {
        Node left = power();
        for (;;) {
            if (consume('*')) {
                Node right = power();
                left = [left, right](double t) { return left(t) * right(t); };
            } else if (consume('/')) {
                Node right = power();
                left = [left, right](double t) { return left(t) / right(t); };
            } else {
                return left;
            }
        }
    }

    Node power() {
        Node base = unary();
        if (consume('^')) {
            Node e = power();  // right associative
            return [base, e](double t) { return std::pow(base(t), e(t)); };
        }
        return base;
    }

    Node unary() {
        if (consume('-')) {
            Node inner = unary();
            return [inner](double t) { return -inner(t); };
        }
        (void)consume('+');
        return atom();
    }

    Node atom() {
        skip();
        if (pos >= s.size()) throw ConfigError("expression ended unexpectedly");
        if (consume('(')) {
            Node inner = sum();
            if (!consume(')')) throw ConfigError("expression missing ')'");
            return inner;
        }
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(s.substr(pos), &used);
            pos += used;
            return [v](double) { return v; };
        }
        std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        std::string word = s.substr(start, pos - start);
        if (word == "t") return [](double t) { return t; };
        if (word == "pi") return [](double) { return 3.14159265358979323846; };
        if (!consume('(')) throw ConfigError("unknown expression token '" + word + "'");
        Node arg = sum();
        if (!consume(')')) throw ConfigError("expression missing ')' after " + word);
        if (word == "sin") return [arg](double t) { return std::sin(arg(t)); };
        if (word == "cos") return [arg](double t) { return std::cos(arg(t)); };
        if (word == "exp") return [arg](double t) { return std::exp(arg(t)); };
        if (word == "sqrt") return [arg](double t) { return std::sqrt(arg(t)); };
        if (word == "abs") return [arg](double t) { return std::abs(arg(t)); };
        throw ConfigError("unknown function '" + word + "' in expression");
    }
};

}  // namespace expr

ScaleFunction ScaleFunction::constant(double value) {
    ScaleFunction f;
    f.kind_ = Kind::Constant;
    f.value_ = value;
    return f;
}

ScaleFunction ScaleFunction::tabulated(std::vector<double> knots, std::vector<double> values) {
    if (knots.size() != values.size() || knots.size() < 2)
        throw ConfigError("tabulated scale needs matching knots/values, at least 2");
    if (!std::is_sorted(knots.begin(), knots.end()) || knots.front() != 0.0 || knots.back() != 1.0)
        throw ConfigError("tabulated scale knots must be sorted and cover [0,1]");
    ScaleFunction f;
    f.kind_ = Kind::Tabulated;
    f.knots_ = std::move(knots);
    f.values_ = std::move(values);
    f.slopes_ = hermite_slopes(f.knots_, f.values_);
    return f;
}

ScaleFunction ScaleFunction::expression(const std::string& text) {
    ScaleFunction f;
    f.kind_ = Kind::Expression;
    f.text_ = text;
    expr::Parser p(f.text_);
    f.compiled_ = p.parse();
    (void)f.compiled_(0.5);  // force evaluation errors now, not at sampling time
    return f;
}

double ScaleFunction::operator()(double t) const {
    check_unit_interval(t);
    switch (kind_) {
        case Kind::Constant: return value_;
        case Kind::Tabulated: return hermite_eval(knots_, values_, slopes_, t);
        case Kind::Expression: return compiled_(t);
    }
    return value_;
}

std::string ScaleFunction::describe() const {
    std::string s = "theta:";
    switch (kind_) {
        case Kind::Constant: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "constant:%.17g", value_);
            s += buf;
            break;
        }
        case Kind::Tabulated:
            s += "tabulated:";
            append_doubles(s, knots_);
            append_doubles(s, values_);
            break;
        case Kind::Expression:
            s += "expr:" + text_;
            break;
    }
    return s;
}

std::uint64_t ScaleFunction::digest() const { return fnv1a(describe()); }

// ----------------------------------------------------------------- LinkFunction

LinkFunction LinkFunction::identity() {
    LinkFunction l;
    l.kind_ = Kind::Identity;
    l.name_ = "identity";
    l.c1_ = 1.0;
    l.c2_ = 1.0;
    return l;
}

LinkFunction LinkFunction::exp_link() {
    LinkFunction l;
    l.kind_ = Kind::Exp;
    l.name_ = "exp";
    return l;  // derivative unbounded below/above on R; left unset
}

LinkFunction LinkFunction::sin4x() {
    LinkFunction l;
    l.kind_ = Kind::Sin4x;
    l.name_ = "sin4x";
    l.c2_ = 4.0;  // |Phi'| <= 4; no positive lower bound exists
    return l;
}

LinkFunction LinkFunction::x_sin2_4x() {
    LinkFunction l;
    l.kind_ = Kind::XSin2_4x;
    l.name_ = "xsin2_4x";
    return l;
}

LinkFunction LinkFunction::custom(std::string name, std::function<double(double)> f,
                                  std::optional<double> c1, std::optional<double> c2) {
    LinkFunction l;
    l.kind_ = Kind::Custom;
    l.name_ = std::move(name);
    l.f_ = std::move(f);
    l.c1_ = c1;
    l.c2_ = c2;
    return l;
}

double LinkFunction::operator()(double x) const {
    switch (kind_) {
        case Kind::Identity: return x;
        case Kind::Exp: return std::exp(x);
        case Kind::Sin4x: return std::sin(4.0 * x);
        case Kind::XSin2_4x: {
            const double s = std::sin(4.0 * x);
            return x * s * s;
        }
        case Kind::Custom: return f_(x);
    }
    return x;
}

std::uint64_t LinkFunction::digest() const { return fnv1a("phi:" + name_); }

// -------------------------------------------------------------------- ModelSpec

ModelSpec::ModelSpec(HurstProfile h, ScaleFunction s, LinkFunction l, int n_, bool unit_var)
    : hurst(std::move(h)), scale(std::move(s)), link(std::move(l)), n(n_), unit_variance(unit_var) {
    if (n < 0 || n > 14) throw ConfigError("grid exponent n must lie in [0,14]");
}

std::uint64_t ModelSpec::digest() const {
    std::uint64_t d = hurst.digest();
    d = hash_combine(d, scale.digest());
    d = hash_combine(d, link.digest());
    d = hash_combine(d, static_cast<std::uint64_t>(n));
    d = hash_combine(d, unit_variance ? 1u : 0u);
    return d;
}

std::vector<std::string> validate_model(const ModelSpec& spec) {
    std::vector<std::string> out;
    char buf[200];

    if (spec.n < 4) {
        std::snprintf(buf, sizeof buf, "grid exponent n=%d below the supported minimum 4", spec.n);
        out.emplace_back(buf);
    }

    // H bounds on a dense grid.
    const auto& H = spec.hurst;
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i <= kBoundsGrid; ++i) {
        const double v = H(static_cast<double>(i) / kBoundsGrid);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(H.tau1() > 0.0)) {
        std::snprintf(buf, sizeof buf, "tau1 <= 0 (tau1=%.6g); H must stay inside (0,1)", H.tau1());
        out.emplace_back(buf);
    }
    if (!(H.tau2() < 1.0)) {
        std::snprintf(buf, sizeof buf, "tau2 >= 1 (tau2=%.6g); H must stay inside (0,1)", H.tau2());
        out.emplace_back(buf);
    }
    if (lo < H.tau1() - 1e-9 || hi > H.tau2() + 1e-9) {
        std::snprintf(buf, sizeof buf,
                      "H leaves [tau1,tau2] on the grid: range [%.6g,%.6g] vs bounds [%.6g,%.6g]",
                      lo, hi, H.tau1(), H.tau2());
        out.emplace_back(buf);
    }
    if (H.interpolated()) out.emplace_back("tabulated H profile is C1 interpolated, not C2");

    // theta grid zeros (isolated zeros are legitimate; estimation near them is not).
    int zeros = 0;
    double first_zero = 0.0;
    for (int i = 0; i <= kBoundsGrid; ++i) {
        const double t = static_cast<double>(i) / kBoundsGrid;
        if (spec.scale(t) == 0.0) {
            if (zeros++ == 0) first_zero = t;
        }
    }
    if (zeros > 0) {
        std::snprintf(buf, sizeof buf,
                      "theta vanishes at %d grid point(s), first at t=%.6g; estimation is valid away from them",
                      zeros, first_zero);
        out.emplace_back(buf);
    }

    // Phi' bounds: built-ins are known; a custom link must declare them.
    const auto& phi = spec.link;
    const bool builtin = phi.kind() != LinkFunction::Kind::Custom;
    if (!builtin && (!phi.derivative_lower() || !phi.derivative_upper())) {
        out.emplace_back("custom link lacks derivative bounds c1, c2");
    }
    if (phi.derivative_lower() && !(*phi.derivative_lower() > 0.0)) {
        out.emplace_back("link derivative lower bound c1 is not positive");
    }
    if (phi.kind() == LinkFunction::Kind::Sin4x || phi.kind() == LinkFunction::Kind::XSin2_4x) {
        out.emplace_back("link derivative has zeros (|Phi'| >= c1 > 0 fails); estimator remains usable in practice");
    }
    if (phi.kind() == LinkFunction::Kind::Exp) {
        out.emplace_back("exp link has no global derivative bounds on R; bounds hold on compact sets only");
    }

    return out;
}

}  // namespace mbh
