#include "mbholder/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mbholder/quadrature.hpp"
#include "mbholder/simulate.hpp"

namespace mbh {
namespace {

constexpr double kMomentTol = 1e-10;

double poly_moment_legendre2(int p) {
    // int_0^1 t^p (6t^2 - 6t + 1) dt
    return 6.0 / (p + 3.0) - 6.0 / (p + 2.0) + 1.0 / (p + 1.0);
}

}  // namespace

MotherWavelet MotherWavelet::haar() {
    MotherWavelet w;
    w.kind_ = Kind::Haar;
    w.name_ = "haar";
    w.q_ = 1;
    w.moment_q_abs_ = 0.5;  // int t |psi| = int_0^1 t dt
    w.verify_moments();
    return w;
}

MotherWavelet MotherWavelet::legendre2() {
    MotherWavelet w;
    w.kind_ = Kind::Legendre2;
    w.name_ = "legendre2";
    w.q_ = 2;
    // int t^2 |6t^2-6t+1| dt, sign changes at 1/2 +- 1/(2 sqrt 3)
    const double r1 = 0.5 - 0.5 / std::sqrt(3.0), r2 = 0.5 + 0.5 / std::sqrt(3.0);
    auto F = [](double t) { return 1.2 * t * t * t * t * t - 1.5 * t * t * t * t + t * t * t / 3.0; };
    w.moment_q_abs_ = F(1.0) - 2.0 * F(r2) + 2.0 * F(r1);
    w.verify_moments();
    return w;
}

MotherWavelet MotherWavelet::tabulated(std::vector<double> knots, std::vector<double> values,
                                       int cancellation_order) {
    if (knots.size() != values.size() || knots.size() < 3)
        throw ConfigError("tabulated wavelet needs matching knots/values, at least 3");
    if (!std::is_sorted(knots.begin(), knots.end()) || knots.front() != 0.0 || knots.back() != 1.0)
        throw ConfigError("tabulated wavelet knots must be sorted and cover [0,1]");
    if (cancellation_order < 1) throw ConfigError("cancellation order must be >= 1");
    MotherWavelet w;
    w.kind_ = Kind::Tabulated;
    w.name_ = "tabulated";
    w.q_ = cancellation_order;
    w.knots_ = std::move(knots);
    w.values_ = std::move(values);
    QuadratureSettings qs;
    w.moment_q_abs_ = integrate_gk_split(
        [&](double t) { return std::pow(t, w.q_) * std::abs(w(t)); }, 0.0, 1.0, w.knots_, qs);
    w.verify_moments();
    return w;
}

void MotherWavelet::verify_moments() const {
    for (int p = 0; p < q_; ++p) {
        const double m = moment(p);
        if (std::abs(m) > kMomentTol) {
            char buf[120];
            std::snprintf(buf, sizeof buf,
                          "wavelet '%s' fails vanishing moment p=%d (value %.3g)", name_.c_str(), p, m);
            throw ConfigError(buf);
        }
    }
    if (!(moment_q_abs_ > 0.0))
        throw ConfigError("wavelet '" + name_ + "' has vanishing order-Q absolute moment");
}

double MotherWavelet::operator()(double t) const {
    switch (kind_) {
        case Kind::Haar:
            return t < 0.5 ? 1.0 : -1.0;
        case Kind::Legendre2:
            return (6.0 * t - 6.0) * t + 1.0;
        case Kind::Tabulated: {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
            std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
            if (i + 1 >= knots_.size()) i = knots_.size() - 2;
            const double w = (t - knots_[i]) / (knots_[i + 1] - knots_[i]);
            return (1.0 - w) * values_[i] + w * values_[i + 1];
        }
    }
    return 0.0;
}

double MotherWavelet::antiderivative(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    switch (kind_) {
        case Kind::Haar:
            return x < 0.5 ? x : 1.0 - x;
        case Kind::Legendre2:
            return ((2.0 * x - 3.0) * x + 1.0) * x;  // 2x^3 - 3x^2 + x
        case Kind::Tabulated: {
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
                const double a = knots_[i], b = std::min(knots_[i + 1], x);
                if (b <= a) break;
                const double w0 = values_[i], w1 = values_[i + 1], h = knots_[i + 1] - knots_[i];
                const double u = (b - a);
                acc += w0 * u + 0.5 * (w1 - w0) * u * u / h;
            }
            return acc;
        }
    }
    return 0.0;
}

double MotherWavelet::moment(int p) const {
    switch (kind_) {
        case Kind::Haar: {
            // int_0^{1/2} t^p - int_{1/2}^1 t^p = (2^{-p} - ... ) exactly
            const double half_pow = std::pow(0.5, p + 1);
            return (2.0 * half_pow - 1.0) / (p + 1.0);
        }
        case Kind::Legendre2:
            return poly_moment_legendre2(p);
        case Kind::Tabulated: {
            QuadratureSettings qs;
            return integrate_gk_split([&](double t) { return std::pow(t, p) * (*this)(t); }, 0.0,
                                      1.0, knots_, qs);
        }
    }
    return 0.0;
}

std::vector<double> MotherWavelet::breakpoints() const {
    switch (kind_) {
        case Kind::Haar:
            return {0.5};
        case Kind::Legendre2:
            return {};
        case Kind::Tabulated: {
            std::vector<double> pts(knots_.begin() + 1, knots_.end() - 1);
            return pts;
        }
    }
    return {};
}

// ---------------------------------------------------------------- coefficients

WaveletCoefficientSet coefficients_from_values(int j, std::vector<double> values,
                                               std::shared_ptr<const MotherWavelet> psi) {
    if (j < 0 || values.size() != (std::size_t{1} << j))
        throw ConfigError("coefficient vector length must be 2^j");
    WaveletCoefficientSet c;
    c.j = j;
    c.values = std::move(values);
    c.base = c.values;  // direct values: base carries them unscaled
    c.base_scale_log2 = 0;
    c.provenance = WaveletCoefficientSet::Provenance::Exact;
    c.wavelet = std::move(psi);
    c.source_n = 0;
    return c;
}

namespace {

WaveletCoefficientSet coefficients_impl(const SamplePath& y, int j,
                                        std::shared_ptr<const MotherWavelet> psi,
                                        bool midpoint_cells,
                                        WaveletCoefficientSet::Provenance provenance) {
    const int n = y.n;
    if (j > n) throw ConfigError("coefficient scale j exceeds path resolution n");
    if (j < 0) throw ConfigError("coefficient scale j must be nonnegative");
    const std::size_t cells = std::size_t{1} << (n - j);
    const std::size_t count = std::size_t{1} << j;
    const double cell_width = std::exp2(-n);

    // Cell weights of psi(2^j t) over [l/2^n, (l+1)/2^n], shared by every k.
    std::vector<double> w(cells);
    for (std::size_t l = 0; l < cells; ++l) {
        if (midpoint_cells) {
            w[l] = (*psi)(std::exp2(j - n) * (static_cast<double>(l) + 0.5)) * cell_width;
        } else {
            const double a = std::exp2(j - n) * static_cast<double>(l);
            const double b = std::exp2(j - n) * static_cast<double>(l + 1);
            w[l] = psi->cell_integral(a, b) * std::exp2(-j);
        }
    }

    WaveletCoefficientSet out;
    out.j = j;
    out.provenance = provenance;
    out.source_n = n;
    out.wavelet = std::move(psi);
    out.base.resize(count);
    out.values.resize(count);
    out.base_scale_log2 = j;
    const double scale = std::exp2(0.5 * j);
    const double* yv = y.y_values.data();
    for (std::size_t k = 0; k < count; ++k) {
        const double* block = yv + k * cells;
        double acc = 0.0;
        for (std::size_t l = 0; l < cells; ++l) acc += block[l] * w[l];
        out.base[k] = acc;
        out.values[k] = scale * acc;
    }
    return out;
}

}  // namespace

WaveletCoefficientSet coefficients_from_path(const SamplePath& y, int j,
                                             std::shared_ptr<const MotherWavelet> psi,
                                             bool midpoint_cells) {
    return coefficients_impl(y, j, std::move(psi), midpoint_cells,
                             WaveletCoefficientSet::Provenance::Discretized);
}

WaveletCoefficientSet coefficients_exact(const SamplePath& x_fine, int j,
                                         std::shared_ptr<const MotherWavelet> psi) {
    if (x_fine.n < j + 6)
        throw ConfigError("exact coefficients need resolution n >= j + 6");
    return coefficients_impl(x_fine, j, std::move(psi), false,
                             WaveletCoefficientSet::Provenance::Exact);
}

void write_coefficients_csv(const WaveletCoefficientSet& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "j,k,value\n";
    char buf[64];
    for (std::size_t k = 0; k < c.values.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%d,%zu,%.17g\n", c.j, k, c.values[k]);
        out << buf;
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

WaveletCoefficientSet read_coefficients_csv(const std::string& path,
                                            std::shared_ptr<const MotherWavelet> psi) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty coefficient file '" + path + "'");
    int j = -1;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int jj;
        std::size_t k;
        double v;
        if (std::sscanf(line.c_str(), "%d,%zu,%lf", &jj, &k, &v) != 3) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "malformed coefficient row %zu in '%s'", lineno,
                          path.c_str());
            throw IoError(buf);
        }
        if (j < 0) j = jj;
        if (jj != j) throw IoError("coefficient file mixes scales");
        if (values.size() != k) throw IoError("coefficient file rows out of order");
        values.push_back(v);
    }
    if (j < 0) throw IoError("coefficient file has no rows");
    return coefficients_from_values(j, std::move(values), std::move(psi));
}

}  // namespace mbh
