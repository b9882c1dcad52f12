#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mbholder/common.hpp"

namespace mbh {

struct SamplePath;  // simulate.hpp

// Mother wavelet on [0,1] with Q vanishing moments below order Q.
class MotherWavelet {
public:
    enum class Kind { Haar, Legendre2, Tabulated };

    static MotherWavelet haar();        // 1 on [0,1/2), -1 on [1/2,1]; Q = 1
    static MotherWavelet legendre2();   // 6t^2 - 6t + 1; Q = 2
    // Piecewise-linear tabulated wavelet; moment conditions are checked at
    // construction and failures throw ConfigError.
    static MotherWavelet tabulated(std::vector<double> knots, std::vector<double> values,
                                   int cancellation_order);

    double operator()(double t) const;          // psi(t), t in [0,1]
    double antiderivative(double x) const;      // int_0^x psi, exact for built-ins
    double cell_integral(double a, double b) const { return antiderivative(b) - antiderivative(a); }

    int Q() const { return q_; }
    double moment_Q_abs() const { return moment_q_abs_; }  // int t^Q |psi|
    double moment(int p) const;                            // int t^p psi, exact for built-ins
    std::vector<double> breakpoints() const;               // interior non-smooth points
    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    std::uint64_t digest() const { return fnv1a("psi:" + name_); }

private:
    MotherWavelet() = default;
    void verify_moments() const;

    Kind kind_ = Kind::Haar;
    std::string name_ = "haar";
    int q_ = 1;
    double moment_q_abs_ = 0.0;
    std::vector<double> knots_, values_;  // tabulated only
};

// Coefficients {d(2^-j, k)}_{k=0..2^j-1} at a single scale.
struct WaveletCoefficientSet {
    enum class Provenance { Exact, Discretized };

    int j = 0;
    std::vector<double> values;   // d(2^-j, k)
    Provenance provenance = Provenance::Discretized;
    int source_n = 0;             // grid exponent of the originating path
    std::shared_ptr<const MotherWavelet> wavelet;

    // Pre-scaling block sums: values[k] = 2^{base_scale_log2/2} * base[k]. Kept
    // so quadratic functionals can square and sum without the 2^{j/2} rounding
    // in between (base_scale_log2 = j for path-derived sets, 0 for literal ones).
    std::vector<double> base;
    int base_scale_log2 = 0;

    std::size_t size() const { return values.size(); }
};

// Builds a coefficient set from literal values (tests, external ingestion).
WaveletCoefficientSet coefficients_from_values(int j, std::vector<double> values,
                                               std::shared_ptr<const MotherWavelet> psi);

// Discretized coefficients from an observed dyadic path:
//   d(2^-j, k) = 2^{j/2} sum_l Y(l 2^-n + k 2^-j) * \int_{l/2^n}^{(l+1)/2^n} psi(2^j t) dt.
// Cell integrals are exact for the built-in wavelets; `midpoint_cells` switches
// to the midpoint approximation psi(2^{j-n}(l+1/2)) 2^{-n}.
WaveletCoefficientSet coefficients_from_path(const SamplePath& y, int j,
                                             std::shared_ptr<const MotherWavelet> psi,
                                             bool midpoint_cells = false);

// Same numerical pipeline on a high-resolution path, flagged as a stand-in for
// the continuous-integral coefficients. Requires n >= j + 6.
WaveletCoefficientSet coefficients_exact(const SamplePath& x_fine, int j,
                                         std::shared_ptr<const MotherWavelet> psi);

// CSV round trip (columns j,k,value).
void write_coefficients_csv(const WaveletCoefficientSet& c, const std::string& path);
WaveletCoefficientSet read_coefficients_csv(const std::string& path,
                                            std::shared_ptr<const MotherWavelet> psi);

}  // namespace mbh
