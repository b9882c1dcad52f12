#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbholder/model.hpp"
#include "mbholder/quadrature.hpp"

namespace mbh {

// Lower-triangular factor of the covariance of the hidden field on the dyadic
// grid {u/2^n, u=1..2^n} (t=0 is a deterministic zero and stays out of the
// factorization).
struct CovarianceFactor {
    int n = 0;
    std::vector<double> grid;            // u/2^n, u=1..2^n
    Eigen::MatrixXd lower;               // L with L L^T = Gram
    double jitter_used = 0.0;            // absolute diagonal shift applied
    std::uint64_t model_hash = 0;

    std::size_t size() const { return grid.size(); }
};

// One realization of the model on the grid.
struct SamplePath {
    int n = 0;
    std::vector<double> x_values;        // hidden field, x_values[0] == 0
    std::vector<double> y_values;        // observed series, y = Phi(x)
    std::uint64_t seed = 0;
    bool circulant_fallback = false;     // set when the circulant route fell back

    std::size_t size() const { return x_values.size(); }
};

// Dense Gram assembly + Cholesky with an escalating jitter ladder
// {0, 1e-12, 1e-10, 1e-8} x max-diagonal. Throws NumericError if indefinite at
// the largest jitter. Caps the grid at 2^14.
CovarianceFactor build_covariance(const ModelSpec& model, const QuadratureSettings& settings = {});

// Grid-level variant used by tests and by callers that need non-model grids.
CovarianceFactor build_covariance_grid(const HurstProfile& hurst, const ScaleFunction& theta,
                                       int n, bool unit_variance,
                                       const QuadratureSettings& settings = {});

// X = L z with z deterministic from the seed; Y = Phi(X) pointwise.
SamplePath sample_path(const CovarianceFactor& factor, const LinkFunction& link, std::uint64_t seed);

// Constant-H fast path by circulant embedding of the increment covariance,
// scaled to the harmonizable normalization (Var X(1) = C0(2H)). Falls back to
// the dense factorization when the embedding is not nonnegative.
SamplePath sample_fbm_circulant(double H, int n, std::uint64_t seed,
                                const QuadratureSettings& settings = {});

// Binary factor cache: header (magic, version, N, jitter, digest) followed by
// the row-major lower triangle, little-endian 64-bit floats.
void write_factor_cache(const CovarianceFactor& factor, const std::string& path);
CovarianceFactor read_factor_cache(const std::string& path);

// Path CSV export: t,y and optionally the hidden column x.
void write_path_csv(const SamplePath& path, const std::string& file, bool with_hidden);

}  // namespace mbh
