#include "mbholder/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include <Eigen/Cholesky>
#include <unsupported/Eigen/FFT>

#include "mbholder/specfun.hpp"

namespace mbh {
namespace {

constexpr std::uint32_t kFactorMagic = 0x4d424846;  // "MBHF"
constexpr std::uint32_t kFactorVersion = 1;

}  // namespace

CovarianceFactor build_covariance_grid(const HurstProfile& hurst, const ScaleFunction& theta,
                                       int n, bool unit_variance,
                                       const QuadratureSettings& settings) {
    if (n < 0 || n > 14) throw ConfigError("covariance grid exponent must lie in [0,14]");
    const std::size_t N = std::size_t{1} << n;

    CovarianceFactor f;
    f.n = n;
    f.grid.resize(N);
    for (std::size_t u = 0; u < N; ++u) f.grid[u] = static_cast<double>(u + 1) / static_cast<double>(N);

    (void)settings;
    std::vector<double> H(N), scale(N);
    for (std::size_t u = 0; u < N; ++u) {
        H[u] = hurst(f.grid[u]);
        scale[u] = theta(f.grid[u]);
        // Gram assembly uses the analytic C0 identity; the quadrature route is
        // too slow for N^2 entries and is validated against this form in tests.
        if (unit_variance) scale[u] *= std::sqrt(2.0 / c0_alpha_closed(2.0 * H[u]));
    }

    Eigen::MatrixXd K(N, N);
    for (std::size_t u = 0; u < N; ++u) {
        const double tu = f.grid[u];
        for (std::size_t v = 0; v <= u; ++v) {
            const double tv = f.grid[v];
            const double a = H[u] + H[v];
            const double k = 0.5 * c0_alpha_closed(a) *
                             (std::pow(tu, a) + std::pow(tv, a) - std::pow(tu - tv, a));
            K(u, v) = scale[u] * scale[v] * k;
            K(v, u) = K(u, v);
        }
    }

    const double max_diag = K.diagonal().maxCoeff();
    const double ladder[4] = {0.0, 1e-12, 1e-10, 1e-8};
    for (double rel : ladder) {
        Eigen::MatrixXd work = K;
        if (rel > 0.0) work.diagonal().array() += rel * max_diag;
        Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(work);
        if (llt.info() == Eigen::Success) {
            f.jitter_used = rel * max_diag;
            work.triangularView<Eigen::StrictlyUpper>().setZero();
            f.lower = std::move(work);
            return f;
        }
    }
    throw NumericError("covariance matrix indefinite even at the largest jitter");
}

CovarianceFactor build_covariance(const ModelSpec& model, const QuadratureSettings& settings) {
    CovarianceFactor f =
        build_covariance_grid(model.hurst, model.scale, model.n, model.unit_variance, settings);
    f.model_hash = model.digest();
    return f;
}

SamplePath sample_path(const CovarianceFactor& factor, const LinkFunction& link,
                       std::uint64_t seed) {
    const std::size_t N = factor.size();
    SamplePath p;
    p.n = factor.n;
    p.seed = seed;
    p.x_values.assign(N + 1, 0.0);
    p.y_values.assign(N + 1, 0.0);

    Eigen::VectorXd z(N);
    NormalStream rng(seed);
    rng.fill(z.data(), N);
    Eigen::VectorXd x = factor.lower.triangularView<Eigen::Lower>() * z;
    for (std::size_t u = 0; u < N; ++u) p.x_values[u + 1] = x(static_cast<Eigen::Index>(u));
    for (std::size_t u = 0; u <= N; ++u) p.y_values[u] = link(p.x_values[u]);
    return p;
}

SamplePath sample_fbm_circulant(double H, int n, std::uint64_t seed,
                                const QuadratureSettings& settings) {
    if (!(H > 0.0 && H < 1.0)) throw ConfigError("circulant sampler requires constant H in (0,1)");
    if (n < 1 || n > 14) throw ConfigError("circulant sampler grid exponent must lie in [1,14]");
    const std::size_t N = std::size_t{1} << n;
    const double dt = 1.0 / static_cast<double>(N);

    // Increment autocovariance of the unit-amplitude field at lag k.
    auto gamma = [&](std::size_t k) {
        const double kk = static_cast<double>(k);
        const double g = std::pow(std::abs(kk + 1.0), 2.0 * H) - 2.0 * std::pow(kk, 2.0 * H) +
                         std::pow(std::abs(kk - 1.0), 2.0 * H);
        return 0.5 * std::pow(dt, 2.0 * H) * g;
    };

    const std::size_t M = 2 * N;
    std::vector<std::complex<double>> row(M);
    for (std::size_t k = 0; k <= N; ++k) row[k] = gamma(k);
    for (std::size_t k = N + 1; k < M; ++k) row[k] = gamma(M - k);

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> lambda(M);
    fft.fwd(lambda, row);

    double min_l = 0.0;
    for (const auto& l : lambda) min_l = std::min(min_l, l.real());

    if (min_l < -1e-9 * std::abs(lambda[0].real())) {
        // Embedding not nonnegative: exact dense route, flagged.
        CovarianceFactor f = build_covariance_grid(HurstProfile::constant(H),
                                                   ScaleFunction::constant(1.0), n, false, settings);
        SamplePath p = sample_path(f, LinkFunction::identity(), seed);
        p.circulant_fallback = true;
        return p;
    }

    NormalStream rng(seed);
    std::vector<std::complex<double>> w(M);
    {
        // Hermitian Gaussian spectrum; fixed draw order keeps the stream stable.
        w[0] = std::complex<double>(rng.next(), 0.0);
        for (std::size_t k = 1; k < N; ++k) {
            const double a = rng.next(), b = rng.next();
            w[k] = std::complex<double>(a, b) * (1.0 / std::sqrt(2.0));
        }
        w[N] = std::complex<double>(rng.next(), 0.0);
        for (std::size_t k = N + 1; k < M; ++k) w[k] = std::conj(w[M - k]);
    }
    for (std::size_t k = 0; k < M; ++k) {
        const double l = std::max(lambda[k].real(), 0.0);
        w[k] *= std::sqrt(l / static_cast<double>(M));
    }
    std::vector<std::complex<double>> g(M);
    fft.inv(g, w);
    // inv applies 1/M; undo it to get the unnormalized transform.
    for (auto& v : g) v *= static_cast<double>(M);

    const double amp = std::sqrt(c0_alpha_closed(2.0 * H));
    SamplePath p;
    p.n = n;
    p.seed = seed;
    p.x_values.assign(N + 1, 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        acc += g[k].real();
        p.x_values[k + 1] = amp * acc;
    }
    p.y_values = p.x_values;
    return p;
}

void write_factor_cache(const CovarianceFactor& factor, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const std::uint64_t N = factor.size();
    out.write(reinterpret_cast<const char*>(&kFactorMagic), 4);
    out.write(reinterpret_cast<const char*>(&kFactorVersion), 4);
    out.write(reinterpret_cast<const char*>(&N), 8);
    out.write(reinterpret_cast<const char*>(&factor.jitter_used), 8);
    out.write(reinterpret_cast<const char*>(&factor.model_hash), 8);
    std::uint64_t n64 = static_cast<std::uint64_t>(factor.n);
    out.write(reinterpret_cast<const char*>(&n64), 8);
    std::vector<double> rowbuf;
    for (std::uint64_t r = 0; r < N; ++r) {
        rowbuf.resize(r + 1);
        for (std::uint64_t c = 0; c <= r; ++c)
            rowbuf[c] = factor.lower(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        out.write(reinterpret_cast<const char*>(rowbuf.data()),
                  static_cast<std::streamsize>((r + 1) * sizeof(double)));
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

CovarianceFactor read_factor_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::uint32_t magic = 0, version = 0;
    std::uint64_t N = 0, n64 = 0;
    CovarianceFactor f;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&N), 8);
    in.read(reinterpret_cast<char*>(&f.jitter_used), 8);
    in.read(reinterpret_cast<char*>(&f.model_hash), 8);
    in.read(reinterpret_cast<char*>(&n64), 8);
    if (!in || magic != kFactorMagic) throw IoError("'" + path + "' is not a factor cache");
    if (version != kFactorVersion) throw IoError("factor cache version mismatch");
    f.n = static_cast<int>(n64);
    f.grid.resize(N);
    for (std::uint64_t u = 0; u < N; ++u)
        f.grid[u] = static_cast<double>(u + 1) / static_cast<double>(N);
    f.lower = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    std::vector<double> rowbuf;
    for (std::uint64_t r = 0; r < N; ++r) {
        rowbuf.resize(r + 1);
        in.read(reinterpret_cast<char*>(rowbuf.data()),
                static_cast<std::streamsize>((r + 1) * sizeof(double)));
        for (std::uint64_t c = 0; c <= r; ++c)
            f.lower(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rowbuf[c];
    }
    if (!in) throw IoError("truncated factor cache '" + path + "'");
    return f;
}

void write_path_csv(const SamplePath& path, const std::string& file, bool with_hidden) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open '" + file + "' for writing");
    out << (with_hidden ? "t,y,x\n" : "t,y\n");
    const std::size_t N = path.x_values.size() - 1;
    char buf[96];
    for (std::size_t u = 0; u < path.x_values.size(); ++u) {
        const double t = static_cast<double>(u) / static_cast<double>(N);
        if (with_hidden)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, path.y_values[u], path.x_values[u]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, path.y_values[u]);
        out << buf;
    }
    if (!out) throw IoError("write failed for '" + file + "'");
}

}  // namespace mbh
