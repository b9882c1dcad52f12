#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mbh {

// Exit-code-bearing error categories. The CLI maps these to process exit codes;
// library users catch them like any std::runtime_error.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

// splitmix64, the usual finalizer-style mixer. Stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// FNV-1a over bytes; used for digests of model descriptions and cache keys.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    return fnv1a(s.data(), s.size(), seed);
}

// Seed splitting rule for Monte Carlo repetitions:
//   seed(root, cell, rep) = splitmix64(splitmix64(root ^ mix(cell)) ^ rep)
// with mix(cell) = fnv1a(cell id string). Documented in the README; the rule is
// pure integer arithmetic and therefore identical on every platform.
inline std::uint64_t derive_seed(std::uint64_t root_seed, std::uint64_t cell_id, std::uint64_t rep) {
    return splitmix64(splitmix64(root_seed ^ cell_id) ^ (0x632be59bd9b4e019ULL * (rep + 1)));
}

// ---------------------------------------------------------------------------
// Error-free transforms (double-double). Quadratic functionals accumulate in
// this representation so that the V ratio carries no intermediate rounding.
// ---------------------------------------------------------------------------

struct DD {
    double hi = 0.0;
    double lo = 0.0;
};

inline DD two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline DD two_prod(double a, double b) {
    double p = a * b;
    double err = std::fma(a, b, -p);
    return {p, err};
}

inline DD dd_add(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    double lo = s.lo + a.lo + b.lo;
    DD r = two_sum(s.hi, lo);
    return r;
}

inline DD dd_add(DD a, double b) { return dd_add(a, DD{b, 0.0}); }

inline DD dd_mul(DD a, DD b) {
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return two_sum(p.hi, p.lo);
}

inline DD dd_div(DD a, DD b) {
    double q1 = a.hi / b.hi;
    DD r = dd_add(a, dd_mul(DD{-q1, 0.0}, b));
    double q2 = r.hi / b.hi;
    r = dd_add(r, dd_mul(DD{-q2, 0.0}, b));
    double q3 = r.hi / b.hi;
    DD q = two_sum(q1, q2);
    q.lo += q3;
    return two_sum(q.hi, q.lo);
}

inline double dd_value(DD a) { return a.hi + a.lo; }

// Sum of squares with error-free accumulation.
inline DD dd_sum_squares(const double* x, std::size_t n) {
    DD acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) acc = dd_add(acc, two_prod(x[i], x[i]));
    return acc;
}

// ---------------------------------------------------------------------------
// Deterministic Gaussian stream: mt19937_64 raw output (standardized sequence)
// plus a fixed Box-Muller transform. std::normal_distribution is not pinned by
// the standard, so it is avoided.
// ---------------------------------------------------------------------------

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : state_(splitmix64(seed)) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = to_unit_positive(next_u64());
        double u2 = to_unit(next_u64());
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = next();
    }

private:
    // xorshift-free: mt19937_64 would also do, but a splitmix64 counter stream
    // is stateless and trivially portable.
    std::uint64_t next_u64() { return splitmix64(state_ += 0x9e3779b97f4a7c15ULL); }

    static double to_unit_positive(std::uint64_t x) {  // (0,1]
        return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
    }
    static double to_unit(std::uint64_t x) {  // [0,1)
        return static_cast<double>(x >> 11) * 0x1.0p-53;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Static-chunked parallel loop. Each index writes its own slot, so results do
// not depend on the thread count.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    unsigned t = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += t) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mbh
