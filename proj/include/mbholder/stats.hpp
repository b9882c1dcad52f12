#pragma once

#include <cstddef>
#include <vector>

namespace mbh {

// Pairwise summation in index order; the reduction tree depends only on the
// length, so results are independent of thread count.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // ddof = 1
    std::size_t count = 0;
};
MeanStd mean_std(const std::vector<double>& x);

double normal_cdf(double x);
// Inverse standard normal CDF (Acklam's rational approximation with one Newton
// polish step; ~1e-15 absolute).
double normal_quantile(double p);

// One-sample Kolmogorov-Smirnov distance to the standard normal.
double ks_distance_to_normal(std::vector<double> sample);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace mbh
