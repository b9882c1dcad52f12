#pragma once

#include <functional>

#include "mbholder/common.hpp"

namespace mbh {

struct QuadratureSettings {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    double tail_cut = 2e3;      // truncation point for integrals over the half line
    int max_subdivisions = 4000;

    void validate() const {
        if (abs_tol <= 0 || rel_tol <= 0) throw ConfigError("quadrature tolerances must be positive");
        if (tail_cut < 1e3) throw ConfigError("quadrature tail_cut must be at least 1e3");
        if (max_subdivisions < 1) throw ConfigError("quadrature max_subdivisions must be positive");
    }
};

// Adaptive Gauss-Kronrod (G7,K15) on a finite interval. Throws NumericError
// with the achieved estimate in the message if the subdivision budget runs out.
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    const QuadratureSettings& settings);

// Same, but splits at the interior points first (kinks of the integrand).
double integrate_gk_split(const std::function<double(double)>& f, double a, double b,
                          const std::vector<double>& interior_points,
                          const QuadratureSettings& settings);

}  // namespace mbh
