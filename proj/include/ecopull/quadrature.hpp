#pragma once

#include <functional>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

namespace ecopull {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Upper-tail probability of the standard normal.
inline double q_function(double x) {
    return 0.5 * std::erfc(x * M_SQRT1_2);
}

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod integration of f over [a, b].
/// Interior `breakpoints` seed the initial partition. Throws QuadratureError
/// when `abs_tol` is not reached within `max_intervals` subintervals.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints = {},
                           double abs_tol = 1e-9, int max_intervals = 4000);

/// n-point Gauss-Legendre rule mapped onto [0, 1].
struct GaussLegendreRule {
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd weights;
};

GaussLegendreRule gauss_legendre_unit(int n);

}  // namespace ecopull
