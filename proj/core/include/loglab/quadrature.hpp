#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loglab {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_intervals = 400;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double requested, double achieved)
        : std::runtime_error(what), requested_tolerance(requested), achieved_error(achieved) {}
    double requested_tolerance;
    double achieved_error;
};

// Globally adaptive 15-point Gauss-Kronrod on [a, b]; bisects the interval with the
// largest error estimate until error <= max(abs_tol, rel_tol * |value|).
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                const QuadratureOptions& opts = {});

// Same, but throws QuadratureError if the tolerance is not met.
double integrate(const std::function<double(double)>& f, double a, double b, const QuadratureOptions& opts = {},
                 const char* context = "integrate");

// Fixed Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int points);

}  // namespace loglab
