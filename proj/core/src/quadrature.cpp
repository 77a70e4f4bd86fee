#include "loglab/quadrature.hpp"

#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace loglab {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(centre - dx);
        const double f2 = f(centre + dx);
        kronrod += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    return {a, b, kronrod * half, std::fabs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                const QuadratureOptions& opts) {
    QuadratureResult result;
    if (a == b) {
        result.converged = true;
        return result;
    }
    std::priority_queue<Segment> heap;
    Segment first = gk15(f, a, b);
    heap.push(first);
    double total = first.value;
    double error = first.error;
    int intervals = 1;
    result.evaluations = 15;
    while (error > std::max(opts.abs_tol, opts.rel_tol * std::fabs(total)) && intervals < opts.max_intervals) {
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            heap.push(worst);
            break;  // interval exhausted at machine precision
        }
        Segment left = gk15(f, worst.a, mid);
        Segment right = gk15(f, mid, worst.b);
        result.evaluations += 30;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // Re-sum to shed the cancellation accumulated by incremental updates.
    total = 0;
    error = 0;
    while (!heap.empty()) {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    result.value = total;
    result.error = error;
    result.converged = error <= std::max(opts.abs_tol, opts.rel_tol * std::fabs(total));
    return result;
}

double integrate(const std::function<double(double)>& f, double a, double b, const QuadratureOptions& opts,
                 const char* context) {
    QuadratureResult r = integrate_gk15(f, a, b, opts);
    if (!r.converged) {
        std::ostringstream msg;
        msg << context << ": quadrature did not reach tolerance " << std::max(opts.abs_tol, opts.rel_tol * std::fabs(r.value))
            << " (estimated error " << r.error << ")";
        throw QuadratureError(msg.str(), opts.abs_tol, r.error);
    }
    return r.value;
}

GaussLegendreRule gauss_legendre(int points) {
    GaussLegendreRule rule;
    rule.nodes.resize(points);
    rule.weights.resize(points);
    for (int i = 0; i < points; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (points + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= points; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = points * (x * p1 - p0) / (x * x - 1);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        double p0 = 1, p1 = x;
        for (int k = 2; k <= points; ++k) {
            const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = points * (x * p1 - p0) / (x * x - 1);
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace loglab
