#pragma once

// Gauss-Legendre quadrature on an interval (a, b).  Nodes are interior, so
// integrands singular exactly at the endpoints are never evaluated there.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qwork {

struct QuadNode {
    double x = 0.0;
    double w = 0.0;
};

// n-point Gauss-Legendre rule on (a, b).  Nodes found by Newton iteration on
// the Legendre recurrence with the standard Chebyshev-like initial guess.
inline std::vector<QuadNode> gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    std::vector<QuadNode> nodes(n);
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        double w = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        nodes[i] = {xm - xl * z, w};
        nodes[n - 1 - i] = {xm + xl * z, w};
    }
    return nodes;
}

}  // namespace qwork
