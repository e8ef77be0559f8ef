#pragma once

#include <functional>
#include <vector>

namespace qla {

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre rule; m in {1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20}.
const Rule& gauss_legendre(int m);

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Gauss-Kronrod on a finite interval, relative target 1e-12.
// `error` is an a posteriori absolute estimate.
Integral integrate(const std::function<double(double)>& f, double lo, double hi);

// Sum of adaptive integrals over geometric panels covering [lo, hi] (lo > 0),
// for integrands with power-law behaviour across decades.
Integral integrate_log_panels(const std::function<double(double)>& f, double lo, double hi,
                              double ratio = 2.0);

}  // namespace qla
