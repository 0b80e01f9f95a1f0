#include "hloop/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace hloop {

double ks_critical(long n, double alpha) {
    // Kolmogorov limit law: P(sqrt(n) D > c) = 2 sum (-1)^{k-1} exp(-2 k^2 c^2)
    double lo = 0.3, hi = 3.0;
    for (int it = 0; it < 100; ++it) {
        double c = 0.5 * (lo + hi), tail = 0.0;
        for (int k = 1; k < 100; ++k) tail += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * c * c);
        (tail > alpha ? lo : hi) = c;
    }
    return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

MeanError batch_mean(const std::vector<double>& v) {
    MeanError r;
    const double n = static_cast<double>(v.size());
    if (v.empty()) return r;
    for (double x : v) r.mean += x;
    r.mean /= n;
    if (v.size() < 2) return r;
    double s = 0.0;
    for (double x : v) s += (x - r.mean) * (x - r.mean);
    r.error = std::sqrt(s / (n - 1) / n);
    return r;
}

}  // namespace hloop
