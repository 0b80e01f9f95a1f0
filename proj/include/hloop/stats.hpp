#pragma once

#include <vector>

namespace hloop {

// Asymptotic one-sample Kolmogorov-Smirnov critical value for sup|F_n - F|.
double ks_critical(long n, double alpha);

struct MeanError {
    double mean = 0.0;
    double error = 0.0;
};
// Batch means: values are per-batch averages of equal-size batches.
MeanError batch_mean(const std::vector<double>& batch_values);

}  // namespace hloop
