#pragma once

#include <vector>

#include "hloop/worldline.hpp"

namespace hloop {

struct LoopSegment {
    int electron;
    int site;
    double t0;  // t0 < t1 always; orientation says which way the loop runs
    double t1;
    int orientation;  // +1 forward in time, -1 backward
    int spin;         // spin carried by the electron on this segment
};

struct Loop {
    std::vector<LoopSegment> segments;  // in tracing order
    int signed_winding = 0;
    int winding = 0;
    int epsilon = 1;
    std::vector<int> members;  // electrons whose t = 0 position lies on the loop
};

struct LoopDecomposition {
    std::vector<Loop> loops;
    Permutation tau;
    std::vector<int> cycle_type;  // of tau, descending
    std::vector<int> loop_of;     // loop index of electron j's t = 0 position, -1 if paired at t = 0
};

// Raised for bundles that do not satisfy the tracing preconditions.
struct UntraceableBundle : std::runtime_error {
    using std::runtime_error::runtime_error;
};

LoopDecomposition trace_loops(const Bundle& b);

// g_j: flip the spins on the loop through electron j's t = 0 position.
Bundle spin_flip(const Bundle& b, int j);
// g^xi = prod_j g_j^{xi_j}
Bundle spin_flip(const Bundle& b, const std::vector<int>& xi);

double loop_weight(const LoopDecomposition& dec, double beta, double b);
double field_weight(const Bundle& m, double beta, double b);

// sum_j sigma_0^(j)
int initial_spin_sum(const Bundle& m);
// sum over loops of eps (-1)^{sum_{i in I} xi_i} w
int flipped_field(const LoopDecomposition& dec, const std::vector<int>& xi);
// Spin summed over the segments of `loop` that cover time t.
int cross_section_spin(const Loop& loop, double t);

}  // namespace hloop
