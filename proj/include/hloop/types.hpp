#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hloop {

// A point of Omega = Lambda x {+1,-1}.
struct Point {
    int site = 0;
    int spin = 1;
    bool operator==(const Point& o) const { return site == o.site && spin == o.spin; }
    bool operator<(const Point& o) const { return orbital() < o.orbital(); }
    // canonical site-major, spin-minor index: up before down
    int orbital() const { return 2 * site + (spin > 0 ? 0 : 1); }
};

inline Point point_of_orbital(int o) { return {o / 2, (o % 2 == 0) ? 1 : -1}; }

enum class Constraint { finite_u, u_infinity };

using Config = std::vector<Point>;
using Permutation = std::vector<int>;

// Raised when an exact oracle would exceed its size cap.
struct InfeasibleOracle : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hloop
