#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace hloop {

enum class NeighborNorm { l1, linf };
enum class Boundary { open, periodic };

struct LatticeSpec {
    int dimension = 1;
    int side = 4;
    double t = 1.0;
    NeighborNorm norm = NeighborNorm::l1;
    Boundary boundary = Boundary::open;
};

// Unordered pair x < y. multiplicity > 1 only when a periodic wrap bond
// coincides with an open bond (side 2).
struct Edge {
    int x;
    int y;
    int multiplicity;
};

struct Lattice {
    LatticeSpec spec;
    std::vector<std::vector<int>> vertices;  // lexicographic order
    std::vector<Edge> edges;
    Eigen::MatrixXd hopping;
    Eigen::VectorXd degrees;
    std::vector<std::vector<int>> neighbors;

    int size() const { return static_cast<int>(vertices.size()); }
    int edge_count() const;
    int index_of(const std::vector<int>& coords) const;
    bool adjacent(int x, int y) const { return hopping(x, y) > 0.0; }
    // y - x, wrapped to the minimal image under periodic boundary.
    std::vector<int> displacement(int x, int y) const;
};

Lattice build_lattice(const LatticeSpec& spec);
double degree(const Lattice& lat, int x);

std::string to_string(NeighborNorm n);
std::string to_string(Boundary b);
NeighborNorm neighbor_norm_from_string(const std::string& s);
Boundary boundary_from_string(const std::string& s);

}  // namespace hloop
