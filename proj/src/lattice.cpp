#include "hloop/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace hloop {

namespace {

std::vector<std::vector<int>> enumerate_vertices(int d, int side) {
    std::vector<std::vector<int>> out;
    std::vector<int> c(d, -side / 2);
    while (true) {
        out.push_back(c);
        int axis = d - 1;
        while (axis >= 0 && ++c[axis] == side / 2) {
            c[axis] = -side / 2;
            --axis;
        }
        if (axis < 0) break;
    }
    return out;
}

int wrap(int v, int side) {
    int lo = -side / 2;
    int r = (v - lo) % side;
    if (r < 0) r += side;
    return r + lo;
}

}  // namespace

int Lattice::edge_count() const {
    int n = 0;
    for (const auto& e : edges) n += e.multiplicity;
    return n;
}

int Lattice::index_of(const std::vector<int>& coords) const {
    const int d = spec.dimension;
    const int side = spec.side;
    if (static_cast<int>(coords.size()) != d) return -1;
    int idx = 0;
    for (int a = 0; a < d; ++a) {
        int c = coords[a];
        if (c < -side / 2 || c >= side / 2) return -1;
        idx = idx * side + (c + side / 2);
    }
    return idx;
}

std::vector<int> Lattice::displacement(int x, int y) const {
    std::vector<int> dx(spec.dimension);
    for (int a = 0; a < spec.dimension; ++a) {
        int v = vertices[y][a] - vertices[x][a];
        if (spec.boundary == Boundary::periodic && std::abs(v) > 1) v = v > 0 ? v - spec.side : v + spec.side;
        dx[a] = v;
    }
    return dx;
}

Lattice build_lattice(const LatticeSpec& spec) {
    if (spec.dimension < 1) throw std::invalid_argument("lattice.dimension must be >= 1");
    if (spec.side < 2 || spec.side % 2 != 0) throw std::invalid_argument("lattice.side must be a positive even integer");
    if (!(spec.t > 0.0)) throw std::invalid_argument("lattice.t must be > 0");
    double sites = std::pow(static_cast<double>(spec.side), spec.dimension);
    if (sites > 64) throw std::invalid_argument("lattice too large (more than 64 sites)");

    Lattice lat;
    lat.spec = spec;
    lat.vertices = enumerate_vertices(spec.dimension, spec.side);
    const int n = lat.size();
    const int d = spec.dimension;
    Eigen::MatrixXi count = Eigen::MatrixXi::Zero(n, n);

    // every displacement in {-1,0,1}^d \ {0}, filtered by the norm
    std::vector<int> delta(d, -1);
    while (true) {
        int l1 = 0;
        for (int v : delta) l1 += std::abs(v);
        bool ok = l1 > 0 && (spec.norm == NeighborNorm::linf || l1 == 1);
        if (ok) {
            for (int x = 0; x < n; ++x) {
                std::vector<int> c = lat.vertices[x];
                bool inside = true;
                for (int a = 0; a < d; ++a) {
                    c[a] += delta[a];
                    if (spec.boundary == Boundary::periodic) c[a] = wrap(c[a], spec.side);
                    else if (c[a] < -spec.side / 2 || c[a] >= spec.side / 2) inside = false;
                }
                if (!inside) continue;
                int y = lat.index_of(c);
                if (y != x) count(x, y) += 1;
            }
        }
        int axis = d - 1;
        while (axis >= 0 && ++delta[axis] == 2) {
            delta[axis] = -1;
            --axis;
        }
        if (axis < 0) break;
    }

    lat.hopping = spec.t * count.cast<double>();
    lat.degrees = lat.hopping.rowwise().sum();
    lat.neighbors.assign(n, {});
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (count(x, y) > 0) {
                lat.neighbors[x].push_back(y);
                if (x < y) lat.edges.push_back({x, y, count(x, y)});
            }
    return lat;
}

double degree(const Lattice& lat, int x) {
    if (x < 0 || x >= lat.size()) throw std::out_of_range("unknown vertex");
    return lat.hopping.row(x).sum();
}

std::string to_string(NeighborNorm n) { return n == NeighborNorm::l1 ? "l1" : "linf"; }
std::string to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

NeighborNorm neighbor_norm_from_string(const std::string& s) {
    if (s == "l1") return NeighborNorm::l1;
    if (s == "linf") return NeighborNorm::linf;
    throw std::invalid_argument("neighbor_norm must be l1 or linf");
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "open") return Boundary::open;
    if (s == "periodic") return Boundary::periodic;
    throw std::invalid_argument("boundary must be open or periodic");
}

}  // namespace hloop
