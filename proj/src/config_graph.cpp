#include "hloop/config_graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace hloop {

namespace {

std::uint64_t encode(const Config& X) {
    std::uint64_t k = 0;
    for (const Point& p : X) k = (k << 7) | static_cast<std::uint64_t>(p.orbital());
    return k;
}

bool point_free(const Config& X, int skip, const Point& q, Constraint c) {
    for (int i = 0; i < static_cast<int>(X.size()); ++i) {
        if (i == skip) continue;
        if (X[i].site == q.site && (c == Constraint::u_infinity || X[i].spin == q.spin)) return false;
    }
    return true;
}

}  // namespace

bool admissible(const Config& X, Constraint c) {
    for (size_t i = 0; i < X.size(); ++i)
        for (size_t j = i + 1; j < X.size(); ++j) {
            if (X[i].site != X[j].site) continue;
            if (c == Constraint::u_infinity || X[i].spin == X[j].spin) return false;
        }
    return true;
}

std::vector<Config> representatives(int sites, int N, Constraint c) {
    std::vector<Config> out;
    const int M = 2 * sites;
    if (N < 1 || N > M) return out;
    std::vector<int> idx(N);
    for (int i = 0; i < N; ++i) idx[i] = i;
    while (true) {
        Config X;
        for (int o : idx) X.push_back(point_of_orbital(o));
        if (admissible(X, c)) out.push_back(X);
        int i = N - 1;
        while (i >= 0 && idx[i] == M - N + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < N; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

long count_representatives(int sites, int N, Constraint c) {
    return static_cast<long>(representatives(sites, N, c).size());
}

Permutation realized_permutation(const Config& X, const Config& Y) {
    if (X.size() != Y.size()) return {};
    Permutation tau(X.size(), -1);
    for (size_t j = 0; j < Y.size(); ++j) {
        for (size_t i = 0; i < X.size(); ++i)
            if (X[i] == Y[j]) {
                tau[j] = static_cast<int>(i);
                break;
            }
        if (tau[j] < 0) return {};
    }
    return tau;
}

std::vector<std::vector<int>> cycles(const Permutation& p) {
    std::vector<std::vector<int>> out;
    std::vector<bool> seen(p.size(), false);
    for (size_t s = 0; s < p.size(); ++s) {
        if (seen[s]) continue;
        std::vector<int> c;
        for (int j = static_cast<int>(s); !seen[j]; j = p[j]) {
            seen[j] = true;
            c.push_back(j);
        }
        out.push_back(c);
    }
    return out;
}

int perm_sign(const Permutation& p) {
    int s = 1;
    for (const auto& c : cycles(p))
        if (c.size() % 2 == 0) s = -s;
    return s;
}

std::vector<int> cycle_type(const Permutation& p) {
    std::vector<int> t;
    for (const auto& c : cycles(p)) t.push_back(static_cast<int>(c.size()));
    std::sort(t.rbegin(), t.rend());
    return t;
}

Permutation compose(const Permutation& a, const Permutation& b) {
    Permutation r(a.size());
    for (size_t j = 0; j < a.size(); ++j) r[j] = a[b[j]];
    return r;
}

std::vector<Permutation> allowed_permutations(const ConfigGraph& g, const Config& X) {
    if (!g.lattice) throw std::invalid_argument("config graph without lattice");
    if (static_cast<int>(X.size()) != g.N) throw std::invalid_argument("configuration has wrong particle number");
    if (g.N > 9) throw std::invalid_argument("config graph supports N <= 9");
    if (!admissible(X, g.constraint)) throw std::invalid_argument("configuration violates the constraint");
    const Lattice& lat = *g.lattice;
    std::unordered_set<std::uint64_t> seen{encode(X)};
    std::deque<Config> queue{X};
    std::set<Permutation> found;
    while (!queue.empty()) {
        Config Y = std::move(queue.front());
        queue.pop_front();
        Permutation tau = realized_permutation(X, Y);
        if (!tau.empty()) found.insert(tau);
        for (int i = 0; i < g.N; ++i)
            for (int x : lat.neighbors[Y[i].site]) {
                Point q{x, Y[i].spin};
                if (!point_free(Y, i, q, g.constraint)) continue;
                Config Z = Y;
                Z[i] = q;
                if (seen.insert(encode(Z)).second) {
                    if (static_cast<long>(seen.size()) > g.node_cap) throw std::runtime_error("config graph node cap exceeded");
                    queue.push_back(std::move(Z));
                }
            }
    }
    return {found.begin(), found.end()};
}

bool one_hole_parity_check(const ConfigGraph& g) {
    if (g.constraint != Constraint::u_infinity || g.N != g.lattice->size() - 1)
        throw std::invalid_argument("parity check requires N = |Lambda| - 1 and the U = infinity constraint");
    for (const Config& X : representatives(g.lattice->size(), g.N, g.constraint))
        for (const Permutation& t : allowed_permutations(g, X))
            if (perm_sign(t) != 1) return false;
    return true;
}

std::vector<PermutationRow> permutation_table(const ConfigGraph& g) {
    std::map<std::pair<std::vector<int>, int>, long> count;
    for (const Config& X : representatives(g.lattice->size(), g.N, g.constraint))
        for (const Permutation& t : allowed_permutations(g, X)) ++count[{cycle_type(t), perm_sign(t)}];
    std::vector<PermutationRow> rows;
    for (const auto& [key, n] : count) rows.push_back({key.first, key.second, n});
    return rows;
}

std::set<std::vector<int>> allowed_cycle_types(const ConfigGraph& g) {
    std::set<std::vector<int>> out;
    for (const auto& r : permutation_table(g)) out.insert(r.cycle_type);
    return out;
}

}  // namespace hloop
