#pragma once

#include <set>
#include <vector>

#include "hloop/lattice.hpp"
#include "hloop/types.hpp"

namespace hloop {

struct ConfigGraph {
    const Lattice* lattice = nullptr;
    int N = 1;
    Constraint constraint = Constraint::finite_u;
    long node_cap = 5'000'000;
};

bool admissible(const Config& X, Constraint c);
// One labeled member per class of [Omega^N] under relabeling, points sorted by orbital.
std::vector<Config> representatives(int sites, int N, Constraint c);
long count_representatives(int sites, int N, Constraint c);

// tau with Y[j] = X[tau[j]]; empty when Y is not a relabeling of X.
Permutation realized_permutation(const Config& X, const Config& Y);
int perm_sign(const Permutation& p);
std::vector<int> cycle_type(const Permutation& p);  // descending
std::vector<std::vector<int>> cycles(const Permutation& p);
Permutation compose(const Permutation& a, const Permutation& b);  // (a o b)(j) = a(b(j))

std::vector<Permutation> allowed_permutations(const ConfigGraph& g, const Config& X);
bool one_hole_parity_check(const ConfigGraph& g);

struct PermutationRow {
    std::vector<int> cycle_type;
    int sign;
    long multiplicity;  // number of (base representative, permutation) pairs
};
std::vector<PermutationRow> permutation_table(const ConfigGraph& g);
std::set<std::vector<int>> allowed_cycle_types(const ConfigGraph& g);

}  // namespace hloop
