#pragma once

#include <Eigen/Dense>
#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "hloop/ed.hpp"
#include "hloop/worldline.hpp"

namespace hloop {

enum class BosonKind { phonon, photon };

struct BoseMode {
    double omega;
    Eigen::MatrixXd coupling;  // coupling(x, y) for a jump x -> y, antisymmetric
    std::string label;
};

struct BoseModeSet {
    BosonKind kind = BosonKind::phonon;
    std::vector<BoseMode> modes;
    std::vector<double> oscillators;  // frequencies of the physical oscillators
};

double kernel(double beta, double omega, double s, double t);

BoseModeSet phonon_modes(const Lattice& lat, const ModelParams& p, const PhononParams& ph);

std::array<double, 3> polarization(const std::array<double, 3>& k, int lambda);
// wave vectors of (2 pi / L) Z^3 inside the closed ball of radius kappa
std::vector<std::array<double, 3>> retained_wave_vectors(double L, double kappa);
BoseModeSet photon_modes(const Lattice& lat, const PhotonParams& ph);

struct JumpRecord {
    double time;
    int from;
    int to;
};
std::vector<JumpRecord> all_jumps(const Bundle& b);

double influence_q(const std::vector<JumpRecord>& jumps, const BoseModeSet& modes, double beta);
double influence_q(const Bundle& b, const BoseModeSet& modes);
// W = exp(-factor Q); the Gaussian characteristic function gives factor 1/2
double influence_weight(const Bundle& b, const BoseModeSet& modes, double factor = 0.5);

// Q_n for n = 0..n_max with every jump snapped to the right edge of its dyadic bin.
std::vector<double> discretization_convergence(const Bundle& b, const BoseModeSet& modes, int n_max);

// prod over oscillators of (1 - e^{-beta omega})^{-1}
double free_boson_factor(const BoseModeSet& modes, double beta);

void write_modes_csv(std::ostream& os, const Lattice& lat, const BoseModeSet& modes);

}  // namespace hloop
