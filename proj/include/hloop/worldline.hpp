#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "hloop/lattice.hpp"
#include "hloop/rng.hpp"
#include "hloop/types.hpp"
#include "hloop/config_graph.hpp"

namespace hloop {

struct Jump {
    double time;
    int from;
    int to;
};

struct ElectronPath {
    Point start;
    std::vector<Jump> jumps;

    int site_at(double t) const;  // right-continuous
    int end_site() const { return jumps.empty() ? start.site : jumps.back().to; }
};

struct Bundle {
    double beta = 1.0;
    std::vector<ElectronPath> paths;

    Config initial() const;
    Config final() const;
};

struct EventFlags {
    bool in_D = true;
    bool in_D_infinity = true;
    bool periodic = false;
    Permutation tau;  // set when periodic: X_beta[j] = X_0[tau[j]]
};

struct TimelineEvent {
    double time;
    int electron;
    int from;
    int to;
};
// All jumps of the bundle ordered by time, ties by electron index.
std::vector<TimelineEvent> merged_events(const Bundle& b);

ElectronPath sample_free_path(const Lattice& lat, Point x0, double beta, CounterRng& rng);
EventFlags classify(const Bundle& b);

struct Draw {
    Bundle bundle;
    EventFlags flags;
    int representative = -1;
};

// Sample `sample_id` of an ensemble: stream 0 picks the representative
// uniformly, stream j + 1 drives electron j.
Draw sample_bundle(const Lattice& lat, const std::vector<Config>& reps, double beta, std::uint64_t seed,
                   std::uint64_t sample_id);

struct PathEnsembleConfig {
    double beta = 1.0;
    long samples = 1;
    std::uint64_t seed = 1;
    Constraint constraint = Constraint::finite_u;
};
std::vector<Draw> sample_ensemble(const Lattice& lat, int N, const PathEnsembleConfig& cfg, long first = 0,
                                  long count = -1);

struct PathIntegrals {
    double coulomb = 0.0;          // int V~ ds
    double mu_compensation = 0.0;  // int sum_j d(x_j) ds
    double potential = 0.0;        // int sum_j v(x_j) ds
};
PathIntegrals coulomb_integral(const Bundle& b, const Lattice& lat, double U, const Eigen::MatrixXd& U_offsite,
                               const Eigen::VectorXd* site_potential = nullptr);
// on-site interaction given per site
PathIntegrals coulomb_integral(const Bundle& b, const Lattice& lat, const Eigen::VectorXd& U,
                               const Eigen::MatrixXd& U_offsite, const Eigen::VectorXd* site_potential = nullptr);

double stochastic_phase(const ElectronPath& p, const Eigen::MatrixXd& alpha, double s, double t);

struct FkEstimate {
    std::complex<double> value;
    double std_error = 0.0;
    std::complex<double> exact;
};
std::complex<double> fk_exact(const Lattice& lat, const Eigen::VectorXd& v, const Eigen::MatrixXd& alpha, double beta,
                              Point X, Point Y);
FkEstimate fk_check_single(const Lattice& lat, const Eigen::VectorXd& v, const Eigen::MatrixXd& alpha, double beta,
                           Point X, Point Y, long n_samples, std::uint64_t seed);

}  // namespace hloop
