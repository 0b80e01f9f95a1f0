#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hloop/config_graph.hpp"
#include "hloop/ed.hpp"
#include "hloop/influence.hpp"
#include "hloop/lattice.hpp"
#include "hloop/loops.hpp"
#include "hloop/stats.hpp"

namespace hloop {

// Phonon ED can be run on H_HH directly or on its Lang-Firsov rotation; the
// traces agree, but truncating the rotated operator converges much faster.
enum class EdFrame { direct, lang_firsov };

struct Model {
    std::string name;
    Lattice lat;
    int N = 1;
    Constraint constraint = Constraint::finite_u;
    ModelParams p;
    std::optional<PhononParams> phonon;
    std::optional<PhotonParams> photon;
    EdFrame ed_frame = EdFrame::direct;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;  // 0 for exact results
    long samples = 0;
    long accepted = 0;
    std::string method;  // ed | mc-field | mc-loop
};

struct McOptions {
    long samples = 100000;
    std::uint64_t seed = 1;
    int batches = 32;
    int threads = 1;
};

// Raised when no sample of an MC run lands in the accepted event.
struct ZeroAcceptance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct McPartition {
    Estimate field;
    Estimate loop;
    Estimate s3;  // loop-form (1/2 beta) d/db log Z
    double acceptance = 0.0;
    long representatives = 0;
    double boson_factor = 1.0;
    std::map<std::vector<int>, MeanError> D;  // per cycle type of tau, b-free
    std::vector<double> batch_field;          // per-batch means, before normalization
    std::vector<double> batch_loop;
};

McPartition mc_partition(const Model& m, const McOptions& opt);

struct Magnetization {
    Estimate s3;
    double bound = 0.0;  // (N/2) tanh(beta b)
    double margin = 0.0;
};
Magnetization magnetization_u_infinity(const Model& m, const McOptions& opt);

struct PartitionWeights {
    std::map<std::vector<int>, MeanError> D;
    std::set<std::vector<int>> support() const;
    double Z(double beta, double b) const;  // sum_n D_n prod cosh(beta b n_i)
    double Z_error(double beta, double b) const;
};
PartitionWeights partition_weights(const Model& m, const McOptions& opt);

// exact side
SectorSpectrum ed_spectrum(const Model& m, double b0 = 0.0);
Estimate ed_partition(const Model& m);
double ed_magnetization(const Model& m);

std::vector<double> chebyshev_b_grid(int count, double beta, double b_max);

struct Coefficients {
    std::vector<double> C;  // C[k], k = 0..N
    double residual = 0.0;  // max |V C - Z| / max |Z|
    double condition = 0.0;
    double parity_violation = 0.0;  // max |C_k| with N - k odd, over max |C|
    double beta = 1.0;
    double Z(double b) const;
};
Coefficients one_d_coefficients(const Model& m, double beta, const std::vector<double>& b_grid);

struct SectorRow {
    int two_m;
    double ed;
    double coefficient_reading;
    double literal_reading;
};
struct SectorReport {
    std::vector<SectorRow> rows;
    double residual_coefficient = 0.0;  // max relative residual
    double residual_literal = 0.0;
    bool coefficient_matches = false;
    bool literal_matches = false;
};
SectorReport sector_identity_check(const Model& m, double beta, const Coefficients& c);

struct AlRow {
    std::string instance;
    double beta;
    double b;
    double s3;
    double bound;
    double margin;
};
struct AlReport {
    std::vector<AlRow> rows;
    bool all_positive = true;
};
AlReport aizenman_lieb_report(const std::vector<Model>& instances, const std::vector<double>& betas,
                              const std::vector<double>& bs);

struct LoopAudit {
    long samples = 0;
    long traced = 0;
    long spin_identity_fail = 0;    // sum sigma_0 vs sum eps w
    long cross_section_fail = 0;
    long flip_field_fail = 0;       // B(g^xi m) vs B_xi(m)
    long flip_average_fail = 0;     // 2^N average vs prod cosh
    long involution_fail = 0;
    long winding_cycle_fail = 0;    // infinite U only
    long winding_range_fail = 0;    // open 1D only: w in {0, 1}
    std::map<int, long> winding_histogram;
    bool clean() const;
};
LoopAudit audit_loops(const Model& m, const McOptions& opt);

}  // namespace hloop
