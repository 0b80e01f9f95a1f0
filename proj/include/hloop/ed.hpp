#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hloop/lattice.hpp"
#include "hloop/types.hpp"

namespace hloop {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using cplx = std::complex<double>;

struct ModelParams {
    double U = 0.0;
    Eigen::MatrixXd U_offsite;  // empty means zero
    double b = 0.0;
    double beta = 1.0;
    cplx z{0.0, 1.0};
};

struct PhononParams {
    double omega = 1.0;
    Eigen::MatrixXd g;
    int n_max = 4;
    int n_total = -1;  // optional cap on total phonon number, -1 = none
};

struct PhotonParams {
    double L = 4.0;
    double kappa = 1.0;
    double m0 = 1.0;
    int n_max = 4;
    double rho_scale = 1.0;  // 0 removes the coupling
};

enum class BasisConstraint { none, gutzwiller };

struct FockBasis {
    int sites = 0;
    int N = 0;
    BasisConstraint constraint = BasisConstraint::none;
    std::optional<int> two_m;
    std::vector<std::uint64_t> states;  // bit o set = orbital o occupied
    std::unordered_map<std::uint64_t, int> index;

    int dim() const { return static_cast<int>(states.size()); }
    int find(std::uint64_t s) const;
    int two_m_of(int i) const;
    Eigen::VectorXd two_m_vector() const;
};

FockBasis make_fock_basis(int sites, int N, BasisConstraint c = BasisConstraint::none,
                          std::optional<int> two_m = std::nullopt);
std::vector<int> two_m_values(int sites, int N, BasisConstraint c);

struct BosonBasis {
    int modes = 0;
    int n_max = 0;
    int n_total = -1;
    std::vector<std::vector<int>> states;
    std::map<std::vector<int>, int> index;

    int dim() const { return static_cast<int>(states.size()); }
    int find(const std::vector<int>& s) const;
    Eigen::MatrixXd lower(int mode) const;
    Eigen::MatrixXd number() const;
};

BosonBasis make_boson_basis(int modes, int n_max, int n_total = -1);

// c_x^dagger c_y applied to column state gives sign * row state.
struct Hop {
    int row;
    int col;
    int x;
    int y;
    int sign;
};
std::vector<Hop> enumerate_hops(const Lattice& lat, const FockBasis& basis);

template <typename Scalar>
Mat<Scalar> build_hubbard(const Lattice& lat, const ModelParams& p, const FockBasis& basis,
                          const Eigen::MatrixXd* alpha = nullptr);

FockBasis gutzwiller_basis(const FockBasis& full);
template <typename Scalar>
Mat<Scalar> gutzwiller_project(const Mat<Scalar>& H, const FockBasis& full);

std::vector<double> resolvent_gap(const Lattice& lat, const ModelParams& p, int N, const std::vector<double>& U_list);

Eigen::MatrixXd build_holstein_hubbard(const Lattice& lat, const ModelParams& p, const PhononParams& ph,
                                       const FockBasis& el);

struct LangFirsov {
    Eigen::MatrixXd U_eff;            // diagonal entry is the on-site U_eff
    std::vector<Eigen::VectorXd> xi;  // xi[x] is a vector over sites
    Eigen::VectorXd onsite_shift;     // one-body polaron shift per site
    Eigen::VectorXd zeta(int x, int y) const { return xi[x] - xi[y]; }
};
LangFirsov lang_firsov_effective(const ModelParams& p, const PhononParams& ph, int sites);

Eigen::MatrixXd build_lang_firsov_hamiltonian(const Lattice& lat, const ModelParams& p, const PhononParams& ph,
                                              const FockBasis& el);

double photon_rho0(const PhotonParams& ph);
// line integral of the k=0 mode for the straight segment x -> y
double zero_mode_coupling(const Lattice& lat, const PhotonParams& ph, int x, int y);
Mat<cplx> build_rad_single_mode(const Lattice& lat, const ModelParams& p, const PhotonParams& ph,
                                const FockBasis& el);

struct ThermalResult {
    double Z = 0.0;
    double S3 = 0.0;
    std::map<int, double> sector_Z;  // keyed by 2m
    std::vector<double> observables;
};

template <typename Scalar>
ThermalResult thermal(const Mat<Scalar>& H, double beta, const Eigen::VectorXd& two_m,
                      const std::vector<Mat<Scalar>>& observables = {});

// Eigenvalues per S3 sector at a reference field b0.
struct SectorSpectrum {
    double b0 = 0.0;
    std::map<int, Eigen::VectorXd> energies;

    double Z(double beta, double b) const;
    double sector_Z(double beta, double b, int two_m) const;
    double S3(double beta, double b) const;
    double E_min() const;
};

constexpr int kDenseCap = 4096;

template <typename Scalar>
using SectorBuilder = std::function<Mat<Scalar>(const FockBasis&)>;

template <typename Scalar>
SectorSpectrum sector_spectrum(int sites, int N, BasisConstraint c, double b0, const SectorBuilder<Scalar>& build,
                               int cap = kDenseCap);

double relative_hermiticity_error(const Mat<double>& H);
double relative_hermiticity_error(const Mat<cplx>& H);

}  // namespace hloop
