#include "hloop/ed.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace hloop {

namespace {

constexpr std::uint64_t kUpMask = 0x5555555555555555ULL;
constexpr int kBuildCap = 16384;

int popcount(std::uint64_t v) { return std::popcount(v); }

int occ(std::uint64_t s, int site, int spin) { return static_cast<int>((s >> Point{site, spin}.orbital()) & 1ULL); }

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

template <typename Scalar>
Scalar phase_factor(double) {
    return Scalar(1);
}
template <>
cplx phase_factor<cplx>(double a) {
    return std::polar(1.0, a);
}

// Diagonal energy of one Fock state: on-site U, literal double sum over x != y, field term.
double diagonal_energy(const Lattice& lat, const Eigen::MatrixXd& Uxy, double U, double b, std::uint64_t s) {
    const int n = lat.size();
    double e = 0.0;
    for (int x = 0; x < n; ++x) e += U * occ(s, x, 1) * occ(s, x, -1);
    if (Uxy.size() > 0)
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                if (x != y) e += Uxy(x, y) * (occ(s, x, 1) + occ(s, x, -1)) * (occ(s, y, 1) + occ(s, y, -1));
    e -= b * (popcount(s & kUpMask) - popcount(s & ~kUpMask));
    return e;
}

void check_offsite(const Eigen::MatrixXd& Uxy, int n) {
    if (Uxy.size() == 0) return;
    if (Uxy.rows() != n || Uxy.cols() != n) throw std::invalid_argument("U_offsite has wrong shape");
    if ((Uxy - Uxy.transpose()).norm() > 1e-14) throw std::invalid_argument("U_offsite must be symmetric");
}

void check_alpha(const Lattice& lat, const Eigen::MatrixXd& a) {
    const int n = lat.size();
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("alpha has wrong shape");
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (a(x, y) != 0.0 && !lat.adjacent(x, y)) throw std::invalid_argument("alpha defined on a non-edge");
            if (std::abs(a(x, y) + a(y, x)) > 1e-14) throw std::invalid_argument("alpha must be antisymmetric");
        }
}


}  // namespace

int FockBasis::find(std::uint64_t s) const {
    auto it = index.find(s);
    return it == index.end() ? -1 : it->second;
}

int FockBasis::two_m_of(int i) const {
    std::uint64_t s = states[i];
    return popcount(s & kUpMask) - popcount(s & ~kUpMask);
}

Eigen::VectorXd FockBasis::two_m_vector() const {
    Eigen::VectorXd v(dim());
    for (int i = 0; i < dim(); ++i) v(i) = two_m_of(i);
    return v;
}

FockBasis make_fock_basis(int sites, int N, BasisConstraint c, std::optional<int> two_m) {
    if (sites < 1) throw std::invalid_argument("Fock basis needs at least one site");
    if (2 * sites > 64) throw InfeasibleOracle("Fock basis supports at most 32 sites");
    if (N < 1 || N > 2 * sites) throw std::invalid_argument("N out of range");
    if (binomial(2 * sites, N) > 5e6) throw InfeasibleOracle("Fock basis too large");
    FockBasis B;
    B.sites = sites;
    B.N = N;
    B.constraint = c;
    B.two_m = two_m;
    const int nbits = 2 * sites;
    std::uint64_t s = (N == 64) ? ~0ULL : ((1ULL << N) - 1);
    const std::uint64_t limit = nbits == 64 ? ~0ULL : (1ULL << nbits);
    while (true) {
        bool keep = true;
        if (c == BasisConstraint::gutzwiller && ((s & kUpMask) & ((s >> 1) & kUpMask))) keep = false;
        if (keep && two_m && popcount(s & kUpMask) - popcount(s & ~kUpMask) != *two_m) keep = false;
        if (keep) {
            B.index[s] = static_cast<int>(B.states.size());
            B.states.push_back(s);
        }
        // next bit pattern with the same popcount
        std::uint64_t t = s | (s - 1);
        if (t == ~0ULL) break;
        std::uint64_t next = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(s) + 1));
        if (nbits < 64 && next >= limit) break;
        if (next <= s) break;
        s = next;
    }
    if (B.dim() == 0) throw std::invalid_argument("empty effective space");
    return B;
}

std::vector<int> two_m_values(int sites, int N, BasisConstraint c) {
    std::vector<int> out;
    for (int nu = 0; nu <= N; ++nu) {
        int nd = N - nu;
        if (nu > sites || nd > sites) continue;
        if (c == BasisConstraint::gutzwiller && N > sites) continue;
        out.push_back(nu - nd);
    }
    return out;
}

int BosonBasis::find(const std::vector<int>& s) const {
    auto it = index.find(s);
    return it == index.end() ? -1 : it->second;
}

Eigen::MatrixXd BosonBasis::lower(int mode) const {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim(), dim());
    for (int j = 0; j < dim(); ++j) {
        if (states[j][mode] == 0) continue;
        std::vector<int> t = states[j];
        t[mode] -= 1;
        B(find(t), j) = std::sqrt(static_cast<double>(states[j][mode]));
    }
    return B;
}

Eigen::MatrixXd BosonBasis::number() const {
    Eigen::MatrixXd Nm = Eigen::MatrixXd::Zero(dim(), dim());
    for (int j = 0; j < dim(); ++j) {
        int n = 0;
        for (int v : states[j]) n += v;
        Nm(j, j) = n;
    }
    return Nm;
}

BosonBasis make_boson_basis(int modes, int n_max, int n_total) {
    if (modes < 0 || n_max < 0) throw std::invalid_argument("invalid boson basis");
    BosonBasis B;
    B.modes = modes;
    B.n_max = n_max;
    B.n_total = n_total;
    std::vector<int> s(modes, 0);
    while (true) {
        int tot = 0;
        for (int v : s) tot += v;
        if (n_total < 0 || tot <= n_total) {
            B.index[s] = B.dim();
            B.states.push_back(s);
        }
        int a = modes - 1;
        while (a >= 0 && ++s[a] > n_max) {
            s[a] = 0;
            --a;
        }
        if (a < 0) break;
        if (B.states.size() > static_cast<size_t>(kBuildCap)) throw InfeasibleOracle("boson basis too large");
    }
    return B;
}

std::vector<Hop> enumerate_hops(const Lattice& lat, const FockBasis& basis) {
    std::vector<Hop> hops;
    for (int col = 0; col < basis.dim(); ++col) {
        const std::uint64_t s = basis.states[col];
        for (int y = 0; y < lat.size(); ++y)
            for (int spin : {1, -1}) {
                const int oy = Point{y, spin}.orbital();
                if (!((s >> oy) & 1ULL)) continue;
                const std::uint64_t s1 = s & ~(1ULL << oy);
                const int p1 = popcount(s & ((1ULL << oy) - 1));
                for (int x : lat.neighbors[y]) {
                    const int ox = Point{x, spin}.orbital();
                    if ((s1 >> ox) & 1ULL) continue;
                    const int p2 = popcount(s1 & ((1ULL << ox) - 1));
                    const int row = basis.find(s1 | (1ULL << ox));
                    if (row < 0) continue;
                    hops.push_back({row, col, x, y, ((p1 + p2) % 2 == 0) ? 1 : -1});
                }
            }
    }
    return hops;
}

template <typename Scalar>
Mat<Scalar> build_hubbard(const Lattice& lat, const ModelParams& p, const FockBasis& basis,
                          const Eigen::MatrixXd* alpha) {
    if (basis.sites != lat.size()) throw std::invalid_argument("basis does not match lattice");
    check_offsite(p.U_offsite, lat.size());
    if (alpha) {
        check_alpha(lat, *alpha);
        if constexpr (std::is_same_v<Scalar, double>)
            if (alpha->cwiseAbs().maxCoeff() > 0.0) throw std::invalid_argument("phases require a complex matrix");
    }
    const int D = basis.dim();
    Mat<Scalar> H = Mat<Scalar>::Zero(D, D);
    for (int i = 0; i < D; ++i) H(i, i) = diagonal_energy(lat, p.U_offsite, p.U, p.b, basis.states[i]);
    for (const Hop& h : enumerate_hops(lat, basis)) {
        double a = alpha ? (*alpha)(h.x, h.y) : 0.0;
        H(h.row, h.col) += -lat.hopping(h.x, h.y) * h.sign * phase_factor<Scalar>(a);
    }
    return H;
}

template Mat<double> build_hubbard<double>(const Lattice&, const ModelParams&, const FockBasis&,
                                           const Eigen::MatrixXd*);
template Mat<cplx> build_hubbard<cplx>(const Lattice&, const ModelParams&, const FockBasis&,
                                       const Eigen::MatrixXd*);

FockBasis gutzwiller_basis(const FockBasis& full) {
    if (full.constraint != BasisConstraint::none) throw std::invalid_argument("expected an unconstrained basis");
    FockBasis B;
    B.sites = full.sites;
    B.N = full.N;
    B.constraint = BasisConstraint::gutzwiller;
    B.two_m = full.two_m;
    for (std::uint64_t s : full.states)
        if (!((s & kUpMask) & ((s >> 1) & kUpMask))) {
            B.index[s] = B.dim();
            B.states.push_back(s);
        }
    if (B.dim() == 0) throw std::invalid_argument("empty effective space: every configuration has a double occupancy");
    return B;
}

template <typename Scalar>
Mat<Scalar> gutzwiller_project(const Mat<Scalar>& H, const FockBasis& full) {
    if (H.rows() != full.dim() || H.cols() != full.dim()) throw std::invalid_argument("dimension mismatch");
    FockBasis G = gutzwiller_basis(full);
    std::vector<int> idx;
    for (std::uint64_t s : G.states) idx.push_back(full.find(s));
    Mat<Scalar> P(G.dim(), G.dim());
    for (int i = 0; i < G.dim(); ++i)
        for (int j = 0; j < G.dim(); ++j) P(i, j) = H(idx[i], idx[j]);
    return P;
}

template Mat<double> gutzwiller_project<double>(const Mat<double>&, const FockBasis&);
template Mat<cplx> gutzwiller_project<cplx>(const Mat<cplx>&, const FockBasis&);

std::vector<double> resolvent_gap(const Lattice& lat, const ModelParams& p, int N, const std::vector<double>& U_list) {
    if (p.z.imag() == 0.0) throw std::invalid_argument("z must be non-real");
    for (size_t i = 0; i < U_list.size(); ++i) {
        if (!(U_list[i] > 0.0)) throw std::invalid_argument("U values must be positive");
        if (i > 0 && !(U_list[i] > U_list[i - 1])) throw std::invalid_argument("U values must be ascending");
    }
    FockBasis full = make_fock_basis(lat.size(), N);
    FockBasis G = gutzwiller_basis(full);
    if (full.dim() > kDenseCap) throw InfeasibleOracle("resolvent: dimension above dense cap");
    ModelParams p0 = p;
    p0.U = 0.0;
    Mat<cplx> Hinf = build_hubbard<cplx>(lat, p0, G);
    Mat<cplx> Rinf = (Hinf - p.z * Mat<cplx>::Identity(G.dim(), G.dim())).inverse();
    Mat<cplx> E = Mat<cplx>::Zero(full.dim(), full.dim());
    for (int i = 0; i < G.dim(); ++i)
        for (int j = 0; j < G.dim(); ++j) E(full.find(G.states[i]), full.find(G.states[j])) = Rinf(i, j);
    std::vector<double> out;
    for (double U : U_list) {
        ModelParams pu = p;
        pu.U = U;
        Mat<cplx> H = build_hubbard<cplx>(lat, pu, full);
        Mat<cplx> R = (H - p.z * Mat<cplx>::Identity(full.dim(), full.dim())).partialPivLu().inverse();
        Eigen::JacobiSVD<Mat<cplx>> svd(R - E);
        out.push_back(svd.singularValues()(0));
    }
    return out;
}

Eigen::MatrixXd build_holstein_hubbard(const Lattice& lat, const ModelParams& p, const PhononParams& ph,
                                       const FockBasis& el) {
    const int n = lat.size();
    if (ph.g.rows() != n || ph.g.cols() != n) throw std::invalid_argument("phonon g has wrong shape");
    if ((ph.g - ph.g.transpose()).norm() > 1e-14) throw std::invalid_argument("phonon g must be symmetric");
    if (!(ph.omega > 0.0)) throw std::invalid_argument("phonon omega must be > 0");
    BosonBasis bb = make_boson_basis(n, ph.n_max, ph.n_total);
    const long dim = static_cast<long>(el.dim()) * bb.dim();
    if (dim > kBuildCap) throw InfeasibleOracle("Holstein-Hubbard basis above build cap");
    Eigen::MatrixXd Hel = build_hubbard<double>(lat, p, el);
    Eigen::MatrixXd Nb = bb.number();
    std::vector<Eigen::MatrixXd> C(n, Eigen::MatrixXd::Zero(bb.dim(), bb.dim()));
    for (int y = 0; y < n; ++y) {
        Eigen::MatrixXd by = bb.lower(y);
        Eigen::MatrixXd q = by + by.transpose();
        for (int x = 0; x < n; ++x)
            if (ph.g(x, y) != 0.0) C[x] += ph.g(x, y) * q;
    }
    const int db = bb.dim();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < el.dim(); ++i) {
        for (int j = 0; j < el.dim(); ++j)
            if (Hel(i, j) != 0.0) H.block(i * db, j * db, db, db).diagonal().array() += Hel(i, j);
        auto blk = H.block(i * db, i * db, db, db);
        blk += ph.omega * Nb;
        for (int x = 0; x < n; ++x) {
            int nx = occ(el.states[i], x, 1) + occ(el.states[i], x, -1);
            if (nx) blk += nx * C[x];
        }
    }
    return H;
}

LangFirsov lang_firsov_effective(const ModelParams& p, const PhononParams& ph, int sites) {
    if (!(ph.omega > 0.0)) throw std::invalid_argument("phonon omega must be > 0");
    const Eigen::MatrixXd& g = ph.g;
    LangFirsov lf;
    Eigen::MatrixXd gg = g * g;
    lf.U_eff = Eigen::MatrixXd::Zero(sites, sites);
    for (int x = 0; x < sites; ++x)
        for (int y = 0; y < sites; ++y) {
            double base = (x == y) ? p.U : (p.U_offsite.size() ? p.U_offsite(x, y) : 0.0);
            lf.U_eff(x, y) = base - (x == y ? 2.0 : 1.0) * gg(x, y) / ph.omega;
        }
    lf.onsite_shift = -gg.diagonal() / ph.omega;
    for (int x = 0; x < sites; ++x) lf.xi.push_back(g.row(x).transpose() / ph.omega);
    return lf;
}

Eigen::MatrixXd build_lang_firsov_hamiltonian(const Lattice& lat, const ModelParams& p, const PhononParams& ph,
                                              const FockBasis& el) {
    const int n = lat.size();
    LangFirsov lf = lang_firsov_effective(p, ph, n);
    BosonBasis bb = make_boson_basis(n, ph.n_max, ph.n_total);
    const int db = bb.dim();
    const long dim = static_cast<long>(el.dim()) * db;
    if (dim > kBuildCap) throw InfeasibleOracle("Lang-Firsov basis above build cap");
    std::vector<Eigen::MatrixXd> gen(n);
    for (int z = 0; z < n; ++z) {
        Eigen::MatrixXd bz = bb.lower(z);
        gen[z] = bz.transpose() - bz;
    }
    std::map<std::pair<int, int>, Eigen::MatrixXd> disp;
    for (int x = 0; x < n; ++x)
        for (int y : lat.neighbors[x]) {
            Eigen::VectorXd zeta = lf.zeta(x, y);
            Eigen::MatrixXd G = Eigen::MatrixXd::Zero(db, db);
            for (int z = 0; z < n; ++z)
                if (zeta(z) != 0.0) G += zeta(z) * gen[z];
            disp[{x, y}] = G.exp();
        }
    Eigen::MatrixXd Uoff = lf.U_eff;
    Uoff.diagonal().setZero();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd Nb = bb.number();
    for (int i = 0; i < el.dim(); ++i) {
        const std::uint64_t s = el.states[i];
        double e = diagonal_energy(lat, Uoff, 0.0, p.b, s);
        for (int x = 0; x < n; ++x) {
            e += lf.U_eff(x, x) * occ(s, x, 1) * occ(s, x, -1);
            e += lf.onsite_shift(x) * (occ(s, x, 1) + occ(s, x, -1));
        }
        auto blk = H.block(i * db, i * db, db, db);
        blk += ph.omega * Nb;
        blk.diagonal().array() += e;
    }
    for (const Hop& h : enumerate_hops(lat, el))
        H.block(h.row * db, h.col * db, db, db) += -lat.hopping(h.x, h.y) * h.sign * disp.at({h.x, h.y});
    return H;
}

double photon_rho0(const PhotonParams& ph) { return ph.rho_scale * std::pow(ph.L, -1.5); }

double zero_mode_coupling(const Lattice& lat, const PhotonParams& ph, int x, int y) {
    if (lat.spec.dimension > 3) throw std::invalid_argument("photon coupling requires d <= 3");
    std::vector<int> d = lat.displacement(x, y);
    double proj = 0.0;
    for (int v : d) proj += v / std::sqrt(3.0);
    return photon_rho0(ph) / std::sqrt(ph.m0) * proj;
}

Mat<cplx> build_rad_single_mode(const Lattice& lat, const ModelParams& p, const PhotonParams& ph,
                                const FockBasis& el) {
    if (lat.spec.dimension > 3) throw std::invalid_argument("photon model requires d <= 3");
    if (!(ph.L > 0.0 && ph.kappa > 0.0 && ph.m0 > 0.0)) throw std::invalid_argument("photon L, kappa, m0 must be > 0");
    if (ph.kappa >= 2.0 * M_PI / ph.L)
        throw std::invalid_argument("single-mode model requires kappa < 2 pi / L");
    for (int a = 0; a < lat.spec.dimension; ++a)
        if (ph.L < lat.spec.side) throw std::invalid_argument("photon box must contain the lattice (L >= side)");
    BosonBasis bb = make_boson_basis(2, ph.n_max);
    const int db = bb.dim();
    const long dim = static_cast<long>(el.dim()) * db;
    if (dim > kBuildCap) throw InfeasibleOracle("photon basis above build cap");
    Eigen::MatrixXd field = Eigen::MatrixXd::Zero(db, db);
    for (int lam = 0; lam < 2; ++lam) {
        Eigen::MatrixXd a = bb.lower(lam);
        field += (a + a.transpose()) / std::sqrt(2.0);
    }
    Mat<cplx> Hel = build_hubbard<cplx>(lat, p, el);
    Mat<cplx> H = Mat<cplx>::Zero(dim, dim);
    Eigen::MatrixXd Nb = bb.number();
    for (int i = 0; i < el.dim(); ++i) {
        auto blk = H.block(i * db, i * db, db, db);
        blk += (ph.m0 * Nb).cast<cplx>();
        blk.diagonal().array() += Hel(i, i);
    }
    std::map<std::pair<int, int>, Mat<cplx>> phase;
    for (int x = 0; x < lat.size(); ++x)
        for (int y : lat.neighbors[x]) {
            Mat<cplx> A = cplx(0.0, zero_mode_coupling(lat, ph, x, y)) * field.cast<cplx>();
            phase[{x, y}] = A.exp();
        }
    for (const Hop& h : enumerate_hops(lat, el))
        H.block(h.row * db, h.col * db, db, db) += -lat.hopping(h.x, h.y) * h.sign * phase.at({h.x, h.y});
    return H;
}

double relative_hermiticity_error(const Mat<double>& H) {
    double n = H.norm();
    return n == 0.0 ? 0.0 : (H - H.transpose()).norm() / n;
}

double relative_hermiticity_error(const Mat<cplx>& H) {
    double n = H.norm();
    return n == 0.0 ? 0.0 : (H - H.adjoint()).norm() / n;
}

template <typename Scalar>
ThermalResult thermal(const Mat<Scalar>& H, double beta, const Eigen::VectorXd& two_m,
                      const std::vector<Mat<Scalar>>& observables) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (H.rows() != H.cols() || two_m.size() != H.rows()) throw std::invalid_argument("dimension mismatch");
    if (relative_hermiticity_error(H) > 1e-12) throw std::invalid_argument("non-Hermitian input");
    if (H.rows() > kDenseCap) throw InfeasibleOracle("thermal: dimension above dense cap");
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(H);
    const Eigen::VectorXd& E = es.eigenvalues();
    const auto& V = es.eigenvectors();
    Eigen::VectorXd w = (-beta * E.array()).exp();
    ThermalResult r;
    r.Z = w.sum();
    Eigen::MatrixXd prob = V.cwiseAbs2();  // prob(i, k) = |<i|v_k>|^2
    Eigen::VectorXd diag_weight = prob * w;
    r.S3 = 0.5 * two_m.dot(diag_weight) / r.Z;
    for (int i = 0; i < H.rows(); ++i) r.sector_Z[static_cast<int>(std::lround(two_m(i)))] += diag_weight(i);
    for (const auto& O : observables) {
        Mat<Scalar> OV = V.adjoint() * O * V;
        double acc = 0.0;
        for (int k = 0; k < H.rows(); ++k) acc += w(k) * std::real(OV(k, k));
        r.observables.push_back(acc / r.Z);
    }
    return r;
}

template ThermalResult thermal<double>(const Mat<double>&, double, const Eigen::VectorXd&,
                                       const std::vector<Mat<double>>&);
template ThermalResult thermal<cplx>(const Mat<cplx>&, double, const Eigen::VectorXd&, const std::vector<Mat<cplx>>&);

double SectorSpectrum::Z(double beta, double b) const {
    double z = 0.0;
    for (const auto& [tm, e] : energies) z += sector_Z(beta, b, tm);
    return z;
}

double SectorSpectrum::sector_Z(double beta, double b, int two_m) const {
    auto it = energies.find(two_m);
    if (it == energies.end()) return 0.0;
    return (-beta * (it->second.array() - (b - b0) * two_m)).exp().sum();
}

double SectorSpectrum::S3(double beta, double b) const {
    double num = 0.0, z = 0.0;
    for (const auto& [tm, e] : energies) {
        double zm = sector_Z(beta, b, tm);
        num += 0.5 * tm * zm;
        z += zm;
    }
    return num / z;
}

double SectorSpectrum::E_min() const {
    double m = INFINITY;
    for (const auto& [tm, e] : energies) m = std::min(m, e.minCoeff());
    return m;
}

template <typename Scalar>
SectorSpectrum sector_spectrum(int sites, int N, BasisConstraint c, double b0, const SectorBuilder<Scalar>& build,
                               int cap) {
    SectorSpectrum s;
    s.b0 = b0;
    for (int tm : two_m_values(sites, N, c)) {
        FockBasis basis = make_fock_basis(sites, N, c, tm);
        Mat<Scalar> H = build(basis);
        if (H.rows() > cap) throw InfeasibleOracle("sector dimension above dense cap");
        if (relative_hermiticity_error(H) > 1e-12) throw std::invalid_argument("non-Hermitian sector block");
        Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(H, Eigen::EigenvaluesOnly);
        s.energies[tm] = es.eigenvalues();
    }
    return s;
}

template SectorSpectrum sector_spectrum<double>(int, int, BasisConstraint, double, const SectorBuilder<double>&, int);
template SectorSpectrum sector_spectrum<cplx>(int, int, BasisConstraint, double, const SectorBuilder<cplx>&, int);

}  // namespace hloop
