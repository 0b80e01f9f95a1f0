#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hloop/ed.hpp"

using namespace hloop;

namespace {

Lattice chain(int side, Boundary b = Boundary::open) { return build_lattice({1, side, 1.0, NeighborNorm::l1, b}); }

Lattice single_site() {
    Lattice lat;
    lat.spec = {1, 2, 1.0, NeighborNorm::l1, Boundary::open};
    lat.vertices = {{0}};
    lat.hopping = Eigen::MatrixXd::Zero(1, 1);
    lat.degrees = Eigen::VectorXd::Zero(1);
    lat.neighbors = {{}};
    return lat;
}

template <typename M>
Eigen::VectorXd spectrum(const M& H) {
    Eigen::SelfAdjointEigenSolver<M> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

TEST_CASE("two-site one-electron hopping block") {
    Lattice lat = chain(2);
    FockBasis B = make_fock_basis(2, 1);
    Eigen::VectorXd e = spectrum(build_hubbard<double>(lat, {}, B));
    REQUIRE(e.size() == 4);
    CHECK(e(0) == doctest::Approx(-1.0));
    CHECK(e(1) == doctest::Approx(-1.0));
    CHECK(e(2) == doctest::Approx(1.0));
    CHECK(e(3) == doctest::Approx(1.0));
}

TEST_CASE("two-site Hubbard dimer ground state") {
    Lattice lat = chain(2);
    ModelParams p;
    p.U = 8.0;
    FockBasis B = make_fock_basis(2, 2, BasisConstraint::none, 0);
    Eigen::VectorXd e = spectrum(build_hubbard<double>(lat, p, B));
    double t = 1.0;
    CHECK(e(0) == doctest::Approx(p.U / 2 - std::sqrt(p.U * p.U / 4 + 4 * t * t)).epsilon(1e-12));
    CHECK(e(0) == doctest::Approx(-0.4721359549995796).epsilon(1e-12));
}

TEST_CASE("basis sizes agree with brute-force counts") {
    for (int sites : {2, 4})
        for (int N = 1; N <= 2 * sites; ++N) {
            FockBasis full = make_fock_basis(sites, N);
            int brute = 0, hard = 0;
            for (std::uint64_t s = 0; s < (1ULL << (2 * sites)); ++s) {
                if (std::popcount(s) != N) continue;
                ++brute;
                bool dbl = false;
                for (int x = 0; x < sites; ++x) dbl |= ((s >> (2 * x)) & 3ULL) == 3ULL;
                hard += !dbl;
            }
            CHECK(full.dim() == brute);
            if (hard > 0) CHECK(gutzwiller_basis(full).dim() == hard);
            else CHECK_THROWS(gutzwiller_basis(full));
        }
    CHECK(gutzwiller_basis(make_fock_basis(4, 3)).dim() == 32);
}

TEST_CASE("phases: constant and site-local gauge leave the open-chain spectrum unchanged") {
    Lattice lat = chain(4);
    ModelParams p;
    p.U = 3.0;
    p.b = 0.2;
    FockBasis B = make_fock_basis(4, 3);
    Eigen::VectorXd e0 = spectrum(build_hubbard<cplx>(lat, p, B));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    for (const auto& e : lat.edges) {
        a(e.x, e.y) = 0.7;
        a(e.y, e.x) = -0.7;
    }
    Mat<cplx> H = build_hubbard<cplx>(lat, p, B, &a);
    CHECK(relative_hermiticity_error(H) < 1e-12);
    CHECK((spectrum(H) - e0).cwiseAbs().maxCoeff() < 1e-10);

    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-3, 3);
    Eigen::VectorXd phi(4);
    for (int x = 0; x < 4; ++x) phi(x) = u(gen);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    for (const auto& e : lat.edges) {
        g(e.x, e.y) = phi(e.x) - phi(e.y);
        g(e.y, e.x) = -g(e.x, e.y);
    }
    CHECK((spectrum(build_hubbard<cplx>(lat, p, B, &g)) - e0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("phases on the periodic ring: site-local gauge invariance") {
    Lattice lat = chain(4, Boundary::periodic);
    ModelParams p;
    p.U = 2.0;
    FockBasis B = make_fock_basis(4, 2);
    Eigen::VectorXd e0 = spectrum(build_hubbard<cplx>(lat, p, B));
    Eigen::VectorXd phi(4);
    phi << 0.3, -1.1, 2.0, 0.4;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    for (const auto& e : lat.edges) {
        g(e.x, e.y) = phi(e.x) - phi(e.y);
        g(e.y, e.x) = -g(e.x, e.y);
    }
    CHECK((spectrum(build_hubbard<cplx>(lat, p, B, &g)) - e0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("invalid phases are rejected") {
    Lattice lat = chain(4);
    FockBasis B = make_fock_basis(4, 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    a(0, 2) = 0.1;
    a(2, 0) = -0.1;
    CHECK_THROWS(build_hubbard<cplx>(lat, {}, B, &a));
    a.setZero();
    a(0, 1) = 0.1;
    a(1, 0) = 0.1;
    CHECK_THROWS(build_hubbard<cplx>(lat, {}, B, &a));
    CHECK_THROWS(make_fock_basis(4, 9));
}

TEST_CASE("Gutzwiller projection") {
    Lattice lat = chain(4);
    FockBasis full = make_fock_basis(4, 3);
    ModelParams p0;
    Eigen::MatrixXd P = gutzwiller_project<double>(build_hubbard<double>(lat, p0, full), full);
    FockBasis G = gutzwiller_basis(full);
    CHECK(P.rows() == 32);
    CHECK((P - build_hubbard<double>(lat, p0, G)).norm() == 0.0);
    ModelParams pu = p0;
    pu.U = 123.0;
    CHECK((build_hubbard<double>(lat, pu, G) - build_hubbard<double>(lat, p0, G)).norm() == 0.0);
    CHECK_THROWS(gutzwiller_basis(make_fock_basis(4, 8)));
}

TEST_CASE("resolvent gap tends to zero") {
    Lattice lat = chain(4);
    ModelParams p;
    std::vector<double> Us = {1e2, 1e3, 1e4, 1e6};
    auto gap = resolvent_gap(lat, p, 3, Us);
    for (size_t i = 1; i < gap.size(); ++i) CHECK(gap[i] < gap[i - 1]);
    CHECK(gap.back() < 1e-3);
    auto g1 = resolvent_gap(lat, p, 1, Us);
    for (double v : g1) CHECK(v < 1e-12);
    ModelParams pr = p;
    pr.z = {1.0, 0.0};
    CHECK_THROWS(resolvent_gap(lat, pr, 3, Us));
}

TEST_CASE("Holstein-Hubbard with g = 0 is a tensor sum") {
    Lattice lat = chain(2);
    ModelParams p;
    p.U = 2.0;
    PhononParams ph;
    ph.omega = 1.3;
    ph.g = Eigen::MatrixXd::Zero(2, 2);
    ph.n_max = 2;
    FockBasis B = make_fock_basis(2, 2);
    Eigen::VectorXd eh = spectrum(build_hubbard<double>(lat, p, B));
    std::vector<double> expect;
    for (int i = 0; i < eh.size(); ++i)
        for (int n1 = 0; n1 <= 2; ++n1)
            for (int n2 = 0; n2 <= 2; ++n2) expect.push_back(eh(i) + ph.omega * (n1 + n2));
    std::sort(expect.begin(), expect.end());
    Eigen::VectorXd e = spectrum(build_holstein_hubbard(lat, p, ph, B));
    REQUIRE(e.size() == static_cast<int>(expect.size()));
    for (int i = 0; i < e.size(); ++i) CHECK(e(i) == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("displaced oscillator: one site, one electron") {
    Lattice lat = single_site();
    PhononParams ph;
    ph.omega = 1.0;
    ph.g = Eigen::MatrixXd::Constant(1, 1, 0.6);
    FockBasis B = make_fock_basis(1, 1);
    double prev = INFINITY;
    for (int n : {4, 8, 16}) {
        ph.n_max = n;
        double e0 = spectrum(build_holstein_hubbard(lat, {}, ph, B))(0);
        double err = std::abs(e0 - (-0.36));
        CHECK(err <= prev);
        prev = err;
    }
    CHECK(prev < 1e-10);
}

TEST_CASE("Lang-Firsov effective couplings") {
    ModelParams p;
    p.U = 5.0;
    PhononParams ph;
    ph.omega = 2.0;
    ph.g = 0.5 * Eigen::MatrixXd::Identity(3, 3);
    LangFirsov lf = lang_firsov_effective(p, ph, 3);
    for (int x = 0; x < 3; ++x) {
        CHECK(lf.U_eff(x, x) == doctest::Approx(5.0 - 2 * 0.25 / 2.0));
        CHECK(lf.zeta(x, x).norm() == 0.0);
        for (int y = 0; y < 3; ++y)
            if (x != y) {
                CHECK(lf.U_eff(x, y) == 0.0);
                Eigen::VectorXd z = lf.zeta(x, y);
                CHECK(z(x) == doctest::Approx(0.25));
                CHECK(z(y) == doctest::Approx(-0.25));
                CHECK((lf.zeta(y, x) + z).norm() == 0.0);
            }
    }
    ph.g.setZero();
    lf = lang_firsov_effective(p, ph, 3);
    CHECK(lf.U_eff(0, 0) == 5.0);
    CHECK(lf.zeta(0, 1).norm() == 0.0);
}

TEST_CASE("Lang-Firsov Hamiltonian converges to the Holstein-Hubbard spectrum") {
    Lattice lat = chain(2);
    ModelParams p;
    p.U = 1.5;
    PhononParams ph;
    ph.omega = 1.0;
    ph.g = Eigen::MatrixXd::Zero(2, 2);
    ph.g(0, 0) = ph.g(1, 1) = 0.5;
    ph.g(0, 1) = ph.g(1, 0) = 0.2;
    FockBasis B = make_fock_basis(2, 2, BasisConstraint::none, 0);
    double prev = INFINITY;
    for (int n : {4, 8, 12}) {
        ph.n_max = n;
        Eigen::VectorXd a = spectrum(build_holstein_hubbard(lat, p, ph, B));
        Eigen::VectorXd b = spectrum(build_lang_firsov_hamiltonian(lat, p, ph, B));
        double err = (a.head(6) - b.head(6)).cwiseAbs().maxCoeff();
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("single-mode radiation model") {
    Lattice lat = chain(2);
    ModelParams p;
    p.U = 1.0;
    PhotonParams ph;
    ph.L = 2.0;
    ph.kappa = 1.0;
    ph.m0 = 1.0;
    ph.n_max = 2;
    FockBasis B = make_fock_basis(2, 1);
    CHECK(zero_mode_coupling(lat, ph, 0, 1) == doctest::Approx(std::pow(2.0, -1.5) / std::sqrt(3.0)));
    CHECK(zero_mode_coupling(lat, ph, 1, 0) == doctest::Approx(-std::pow(2.0, -1.5) / std::sqrt(3.0)));
    Mat<cplx> H = build_rad_single_mode(lat, p, ph, B);
    CHECK(relative_hermiticity_error(H) < 1e-12);

    ph.rho_scale = 0.0;
    Eigen::VectorXd e = spectrum(build_rad_single_mode(lat, p, ph, B));
    Eigen::VectorXd eh = spectrum(build_hubbard<double>(lat, p, B));
    std::vector<double> expect;
    for (int i = 0; i < eh.size(); ++i)
        for (int n1 = 0; n1 <= 2; ++n1)
            for (int n2 = 0; n2 <= 2; ++n2) expect.push_back(eh(i) + ph.m0 * (n1 + n2));
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < e.size(); ++i) CHECK(e(i) == doctest::Approx(expect[i]).epsilon(1e-12));

    ph.rho_scale = 1.0;
    ph.n_max = 0;
    ph.m0 = 1e2;
    CHECK((spectrum(build_rad_single_mode(lat, p, ph, B)) - eh).cwiseAbs().maxCoeff() < 1e-12);
    ph.n_max = 4;
    double prev = INFINITY;
    for (double m0 : {1e2, 1e3}) {
        ph.m0 = m0;
        double err = (spectrum(build_rad_single_mode(lat, p, ph, B)).head(4) - eh).cwiseAbs().maxCoeff();
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-3);

    ph.kappa = 4.0;
    CHECK_THROWS(build_rad_single_mode(lat, p, ph, B));
}

TEST_CASE("thermal: one electron factorizes") {
    Lattice lat = build_lattice({2, 2, 1.0, NeighborNorm::l1, Boundary::open});
    ModelParams p;
    p.b = 0.4;
    FockBasis B = make_fock_basis(4, 1);
    double beta = 1.3;
    ThermalResult r = thermal<double>(build_hubbard<double>(lat, p, B), beta, B.two_m_vector());
    CHECK(r.S3 == doctest::Approx(0.5 * std::tanh(beta * p.b)).epsilon(1e-12));
    double zs = 0.0;
    Eigen::VectorXd eps = spectrum(Eigen::MatrixXd(-lat.hopping));
    for (int i = 0; i < eps.size(); ++i) zs += std::exp(-beta * eps(i));
    CHECK(r.Z == doctest::Approx(zs * 2 * std::cosh(beta * p.b)).epsilon(1e-12));
    double sum = 0.0;
    for (auto& [m, z] : r.sector_Z) sum += z;
    CHECK(sum == doctest::Approx(r.Z).epsilon(1e-12));
}

TEST_CASE("thermal: free spin and sector symmetry at zero field") {
    Eigen::MatrixXd H(2, 2);
    H << -0.3, 0, 0, 0.3;  // -2 b S3 with b = 0.3
    Eigen::VectorXd tm(2);
    tm << 1, -1;
    ThermalResult r = thermal<double>(H, 2.0, tm);
    CHECK(r.S3 == doctest::Approx(0.5 * std::tanh(0.6)).epsilon(1e-12));

    Lattice lat = chain(4);
    ModelParams p;
    p.U = 2.0;
    FockBasis B = make_fock_basis(4, 3);
    ThermalResult s = thermal<double>(build_hubbard<double>(lat, p, B), 0.7, B.two_m_vector());
    CHECK(s.sector_Z.at(1) == doctest::Approx(s.sector_Z.at(-1)).epsilon(1e-12));
    CHECK(s.sector_Z.at(3) == doctest::Approx(s.sector_Z.at(-3)).epsilon(1e-12));
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS(thermal<double>(bad, 1.0, tm));
}

TEST_CASE("sector spectrum reproduces full thermal traces") {
    Lattice lat = chain(4, Boundary::periodic);
    ModelParams p;
    p.U = 2.0;
    FockBasis B = make_fock_basis(4, 3);
    SectorSpectrum ss = sector_spectrum<double>(4, 3, BasisConstraint::none, 0.0, [&](const FockBasis& s) {
        return build_hubbard<double>(lat, p, s);
    });
    for (double b : {0.0, 0.3, 1.0}) {
        ModelParams pb = p;
        pb.b = b;
        ThermalResult r = thermal<double>(build_hubbard<double>(lat, pb, B), 1.1, B.two_m_vector());
        CHECK(ss.Z(1.1, b) == doctest::Approx(r.Z).epsilon(1e-11));
        CHECK(ss.S3(1.1, b) == doctest::Approx(r.S3).epsilon(1e-11));
        for (auto& [m, z] : r.sector_Z) CHECK(ss.sector_Z(1.1, b, m) == doctest::Approx(z).epsilon(1e-11));
    }
}
