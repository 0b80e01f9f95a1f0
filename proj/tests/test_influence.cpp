#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "hloop/influence.hpp"

using namespace hloop;

namespace {

Bundle random_bundle(const Lattice& lat, int N, double beta, std::uint64_t seed) {
    Bundle b;
    b.beta = beta;
    for (int j = 0; j < N; ++j) {
        CounterRng r(seed, 0, j);
        b.paths.push_back(sample_free_path(lat, {j % lat.size(), j % 2 ? -1 : 1}, beta, r));
    }
    return b;
}

}  // namespace

TEST_CASE("kernel closed form") {
    const double beta = 1.7, w = 0.8;
    CHECK(kernel(beta, w, 0.4, 0.4) == doctest::Approx(0.5 / std::tanh(beta * w / 2)).epsilon(1e-14));
    double kmin = std::exp(-beta * w / 2) / (1 - std::exp(-beta * w));
    CHECK(kernel(beta, w, 0.1, 0.1 + beta / 2) == doctest::Approx(kmin).epsilon(1e-14));
    for (double u = 0.0; u <= beta; u += beta / 97) {
        CHECK(kernel(beta, w, 0.0, u) >= kmin * (1 - 1e-14));
        CHECK(kernel(beta, w, 0.0, u) == doctest::Approx(kernel(beta, w, 0.0, beta - u)).epsilon(1e-13));
        CHECK(kernel(beta, w, u, 0.0) == kernel(beta, w, 0.0, u));
    }
    CHECK(kernel(1.0, 200.0, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS(kernel(1.0, 1.0, -0.1, 0.5));
    CHECK_THROWS(kernel(1.0, 1.0, 0.5, 1.2));
    CHECK_THROWS(kernel(1.0, 0.0, 0.5, 0.5));
}

TEST_CASE("kernel Gram matrices are positive semidefinite") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        double beta = 0.2 + 3 * u(gen), w = 0.1 + 4 * u(gen);
        Eigen::MatrixXd K(20, 20);
        std::vector<double> t(20);
        for (auto& x : t) x = beta * u(gen);
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) K(i, j) = kernel(beta, w, t[i], t[j]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
        CHECK(es.eigenvalues().minCoeff() > -1e-12 * es.eigenvalues().maxCoeff());
    }
}

TEST_CASE("phonon couplings") {
    Lattice lat = build_lattice({1, 4, 1.0, NeighborNorm::l1, Boundary::open});
    ModelParams p;
    PhononParams ph;
    ph.omega = 1.3;
    ph.g = Eigen::MatrixXd::Zero(4, 4);
    for (auto& m : phonon_modes(lat, p, ph).modes) CHECK(m.coupling.isZero(0.0));
    ph.g = 0.6 * Eigen::MatrixXd::Identity(4, 4);
    auto set = phonon_modes(lat, p, ph);
    CHECK(set.modes.size() == 4);
    CHECK(set.oscillators.size() == 4);
    auto lf = lang_firsov_effective(p, ph, 4);
    for (auto& e : lat.edges) {
        auto z = lf.zeta(e.x, e.y);
        CHECK((z.array() != 0.0).count() == 2);
        CHECK(z(e.x) == doctest::Approx(0.6 / 1.3));
        CHECK(z(e.y) == doctest::Approx(-0.6 / 1.3));
        for (int m = 0; m < 4; ++m) {
            CHECK(set.modes[m].coupling(e.x, e.y) == doctest::Approx(std::sqrt(2.0) * z(m)));
            CHECK(set.modes[m].coupling(e.y, e.x) == -set.modes[m].coupling(e.x, e.y));
        }
    }
}

TEST_CASE("polarizations") {
    for (auto k : retained_wave_vectors(4.0, 3.5)) {
        auto e1 = polarization(k, 1), e2 = polarization(k, 2);
        double n1 = 0, n2 = 0, d12 = 0, k1 = 0, k2 = 0;
        for (int a = 0; a < 3; ++a) {
            n1 += e1[a] * e1[a];
            n2 += e2[a] * e2[a];
            d12 += e1[a] * e2[a];
            k1 += k[a] * e1[a];
            k2 += k[a] * e2[a];
        }
        CHECK(n1 == doctest::Approx(1.0));
        CHECK(n2 == doctest::Approx(1.0));
        if (k[0] != 0.0 || k[1] != 0.0) {
            CHECK(std::abs(d12) < 1e-14);
            CHECK(std::abs(k1) < 1e-14);
            CHECK(std::abs(k2) < 1e-14);
        }
    }
    CHECK(retained_wave_vectors(4.0, 1.0).size() == 1);
    CHECK(retained_wave_vectors(4.0, M_PI / 2).size() == 7);
    CHECK(retained_wave_vectors(4.0, M_PI / 2 * std::sqrt(2.0) + 1e-9).size() == 19);
}

TEST_CASE("photon couplings match quadrature of the segment integral") {
    using boost::math::quadrature::gauss_kronrod;
    for (auto bc : {Boundary::open, Boundary::periodic}) {
        Lattice lat = build_lattice({2, 4, 1.0, NeighborNorm::l1, bc});
        PhotonParams ph;
        ph.L = 4.0;
        ph.kappa = 3.3;
        ph.m0 = 0.7;
        auto set = photon_modes(lat, ph);
        auto ks = retained_wave_vectors(ph.L, ph.kappa);
        REQUIRE(set.modes.size() == 4 * ks.size());
        REQUIRE(set.oscillators.size() == 2 * ks.size());
        const double rho = photon_rho0(ph);
        int m = 0;
        for (auto& k : ks) {
            double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
            double w = kn == 0.0 ? ph.m0 : kn;
            for (int lambda : {1, 2}) {
                auto eps = polarization(k, lambda);
                for (int part = 0; part < 2; ++part, ++m) {
                    const auto& mode = set.modes[m];
                    CHECK(mode.omega == w);
                    for (auto& e : lat.edges) {
                        auto dx = lat.displacement(e.x, e.y);
                        auto f = [&](double s) {
                            double kr = 0.0, ed = 0.0;
                            for (int a = 0; a < 2; ++a) {
                                kr += k[a] * (lat.vertices[e.x][a] + s * dx[a]);
                                ed += eps[a] * dx[a];
                            }
                            return rho / std::sqrt(w) * ed * (part == 0 ? std::cos(kr) : std::sin(kr));
                        };
                        double q = gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 10, 1e-14);
                        CHECK(std::abs(mode.coupling(e.x, e.y) - q) < 1e-10);
                        CHECK(std::abs(mode.coupling(e.x, e.y)) <= rho / std::sqrt(w) * (1 + 1e-12));
                        CHECK(mode.coupling(e.y, e.x) == -mode.coupling(e.x, e.y));
                    }
                }
            }
        }
    }
}

TEST_CASE("photon zero mode") {
    Lattice lat = build_lattice({2, 2, 1.0, NeighborNorm::l1, Boundary::open});
    PhotonParams ph;
    ph.L = 2.0;
    ph.kappa = 1.0;
    ph.m0 = 1.5;
    auto set = photon_modes(lat, ph);
    REQUIRE(set.modes.size() == 4);
    for (auto& e : lat.edges) {
        double c = zero_mode_coupling(lat, ph, e.x, e.y);
        CHECK(c != 0.0);
        CHECK(set.modes[0].coupling(e.x, e.y) == doctest::Approx(c).epsilon(1e-14));
        CHECK(set.modes[2].coupling(e.x, e.y) == doctest::Approx(c).epsilon(1e-14));
        CHECK(set.modes[1].coupling(e.x, e.y) == 0.0);
        CHECK(set.modes[3].coupling(e.x, e.y) == 0.0);
    }
    CHECK(free_boson_factor(set, 0.9) == doctest::Approx(std::pow(1 - std::exp(-0.9 * 1.5), -2)));
    CHECK_THROWS(photon_modes(lat, PhotonParams{1.0, 1.0, 1.0, 4, 1.0}));
}

TEST_CASE("influence weight") {
    Lattice lat = build_lattice({1, 2, 1.0, NeighborNorm::l1, Boundary::open});
    ModelParams p;
    PhononParams ph;
    ph.omega = 0.9;
    ph.g = Eigen::MatrixXd::Zero(2, 2);
    Bundle b{1.4, {{{0, 1}, {{0.3, 0, 1}, {0.8, 1, 0}}}}};
    CHECK(influence_weight(b, phonon_modes(lat, p, ph)) == 1.0);
    ph.g = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    auto set = phonon_modes(lat, p, ph);
    Bundle one{1.4, {{{0, 1}, {{0.3, 0, 1}}}}};
    double c2 = 0.0;
    for (auto& m : set.modes) c2 += m.coupling(0, 1) * m.coupling(0, 1);
    CHECK(influence_weight(one, set) == doctest::Approx(std::exp(-0.25 / std::tanh(1.4 * 0.9 / 2) * c2)).epsilon(1e-14));
    // two opposite jumps: Q = 2 c^2 (K(0) - K(t1 - t2))
    double q = 2 * c2 * (kernel(1.4, 0.9, 0.3, 0.3) - kernel(1.4, 0.9, 0.3, 0.8));
    CHECK(influence_q(b, set) == doctest::Approx(q).epsilon(1e-13));
}

TEST_CASE("Q is invariant under rigid time translation") {
    Lattice lat = build_lattice({2, 2, 1.0, NeighborNorm::l1, Boundary::open});
    PhotonParams ph{2.0, 4.0, 0.8, 4, 1.0};
    auto set = photon_modes(lat, ph);
    for (std::uint64_t s = 0; s < 20; ++s) {
        Bundle b = random_bundle(lat, 3, 1.2, s);
        auto J = all_jumps(b);
        double q = influence_q(J, set, b.beta);
        CHECK(q >= 0.0);
        double w = influence_weight(b, set);
        CHECK(w > 0.0);
        CHECK(w <= 1.0);
        for (double a : {0.17, 0.61, 1.1}) {
            auto shifted = J;
            for (auto& j : shifted) j.time = std::fmod(j.time + a, b.beta);
            CHECK(influence_q(shifted, set, b.beta) == doctest::Approx(q).epsilon(1e-12));
        }
    }
}

TEST_CASE("dyadic discretization converges") {
    Lattice lat = build_lattice({1, 4, 1.0, NeighborNorm::l1, Boundary::periodic});
    ModelParams p;
    PhononParams ph;
    ph.omega = 1.1;
    ph.g = 0.8 * Eigen::MatrixXd::Identity(4, 4);
    auto set = phonon_modes(lat, p, ph);
    Bundle edges{1.0, {{{0, 1}, {{0.25, 0, 1}, {0.5, 1, 2}, {0.875, 2, 3}}}}};
    auto qe = discretization_convergence(edges, set, 5);
    CHECK(qe[3] == influence_q(edges, set));
    CHECK(qe[5] == influence_q(edges, set));

    double slope_sum = 0.0;
    int trials = 0;
    for (std::uint64_t s = 0; trials < 5; ++s) {
        Bundle b = random_bundle(lat, 2, 2.5, 100 + s);
        if (all_jumps(b).size() < 10) continue;
        b.paths[0].jumps.resize(std::min<size_t>(b.paths[0].jumps.size(), 5));
        b.paths[1].jumps.resize(std::min<size_t>(b.paths[1].jumps.size(), 5));
        ++trials;
        double q = influence_q(b, set);
        auto qn = discretization_convergence(b, set, 20);
        CHECK(std::abs(qn[16] - q) < 1e-3 * std::abs(q));
        CHECK(std::abs(qn[20] - q) <= std::abs(qn[10] - q));
        // least-squares slope of log2 of the gaps over n = 4..18
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int n = 4; n < 18; ++n) {
            double gap = std::abs(qn[n + 1] - qn[n]);
            if (gap == 0.0) continue;
            double y = std::log2(gap);
            sx += n;
            sy += y;
            sxx += n * n;
            sxy += n * y;
            ++cnt;
        }
        slope_sum += (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    }
    double slope = slope_sum / trials;
    INFO("mean log2 gap slope " << slope);
    CHECK(slope < -0.7);
    CHECK(slope > -1.3);
}
