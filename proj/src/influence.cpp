#include "hloop/influence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

namespace hloop {

double kernel(double beta, double omega, double s, double t) {
    if (!(beta > 0.0 && omega > 0.0)) throw std::invalid_argument("kernel needs beta, omega > 0");
    if (s < 0.0 || s > beta || t < 0.0 || t > beta) throw std::invalid_argument("kernel times must lie in [0, beta]");
    const double u = std::abs(t - s);
    return 0.5 * (std::exp(-(beta - u) * omega) + std::exp(-u * omega)) / -std::expm1(-beta * omega);
}

BoseModeSet phonon_modes(const Lattice& lat, const ModelParams& p, const PhononParams& ph) {
    const int n = lat.size();
    LangFirsov lf = lang_firsov_effective(p, ph, n);
    BoseModeSet set;
    set.kind = BosonKind::phonon;
    for (int z = 0; z < n; ++z) {
        BoseMode m{ph.omega, Eigen::MatrixXd::Zero(n, n), "site " + std::to_string(z)};
        for (const auto& e : lat.edges) {
            double c = std::sqrt(2.0) * (lf.xi[e.x](z) - lf.xi[e.y](z));
            m.coupling(e.x, e.y) = c;
            m.coupling(e.y, e.x) = -c;
        }
        set.modes.push_back(std::move(m));
        set.oscillators.push_back(ph.omega);
    }
    return set;
}

std::array<double, 3> polarization(const std::array<double, 3>& k, int lambda) {
    const double r = std::hypot(k[0], k[1]);
    if (r == 0.0) {
        const double c = 1.0 / std::sqrt(3.0);
        return {c, c, c};
    }
    std::array<double, 3> e1{k[1] / r, -k[0] / r, 0.0};
    if (lambda == 1) return e1;
    const double n = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    return {(k[1] * e1[2] - k[2] * e1[1]) / n, (k[2] * e1[0] - k[0] * e1[2]) / n, (k[0] * e1[1] - k[1] * e1[0]) / n};
}

std::vector<std::array<double, 3>> retained_wave_vectors(double L, double kappa) {
    const double unit = 2.0 * M_PI / L;
    const int m = static_cast<int>(std::floor(kappa / unit));
    std::vector<std::array<double, 3>> ks;
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b)
            for (int c = -m; c <= m; ++c)
                if (a * a + b * b + c * c <= (kappa / unit) * (kappa / unit)) ks.push_back({a * unit, b * unit, c * unit});
    return ks;
}

BoseModeSet photon_modes(const Lattice& lat, const PhotonParams& ph) {
    const int d = lat.spec.dimension;
    if (d > 3) throw std::invalid_argument("photon coupling requires d <= 3");
    if (!(ph.L > 0.0 && ph.kappa > 0.0 && ph.m0 > 0.0)) throw std::invalid_argument("photon L, kappa, m0 must be > 0");
    if (ph.L < lat.spec.side) throw std::invalid_argument("photon box must contain the lattice (L >= side)");
    const int n = lat.size();
    const double rho = photon_rho0(ph);
    BoseModeSet set;
    set.kind = BosonKind::photon;
    for (const auto& k : retained_wave_vectors(ph.L, ph.kappa)) {
        const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        const double omega = kn == 0.0 ? ph.m0 : kn;
        const double amp = rho / std::sqrt(omega);
        for (int lambda : {1, 2}) {
            auto eps = polarization(k, lambda);
            BoseMode cosm{omega, Eigen::MatrixXd::Zero(n, n), ""}, sinm = cosm;
            for (const auto& e : lat.edges) {
                auto dx = lat.displacement(e.x, e.y);
                double kx = 0.0, kd = 0.0, ed = 0.0;
                for (int a = 0; a < d; ++a) {
                    kx += k[a] * lat.vertices[e.x][a];
                    kd += k[a] * dx[a];
                    ed += eps[a] * dx[a];
                }
                // straight segment x -> x + dx; the k.dx -> 0 limit is the integrand at x
                double ic = kd == 0.0 ? std::cos(kx) : (std::sin(kx + kd) - std::sin(kx)) / kd;
                double is = kd == 0.0 ? std::sin(kx) : (std::cos(kx) - std::cos(kx + kd)) / kd;
                cosm.coupling(e.x, e.y) = amp * ed * ic;
                sinm.coupling(e.x, e.y) = amp * ed * is;
                cosm.coupling(e.y, e.x) = -cosm.coupling(e.x, e.y);
                sinm.coupling(e.y, e.x) = -sinm.coupling(e.x, e.y);
            }
            char buf[96];
            std::snprintf(buf, sizeof buf, "k=(%g,%g,%g) pol=%d", k[0], k[1], k[2], lambda);
            cosm.label = std::string(buf) + " cos";
            sinm.label = std::string(buf) + " sin";
            set.modes.push_back(std::move(cosm));
            set.modes.push_back(std::move(sinm));
            set.oscillators.push_back(omega);
        }
    }
    return set;
}

std::vector<JumpRecord> all_jumps(const Bundle& b) {
    std::vector<JumpRecord> out;
    for (const auto& e : merged_events(b)) out.push_back({e.time, e.from, e.to});
    return out;
}

double influence_q(const std::vector<JumpRecord>& jumps, const BoseModeSet& modes, double beta) {
    const int J = static_cast<int>(jumps.size());
    if (J == 0) return 0.0;
    std::map<double, std::vector<int>> groups;
    for (int m = 0; m < static_cast<int>(modes.modes.size()); ++m) groups[modes.modes[m].omega].push_back(m);
    double q = 0.0;
    for (const auto& [omega, ids] : groups) {
        Eigen::MatrixXd C(J, ids.size());
        for (int i = 0; i < J; ++i)
            for (size_t m = 0; m < ids.size(); ++m) C(i, m) = modes.modes[ids[m]].coupling(jumps[i].from, jumps[i].to);
        if (C.isZero(0.0)) continue;
        Eigen::MatrixXd G = C * C.transpose();
        for (int i = 0; i < J; ++i) {
            q += kernel(beta, omega, jumps[i].time, jumps[i].time) * G(i, i);
            for (int j = i + 1; j < J; ++j) q += 2.0 * kernel(beta, omega, jumps[i].time, jumps[j].time) * G(i, j);
        }
    }
    return q;
}

double influence_q(const Bundle& b, const BoseModeSet& modes) { return influence_q(all_jumps(b), modes, b.beta); }

double influence_weight(const Bundle& b, const BoseModeSet& modes, double factor) {
    return std::exp(-factor * influence_q(b, modes));
}

std::vector<double> discretization_convergence(const Bundle& b, const BoseModeSet& modes, int n_max) {
    if (n_max < 0 || n_max > 20) throw std::invalid_argument("discretization level must be in [0, 20]");
    auto jumps = all_jumps(b);
    std::vector<double> out;
    for (int n = 0; n <= n_max; ++n) {
        const double bins = std::ldexp(1.0, n);
        auto snapped = jumps;
        for (auto& j : snapped) j.time = std::min(b.beta, b.beta * std::ceil(j.time * bins / b.beta) / bins);
        out.push_back(influence_q(snapped, modes, b.beta));
    }
    return out;
}

double free_boson_factor(const BoseModeSet& modes, double beta) {
    double z = 1.0;
    for (double w : modes.oscillators) z /= -std::expm1(-beta * w);
    return z;
}

void write_modes_csv(std::ostream& os, const Lattice& lat, const BoseModeSet& modes) {
    auto num = [](double v) {
        char buf[32];
        auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    };
    os << "mode,label,omega,x,y,coupling\n";
    for (size_t m = 0; m < modes.modes.size(); ++m)
        for (const auto& e : lat.edges)
            os << m << ",\"" << modes.modes[m].label << "\"," << num(modes.modes[m].omega) << ',' << e.x << ',' << e.y
               << ',' << num(modes.modes[m].coupling(e.x, e.y)) << '\n';
}

}  // namespace hloop
