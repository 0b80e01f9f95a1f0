#include "hloop/worldline.hpp"

#include <algorithm>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace hloop {

int ElectronPath::site_at(double t) const {
    int s = start.site;
    for (const Jump& j : jumps) {
        if (j.time > t) break;
        s = j.to;
    }
    return s;
}

Config Bundle::initial() const {
    Config X;
    for (const auto& p : paths) X.push_back(p.start);
    return X;
}

Config Bundle::final() const {
    Config X;
    for (const auto& p : paths) X.push_back({p.end_site(), p.start.spin});
    return X;
}

std::vector<TimelineEvent> merged_events(const Bundle& b) {
    std::vector<TimelineEvent> ev;
    for (int e = 0; e < static_cast<int>(b.paths.size()); ++e)
        for (const Jump& j : b.paths[e].jumps) ev.push_back({j.time, e, j.from, j.to});
    std::sort(ev.begin(), ev.end(), [](const TimelineEvent& a, const TimelineEvent& c) {
        return a.time != c.time ? a.time < c.time : a.electron < c.electron;
    });
    return ev;
}

ElectronPath sample_free_path(const Lattice& lat, Point x0, double beta, CounterRng& rng) {
    ElectronPath p;
    p.start = x0;
    double t = 0.0;
    int y = x0.site;
    while (true) {
        const double d = lat.degrees(y);
        if (d <= 0.0) break;
        t += rng.exponential(d);
        if (t >= beta) break;
        double u = rng.uniform() * d;
        int next = lat.neighbors[y].back();
        for (int x : lat.neighbors[y]) {
            u -= lat.hopping(y, x);
            if (u < 0.0) {
                next = x;
                break;
            }
        }
        p.jumps.push_back({t, y, next});
        y = next;
    }
    return p;
}

EventFlags classify(const Bundle& b) {
    EventFlags f;
    const int N = static_cast<int>(b.paths.size());
    Config X = b.initial();
    auto check = [&](int i) {
        for (int j = 0; j < N; ++j) {
            if (j == i || X[j].site != X[i].site) continue;
            f.in_D_infinity = false;
            if (X[j].spin == X[i].spin) f.in_D = false;
        }
    };
    for (int i = 0; i < N; ++i) check(i);
    for (const auto& e : merged_events(b)) {
        X[e.electron].site = e.to;
        check(e.electron);
    }
    f.tau = realized_permutation(b.initial(), X);
    f.periodic = !f.tau.empty();
    return f;
}

Draw sample_bundle(const Lattice& lat, const std::vector<Config>& reps, double beta, std::uint64_t seed,
                   std::uint64_t sample_id) {
    Draw d;
    CounterRng pick(seed, sample_id, 0);
    d.representative = static_cast<int>(pick.below(reps.size()));
    const Config& X = reps[d.representative];
    d.bundle.beta = beta;
    for (size_t j = 0; j < X.size(); ++j) {
        CounterRng r(seed, sample_id, j + 1);
        d.bundle.paths.push_back(sample_free_path(lat, X[j], beta, r));
    }
    d.flags = classify(d.bundle);
    return d;
}

std::vector<Draw> sample_ensemble(const Lattice& lat, int N, const PathEnsembleConfig& cfg, long first, long count) {
    if (cfg.samples < 1) throw std::invalid_argument("sample count must be >= 1");
    auto reps = representatives(lat.size(), N, cfg.constraint);
    if (reps.empty()) throw std::invalid_argument("N exceeds the capacity of the constraint class");
    if (count < 0) count = cfg.samples - first;
    std::vector<Draw> out;
    out.reserve(count);
    for (long s = first; s < first + count; ++s) out.push_back(sample_bundle(lat, reps, cfg.beta, cfg.seed, s));
    return out;
}

PathIntegrals coulomb_integral(const Bundle& b, const Lattice& lat, double U, const Eigen::MatrixXd& U_offsite,
                               const Eigen::VectorXd* site_potential) {
    return coulomb_integral(b, lat, Eigen::VectorXd::Constant(lat.size(), U), U_offsite, site_potential);
}

PathIntegrals coulomb_integral(const Bundle& b, const Lattice& lat, const Eigen::VectorXd& U,
                               const Eigen::MatrixXd& U_offsite, const Eigen::VectorXd* site_potential) {
    PathIntegrals r;
    const int N = static_cast<int>(b.paths.size());
    for (const auto& p : b.paths) {
        double t = 0.0;
        int y = p.start.site;
        for (const Jump& j : p.jumps) {
            r.mu_compensation += lat.degrees(y) * (j.time - t);
            if (site_potential) r.potential += (*site_potential)(y) * (j.time - t);
            t = j.time;
            y = j.to;
        }
        r.mu_compensation += lat.degrees(y) * (b.beta - t);
        if (site_potential) r.potential += (*site_potential)(y) * (b.beta - t);
    }
    const bool offsite = U_offsite.size() > 0;
    if (U.isZero(0.0) && !offsite) return r;
    Config X = b.initial();
    auto density = [&]() {
        double v = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                if (i == j) continue;
                if (X[i].site == X[j].site) {
                    if (i < j && X[i].spin != X[j].spin) v += U(X[i].site);
                } else if (offsite) {
                    v += U_offsite(X[i].site, X[j].site);
                }
            }
        return v;
    };
    double t = 0.0;
    double v = density();
    for (const auto& e : merged_events(b)) {
        r.coulomb += v * (e.time - t);
        t = e.time;
        X[e.electron].site = e.to;
        v = density();
    }
    r.coulomb += v * (b.beta - t);
    return r;
}

double stochastic_phase(const ElectronPath& p, const Eigen::MatrixXd& alpha, double s, double t) {
    double phase = 0.0;
    for (const Jump& j : p.jumps) {
        if (j.time <= s || j.time > t) continue;
        if (j.from >= alpha.rows() || j.to >= alpha.cols()) throw std::invalid_argument("alpha missing on a traversed edge");
        phase += alpha(j.from, j.to);
    }
    return phase;
}

std::complex<double> fk_exact(const Lattice& lat, const Eigen::VectorXd& v, const Eigen::MatrixXd& alpha, double beta,
                              Point X, Point Y) {
    if (X.spin != Y.spin) return 0.0;
    const int n = lat.size();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (int x = 0; x < n; ++x) {
        h(x, x) = lat.degrees(x) + v(x);
        for (int y : lat.neighbors[x]) h(x, y) = -lat.hopping(x, y) * std::polar(1.0, alpha(x, y));
    }
    Eigen::MatrixXcd K = (-beta * h).exp();
    return K(X.site, Y.site);
}

FkEstimate fk_check_single(const Lattice& lat, const Eigen::VectorXd& v, const Eigen::MatrixXd& alpha, double beta,
                           Point X, Point Y, long n_samples, std::uint64_t seed) {
    FkEstimate est;
    est.exact = fk_exact(lat, v, alpha, beta, X, Y);
    if (X.spin != Y.spin) return est;
    std::complex<double> sum = 0.0;
    double sq = 0.0;
    for (long s = 0; s < n_samples; ++s) {
        CounterRng rng(seed, s, 1);
        ElectronPath p = sample_free_path(lat, X, beta, rng);
        if (p.end_site() != Y.site) continue;
        Bundle b{beta, {p}};
        double pot = coulomb_integral(b, lat, 0.0, {}, &v).potential;
        std::complex<double> w = std::exp(-pot) * std::polar(1.0, stochastic_phase(p, alpha, 0.0, beta));
        sum += w;
        sq += std::norm(w);
    }
    const double n = static_cast<double>(n_samples);
    est.value = sum / n;
    est.std_error = std::sqrt(std::max(0.0, sq / n - std::norm(est.value)) / (n - 1));
    return est;
}

}  // namespace hloop
