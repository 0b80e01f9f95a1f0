#include "hloop/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace hloop {

namespace {

// Batches are contiguous sample ranges; each worker takes whole batches, so the
// result never depends on the thread count.
template <typename Acc, typename F>
std::vector<Acc> run_batches(const McOptions& opt, F&& batch) {
    if (opt.samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (opt.batches < 32) throw std::invalid_argument("at least 32 batches are required");
    if (opt.samples < opt.batches) throw std::invalid_argument("samples must be >= batches");
    std::vector<Acc> out(opt.batches);
    std::atomic<int> next{0};
    auto work = [&]() {
        for (int k = next++; k < opt.batches; k = next++) {
            long lo = opt.samples * k / opt.batches, hi = opt.samples * (k + 1) / opt.batches;
            out[k] = batch(lo, hi);
        }
    };
    const int T = std::max(1, std::min(opt.threads, opt.batches));
    std::vector<std::thread> pool;
    for (int i = 1; i < T; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return out;
}

struct PathWeight {
    const Model& m;
    std::vector<Config> reps;
    Eigen::VectorXd U;
    Eigen::MatrixXd U_off;
    std::optional<Eigen::VectorXd> shift;
    std::optional<BoseModeSet> modes;
    double boson_factor = 1.0;

    explicit PathWeight(const Model& model) : m(model) {
        const int n = m.lat.size();
        reps = representatives(n, m.N, m.constraint);
        if (reps.empty()) throw std::invalid_argument("N exceeds the capacity of the constraint class");
        U = Eigen::VectorXd::Constant(n, m.constraint == Constraint::u_infinity ? 0.0 : m.p.U);
        U_off = m.p.U_offsite;
        if (m.phonon && m.photon) throw std::invalid_argument("phonon and photon couplings are exclusive");
        if (m.phonon) {
            LangFirsov lf = lang_firsov_effective(m.p, *m.phonon, n);
            if (m.constraint == Constraint::finite_u) U = lf.U_eff.diagonal();
            U_off = lf.U_eff;
            U_off.diagonal().setZero();
            if (U_off.isZero(0.0)) U_off.resize(0, 0);
            shift = lf.onsite_shift;
            modes = phonon_modes(m.lat, m.p, *m.phonon);
        }
        if (m.photon) modes = photon_modes(m.lat, *m.photon);
        if (modes) boson_factor = free_boson_factor(*modes, m.p.beta);
    }

    bool accepted(const Draw& d) const {
        return d.flags.periodic && (m.constraint == Constraint::u_infinity ? d.flags.in_D_infinity : d.flags.in_D);
    }

    // sign(tau) exp(int sum d - int V~ - int shift) W, without the field factor
    double base(const Draw& d) const {
        PathIntegrals pi = coulomb_integral(d.bundle, m.lat, U, U_off, shift ? &*shift : nullptr);
        double w = perm_sign(d.flags.tau) * std::exp(pi.mu_compensation - pi.coulomb - pi.potential);
        if (modes) w *= influence_weight(d.bundle, *modes);
        return w;
    }
};

struct PartitionAcc {
    long n = 0, accepted = 0;
    double field = 0.0, loop = 0.0, s3 = 0.0;
    std::map<std::vector<int>, double> D;
};

MeanError combine(const std::vector<PartitionAcc>& acc, double PartitionAcc::*field, double scale, long total) {
    std::vector<double> means;
    double sum = 0.0;
    for (const auto& a : acc) {
        means.push_back(scale * (a.*field) / a.n);
        sum += a.*field;
    }
    MeanError r = batch_mean(means);
    r.mean = scale * sum / total;
    return r;
}

}  // namespace

McPartition mc_partition(const Model& m, const McOptions& opt) {
    PathWeight pw(m);
    const double beta = m.p.beta, b = m.p.b;
    auto acc = run_batches<PartitionAcc>(opt, [&](long lo, long hi) {
        PartitionAcc a;
        for (long s = lo; s < hi; ++s) {
            ++a.n;
            Draw d = sample_bundle(m.lat, pw.reps, beta, opt.seed, s);
            if (!pw.accepted(d)) continue;
            ++a.accepted;
            const double w = pw.base(d);
            a.field += w * field_weight(d.bundle, beta, b);
            LoopDecomposition dec = trace_loops(d.bundle);
            const double lw = w * loop_weight(dec, beta, b);
            a.loop += lw;
            double h = 0.0;
            for (const auto& l : dec.loops) h += 0.5 * l.winding * std::tanh(beta * b * l.winding);
            a.s3 += lw * h;
            a.D[dec.cycle_type] += w;
        }
        return a;
    });
    McPartition r;
    long accepted = 0;
    for (const auto& a : acc) accepted += a.accepted;
    r.acceptance = static_cast<double>(accepted) / opt.samples;
    if (accepted == 0)
        throw ZeroAcceptance("no accepted samples out of " + std::to_string(opt.samples) + " (acceptance rate 0)");
    r.representatives = static_cast<long>(pw.reps.size());
    r.boson_factor = pw.boson_factor;
    const double scale = r.representatives * pw.boson_factor;
    auto f = combine(acc, &PartitionAcc::field, scale, opt.samples);
    auto l = combine(acc, &PartitionAcc::loop, scale, opt.samples);
    r.field = {f.mean, f.error, opt.samples, accepted, "mc-field"};
    r.loop = {l.mean, l.error, opt.samples, accepted, "mc-loop"};
    for (const auto& a : acc) {
        r.batch_field.push_back(a.field / a.n);
        r.batch_loop.push_back(a.loop / a.n);
    }

    // ratio estimator; jackknife over batches
    double num = 0.0, den = 0.0;
    for (const auto& a : acc) {
        num += a.s3;
        den += a.loop;
    }
    const int B = static_cast<int>(acc.size());
    std::vector<double> jk;
    for (const auto& a : acc) jk.push_back((num - a.s3) / (den - a.loop));
    double jm = 0.0, jv = 0.0;
    for (double x : jk) jm += x / B;
    for (double x : jk) jv += (x - jm) * (x - jm);
    r.s3 = {num / den, std::sqrt(jv * (B - 1) / B), opt.samples, accepted, "mc-loop"};

    std::set<std::vector<int>> keys;
    for (const auto& a : acc)
        for (const auto& [k, v] : a.D) keys.insert(k);
    for (const auto& k : keys) {
        std::vector<double> means;
        double sum = 0.0;
        for (const auto& a : acc) {
            auto it = a.D.find(k);
            double v = it == a.D.end() ? 0.0 : it->second;
            means.push_back(scale * v / a.n);
            sum += v;
        }
        MeanError e = batch_mean(means);
        e.mean = scale * sum / opt.samples;
        r.D[k] = e;
    }
    return r;
}

Magnetization magnetization_u_infinity(const Model& m, const McOptions& opt) {
    if (m.constraint != Constraint::u_infinity) throw std::invalid_argument("magnetization estimator needs U = infinity");
    if (m.N != m.lat.size() - 1) throw std::invalid_argument("magnetization estimator needs N = |Lambda| - 1");
    McPartition r = mc_partition(m, opt);
    Magnetization g;
    g.s3 = r.s3;
    g.bound = 0.5 * m.N * std::tanh(m.p.beta * m.p.b);
    g.margin = g.s3.value - g.bound;
    return g;
}

std::set<std::vector<int>> PartitionWeights::support() const {
    std::set<std::vector<int>> s;
    for (const auto& [k, v] : D)
        if (v.mean > 0.0) s.insert(k);
    return s;
}

double PartitionWeights::Z(double beta, double b) const {
    double z = 0.0;
    for (const auto& [n, v] : D) {
        double c = 1.0;
        for (int ni : n) c *= std::cosh(beta * b * ni);
        z += v.mean * c;
    }
    return z;
}

double PartitionWeights::Z_error(double beta, double b) const {
    // conservative: errors added linearly
    double e = 0.0;
    for (const auto& [n, v] : D) {
        double c = 1.0;
        for (int ni : n) c *= std::cosh(beta * b * ni);
        e += v.error * c;
    }
    return e;
}

PartitionWeights partition_weights(const Model& m, const McOptions& opt) {
    if (m.constraint != Constraint::u_infinity) throw std::invalid_argument("partition weights need U = infinity");
    PartitionWeights w;
    w.D = mc_partition(m, opt).D;
    return w;
}

SectorSpectrum ed_spectrum(const Model& m, double b0) {
    const BasisConstraint c = m.constraint == Constraint::u_infinity ? BasisConstraint::gutzwiller : BasisConstraint::none;
    ModelParams q = m.p;
    q.b = b0;
    const int n = m.lat.size();
    if (m.photon) {
        SectorBuilder<cplx> build = [&](const FockBasis& B) { return build_rad_single_mode(m.lat, q, *m.photon, B); };
        return sector_spectrum<cplx>(n, m.N, c, b0, build);
    }
    SectorBuilder<double> build = [&](const FockBasis& B) -> Eigen::MatrixXd {
        if (m.phonon && m.ed_frame == EdFrame::lang_firsov)
            return build_lang_firsov_hamiltonian(m.lat, q, *m.phonon, B);
        if (m.phonon) return build_holstein_hubbard(m.lat, q, *m.phonon, B);
        return build_hubbard<double>(m.lat, q, B);
    };
    return sector_spectrum<double>(n, m.N, c, b0, build);
}

Estimate ed_partition(const Model& m) {
    SectorSpectrum s = ed_spectrum(m, m.p.b);
    return {s.Z(m.p.beta, m.p.b), 0.0, 0, 0, "ed"};
}

double ed_magnetization(const Model& m) { return ed_spectrum(m, m.p.b).S3(m.p.beta, m.p.b); }

std::vector<double> chebyshev_b_grid(int count, double beta, double b_max) {
    const double top = std::cosh(beta * b_max);
    std::vector<double> out;
    for (int j = 0; j < count; ++j) {
        double node = std::cos(M_PI * (2 * j + 1) / (2.0 * count));  // in (-1, 1)
        double c = 1.0 + 0.5 * (top - 1.0) * (node + 1.0);
        out.push_back(std::acosh(c) / beta);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double Coefficients::Z(double b) const {
    double c = std::cosh(beta * b), z = 0.0, p = 1.0;
    for (double ck : C) {
        z += ck * p;
        p *= c;
    }
    return z;
}

Coefficients one_d_coefficients(const Model& m, double beta, const std::vector<double>& b_grid) {
    if (m.lat.spec.dimension != 1) throw std::invalid_argument("coefficient extraction needs a one-dimensional lattice");
    const int K = m.N + 1;
    if (static_cast<int>(b_grid.size()) < K) throw std::invalid_argument("b grid needs at least N + 1 points");
    std::set<double> distinct(b_grid.begin(), b_grid.end());
    if (distinct.size() != b_grid.size()) throw std::invalid_argument("b grid points must be distinct");
    for (double b : b_grid)
        if (!(b > 0.0)) throw std::invalid_argument("b grid points must be positive");
    SectorSpectrum s = ed_spectrum(m, 0.0);
    const int R = static_cast<int>(b_grid.size());
    Eigen::MatrixXd V(R, K);
    Eigen::VectorXd z(R);
    for (int j = 0; j < R; ++j) {
        double c = std::cosh(beta * b_grid[j]), p = 1.0;
        for (int k = 0; k < K; ++k, p *= c) V(j, k) = p;
        z(j) = s.Z(beta, b_grid[j]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Coefficients out;
    out.beta = beta;
    const auto& sv = svd.singularValues();
    out.condition = sv(0) / sv(sv.size() - 1);
    if (!(out.condition <= 1e12)) throw std::invalid_argument("Vandermonde system is ill-conditioned");
    Eigen::VectorXd C = svd.solve(z);
    out.C.assign(C.data(), C.data() + K);
    out.residual = (V * C - z).cwiseAbs().maxCoeff() / z.cwiseAbs().maxCoeff();
    double cmax = C.cwiseAbs().maxCoeff(), odd = 0.0;
    for (int k = 0; k < K; ++k)
        if ((m.N - k) % 2) odd = std::max(odd, std::abs(C(k)));
    out.parity_violation = cmax > 0.0 ? odd / cmax : 0.0;
    return out;
}

namespace {
double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
}  // namespace

SectorReport sector_identity_check(const Model& m, double beta, const Coefficients& c) {
    SectorSpectrum s = ed_spectrum(m, 0.0);
    const int n = m.lat.size();
    SectorReport rep;
    double scale = 0.0;
    for (const auto& [tm, e] : s.energies) scale = std::max(scale, s.sector_Z(beta, 0.0, tm));
    for (const auto& [tm, e] : s.energies) {
        SectorRow row{tm, s.sector_Z(beta, 0.0, tm), 0.0, 0.0};
        for (int k = 0; k < static_cast<int>(c.C.size()); ++k) {
            if ((k - tm) % 2 != 0 || k < std::abs(tm)) continue;
            const int down = (k - tm) / 2, up = (k + tm) / 2;
            row.coefficient_reading += c.C[k] * std::ldexp(binom(k, down), -k);
            row.literal_reading += c.C[k] * binom(n, up) * binom(n, down);
        }
        rep.residual_coefficient = std::max(rep.residual_coefficient, std::abs(row.coefficient_reading - row.ed) / scale);
        rep.residual_literal = std::max(rep.residual_literal, std::abs(row.literal_reading - row.ed) / scale);
        rep.rows.push_back(row);
    }
    rep.coefficient_matches = rep.residual_coefficient < 1e-8;
    rep.literal_matches = rep.residual_literal < 1e-8;
    return rep;
}

AlReport aizenman_lieb_report(const std::vector<Model>& instances, const std::vector<double>& betas,
                              const std::vector<double>& bs) {
    AlReport rep;
    for (const auto& m : instances) {
        if (m.constraint != Constraint::u_infinity || m.N != m.lat.size() - 1)
            throw std::invalid_argument("Aizenman-Lieb instances need U = infinity and N = |Lambda| - 1");
        SectorSpectrum s = ed_spectrum(m, 0.0);
        for (double beta : betas)
            for (double b : bs) {
                if (!(b > 0.0)) throw std::invalid_argument("Aizenman-Lieb report needs b > 0");
                AlRow row{m.name, beta, b, s.S3(beta, b), 0.5 * m.N * std::tanh(beta * b), 0.0};
                row.margin = row.s3 - row.bound;
                if (!(row.margin > 0.0)) rep.all_positive = false;
                rep.rows.push_back(row);
            }
    }
    return rep;
}

bool LoopAudit::clean() const {
    return spin_identity_fail == 0 && cross_section_fail == 0 && flip_field_fail == 0 && flip_average_fail == 0 &&
           involution_fail == 0 && winding_cycle_fail == 0 && winding_range_fail == 0;
}

namespace {
bool same_bundle(const Bundle& a, const Bundle& b) {
    if (a.paths.size() != b.paths.size()) return false;
    for (size_t j = 0; j < a.paths.size(); ++j) {
        const auto &p = a.paths[j], &q = b.paths[j];
        if (!(p.start == q.start) || p.jumps.size() != q.jumps.size()) return false;
        for (size_t k = 0; k < p.jumps.size(); ++k)
            if (p.jumps[k].time != q.jumps[k].time || p.jumps[k].from != q.jumps[k].from || p.jumps[k].to != q.jumps[k].to)
                return false;
    }
    return true;
}
}  // namespace

LoopAudit audit_loops(const Model& m, const McOptions& opt) {
    PathWeight pw(m);
    const double beta = m.p.beta, b = m.p.b;
    const bool open_1d = m.lat.spec.dimension == 1 && m.lat.spec.boundary == Boundary::open;
    auto acc = run_batches<LoopAudit>(opt, [&](long lo, long hi) {
        LoopAudit a;
        for (long s = lo; s < hi; ++s) {
            ++a.samples;
            Draw d = sample_bundle(m.lat, pw.reps, beta, opt.seed, s);
            if (!pw.accepted(d)) continue;
            ++a.traced;
            LoopDecomposition dec = trace_loops(d.bundle);
            int field = 0;
            std::vector<int> w;
            for (const auto& l : dec.loops) {
                field += l.epsilon * l.winding;
                a.winding_histogram[l.winding]++;
                if (l.winding > 0) w.push_back(l.winding);
                if (open_1d && l.winding > 1) ++a.winding_range_fail;
                bool ok = true;
                for (int k = 0; k < 7; ++k) ok &= cross_section_spin(l, beta * (k + 0.5) / 7) == l.epsilon * l.winding;
                if (!ok) ++a.cross_section_fail;
            }
            if (field != initial_spin_sum(d.bundle)) ++a.spin_identity_fail;
            if (m.constraint == Constraint::u_infinity) {
                std::sort(w.rbegin(), w.rend());
                if (w != dec.cycle_type || w.size() != dec.loops.size()) ++a.winding_cycle_fail;
            }
            const int N = m.N;
            double avg = 0.0;
            bool flips_ok = true;
            for (int mask = 0; mask < (1 << N); ++mask) {
                std::vector<int> xi(N);
                for (int j = 0; j < N; ++j) xi[j] = (mask >> j) & 1;
                const int bx = flipped_field(dec, xi);
                if (initial_spin_sum(spin_flip(d.bundle, xi)) != bx) flips_ok = false;
                avg += std::exp(beta * b * bx);
            }
            if (!flips_ok) ++a.flip_field_fail;
            avg /= (1 << N);
            const double lw = loop_weight(dec, beta, b);
            if (std::abs(avg - lw) > 1e-12 * lw) ++a.flip_average_fail;
            for (int j = 0; j < N; ++j)
                if (!same_bundle(spin_flip(spin_flip(d.bundle, j), j), d.bundle)) {
                    ++a.involution_fail;
                    break;
                }
        }
        return a;
    });
    LoopAudit out;
    for (const auto& a : acc) {
        out.samples += a.samples;
        out.traced += a.traced;
        out.spin_identity_fail += a.spin_identity_fail;
        out.cross_section_fail += a.cross_section_fail;
        out.flip_field_fail += a.flip_field_fail;
        out.flip_average_fail += a.flip_average_fail;
        out.involution_fail += a.involution_fail;
        out.winding_cycle_fail += a.winding_cycle_fail;
        out.winding_range_fail += a.winding_range_fail;
        for (const auto& [k, v] : a.winding_histogram) out.winding_histogram[k] += v;
    }
    if (out.traced == 0) throw ZeroAcceptance("no traceable samples out of " + std::to_string(out.samples));
    return out;
}

}  // namespace hloop
