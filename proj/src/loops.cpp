#include "hloop/loops.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hloop {

namespace {

struct Boundary {
    double time;
    bool start;  // co-location begins (true) or ends (false)
    int partner;
    int twin;  // index of the same boundary in the partner's list
};

struct Timeline {
    std::vector<Boundary> bounds;
    bool paired_at_zero = false;
    int pieces() const { return static_cast<int>(bounds.size()) + 1; }
    bool free_piece(int k) const { return k == 0 ? !paired_at_zero : !bounds[k - 1].start; }
    int piece_at(double t) const {  // right-continuous
        int k = 0;
        while (k < static_cast<int>(bounds.size()) && bounds[k].time <= t) ++k;
        return k;
    }
};

struct Traced {
    LoopDecomposition dec;
    std::vector<Timeline> lines;
    std::vector<std::vector<int>> piece_loop;  // -1 for co-located pieces
};

std::vector<Timeline> build_timelines(const Bundle& b) {
    const int N = static_cast<int>(b.paths.size());
    std::vector<Timeline> lines(N);
    std::vector<int> site(N), partner(N, -1);
    for (int i = 0; i < N; ++i) site[i] = b.paths[i].start.site;
    auto link = [&](int e, int p, double t, bool start) {
        int ie = static_cast<int>(lines[e].bounds.size()), ip = static_cast<int>(lines[p].bounds.size());
        lines[e].bounds.push_back({t, start, p, ip});
        lines[p].bounds.push_back({t, start, e, ie});
    };
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (site[i] == site[j]) {
                if (partner[i] >= 0 || partner[j] >= 0 || b.paths[i].start.spin == b.paths[j].start.spin)
                    throw UntraceableBundle("initial configuration violates the exclusion constraint");
                partner[i] = j;
                partner[j] = i;
                lines[i].paired_at_zero = lines[j].paired_at_zero = true;
            }
    for (const auto& ev : merged_events(b)) {
        const int e = ev.electron;
        if (partner[e] >= 0) {
            link(e, partner[e], ev.time, false);
            partner[partner[e]] = -1;
            partner[e] = -1;
        }
        site[e] = ev.to;
        for (int q = 0; q < N; ++q) {
            if (q == e || site[q] != site[e]) continue;
            if (partner[q] >= 0 || partner[e] >= 0 || b.paths[q].start.spin == b.paths[e].start.spin)
                throw UntraceableBundle("bundle leaves D");
            link(e, q, ev.time, true);
            partner[e] = q;
            partner[q] = e;
        }
    }
    return lines;
}

void emit(const Bundle& b, int e, double ta, double tb, int orientation, std::vector<LoopSegment>& out) {
    if (tb <= ta) return;
    const ElectronPath& p = b.paths[e];
    std::vector<LoopSegment> segs;
    double t = ta;
    int s = p.site_at(ta);
    for (const Jump& j : p.jumps) {
        if (j.time <= ta) continue;
        if (j.time >= tb) break;
        segs.push_back({e, s, t, j.time, orientation, p.start.spin});
        t = j.time;
        s = j.to;
    }
    segs.push_back({e, s, t, tb, orientation, p.start.spin});
    if (orientation < 0) std::reverse(segs.begin(), segs.end());
    out.insert(out.end(), segs.begin(), segs.end());
}

Traced trace(const Bundle& b) {
    const int N = static_cast<int>(b.paths.size());
    EventFlags f = classify(b);
    if (!f.periodic) throw UntraceableBundle("terminal configuration is not a permutation of the initial one");
    if (!f.in_D) throw UntraceableBundle("bundle leaves D");
    Traced tr;
    tr.dec.tau = f.tau;
    tr.dec.cycle_type = cycle_type(f.tau);
    tr.dec.loop_of.assign(N, -1);
    tr.lines = build_timelines(b);
    std::vector<int> tau_inv(N);
    for (int j = 0; j < N; ++j) tau_inv[f.tau[j]] = j;
    tr.piece_loop.resize(N);
    long total = 0;
    for (int e = 0; e < N; ++e) {
        tr.piece_loop[e].assign(tr.lines[e].pieces(), -1);
        total += tr.lines[e].pieces();
    }

    auto run = [&](int e0, int k0) {
        const int id = static_cast<int>(tr.dec.loops.size());
        Loop loop;
        std::set<int> members;
        if (k0 == 0) members.insert(e0);
        int e = e0, k = k0, dir = 1, c = 0;
        for (long steps = 0;; ++steps) {
            if (steps > 2 * total) throw UntraceableBundle("open trajectory");
            const Timeline& L = tr.lines[e];
            if (!L.free_piece(k)) throw UntraceableBundle("trace entered a co-located piece");
            if (tr.piece_loop[e][k] >= 0) throw UntraceableBundle("piece covered twice");
            tr.piece_loop[e][k] = id;
            const int sc = b.paths[e].start.spin * dir;
            if (c == 0) c = sc;
            if (sc != c) throw UntraceableBundle("spin-orientation product changed along a loop");
            const double ta = k == 0 ? 0.0 : L.bounds[k - 1].time;
            const double tb = k == L.pieces() - 1 ? b.beta : L.bounds[k].time;
            emit(b, e, ta, tb, dir, loop.segments);
            if (dir > 0) {
                if (k == L.pieces() - 1) {
                    e = f.tau[e];
                    k = 0;
                    ++loop.signed_winding;
                    members.insert(e);
                } else {
                    const Boundary& bd = L.bounds[k];
                    if (!bd.start) throw UntraceableBundle("forward trace met the end of a co-location");
                    e = bd.partner;
                    k = bd.twin;
                    dir = -1;
                }
            } else {
                if (k == 0) {
                    members.insert(e);
                    e = tau_inv[e];
                    k = tr.lines[e].pieces() - 1;
                    --loop.signed_winding;
                } else {
                    const Boundary& bd = L.bounds[k - 1];
                    if (bd.start) throw UntraceableBundle("backward trace met the start of a co-location");
                    e = bd.partner;
                    k = bd.twin + 1;
                    dir = 1;
                }
            }
            if (e == e0 && k == k0 && dir == 1) break;
        }
        loop.winding = std::abs(loop.signed_winding);
        loop.epsilon = loop.signed_winding == 0 ? 1 : c * (loop.signed_winding > 0 ? 1 : -1);
        loop.members.assign(members.begin(), members.end());
        for (int m : loop.members) tr.dec.loop_of[m] = id;
        tr.dec.loops.push_back(std::move(loop));
    };

    for (int e = 0; e < N; ++e)
        if (tr.lines[e].free_piece(0) && tr.piece_loop[e][0] < 0) run(e, 0);
    for (int e = 0; e < N; ++e)
        for (int k = 0; k < tr.lines[e].pieces(); ++k)
            if (tr.lines[e].free_piece(k) && tr.piece_loop[e][k] < 0) run(e, k);
    return tr;
}

}  // namespace

LoopDecomposition trace_loops(const Bundle& b) { return trace(b).dec; }

Bundle spin_flip(const Bundle& b, int j) {
    Traced tr = trace(b);
    const int target = tr.dec.loop_of.at(j);
    if (target < 0) return b;
    const int N = static_cast<int>(b.paths.size());
    auto spin = [&](int e, double t) {
        int k = tr.lines[e].piece_at(t);
        int s = b.paths[e].start.spin;
        return tr.piece_loop[e][k] == target ? -s : s;
    };
    Bundle out;
    out.beta = b.beta;
    std::vector<int> site(N);
    Config cur(N);
    for (int e = 0; e < N; ++e) {
        site[e] = b.paths[e].start.site;
        cur[e] = {site[e], spin(e, 0.0)};
        out.paths.push_back({cur[e], {}});
    }
    for (const auto& ev : merged_events(b)) {
        site[ev.electron] = ev.to;
        std::set<int> after, before;
        for (int e = 0; e < N; ++e) {
            after.insert(Point{site[e], spin(e, ev.time)}.orbital());
            before.insert(cur[e].orbital());
        }
        std::vector<int> gone, added;
        std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(gone));
        std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(added));
        if (gone.size() != 1 || added.size() != 1) throw UntraceableBundle("flip does not yield a single move");
        Point from = point_of_orbital(gone[0]), to = point_of_orbital(added[0]);
        if (from.spin != to.spin) throw UntraceableBundle("flip does not preserve spin");
        int l = static_cast<int>(std::find(cur.begin(), cur.end(), from) - cur.begin());
        out.paths[l].jumps.push_back({ev.time, from.site, to.site});
        cur[l] = to;
    }
    return out;
}

Bundle spin_flip(const Bundle& b, const std::vector<int>& xi) {
    Bundle m = b;
    for (size_t j = 0; j < xi.size(); ++j)
        if (xi[j] & 1) m = spin_flip(m, static_cast<int>(j));
    return m;
}

double loop_weight(const LoopDecomposition& dec, double beta, double b) {
    double w = 1.0;
    for (const auto& l : dec.loops) w *= std::cosh(beta * b * l.winding);
    return w;
}

int initial_spin_sum(const Bundle& m) {
    int s = 0;
    for (const auto& p : m.paths) s += p.start.spin;
    return s;
}

double field_weight(const Bundle& m, double beta, double b) { return std::exp(beta * b * initial_spin_sum(m)); }

int flipped_field(const LoopDecomposition& dec, const std::vector<int>& xi) {
    int s = 0;
    for (const auto& l : dec.loops) {
        int sign = 1;
        for (int i : l.members)
            if (xi[i] & 1) sign = -sign;
        s += l.epsilon * sign * l.winding;
    }
    return s;
}

int cross_section_spin(const Loop& loop, double t) {
    int s = 0;
    for (const auto& seg : loop.segments)
        if (seg.t0 <= t && t < seg.t1) s += seg.spin;
    return s;
}

}  // namespace hloop
