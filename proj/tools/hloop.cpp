// Batch front end: JSON config in, CSV + JSON summary + manifest out.
#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "hloop/estimators.hpp"
#include "hloop/loops.hpp"

using json = nlohmann::json;
using namespace hloop;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kCheckFailed = 1, kSchema = 2, kInfeasible = 3, kZeroAcceptance = 4 };

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void bad(const std::string& path, const std::string& msg) { throw SchemaError(path + ": " + msg); }

std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string sha256(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

// RFC 4180 writer
class Csv {
   public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row(header); }
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_) throw std::logic_error("csv row width");
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            const auto& c = cells[i];
            if (c.find_first_of(",\"\r\n") != std::string::npos) {
                out_ << '"';
                for (char ch : c) out_ << (ch == '"' ? "\"\"" : std::string(1, ch));
                out_ << '"';
            } else {
                out_ << c;
            }
        }
        out_ << "\r\n";
    }
    std::string str() const { return out_.str(); }

   private:
    size_t cols_;
    std::ostringstream out_;
};

// ---- config ----

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) bad(path, "must be an object");
    if (!j.contains(key)) bad(path + "." + key, "is required");
    return j.at(key);
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "must be a number");
    return j.get<double>();
}

long get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) bad(path, "must be an integer");
    return j.get<long>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) bad(path, "must be a string");
    return j.get<std::string>();
}

Eigen::MatrixXd get_matrix(const json& j, int n, const std::string& path) {
    if (j.is_number()) return j.get<double>() * Eigen::MatrixXd::Identity(n, n);
    if (!j.is_array() || static_cast<int>(j.size()) != n) bad(path, "must be a number or an " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        const auto& r = j[i];
        if (!r.is_array() || static_cast<int>(r.size()) != n) bad(path + "[" + std::to_string(i) + "]", "must have " + std::to_string(n) + " entries");
        for (int k = 0; k < n; ++k) M(i, k) = get_number(r[k], path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
    return M;
}

std::vector<double> get_grid(const json& j, const std::string& path, bool positive) {
    if (!j.is_array() || j.empty()) bad(path, "must be a nonempty list");
    std::vector<double> v;
    for (size_t i = 0; i < j.size(); ++i) {
        double x = get_number(j[i], path + "[" + std::to_string(i) + "]");
        if (positive ? !(x > 0.0) : !(x >= 0.0)) bad(path + "[" + std::to_string(i) + "]", positive ? "must be > 0" : "must be >= 0");
        v.push_back(x);
    }
    return v;
}

struct RunConfig {
    std::string task;
    Model model;
    std::vector<double> betas, bs;
    std::optional<McOptions> sampling;
    double b_max = 1.5;
};

RunConfig parse_config(const json& cfg, int threads) {
    if (!cfg.is_object()) bad("$", "config must be a JSON object");
    RunConfig rc;
    rc.task = get_string(field(cfg, "task", "$"), "task");
    if (rc.task != "ed" && rc.task != "mc" && rc.task != "loops" && rc.task != "verify" && rc.task != "report")
        bad("task", "must be one of ed, mc, loops, verify, report");

    const json& L = field(cfg, "lattice", "$");
    LatticeSpec ls;
    ls.dimension = static_cast<int>(get_int(field(L, "dimension", "lattice"), "lattice.dimension"));
    ls.side = static_cast<int>(get_int(field(L, "side", "lattice"), "lattice.side"));
    if (L.contains("t")) ls.t = get_number(L["t"], "lattice.t");
    try {
        if (L.contains("neighbor_norm")) ls.norm = neighbor_norm_from_string(get_string(L["neighbor_norm"], "lattice.neighbor_norm"));
        if (L.contains("boundary")) ls.boundary = boundary_from_string(get_string(L["boundary"], "lattice.boundary"));
        rc.model.lat = build_lattice(ls);
    } catch (const SchemaError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw SchemaError(e.what());
    }
    const int n = rc.model.lat.size();

    const json& M = field(cfg, "model", "$");
    rc.model.name = M.contains("name") ? get_string(M["name"], "model.name") : "model";
    long N = get_int(field(M, "N", "model"), "model.N");
    if (N < 1 || N > 2 * n) bad("model.N", "must be in [1, 2|Lambda|]");
    rc.model.N = static_cast<int>(N);
    if (M.contains("constraint")) {
        std::string c = get_string(M["constraint"], "model.constraint");
        if (c == "finite_u") rc.model.constraint = Constraint::finite_u;
        else if (c == "u_infinity") rc.model.constraint = Constraint::u_infinity;
        else bad("model.constraint", "must be finite_u or u_infinity");
    }
    if (rc.model.constraint == Constraint::u_infinity && N > n) bad("model.N", "must be <= |Lambda| at U = infinity");
    if (M.contains("U")) rc.model.p.U = get_number(M["U"], "model.U");
    if (M.contains("U_offsite")) {
        rc.model.p.U_offsite = get_matrix(M["U_offsite"], n, "model.U_offsite");
        if ((rc.model.p.U_offsite - rc.model.p.U_offsite.transpose()).norm() > 0.0) bad("model.U_offsite", "must be symmetric");
    }
    if (M.contains("phonon") && M.contains("photon")) bad("model", "phonon and photon are exclusive");
    if (M.contains("phonon")) {
        const json& P = M["phonon"];
        PhononParams ph;
        ph.omega = get_number(field(P, "omega", "model.phonon"), "model.phonon.omega");
        if (!(ph.omega > 0.0)) bad("model.phonon.omega", "must be > 0");
        ph.g = get_matrix(field(P, "g", "model.phonon"), n, "model.phonon.g");
        if ((ph.g - ph.g.transpose()).norm() > 0.0) bad("model.phonon.g", "must be symmetric");
        if (P.contains("n_max")) ph.n_max = static_cast<int>(get_int(P["n_max"], "model.phonon.n_max"));
        if (ph.n_max < 0) bad("model.phonon.n_max", "must be >= 0");
        if (P.contains("n_total")) ph.n_total = static_cast<int>(get_int(P["n_total"], "model.phonon.n_total"));
        if (P.contains("ed_frame")) {
            std::string f = get_string(P["ed_frame"], "model.phonon.ed_frame");
            if (f == "direct") rc.model.ed_frame = EdFrame::direct;
            else if (f == "lang_firsov") rc.model.ed_frame = EdFrame::lang_firsov;
            else bad("model.phonon.ed_frame", "must be direct or lang_firsov");
        }
        rc.model.phonon = ph;
    }
    if (M.contains("photon")) {
        const json& P = M["photon"];
        PhotonParams ph;
        ph.L = get_number(field(P, "L", "model.photon"), "model.photon.L");
        ph.kappa = get_number(field(P, "kappa", "model.photon"), "model.photon.kappa");
        ph.m0 = get_number(field(P, "m0", "model.photon"), "model.photon.m0");
        if (P.contains("n_max")) ph.n_max = static_cast<int>(get_int(P["n_max"], "model.photon.n_max"));
        if (P.contains("rho_scale")) ph.rho_scale = get_number(P["rho_scale"], "model.photon.rho_scale");
        if (!(ph.L > 0.0)) bad("model.photon.L", "must be > 0");
        if (!(ph.kappa > 0.0)) bad("model.photon.kappa", "must be > 0");
        if (!(ph.m0 > 0.0)) bad("model.photon.m0", "must be > 0");
        if (ph.L < ls.side) bad("model.photon.L", "must be >= lattice.side");
        if (ls.dimension > 3) bad("lattice.dimension", "photon coupling requires d <= 3");
        rc.model.photon = ph;
    }

    const json& G = field(cfg, "grids", "$");
    rc.betas = get_grid(field(G, "beta", "grids"), "grids.beta", true);
    rc.bs = get_grid(field(G, "b", "grids"), "grids.b", false);
    if (G.contains("b_max")) rc.b_max = get_number(G["b_max"], "grids.b_max");

    const bool stochastic = rc.task == "mc" || rc.task == "loops";
    if (cfg.contains("sampling")) {
        const json& S = cfg["sampling"];
        McOptions o;
        o.samples = get_int(field(S, "samples", "sampling"), "sampling.samples");
        if (o.samples < 1) bad("sampling.samples", "must be >= 1");
        const json& seed = field(S, "seed", "sampling");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long>() >= 0)) bad("sampling.seed", "must be a nonnegative integer");
        o.seed = seed.get<std::uint64_t>();
        if (S.contains("batches")) o.batches = static_cast<int>(get_int(S["batches"], "sampling.batches"));
        if (o.batches < 32) bad("sampling.batches", "must be >= 32");
        if (o.samples < o.batches) bad("sampling.samples", "must be >= sampling.batches");
        o.threads = threads;
        rc.sampling = o;
    } else if (stochastic) {
        bad("sampling", "is required for task " + rc.task);
    }
    return rc;
}

// ---- tasks ----

struct Check {
    std::string name;
    bool passed;
    std::string detail;
};

struct Outcome {
    std::map<std::string, std::string> files;  // name -> contents
    json summary = json::object();
    std::vector<Check> checks;
    std::ostringstream log;
};

Model at(const Model& base, double beta, double b) {
    Model m = base;
    m.p.beta = beta;
    m.p.b = b;
    return m;
}

std::string join(const std::vector<int>& v, const char* sep = " ") {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
    return s;
}

void task_ed(const RunConfig& rc, Outcome& out) {
    Csv z({"beta", "b", "Z", "S3", "bound", "margin"});
    Csv sec({"beta", "b", "two_m", "Z_m"});
    const int N = rc.model.N;
    for (double beta : rc.betas) {
        SectorSpectrum s = ed_spectrum(rc.model, 0.0);
        for (double b : rc.bs) {
            double bound = 0.5 * N * std::tanh(beta * b), s3 = s.S3(beta, b);
            z.row({num(beta), num(b), num(s.Z(beta, b)), num(s3), num(bound), num(s3 - bound)});
            for (const auto& [tm, e] : s.energies) sec.row({num(beta), num(b), std::to_string(tm), num(s.sector_Z(beta, b, tm))});
        }
    }
    out.files["ed.csv"] = z.str();
    out.files["ed_sectors.csv"] = sec.str();
}

void task_mc(const RunConfig& rc, Outcome& out) {
    Csv z({"beta", "b", "samples", "accepted", "acceptance", "Z_ed", "Z_field", "err_field", "Z_loop", "err_loop", "S3_loop",
           "err_S3"});
    Csv d({"beta", "b", "cycle_type", "D", "err"});
    std::optional<std::set<std::vector<int>>> allowed;
    if (rc.model.constraint == Constraint::u_infinity) {
        try {
            allowed = allowed_cycle_types(ConfigGraph{&rc.model.lat, rc.model.N, rc.model.constraint});
        } catch (const InfeasibleOracle& e) {
            out.log << "cycle-type oracle skipped: " << e.what() << "\n";
        }
    }
    json runs = json::array();
    for (double beta : rc.betas)
        for (double b : rc.bs) {
            Model m = at(rc.model, beta, b);
            McPartition r = mc_partition(m, *rc.sampling);
            double zed = NAN;
            try {
                zed = ed_partition(m).value;
            } catch (const InfeasibleOracle& e) {
                out.log << "ED cross-check skipped at beta=" << beta << " b=" << b << ": " << e.what() << "\n";
            }
            z.row({num(beta), num(b), std::to_string(r.field.samples), std::to_string(r.field.accepted), num(r.acceptance),
                   num(zed), num(r.field.value), num(r.field.error), num(r.loop.value), num(r.loop.error), num(r.s3.value),
                   num(r.s3.error)});
            for (const auto& [k, v] : r.D) d.row({num(beta), num(b), join(k), num(v.mean), num(v.error)});
            const std::string at_s = "beta=" + num(beta) + " b=" + num(b);
            double comb = std::hypot(r.field.error, r.loop.error);
            out.checks.push_back({"forms agree " + at_s, std::abs(r.field.value - r.loop.value) <= 3 * comb,
                                  num(std::abs(r.field.value - r.loop.value) / comb) + " sigma"});
            if (!std::isnan(zed)) {
                out.checks.push_back({"field vs ED " + at_s, std::abs(r.field.value - zed) <= 3 * r.field.error,
                                      num(std::abs(r.field.value - zed) / r.field.error) + " sigma"});
                out.checks.push_back({"loop vs ED " + at_s, std::abs(r.loop.value - zed) <= 3 * r.loop.error,
                                      num(std::abs(r.loop.value - zed) / r.loop.error) + " sigma"});
            }
            if (allowed) {
                bool sub = true;
                for (const auto& [k, v] : r.D)
                    if (v.mean != 0.0 && !allowed->count(k)) sub = false;
                out.checks.push_back({"cycle types allowed " + at_s, sub, ""});
            }
            runs.push_back({{"beta", beta}, {"b", b}, {"samples", r.field.samples}, {"accepted", r.field.accepted},
                            {"acceptance", r.acceptance}});
        }
    out.files["mc.csv"] = z.str();
    out.files["partition_weights.csv"] = d.str();
    out.summary["runs"] = runs;
}

void task_loops(const RunConfig& rc, Outcome& out) {
    Csv agg({"beta", "b", "samples", "traced", "spin_identity_fail", "cross_section_fail", "flip_field_fail",
             "flip_average_fail", "involution_fail", "winding_cycle_fail", "winding_range_fail"});
    Csv per({"beta", "b", "sample", "representative", "loops", "windings", "parities", "cycle_type"});
    Csv hist({"beta", "b", "winding", "count"});
    const auto reps = representatives(rc.model.lat.size(), rc.model.N, rc.model.constraint);
    for (double beta : rc.betas)
        for (double b : rc.bs) {
            Model m = at(rc.model, beta, b);
            LoopAudit a = audit_loops(m, *rc.sampling);
            agg.row({num(beta), num(b), std::to_string(a.samples), std::to_string(a.traced),
                     std::to_string(a.spin_identity_fail), std::to_string(a.cross_section_fail),
                     std::to_string(a.flip_field_fail), std::to_string(a.flip_average_fail),
                     std::to_string(a.involution_fail), std::to_string(a.winding_cycle_fail),
                     std::to_string(a.winding_range_fail)});
            for (const auto& [w, c] : a.winding_histogram) hist.row({num(beta), num(b), std::to_string(w), std::to_string(c)});
            out.checks.push_back({"loop identities beta=" + num(beta) + " b=" + num(b), a.clean(),
                                  std::to_string(a.traced) + " traced"});
            for (long s = 0; s < rc.sampling->samples; ++s) {
                Draw d = sample_bundle(m.lat, reps, beta, rc.sampling->seed, s);
                bool ok = d.flags.periodic &&
                          (m.constraint == Constraint::u_infinity ? d.flags.in_D_infinity : d.flags.in_D);
                if (!ok) continue;
                LoopDecomposition dec;
                try {
                    dec = trace_loops(d.bundle);
                } catch (const UntraceableBundle&) {
                    continue;
                }
                std::vector<int> w, e;
                for (const auto& l : dec.loops) {
                    w.push_back(l.winding);
                    e.push_back(l.epsilon);
                }
                per.row({num(beta), num(b), std::to_string(s), std::to_string(d.representative),
                         std::to_string(dec.loops.size()), join(w), join(e), join(dec.cycle_type)});
            }
        }
    out.files["loops.csv"] = agg.str();
    out.files["loop_samples.csv"] = per.str();
    out.files["winding_histogram.csv"] = hist.str();
}

void task_verify(const RunConfig& rc, Outcome& out) {
    AlReport rep = aizenman_lieb_report({rc.model}, rc.betas, rc.bs);
    Csv c({"instance", "beta", "b", "S3", "bound", "margin"});
    for (const auto& r : rep.rows) c.row({r.instance, num(r.beta), num(r.b), num(r.s3), num(r.bound), num(r.margin)});
    out.files["aizenman_lieb.csv"] = c.str();
    double min_margin = INFINITY;
    for (const auto& r : rep.rows) min_margin = std::min(min_margin, r.margin);
    out.checks.push_back({"Aizenman-Lieb margins > 0", rep.all_positive, "min margin " + num(min_margin)});
    out.summary["min_margin"] = min_margin;
}

void task_report(const RunConfig& rc, Outcome& out) {
    Csv co({"beta", "k", "C_k"});
    Csv fit({"beta", "residual", "condition", "parity_violation"});
    Csv sec({"beta", "two_m", "Z_m_ed", "coefficient_reading", "literal_reading"});
    Csv held({"beta", "b", "Z_ed", "Z_reconstructed", "relative_error"});
    for (double beta : rc.betas) {
        auto grid = chebyshev_b_grid(rc.model.N + 1, beta, rc.b_max);
        Coefficients c = one_d_coefficients(rc.model, beta, grid);
        for (size_t k = 0; k < c.C.size(); ++k) co.row({num(beta), std::to_string(k), num(c.C[k])});
        fit.row({num(beta), num(c.residual), num(c.condition), num(c.parity_violation)});
        const std::string at_s = "beta=" + num(beta);
        out.checks.push_back({"Vandermonde residual " + at_s, c.residual < 1e-8, num(c.residual)});
        out.checks.push_back({"parity clause " + at_s, c.parity_violation < 1e-8, num(c.parity_violation)});
        SectorSpectrum s = ed_spectrum(rc.model, 0.0);
        for (double b : rc.bs) {
            double ze = s.Z(beta, b), zr = c.Z(b), rel = std::abs(zr - ze) / ze;
            held.row({num(beta), num(b), num(ze), num(zr), num(rel)});
            out.checks.push_back({"reconstruction " + at_s + " b=" + num(b), rel < 1e-8, num(rel)});
        }
        SectorReport r = sector_identity_check(rc.model, beta, c);
        for (const auto& row : r.rows)
            sec.row({num(beta), std::to_string(row.two_m), num(row.ed), num(row.coefficient_reading), num(row.literal_reading)});
        out.checks.push_back({"sector identity (coefficient reading) " + at_s, r.coefficient_matches, num(r.residual_coefficient)});
        out.log << "sector identity literal reading at " << at_s << ": " << (r.literal_matches ? "matches" : "does not match")
                << " (residual " << num(r.residual_literal) << ")\n";
    }
    out.files["coefficients.csv"] = co.str();
    out.files["coefficient_fit.csv"] = fit.str();
    out.files["sectors.csv"] = sec.str();
    out.files["reconstruction.csv"] = held.str();
}

int run(const std::string& config_path, const std::string& out_dir, int threads, std::optional<std::uint64_t> seed_override) {
    const auto t0 = std::chrono::steady_clock::now();
    json cfg;
    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config " << config_path << "\n";
            return kSchema;
        }
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        std::cerr << "schema error: $: " << e.what() << "\n";
        return kSchema;
    }
    if (cfg.is_object() && cfg.contains("manifest_version")) cfg = cfg.at("config");  // re-run from a manifest
    if (seed_override) {
        if (!cfg.is_object() || !cfg.contains("sampling") || !cfg["sampling"].is_object()) {
            std::cerr << "schema error: sampling: --seed-override needs a sampling section\n";
            return kSchema;
        }
        cfg["sampling"]["seed"] = *seed_override;
    }

    RunConfig rc;
    try {
        rc = parse_config(cfg, threads);
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kSchema;
    } catch (const json::exception& e) {
        std::cerr << "schema error: $: " << e.what() << "\n";
        return kSchema;
    }

    Outcome out;
    try {
        if (rc.task == "ed") task_ed(rc, out);
        else if (rc.task == "mc") task_mc(rc, out);
        else if (rc.task == "loops") task_loops(rc, out);
        else if (rc.task == "verify") task_verify(rc, out);
        else task_report(rc, out);
    } catch (const InfeasibleOracle& e) {
        std::cerr << "infeasible oracle: " << e.what() << "\n";
        return kInfeasible;
    } catch (const ZeroAcceptance& e) {
        std::cerr << "zero acceptance: " << e.what() << "\n";
        return kZeroAcceptance;
    } catch (const std::invalid_argument& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kSchema;
    }

    fs::create_directories(out_dir);
    const std::string hash = sha256(cfg.dump());
    bool ok = true;
    json checks = json::array();
    for (const auto& c : out.checks) {
        ok &= c.passed;
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        out.log << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    }
    out.summary["task"] = rc.task;
    out.summary["config_sha256"] = hash;
    out.summary["checks"] = checks;
    out.summary["all_checks_passed"] = ok;
    if (rc.sampling) {
        out.summary["seed"] = rc.sampling->seed;
        out.summary["samples"] = rc.sampling->samples;
        out.summary["batches"] = rc.sampling->batches;
    }
    json outputs = json::object();
    for (const auto& [name, body] : out.files) {
        std::ofstream(fs::path(out_dir) / name, std::ios::binary) << body;
        outputs[name] = sha256(body);
    }
    const std::string summary = out.summary.dump(2) + "\n";
    std::ofstream(fs::path(out_dir) / "summary.json", std::ios::binary) << summary;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {{"manifest_version", 1}, {"tool", "hloop"},          {"version", kVersion},
                     {"config", cfg},         {"config_sha256", hash},    {"threads", threads},
                     {"wall_time_s", wall},   {"outputs", outputs},       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION)}};
    std::ofstream(fs::path(out_dir) / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
    out.log << "task " << rc.task << " finished in " << wall << " s with " << threads << " thread(s)\n";
    std::ofstream(fs::path(out_dir) / "log.txt", std::ios::binary) << out.log.str();
    std::cout << out.log.str();
    return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hloop: world-line and loop representations of Hubbard-type models"};
    std::string config, out_dir = "out";
    int threads = 1;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config, "JSON run configuration or manifest")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed-override", seed, "replace sampling.seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kSchema;
    }
    return run(config, out_dir, threads, seed);
}
