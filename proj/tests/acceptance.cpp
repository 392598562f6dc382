// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qmaflow/config.hpp"
#include "qmaflow/cr_flow.hpp"
#include "qmaflow/flow.hpp"
#include "qmaflow/harness.hpp"
#include "qmaflow/monitors.hpp"
#include "qmaflow/oracles.hpp"
#include "qmaflow/quadrature.hpp"
#include "qmaflow/verification.hpp"

using namespace qmaflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [violated]");
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const oracle::OracleReport& find(const std::vector<oracle::OracleReport>& reports, const std::string& name) {
    for (const auto& r : reports)
        if (r.name == name) return r;
    throw std::runtime_error("missing report " + name);
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const fs::path kRoot = fs::temp_directory_path() / "qmaflow_acceptance";

const json kElliptic = {{"mode", "solve"},
                        {"geometry", {{"n", 1}, {"grid", {32, 1, 32, 1}}}},
                        {"datum", {{"f", {{"preset", "cos1"}, {"amp", 0.2}}}}},
                        {"solver", {{"scheme", "explicit"}, {"tol", 1e-9}}}};

const json kNonlinear = {{"mode", "solve"},
                         {"geometry", {{"n", 2}, {"grid", {32, 1, 32, 1, 1, 1, 1, 1}}}},
                         {"datum", {{"f", {{"preset", "cos13"}, {"amp", 0.1}}}}},
                         {"solver", {{"scheme", "explicit"}, {"tol", 1e-9}}}};

RunOutcome solve(const json& doc, const std::string& dir) {
    RunConfig cfg = parse_config(doc, kRoot);
    cfg.out_dir = kRoot / dir;
    fs::remove_all(cfg.out_dir);
    return run(cfg);
}

struct Runs {
    RunOutcome elliptic;
    RunOutcome nonlinear;
    RunOutcome nonlinear_imex;
    ScalarField f_elliptic;
    ScalarField f_nonlinear;
};

Runs& runs() {
    static Runs r = [] {
        Runs out;
        out.elliptic = solve(kElliptic, "elliptic_a");
        out.nonlinear = solve(kNonlinear, "nonlinear_a");
        json imex = kNonlinear;
        imex["solver"]["scheme"] = "imex";
        out.nonlinear_imex = solve(imex, "nonlinear_imex");
        const RunConfig ce = parse_config(kElliptic, kRoot);
        out.f_elliptic = materialize(*ce.f, make_geometry(ce), ce.seed);
        const RunConfig cn = parse_config(kNonlinear, kRoot);
        out.f_nonlinear = materialize(*cn.f, make_geometry(cn), cn.seed);
        return out;
    }();
    return r;
}

std::vector<GeometryPtr> kernel_geometries() {
    return {build_flat_torus(1, {16, 1, 16, 1}), build_flat_torus(2, {16, 1, 16, 1, 1, 1, 1, 1}),
            build_flat_torus(2, {8, 8, 1, 1, 8, 8, 1, 1})};
}

std::map<const TorusGeometry*, std::vector<oracle::OracleReport>>& invariant_reports() {
    static std::map<const TorusGeometry*, std::vector<oracle::OracleReport>> cache;
    static std::vector<GeometryPtr> keep = kernel_geometries();
    if (cache.empty())
        for (const auto& g : keep) cache[g.get()] = oracle::run_invariant_suite(g, 100, 1);
    return cache;
}

Verdict kernel_equivalence() {
    Verdict v;
    double det = 0.0;
    for (const auto& [g, reports] : invariant_reports()) {
        const auto& r = find(reports, "det_pfaffian_equivalence");
        det = std::max(det, r.max_rel_error);
        v.pass = v.pass && r.pass && r.sample_count > 0;
    }
    v.require(det < 1e-9, "sup rel |ratio^2 - det ratio| = " + num(det));
    double pf = 0.0, ratio = 0.0;
    bool ok = true;
    for (const auto& g : kernel_geometries()) {
        const auto reports = oracle::run_oracle_suite(g, 100, 7);
        pf = std::max(pf, find(reports, "pfaffian_vs_wedge").max_rel_error);
        ratio = std::max(ratio, find(reports, "ma_ratio_vs_wedge").max_rel_error);
        ok = ok && find(reports, "pfaffian_vs_wedge").pass && find(reports, "ma_ratio_vs_wedge").pass;
    }
    v.require(ok && pf < 1e-12 && ratio < 1e-12, "pfaffian vs wedge expansion " + num(pf) + ", ratio vs wedge " + num(ratio));
    return v;
}

Verdict structural_identities() {
    Verdict v;
    double trace = 0, volume = 0, stokes = 0, qreal = 0;
    for (const auto& [g, reports] : invariant_reports()) {
        trace = std::max(trace, find(reports, "trace_identity").max_abs_error);
        volume = std::max(volume, find(reports, "volume_identity").max_rel_error);
        stokes = std::max(stokes, find(reports, "stokes_constraint").max_abs_error);
        qreal = std::max(qreal, find(reports, "q_reality").max_abs_error);
    }
    v.require(trace < 1e-9, "trace identity " + num(trace));
    v.require(volume < 1e-12, "volume identity " + num(volume));
    v.require(stokes < 1e-10, "mean ratio - 1 " + num(stokes));
    v.require(qreal < 1e-10, "q-reality " + num(qreal));
    return v;
}

Verdict first_variation() {
    Verdict v;
    double worst_order = 1e300;
    for (const auto& g : kernel_geometries()) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const ScalarField phi = oracle::admissible_random_field(g, seed);
            const ScalarField psi = oracle::random_band_limited_field(g, seed + 50, 1.0);
            const ScalarField zero(g);
            const ScalarField tangent = qma_tangent(phi, psi);
            std::vector<double> errs;
            for (double eps : {1e-2, 1e-3, 1e-4}) {
                const ScalarField fd = (0.5 / eps) * (qma_rhs(phi + eps * psi, zero) - qma_rhs(phi - eps * psi, zero));
                errs.push_back(sup_difference(fd, tangent));
            }
            for (std::size_t k = 1; k < errs.size(); ++k)
                worst_order = std::min(worst_order, std::log10(errs[k - 1] / errs[k]));
        }
    }
    v.require(worst_order > 1.8, "smallest observed order " + num(worst_order));
    return v;
}

Verdict elliptic_reproduction() {
    Verdict v;
    const RunOutcome& out = runs().elliptic;
    const QmaResult& r = *out.qma;
    const auto exact = oracle::elliptic_exact_n1(runs().f_elliptic);
    v.require(out.exit_code == 0 && r.converged, "converged in " + std::to_string(r.final_state.step_index) + " steps");
    v.require(r.trajectory.back().sup_phidot_tilde < 1e-9, "final sup|phidot - mean| " + num(r.trajectory.back().sup_phidot_tilde));
    const double dphi = sup_difference(r.phi_tilde, exact.phi_star);
    v.require(dphi < 1e-7, "|phi - phi*| " + num(dphi));
    v.require(std::abs(r.b - exact.b_star) < 1e-8, "|b - b*| " + num(std::abs(r.b - exact.b_star)));
    return v;
}

double b_from_mean(const ScalarField& f) {
    ScalarField e(f.geometry());
    for (std::size_t p = 0; p < f.size(); ++p) e[p] = std::exp(f[p]);
    return -std::log(weighted_mean(e));
}

Verdict nonlinear_convergence() {
    Verdict v;
    const RunOutcome& out = runs().nonlinear;
    const QmaResult& r = *out.qma;
    const ScalarField& f = runs().f_nonlinear;
    v.require(out.exit_code == 0 && r.converged, "converged in " + std::to_string(r.final_state.step_index) + " steps");
    v.require(r.elliptic_residual < 1e-8, "residual " + num(r.elliptic_residual));
    const double sup_f = sup_abs(f.values());
    v.require(std::abs(r.b) <= sup_f, "|b| = " + num(std::abs(r.b)) + " <= sup|f| = " + num(sup_f));
    const double db = std::abs(r.b - b_from_mean(f));
    v.require(db < 1e-8, "|b + log mean e^f| " + num(db));
    return v;
}

Verdict maximum_principle_and_decay() {
    Verdict v;
    for (auto* run : {&runs().elliptic, &runs().nonlinear}) {
        const auto& traj = run->qma->trajectory;
        const auto mp = find(oracle::monitor_suite(traj, 0.0), "max_principle");
        v.require(mp.pass, "largest per-step violation " + num(mp.max_abs_error));
        const auto fit = oracle::fit_terminal_decay(traj);
        v.require(fit.slope < 0 && fit.r_squared > 0.99,
                  "terminal decay slope " + num(fit.slope) + ", R^2 " + num(fit.r_squared));
    }
    return v;
}

Verdict scheme_independence() {
    Verdict v;
    const QmaResult& e = *runs().nonlinear.qma;
    const QmaResult& i = *runs().nonlinear_imex.qma;
    v.require(i.converged, "imex converged in " + std::to_string(i.final_state.step_index) + " steps");
    const double dphi = sup_difference(e.phi_tilde, i.phi_tilde);
    v.require(dphi < 1e-6, "|phi_explicit - phi_imex| " + num(dphi));
    v.require(std::abs(e.b - i.b) < 1e-7, "|b_explicit - b_imex| " + num(std::abs(e.b - i.b)));
    return v;
}

Verdict monitors() {
    Verdict v;
    const std::vector<std::pair<RunOutcome*, ScalarField*>> all = {{&runs().elliptic, &runs().f_elliptic},
                                                                   {&runs().nonlinear, &runs().f_nonlinear},
                                                                   {&runs().nonlinear_imex, &runs().f_nonlinear}};
    for (const auto& [run, f] : all) {
        const auto reports = oracle::monitor_suite(run->qma->trajectory, sup_abs(f->values()));
        const auto& tr = find(reports, "trace_plateau");
        const auto& osc = find(reports, "osc_bounded");
        v.require(tr.pass, "trace plateau spread " + num(tr.max_rel_error) + " at " +
                               num(run->qma->trajectory.back().max_tr_ghat_gphi));
        v.require(osc.pass, "max osc phi " + num(osc.max_abs_error));
    }
    for (const char* dir : {"elliptic_a", "nonlinear_a", "nonlinear_imex"}) {
        std::ifstream csv(kRoot / dir / "diagnostics.csv");
        std::string header;
        std::getline(csv, header);
        v.require(header == kDiagnosticsHeader, std::string(dir) + " CSV header");
    }
    return v;
}

Verdict chern_ricci() {
    Verdict v;
    auto flat = build_flat_torus(1, {32, 1, 32, 1});
    CrConfig cf;
    cf.geometry = flat;
    const CrResult rf = run_cr_flow(cf);
    v.require(sup_abs(rf.final_state.phi.values()) <= 1e-12 && std::isinf(rf.t_hat),
              "flat background: sup|phi| " + num(sup_abs(rf.final_state.phi.values())));

    auto u = sample(flat, [](auto x) { return 0.1 * std::cos(x[0]); });
    for (Scheme scheme : {Scheme::explicit_euler, Scheme::imex}) {
        CrConfig cc;
        cc.geometry = flat->with_conformal_factor(u.data());
        cc.scheme = scheme;
        cc.t_max = 1.0;
        const CrResult r = run_cr_flow(cc);
        v.require(r.final_state.t >= 1.0 - 1e-12, to_string(scheme) + " reached t = " + num(r.final_state.t));
        v.require(r.reconstruction_error < 1e-7, "reconstruction error " + num(r.reconstruction_error));
        v.require(r.bound_holds, "phi <= A t with A = " + num(r.bound_slope));
    }
    return v;
}

Verdict determinism() {
    Verdict v;
    solve(kElliptic, "elliptic_b");
    solve(kNonlinear, "nonlinear_b");
    for (const auto& [a, b] : {std::pair{"elliptic_a", "elliptic_b"}, std::pair{"nonlinear_a", "nonlinear_b"}}) {
        int files = 0;
        bool same = true;
        for (const auto& entry : fs::directory_iterator(kRoot / a)) {
            const fs::path other = kRoot / b / entry.path().filename();
            same = same && fs::exists(other) && read_all(entry.path()) == read_all(other);
            ++files;
        }
        v.require(same && files >= 4, std::string(a) + ": " + std::to_string(files) + " files bit-identical");
    }
    return v;
}

}  // namespace

int main() {
    fs::create_directories(kRoot);
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"algebraic kernel equivalence", kernel_equivalence},
        {"structural identities", structural_identities},
        {"first variation", first_variation},
        {"exact elliptic reproduction (n=1)", elliptic_reproduction},
        {"nonlinear convergence (n=2)", nonlinear_convergence},
        {"maximum principle and decay", maximum_principle_and_decay},
        {"scheme independence", scheme_independence},
        {"monitors", monitors},
        {"adapted Chern-Ricci flow", chern_ricci},
        {"determinism", determinism},
    };
    int passed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2zu %-36s %s  (%.1fs) %s\n", k + 1, criteria[k].first.c_str(), v.pass ? "PASS" : "FAIL",
                    secs, v.detail.c_str());
        std::fflush(stdout);
        passed += v.pass;
    }
    std::printf("acceptance: %d/%zu criteria passed\n", passed, criteria.size());
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
