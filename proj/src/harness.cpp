#include "qmaflow/harness.hpp"

#include <cstdio>
#include <fstream>

#include "qmaflow/error.hpp"
#include "qmaflow/json_format.hpp"
#include "qmaflow/monitors.hpp"
#include "qmaflow/quadrature.hpp"
#include "qmaflow/snapshot.hpp"
#include "qmaflow/verification.hpp"

namespace qmaflow {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

json geometry_json(const RunConfig& cfg) { return {{"n", cfg.n}, {"grid", cfg.grid}, {"periods", cfg.periods}}; }

json header_extra(const RunConfig& cfg) { return {{"config_hash", cfg.hash}, {"mode", to_string(cfg.mode)}}; }

json step_extra(const RunConfig& cfg, const FlowState& s) {
    json extra = header_extra(cfg);
    extra["t"] = s.t;
    extra["step"] = s.step_index;
    return extra;
}

json reports_json(const std::vector<oracle::OracleReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(oracle::to_json(r));
    return arr;
}

bool all_pass(const std::vector<oracle::OracleReport>& reports) {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return true;
}

void fail(RunOutcome& out, const RunConfig& cfg, int code, json error) {
    error["config_hash"] = cfg.hash;
    out.exit_code = code;
    out.error = error;
    write_text(cfg.out_dir / "error.json", dump17(error) + "\n");
}

json record_json(const DiagnosticsRecord& r) {
    return {{"step", r.step},
            {"t", r.t},
            {"dt", r.dt},
            {"sup_phidot", r.sup_phidot},
            {"inf_phidot", r.inf_phidot},
            {"osc_phi", r.osc_phi},
            {"b_t", r.b_t},
            {"min_pos_margin", r.min_pos_margin},
            {"max_tr_ghat_gphi", r.max_tr_ghat_gphi},
            {"elliptic_residual", r.elliptic_residual}};
}

std::string snapshot_name(const char* stem, long step) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_step_%08ld.qmf", stem, step);
    return buf;
}

void run_solve(const RunConfig& cfg, RunOutcome& out, std::ostream* log) {
    const GeometryPtr geom = make_geometry(cfg);
    FlowConfig fc;
    fc.geometry = geom;
    fc.f = materialize(*cfg.f, geom, cfg.seed);
    fc.scheme = cfg.scheme;
    fc.dt_initial = cfg.dt;
    fc.dt_safety = cfg.dt_safety;
    fc.tol = cfg.tol;
    fc.t_max = cfg.t_max;
    fc.max_steps = cfg.max_steps;
    write_snapshot(cfg.out_dir / "f.qmf", fc.f, "f", header_extra(cfg));

    std::vector<DiagnosticsRecord> records;
    fc.observer = [&](const FlowState& s) {
        records.push_back(make_record(s));
        if (cfg.snapshot_every > 0 && s.step_index % cfg.snapshot_every == 0)
            write_snapshot(cfg.out_dir / snapshot_name("phi", s.step_index), s.phi, "phi",
                           step_extra(cfg, s));
        if (log && s.step_index % 1000 == 0)
            *log << "solve: step " << s.step_index << " t=" << format_number(s.t)
                 << " sup|phidot-mean|=" << format_number(records.back().sup_phidot_tilde) << '\n';
    };

    const double sup_f = sup_abs(fc.f.values());
    try {
        out.qma = run_qma_flow(fc);
    } catch (const PositivityError& e) {
        write_diagnostics_csv(cfg.out_dir / cfg.csv, records);
        json err = {{"error", "blowup"},
                    {"message", e.what()},
                    {"point", e.point()},
                    {"margin", e.margin()},
                    {"time", e.time()}};
        if (!records.empty()) err["last_diagnostics"] = record_json(records.back());
        fail(out, cfg, exit_blowup, err);
        return;
    }
    const QmaResult& r = *out.qma;
    write_diagnostics_csv(cfg.out_dir / cfg.csv, records);
    json extra = header_extra(cfg);
    extra["b"] = r.b;
    extra["t"] = r.final_state.t;
    extra["steps"] = r.final_state.step_index;
    write_snapshot(cfg.out_dir / "phi_tilde.qmf", r.phi_tilde, "phi_tilde", extra);

    out.reports = oracle::monitor_suite(r.trajectory, sup_f);
    if (r.converged) out.reports.push_back(oracle::decay_report(r.trajectory));
    out.summary = {{"b", r.b},
                   {"steps", r.final_state.step_index},
                   {"t_final", r.final_state.t},
                   {"converged", r.converged},
                   {"residual", r.elliptic_residual},
                   {"sup_f", sup_f},
                   {"geometry", geometry_json(cfg)},
                   {"config_hash", cfg.hash},
                   {"config", cfg.resolved},
                   {"monitors", reports_json(out.reports)}};
    if (!r.converged) {
        json err = {{"error", "not_converged"},
                    {"message", "sup|phidot - mean| did not fall below tol within t_max / max_steps"},
                    {"last_diagnostics", record_json(r.trajectory.back())}};
        fail(out, cfg, exit_not_converged, err);
    }
    if (log)
        *log << "solve: " << (r.converged ? "converged" : "not converged") << " after "
             << r.final_state.step_index << " steps, b=" << format_number(r.b) << '\n';
}

void run_cr(const RunConfig& cfg, RunOutcome& out, std::ostream* log) {
    const GeometryPtr flat = make_geometry(cfg);
    const ScalarField u = materialize(*cfg.u, flat, cfg.seed);
    write_snapshot(cfg.out_dir / "u.qmf", u, "u", header_extra(cfg));

    CrConfig cc;
    cc.geometry = flat->with_conformal_factor(u.data());
    cc.scheme = cfg.scheme;
    cc.dt_initial = cfg.dt;
    cc.dt_safety = cfg.dt_safety;
    cc.t_max = cfg.t_max;
    cc.max_steps = cfg.max_steps;
    cc.observer = [&](const FlowState& s) {
        if (cfg.snapshot_every > 0 && s.step_index % cfg.snapshot_every == 0)
            write_snapshot(cfg.out_dir / snapshot_name("phi", s.step_index), s.phi, "phi",
                           step_extra(cfg, s));
        if (log && s.step_index % 1000 == 0) *log << "cr-flow: step " << s.step_index << " t=" << format_number(s.t) << '\n';
    };
    out.cr = run_cr_flow(cc);
    const CrResult& r = *out.cr;
    write_cr_csv(cfg.out_dir / cfg.csv, r.trajectory);
    json extra = header_extra(cfg);
    extra["t"] = r.final_state.t;
    write_snapshot(cfg.out_dir / "phi_final.qmf", r.final_state.phi, "phi", extra);

    out.reports = oracle::monitor_suite(r);
    const bool finite = std::isfinite(r.t_hat);
    out.summary = {{"t_hat", finite ? json(r.t_hat) : json(nullptr)},
                   {"t_hat_infinite", !finite},
                   {"pencil_time", std::isfinite(r.pencil_time) ? json(r.pencil_time) : json(nullptr)},
                   {"steps", r.final_state.step_index},
                   {"t_final", r.final_state.t},
                   {"reconstruction_error", r.reconstruction_error},
                   {"upper_bound_slope", r.bound_slope},
                   {"upper_bound_holds", r.bound_holds},
                   {"geometry", geometry_json(cfg)},
                   {"config_hash", cfg.hash},
                   {"config", cfg.resolved},
                   {"monitors", reports_json(out.reports)}};
    if (!all_pass(out.reports)) {
        json err = {{"error", "monitor_failed"}, {"monitors", reports_json(out.reports)}};
        fail(out, cfg, exit_check_failed, err);
    }
    if (log)
        *log << "cr-flow: reached t=" << format_number(r.final_state.t)
             << (finite ? " (positivity lost)" : "") << ", reconstruction error "
             << format_number(r.reconstruction_error) << '\n';
}

void run_checks(const RunConfig& cfg, RunOutcome& out, std::ostream* log) {
    const GeometryPtr geom = make_geometry(cfg);
    out.reports = cfg.mode == Mode::verify ? oracle::run_invariant_suite(geom, cfg.samples, cfg.seed)
                                           : oracle::run_oracle_suite(geom, cfg.samples, cfg.seed);
    std::string lines;
    for (const auto& r : out.reports) {
        lines += dump17(oracle::to_json(r)) + "\n";
        if (log) *log << (r.pass ? "PASS " : "FAIL ") << r.name << '\n';
    }
    write_text(cfg.out_dir / "oracle_reports.jsonl", lines);
    const bool ok = all_pass(out.reports);
    out.summary = {{"all_pass", ok},
                   {"suites", out.reports.size()},
                   {"samples", cfg.samples},
                   {"seed", cfg.seed},
                   {"geometry", geometry_json(cfg)},
                   {"config_hash", cfg.hash},
                   {"config", cfg.resolved}};
    if (!ok) fail(out, cfg, exit_check_failed, {{"error", "oracle_failed"}, {"reports", reports_json(out.reports)}});
}

}  // namespace

RunOutcome run(const RunConfig& cfg, std::ostream* log) {
    RunOutcome out;
    std::filesystem::create_directories(cfg.out_dir);
    std::filesystem::remove(cfg.out_dir / "error.json");
    try {
        switch (cfg.mode) {
            case Mode::solve: run_solve(cfg, out, log); break;
            case Mode::cr_flow: run_cr(cfg, out, log); break;
            case Mode::verify:
            case Mode::oracle: run_checks(cfg, out, log); break;
        }
    } catch (const ConventionError& e) {
        fail(out, cfg, exit_internal, {{"error", "convention"}, {"message", e.what()}});
        return out;
    }
    if (!out.summary.is_null()) write_text(cfg.out_dir / "summary.json", dump17(out.summary) + "\n");
    return out;
}

}  // namespace qmaflow
