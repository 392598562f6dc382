#include "qmaflow/flow.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "qmaflow/error.hpp"
#include "qmaflow/ma_operator.hpp"
#include "qmaflow/quadrature.hpp"
#include "qmaflow/spectral.hpp"

namespace qmaflow {

std::string to_string(Scheme scheme) { return scheme == Scheme::imex ? "imex" : "explicit"; }

Scheme scheme_from_string(const std::string& name) {
    if (name == "explicit" || name == "explicit_euler") return Scheme::explicit_euler;
    if (name == "imex") return Scheme::imex;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected explicit or imex)");
}

namespace {

struct Margin {
    double value;
    std::size_t point;
};

Margin min_margin(const MatrixField& g) {
    const ScalarField margin = positivity_margin(g);
    Margin out{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t p = 0; p < margin.size(); ++p) {
        if (!(margin[p] > 0.0)) return {margin[p], p};
        if (margin[p] < out.value) out = {margin[p], p};
    }
    return out;
}

void require_positive(const Margin& m, double t) {
    if (!(m.value > 0.0)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "g_phi lost positivity at grid point %zu (margin %.17g, t = %.17g)", m.point,
                      m.value, t);
        throw PositivityError(buf, m.point, m.value, t);
    }
}

FlowEvaluation evaluate(const ScalarField& phi, const ScalarField& f, const ScalarField& weight,
                        const MatrixField& background, double t) {
    const MatrixField h = complex_hessian(phi);
    const MatrixField g = metric_from_hessian(h);
    const Margin m = min_margin(g);
    require_positive(m, t);

    const ScalarField ratio = ma_ratio_from_hessian(h);
    FlowEvaluation ev;
    ev.min_margin = m.value;
    ev.argmin = m.point;
    ev.stiffness = 1.0 / m.value;
    ev.rhs = ScalarField(phi.geometry());
    ScalarField log_minus_f(phi.geometry());
    for (std::size_t p = 0; p < phi.size(); ++p) {
        const double lr = std::log(ratio[p]);
        ev.rhs[p] = 2.0 * lr - 2.0 * f[p];
        log_minus_f[p] = lr - f[p];
    }
    ev.b = weighted_mean(log_minus_f, weight);
    ev.max_trace = field_max(chern_trace(background, g));
    double res = 0.0;
    for (std::size_t p = 0; p < phi.size(); ++p) res = std::max(res, std::abs(ratio[p] - std::exp(f[p] + ev.b)));
    ev.residual = res;
    return ev;
}

struct Context {
    ScalarField weight;
    MatrixField background;
};

Context make_context(const GeometryPtr& geom) { return {volume_weight(geom), background_metric_field(geom)}; }

void validate(const FlowConfig& cfg) {
    if (!cfg.geometry) throw std::invalid_argument("flow: missing geometry");
    if (cfg.f.geometry() != cfg.geometry) throw std::invalid_argument("flow: datum lives on a different geometry");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("flow: tol must be positive");
    if (cfg.dt_initial && !(*cfg.dt_initial > 0.0)) throw std::invalid_argument("flow: dt_initial must be positive");
    if (!(cfg.dt_safety > 0.0 && cfg.dt_safety <= 1.0)) throw std::invalid_argument("flow: dt_safety must lie in (0, 1]");
    if (!(cfg.t_max > 0.0)) throw std::invalid_argument("flow: t_max must be positive");
    if (cfg.max_steps < 0) throw std::invalid_argument("flow: max_steps must be non-negative");
}

double sup_tilde(const ScalarField& v) {
    const double mean = weighted_mean(v);
    double out = 0.0;
    for (std::size_t p = 0; p < v.size(); ++p) out = std::max(out, std::abs(v[p] - mean));
    return out;
}

double choose_dt(const FlowState& state, const FlowConfig& cfg) {
    if (cfg.dt_initial) return *cfg.dt_initial;
    const double cfl = cfl_step(*cfg.geometry, state.eval.stiffness, cfg.dt_safety);
    return cfg.scheme == Scheme::imex ? 10.0 * cfl : cfl;
}

ScalarField propose(const FlowState& state, const FlowConfig& cfg, double dt) {
    ScalarField increment = state.phi_dot;
    if (cfg.scheme == Scheme::imex) increment = solve_shifted(increment, dt * state.eval.stiffness);
    return state.phi + dt * increment;
}

}  // namespace

ScalarField qma_rhs(const ScalarField& phi, const ScalarField& f) {
    const GeometryPtr& geom = phi.geometry();
    return evaluate(phi, f, volume_weight(geom), background_metric_field(geom), 0.0).rhs;
}

ScalarField qma_rhs_logdet(const ScalarField& phi, const ScalarField& f) {
    const MatrixField g = metric_from_potential(phi);
    require_positive(min_margin(g), 0.0);
    ScalarField out = log_det_ratio(g, background_metric_field(phi.geometry()));
    for (std::size_t p = 0; p < out.size(); ++p) out[p] -= 2.0 * f[p];
    return out;
}

ScalarField qma_tangent(const ScalarField& phi, const ScalarField& psi) {
    return chern_trace(metric_from_potential(phi), complex_hessian(psi));
}

double extract_b(const ScalarField& phi, const ScalarField& f) {
    const MatrixField g = metric_from_potential(phi);
    require_positive(min_margin(g), 0.0);
    const ScalarField ratio = ma_ratio(phi);
    ScalarField integrand(phi.geometry());
    for (std::size_t p = 0; p < phi.size(); ++p) integrand[p] = std::log(ratio[p]) - f[p];
    return weighted_mean(integrand, volume_weight(phi.geometry()));
}

double elliptic_residual(const ScalarField& phi, const ScalarField& f, double b) {
    const ScalarField ratio = ma_ratio(phi);
    double res = 0.0;
    for (std::size_t p = 0; p < phi.size(); ++p) res = std::max(res, std::abs(ratio[p] - std::exp(f[p] + b)));
    return res;
}

ScalarField normalize(const ScalarField& phi) {
    ScalarField out = phi;
    const double mean = weighted_mean(phi, volume_weight(phi.geometry()));
    for (std::size_t p = 0; p < out.size(); ++p) out[p] -= mean;
    return out;
}

double cfl_step(const TorusGeometry& geom, double stiffness, double safety) {
    const double h = geom.min_active_spacing();
    if (h == 0.0) return safety;  // no active dimension: the flow is an ODE per point
    return safety * h * h / (4.0 * stiffness);
}

FlowState initial_state(const FlowConfig& cfg) {
    validate(cfg);
    const Context ctx = make_context(cfg.geometry);
    FlowState s;
    s.phi = ScalarField(cfg.geometry);
    s.eval = evaluate(s.phi, cfg.f, ctx.weight, ctx.background, 0.0);
    s.phi_dot = s.eval.rhs;
    return s;
}

namespace {

FlowState step_with(const FlowState& state, const FlowConfig& cfg, const Context& ctx) {
    double dt = choose_dt(state, cfg);
    for (int attempt = 0;; ++attempt) {
        ScalarField next = propose(state, cfg, dt);
        try {
            FlowState out;
            out.eval = evaluate(next, cfg.f, ctx.weight, ctx.background, state.t + dt);
            out.t = state.t + dt;
            out.phi = std::move(next);
            out.phi_dot = out.eval.rhs;
            out.step_index = state.step_index + 1;
            out.dt_last = dt;
            return out;
        } catch (const PositivityError& e) {
            if (attempt == 1) {
                char buf[256];
                std::snprintf(buf, sizeof buf, "flow blow-up at step %ld after halving dt to %.17g: %s",
                              state.step_index + 1, dt, e.what());
                throw PositivityError(buf, e.point(), e.margin(), e.time());
            }
            dt *= 0.5;
        }
    }
}

}  // namespace

FlowState step(const FlowState& state, const FlowConfig& cfg) {
    validate(cfg);
    return step_with(state, cfg, make_context(cfg.geometry));
}

DiagnosticsRecord make_record(const FlowState& s) {
    DiagnosticsRecord r;
    r.step = s.step_index;
    r.t = s.t;
    r.dt = s.dt_last;
    r.sup_phidot = field_max(s.phi_dot);
    r.inf_phidot = field_min(s.phi_dot);
    r.osc_phi = oscillation(s.phi);
    r.b_t = s.eval.b;
    r.min_pos_margin = s.eval.min_margin;
    r.max_tr_ghat_gphi = s.eval.max_trace;
    r.elliptic_residual = s.eval.residual;
    r.sup_phidot_tilde = sup_tilde(s.phi_dot);
    return r;
}

QmaResult run_qma_flow(const FlowConfig& cfg) {
    validate(cfg);
    const Context ctx = make_context(cfg.geometry);
    FlowState state;
    state.phi = ScalarField(cfg.geometry);
    state.eval = evaluate(state.phi, cfg.f, ctx.weight, ctx.background, 0.0);
    state.phi_dot = state.eval.rhs;

    QmaResult result;
    while (true) {
        result.trajectory.push_back(make_record(state));
        if (cfg.observer) cfg.observer(state);
        if (result.trajectory.back().sup_phidot_tilde < cfg.tol) {
            result.converged = true;
            break;
        }
        if (state.t >= cfg.t_max || state.step_index >= cfg.max_steps) break;
        state = step_with(state, cfg, ctx);
    }

    ScalarField tilde = state.phi;
    const double mean = weighted_mean(state.phi, ctx.weight);
    for (std::size_t p = 0; p < tilde.size(); ++p) tilde[p] -= mean;
    result.phi_tilde = std::move(tilde);
    result.b = state.eval.b;
    result.elliptic_residual = state.eval.residual;
    result.final_state = std::move(state);
    return result;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << kDiagnosticsHeader << '\n';
    for (const auto& r : records) {
        os << r.step << ',' << format_number(r.t) << ',' << format_number(r.dt) << ',' << format_number(r.sup_phidot)
           << ',' << format_number(r.inf_phidot) << ',' << format_number(r.osc_phi) << ',' << format_number(r.b_t)
           << ',' << format_number(r.min_pos_margin) << ',' << format_number(r.max_tr_ghat_gphi) << ','
           << format_number(r.elliptic_residual) << '\n';
    }
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace qmaflow
