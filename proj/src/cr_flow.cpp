#include "qmaflow/cr_flow.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "qmaflow/error.hpp"
#include "qmaflow/ma_operator.hpp"
#include "qmaflow/quadrature.hpp"
#include "qmaflow/spectral.hpp"

namespace qmaflow {

namespace {

struct CrEval {
    FlowEvaluation flow;
    MatrixField metric;
};

MatrixField combine(const MatrixField& base, double t, const MatrixField& ric_minus, const MatrixField* proj_hess) {
    MatrixField g(base.geometry(), MatrixKind::hermitian);
    for (std::size_t p = 0; p < g.size(); ++p) {
        CMatrix m = base.at(p) - t * ric_minus.at(p);
        if (proj_hess) m += proj_hess->at(p);
        g.set(p, m);
    }
    return g;
}

CrEval evaluate_cr(const ScalarField& phi, double t, const MatrixField& background, const MatrixField& ric_minus,
                   const MatrixField& flat) {
    const MatrixField ph = j_projection(complex_hessian(phi));
    CrEval ev;
    ev.metric = combine(background, t, ric_minus, &ph);
    const ScalarField margin = positivity_margin(ev.metric);
    double lowest = margin[0];
    std::size_t where = 0;
    for (std::size_t p = 0; p < margin.size(); ++p)
        if (!(margin[p] >= lowest)) {
            lowest = margin[p];
            where = p;
        }
    if (!(lowest > 0.0)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "adapted Chern-Ricci metric degenerate at grid point %zu (margin %.17g, t = %.17g)",
                      where, lowest, t);
        throw PositivityError(buf, where, lowest, t);
    }
    ev.flow.rhs = log_det_ratio(ev.metric, background);
    ev.flow.min_margin = lowest;
    ev.flow.argmin = where;
    ev.flow.stiffness = 1.0 / lowest;
    ev.flow.max_trace = field_max(chern_trace(flat, ev.metric));
    return ev;
}

MatrixField shifted_solve(const MatrixField& m, double alpha) {
    const GeometryPtr& geom = m.geometry();
    MatrixField out(geom, m.kind());
    const int dim = m.dim();
    ScalarField re(geom), im(geom);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            for (std::size_t p = 0; p < m.size(); ++p) {
                re[p] = m.entry(p, i, j).real();
                im[p] = m.entry(p, i, j).imag();
            }
            const ScalarField sr = solve_shifted(re, alpha);
            const ScalarField si = solve_shifted(im, alpha);
            for (std::size_t p = 0; p < m.size(); ++p) out.entry(p, i, j) = cd{sr[p], si[p]};
        }
    return out;
}

MatrixField constant_field(const GeometryPtr& geom, const CMatrix& value) {
    MatrixField out(geom, MatrixKind::hermitian);
    for (std::size_t p = 0; p < out.size(); ++p) out.set(p, value);
    return out;
}

double max_lambda(const MatrixField& background, double t, const MatrixField& ric_minus) {
    const MatrixField g = combine(background, t, ric_minus, nullptr);
    return field_max(log_det_ratio(g, background));
}

}  // namespace

ScalarField cr_rhs(const ScalarField& phi, double t, const MatrixField& ric_minus) {
    const GeometryPtr& geom = phi.geometry();
    const MatrixField background = background_metric_field(geom);
    const MatrixField flat = constant_field(geom, geom->flat_metric());
    return evaluate_cr(phi, t, background, ric_minus, flat).flow.rhs;
}

MatrixField background_ric_minus(const GeometryPtr& geom) {
    ScalarField u(geom);
    if (!geom->is_flat()) u = ScalarField(geom, geom->conformal_u());
    return j_projection(chern_ricci_conformal(u));
}

double pencil_positivity_time(const MatrixField& g, const MatrixField& ric_minus) {
    double t_star = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Eigen::LLT<CMatrix> llt(g.at(p));
        if (llt.info() != Eigen::Success) return 0.0;
        const CMatrix linv = llt.matrixL().solve(CMatrix::Identity(g.dim(), g.dim()));
        const CMatrix c = linv * ric_minus.at(p) * linv.adjoint();
        const double mu = Eigen::SelfAdjointEigenSolver<CMatrix>(c, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        if (mu > 0.0) t_star = std::min(t_star, 1.0 / mu);
    }
    return t_star;
}

CrResult run_cr_flow(const CrConfig& cfg) {
    if (!cfg.geometry) throw std::invalid_argument("cr flow: missing geometry");
    if (cfg.dt_initial && !(*cfg.dt_initial > 0.0)) throw std::invalid_argument("cr flow: dt_initial must be positive");
    if (!(cfg.dt_safety > 0.0 && cfg.dt_safety <= 1.0)) throw std::invalid_argument("cr flow: dt_safety must lie in (0, 1]");
    if (!(cfg.t_max > 0.0)) throw std::invalid_argument("cr flow: t_max must be positive");

    const GeometryPtr& geom = cfg.geometry;
    const MatrixField background = background_metric_field(geom);
    const MatrixField flat = constant_field(geom, geom->flat_metric());
    const MatrixField ric_minus = background_ric_minus(geom);

    CrResult result;
    result.pencil_time = pencil_positivity_time(background, ric_minus);

    // Independent tensor evolution: G' = -P(Ric(G)), Ric by differentiating log det G.
    MatrixField tensor = background;
    const MatrixField tensor_ric0 = j_projection(chern_ricci_form(background));

    FlowState state;
    state.phi = ScalarField(geom);
    CrEval ev = evaluate_cr(state.phi, 0.0, background, ric_minus, flat);
    state.eval = ev.flow;
    state.phi_dot = ev.flow.rhs;

    auto record = [&](const CrEval& current) {
        CrRecord r;
        r.step = state.step_index;
        r.t = state.t;
        r.dt = state.dt_last;
        r.sup_phidot = field_max(state.phi_dot);
        r.inf_phidot = field_min(state.phi_dot);
        r.osc_phi = oscillation(state.phi);
        r.max_phi = field_max(state.phi);
        r.min_pos_margin = current.flow.min_margin;
        r.max_tr_ghat_gphi = current.flow.max_trace;
        const bool check = cfg.check_every > 0 && state.step_index % cfg.check_every == 0;
        r.reconstruction_error = check ? sup_difference(tensor, current.metric) : std::nan("");
        if (check) result.reconstruction_error = std::max(result.reconstruction_error, r.reconstruction_error);
        r.upper_bound = std::nan("");
        result.trajectory.push_back(r);
        if (cfg.observer) cfg.observer(state);
    };
    record(ev);

    auto propose = [&](double dt) {
        ScalarField inc = state.phi_dot;
        if (cfg.scheme == Scheme::imex) inc = solve_shifted(inc, dt * state.eval.stiffness);
        return state.phi + dt * inc;
    };

    while (state.t < cfg.t_max && state.step_index < cfg.max_steps) {
        double dt;
        if (cfg.dt_initial) {
            dt = *cfg.dt_initial;
        } else {
            dt = cfl_step(*geom, state.eval.stiffness, cfg.dt_safety);
            if (cfg.scheme == Scheme::imex) dt *= 10.0;
        }
        dt = std::min(dt, cfg.t_max - state.t);
        if (dt <= 1e-14 * std::max(1.0, state.t)) {
            result.t_hat = state.t;
            break;
        }

        std::optional<CrEval> next;
        double used = dt;
        for (int attempt = 0; attempt < 2 && !next; ++attempt) {
            used = attempt == 0 ? dt : 0.5 * dt;
            try {
                next = evaluate_cr(propose(used), state.t + used, background, ric_minus, flat);
            } catch (const PositivityError&) {
            }
        }
        if (!next) {
            // Positivity is lost inside (t, t + dt/2]: locate the boundary.
            double lo = 0.0, hi = used;
            for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, state.t); ++it) {
                const double mid = 0.5 * (lo + hi);
                try {
                    evaluate_cr(propose(mid), state.t + mid, background, ric_minus, flat);
                    lo = mid;
                } catch (const PositivityError&) {
                    hi = mid;
                }
            }
            result.t_hat = state.t + hi;
            break;
        }

        // Tensor step with the same discretization.
        MatrixField ric = j_projection(chern_ricci_form(tensor));
        MatrixField drive(geom, MatrixKind::hermitian);
        for (std::size_t p = 0; p < drive.size(); ++p) drive.set(p, tensor_ric0.at(p) - ric.at(p));
        if (cfg.scheme == Scheme::imex) drive = shifted_solve(drive, used * state.eval.stiffness);
        for (std::size_t p = 0; p < tensor.size(); ++p)
            tensor.set(p, tensor.at(p) - used * tensor_ric0.at(p) + used * drive.at(p));

        state.phi = propose(used);
        state.t += used;
        state.step_index += 1;
        state.dt_last = used;
        state.eval = next->flow;
        state.phi_dot = next->flow.rhs;
        record(*next);
    }

    // Upper bound phi <= A t, checked below the pencil time where the bound is defined.
    double a = -std::numeric_limits<double>::infinity();
    for (const auto& r : result.trajectory)
        if (r.t < result.pencil_time) a = std::max(a, max_lambda(background, r.t, ric_minus));
    result.bound_slope = a;
    for (auto& r : result.trajectory) {
        if (!(r.t < result.pencil_time)) continue;
        r.upper_bound = a * r.t;
        if (r.max_phi > r.upper_bound + 1e-10) result.bound_holds = false;
    }
    result.final_state = std::move(state);
    return result;
}

void write_cr_csv(const std::filesystem::path& path, const std::vector<CrRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << kCrDiagnosticsHeader << '\n';
    for (const auto& r : records) {
        os << r.step << ',' << format_number(r.t) << ',' << format_number(r.dt) << ',' << format_number(r.sup_phidot)
           << ',' << format_number(r.inf_phidot) << ',' << format_number(r.osc_phi) << ','
           << format_number(r.min_pos_margin) << ',' << format_number(r.max_tr_ghat_gphi) << ','
           << format_number(r.reconstruction_error) << ',' << format_number(r.upper_bound) << '\n';
    }
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace qmaflow
