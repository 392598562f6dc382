#include "qmaflow/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmaflow::oracle {

namespace {

template <class Get>
OracleReport plateau(const std::string& name, const std::vector<DiagnosticsRecord>& traj, Get get, double tol) {
    OracleReport r;
    r.name = name;
    r.tolerance = tol;
    r.sample_count = traj.size();
    bool finite = true;
    for (const auto& rec : traj) finite = finite && std::isfinite(get(rec));
    const std::size_t tail = std::max<std::size_t>(1, traj.size() / 10);
    double lo = get(traj.back()), hi = lo;
    for (std::size_t k = traj.size() - tail; k < traj.size(); ++k) {
        lo = std::min(lo, get(traj[k]));
        hi = std::max(hi, get(traj[k]));
    }
    r.max_abs_error = hi - lo;
    r.max_rel_error = (hi - lo) / std::max(1.0, std::abs(get(traj.back())));
    r.finalize(true);
    r.pass = r.pass && finite;
    if (!finite) r.max_abs_error = r.max_rel_error = std::nan("");
    return r;
}

}  // namespace

std::vector<OracleReport> monitor_suite(const std::vector<DiagnosticsRecord>& traj, double sup_f, double slack,
                                        double plateau_tol) {
    if (traj.empty()) throw std::invalid_argument("monitor_suite: empty trajectory");
    std::vector<OracleReport> out;

    OracleReport mp;
    mp.name = "max_principle";
    mp.tolerance = slack;
    mp.sample_count = traj.size();
    for (std::size_t k = 1; k < traj.size(); ++k) {
        mp.max_abs_error = std::max(mp.max_abs_error, traj[k].sup_phidot - traj[k - 1].sup_phidot);
        mp.max_abs_error = std::max(mp.max_abs_error, traj[k - 1].inf_phidot - traj[k].inf_phidot);
    }
    mp.max_rel_error = mp.max_abs_error;
    mp.finalize();
    out.push_back(mp);

    OracleReport sb;
    sb.name = "speed_bound";
    sb.tolerance = slack;
    sb.sample_count = traj.size();
    for (const auto& rec : traj) {
        const double speed = std::max(std::abs(rec.sup_phidot), std::abs(rec.inf_phidot));
        sb.max_abs_error = std::max(sb.max_abs_error, speed - 2.0 * sup_f);
    }
    sb.max_rel_error = sb.max_abs_error / std::max(1e-300, 2.0 * sup_f);
    sb.finalize();
    out.push_back(sb);

    out.push_back(plateau("trace_plateau", traj, [](const DiagnosticsRecord& r) { return r.max_tr_ghat_gphi; },
                          plateau_tol));

    OracleReport osc;
    osc.name = "osc_bounded";
    osc.tolerance = std::numeric_limits<double>::infinity();
    osc.sample_count = traj.size();
    for (const auto& rec : traj) osc.max_abs_error = std::max(osc.max_abs_error, rec.osc_phi);
    osc.max_rel_error = osc.max_abs_error;
    osc.pass = std::isfinite(osc.max_abs_error);
    out.push_back(osc);

    out.push_back(plateau("b_plateau", traj, [](const DiagnosticsRecord& r) { return r.b_t; }, plateau_tol));
    return out;
}

std::vector<OracleReport> monitor_suite(const CrResult& run, double reconstruction_tol) {
    if (run.trajectory.empty()) throw std::invalid_argument("monitor_suite: empty trajectory");
    std::vector<OracleReport> out;

    OracleReport ub;
    ub.name = "linear_upper_bound";
    ub.tolerance = 1e-10;
    for (const auto& r : run.trajectory) {
        if (std::isnan(r.upper_bound)) continue;
        ++ub.sample_count;
        ub.max_abs_error = std::max(ub.max_abs_error, r.max_phi - r.upper_bound);
    }
    ub.max_rel_error = ub.max_abs_error;
    ub.finalize();
    ub.pass = ub.pass && run.bound_holds;
    out.push_back(ub);

    OracleReport tr;
    tr.name = "trace_finite";
    tr.tolerance = std::numeric_limits<double>::infinity();
    tr.sample_count = run.trajectory.size();
    for (const auto& r : run.trajectory) tr.max_abs_error = std::max(tr.max_abs_error, r.max_tr_ghat_gphi);
    tr.max_rel_error = tr.max_abs_error;
    tr.pass = std::isfinite(tr.max_abs_error);
    out.push_back(tr);

    OracleReport rec;
    rec.name = "reconstruction";
    rec.tolerance = reconstruction_tol;
    rec.sample_count = run.trajectory.size();
    rec.max_abs_error = run.reconstruction_error;
    rec.max_rel_error = run.reconstruction_error;
    rec.finalize();
    out.push_back(rec);
    return out;
}

DecayFit fit_terminal_decay(const std::vector<DiagnosticsRecord>& traj) {
    DecayFit fit;
    if (traj.empty()) return fit;
    const double cutoff = 10.0 * traj.back().sup_phidot_tilde;
    std::size_t first = traj.size() - 1;
    while (first > 0 && traj[first - 1].sup_phidot_tilde <= cutoff) --first;
    std::vector<double> x, y;
    for (std::size_t k = first; k < traj.size(); ++k) {
        if (!(traj[k].sup_phidot_tilde > 0.0)) continue;
        x.push_back(traj[k].t);
        y.push_back(std::log(traj[k].sup_phidot_tilde));
    }
    fit.count = x.size();
    if (x.size() < 3) return fit;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

OracleReport decay_report(const std::vector<DiagnosticsRecord>& traj, double min_r_squared) {
    const DecayFit fit = fit_terminal_decay(traj);
    OracleReport r;
    r.name = "exponential_decay";
    r.sample_count = fit.count;
    r.tolerance = 1.0 - min_r_squared;
    r.max_abs_error = 1.0 - fit.r_squared;
    r.max_rel_error = fit.slope;
    r.pass = fit.count >= 3 && fit.slope < 0.0 && fit.r_squared > min_r_squared;
    return r;
}

}  // namespace qmaflow::oracle
