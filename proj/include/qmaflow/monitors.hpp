#pragma once

// A-posteriori checks on recorded trajectories.

#include <vector>

#include "qmaflow/cr_flow.hpp"
#include "qmaflow/flow.hpp"
#include "qmaflow/oracles.hpp"

namespace qmaflow::oracle {

/// Monitors for a Monge-Ampère trajectory with datum bound sup|f|:
///   max_principle   max phidot non-increasing, min phidot non-decreasing
///   speed_bound     sup|phidot| <= 2 sup|f|
///   trace_plateau   tr_ghat g_phi finite and flat over the last 10% of records
///   osc_bounded     osc phi finite
///   b_plateau       b(t) flat over the last 10% of records
std::vector<OracleReport> monitor_suite(const std::vector<DiagnosticsRecord>& trajectory, double sup_f,
                                        double slack = 1e-8, double plateau_tol = 1e-6);

/// Monitors for a Chern-Ricci run: the linear upper bound, finiteness of the
/// trace and the reconstruction identity.
std::vector<OracleReport> monitor_suite(const CrResult& run, double reconstruction_tol = 1e-7);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t count = 0;
};

/// Least-squares fit of log sup|phidot - mean| against t over the terminal
/// decade (records within a factor 10 of the final value).
DecayFit fit_terminal_decay(const std::vector<DiagnosticsRecord>& trajectory);
OracleReport decay_report(const std::vector<DiagnosticsRecord>& trajectory, double min_r_squared = 0.99);

}  // namespace qmaflow::oracle
