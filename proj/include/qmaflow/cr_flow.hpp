#pragma once

// Scalar form of the adapted Chern-Ricci flow on a conformally flat torus:
//     d/dt phi = log(det(g_u - t Ric^- + P(H_phi)) / det g_u),   phi(0) = 0,
// with an independent evolution of the Hermitian tensor for comparison.

#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include "qmaflow/flow.hpp"

namespace qmaflow {

/// log(det g_t / det g_u) with g_t = g_u - t ric_minus + P(H_phi). Throws
/// PositivityError when g_t is not positive definite.
ScalarField cr_rhs(const ScalarField& phi, double t, const MatrixField& ric_minus);

/// J-projected Chern-Ricci form of the (conformal) background.
MatrixField background_ric_minus(const GeometryPtr& geom);

/// First t > 0 at which g - t ric_minus degenerates somewhere (infinity if never).
double pencil_positivity_time(const MatrixField& g, const MatrixField& ric_minus);

struct CrConfig {
    GeometryPtr geometry;  // carries the conformal factor
    Scheme scheme = Scheme::explicit_euler;
    std::optional<double> dt_initial;
    double dt_safety = 0.5;
    double t_max = 1.0;
    long max_steps = 2'000'000;
    /// Compare with the tensor evolution every this many steps (0 disables).
    long check_every = 1;
    std::function<void(const FlowState&)> observer;
};

struct CrRecord {
    long step = 0;
    double t = 0.0;
    double dt = 0.0;
    double sup_phidot = 0.0;
    double inf_phidot = 0.0;
    double osc_phi = 0.0;
    double min_pos_margin = 0.0;
    double max_tr_ghat_gphi = 0.0;
    double reconstruction_error = 0.0;
    double upper_bound = 0.0;  // A t, or NaN past the pencil time
    double max_phi = 0.0;
};

struct CrResult {
    std::vector<CrRecord> trajectory;
    /// Time at which positivity was lost, refined by bisection; infinity if
    /// the run reached t_max.
    double t_hat = std::numeric_limits<double>::infinity();
    double reconstruction_error = 0.0;
    double pencil_time = std::numeric_limits<double>::infinity();
    double bound_slope = 0.0;
    bool bound_holds = true;
    FlowState final_state;
};

CrResult run_cr_flow(const CrConfig& cfg);

inline constexpr const char* kCrDiagnosticsHeader =
    "step,t,dt,sup_phidot,inf_phidot,osc_phi,min_pos_margin,max_tr_ghat_gphi,reconstruction_error,upper_bound";

void write_cr_csv(const std::filesystem::path& path, const std::vector<CrRecord>& records);

}  // namespace qmaflow
