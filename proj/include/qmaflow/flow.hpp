#pragma once

// Parabolic quaternionic Monge-Ampère flow
//     d/dt phi = 2 log(ma_ratio(phi)) - 2 f,   phi(0) = 0
// on a flat torus, with explicit Euler and IMEX time stepping.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qmaflow/geometry.hpp"

namespace qmaflow {

enum class Scheme { explicit_euler, imex };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct DiagnosticsRecord {
    long step = 0;
    double t = 0.0;
    double dt = 0.0;
    double sup_phidot = 0.0;
    double inf_phidot = 0.0;
    double osc_phi = 0.0;
    double b_t = 0.0;
    double min_pos_margin = 0.0;
    double max_tr_ghat_gphi = 0.0;
    double elliptic_residual = 0.0;
    // sup |phidot - mean(phidot)|, the stopping quantity; not part of the CSV.
    double sup_phidot_tilde = 0.0;
};

/// Quantities evaluated at the current potential.
struct FlowEvaluation {
    ScalarField rhs;
    double stiffness = 0.0;  // max over the grid of the largest eigenvalue of g_phi^{-1}
    double min_margin = 0.0;
    std::size_t argmin = 0;
    double b = 0.0;
    double max_trace = 0.0;
    double residual = 0.0;
};

struct FlowState {
    double t = 0.0;
    ScalarField phi;
    ScalarField phi_dot;
    long step_index = 0;
    double dt_last = 0.0;
    FlowEvaluation eval;
};

struct FlowConfig {
    GeometryPtr geometry;
    ScalarField f;
    Scheme scheme = Scheme::explicit_euler;
    std::optional<double> dt_initial;
    double dt_safety = 0.5;
    double tol = 1e-9;
    double t_max = 500.0;
    long max_steps = 2'000'000;
    /// Called after every accepted step (and once for the initial state).
    std::function<void(const FlowState&)> observer;
};

struct QmaResult {
    ScalarField phi_tilde;
    double b = 0.0;
    std::vector<DiagnosticsRecord> trajectory;
    bool converged = false;
    double elliptic_residual = 0.0;
    FlowState final_state;
};

/// 2 log ma_ratio(phi) - 2 f. Throws PositivityError if g_phi is not positive definite.
ScalarField qma_rhs(const ScalarField& phi, const ScalarField& f);
/// Same quantity through log(det g_phi / det g) - 2 f.
ScalarField qma_rhs_logdet(const ScalarField& phi, const ScalarField& f);
/// Linearization of qma_rhs at phi in direction psi: the Chern-Laplacian of g_phi.
ScalarField qma_tangent(const ScalarField& phi, const ScalarField& psi);

/// Volume-weighted mean of log ma_ratio(phi) - f.
double extract_b(const ScalarField& phi, const ScalarField& f);
/// sup |ma_ratio(phi) - e^{f + b}|.
double elliptic_residual(const ScalarField& phi, const ScalarField& f, double b);
/// phi minus its volume-weighted mean.
ScalarField normalize(const ScalarField& phi);

/// Stable explicit step size sigma h_min^2 / (4 c).
double cfl_step(const TorusGeometry& geom, double stiffness, double safety);

FlowState initial_state(const FlowConfig& cfg);
/// One time step. On positivity loss the step is retried once with half the
/// step size; a second failure throws PositivityError.
FlowState step(const FlowState& state, const FlowConfig& cfg);
DiagnosticsRecord make_record(const FlowState& state);

QmaResult run_qma_flow(const FlowConfig& cfg);

inline constexpr const char* kDiagnosticsHeader =
    "step,t,dt,sup_phidot,inf_phidot,osc_phi,b_t,min_pos_margin,max_tr_ghat_gphi,elliptic_residual";

std::string format_number(double value);
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);

}  // namespace qmaflow
