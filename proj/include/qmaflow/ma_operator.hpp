#pragma once

// The quaternionic Monge-Ampère operator in its two formulations: the
// Pfaffian ratio of (2,0)-form coefficients and the Hermitian determinant of
// the induced metric. Also the J-projection, positivity, and Chern-Ricci forms.

#include "qmaflow/geometry.hpp"

namespace qmaflow {

/// Coefficients of the background form e^u Omega at a grid point.
CMatrix background_form(const TorusGeometry& geom, std::size_t point);
/// Metric induced by the background form at a grid point.
CMatrix background_metric(const TorusGeometry& geom, std::size_t point);
MatrixField background_metric_field(const GeometryPtr& geom);

/// Density of Omega^n ^ Omegabar^n relative to the flat one, |Pf A_Omega|^2.
ScalarField volume_weight(const GeometryPtr& geom);

/// d d_J applied pointwise to a complex Hessian; result is an antisymmetric
/// (2,0)-form field. Throws std::invalid_argument on kind mismatch.
MatrixField ddJ(const MatrixField& hessian);

/// max over the grid of the q-reality defect of a (2,0)-form field.
double q_reality_defect(const MatrixField& form);

/// Pointwise Pf(A_Omega + A_{ddJ phi}) / Pf(A_Omega). Throws ConventionError
/// if the imaginary part exceeds 1e-9.
ScalarField ma_ratio(const ScalarField& phi);
ScalarField ma_ratio_from_hessian(const MatrixField& hessian);

/// Pointwise J-invariant part of a Hermitian matrix field.
MatrixField j_projection(const MatrixField& h);

/// g_phi = g + P(H_phi).
MatrixField metric_from_potential(const ScalarField& phi);
MatrixField metric_from_hessian(const MatrixField& hessian);

/// Metric induced by a (2,0)-form field through g = 2 Re Omega(., J .).
MatrixField metric_from_form_field(const MatrixField& form);

/// Pointwise smallest eigenvalue.
ScalarField positivity_margin(const MatrixField& g);

/// Pointwise log(det g / det reference).
ScalarField log_det_ratio(const MatrixField& g, const MatrixField& reference);

/// Chern-Laplacian tr_{g}(H) = g^{i jbar} H_{i jbar}, pointwise.
ScalarField chern_trace(const MatrixField& g, const MatrixField& h);

/// Chern-Ricci form of e^u g_flat: R_{i jbar} = -2n u_{i jbar}.
MatrixField chern_ricci_conformal(const ScalarField& u);

/// Chern-Ricci form of an arbitrary metric field: -d dbar log det g.
MatrixField chern_ricci_form(const MatrixField& metric);

}  // namespace qmaflow
