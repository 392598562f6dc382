#pragma once

// Pointwise linear algebra for the flat quaternionic structure.
//
// Index conventions (0-based in code):
//   complex coordinates z^k = x^k + i x^{2n+k}, k = 0..2n-1
//   M       : matrix of J on (0,1)-covectors, J(dzbar^r) = sum_s M(r,s) dz^s
//   A       : coefficients of a (2,0)-form sum_{i<s} A(i,s) dz^i ^ dz^s,
//             stored as a full antisymmetric matrix
//   H, g    : Hermitian matrices H(i,j) = H_{i jbar}
//
// A 2-form is identified with the bilinear form (u,v) -> 1/2 w(u)^T A w(v),
// where w(u) = dz(u). With this identification the metric induced by a
// q-real form is g_{i jbar} = 1/2 (A conj(M))(i,j).

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace qmaflow {

using cd = std::complex<double>;
using CMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 8, 8>;
using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 16, 16>;
using CBigMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 16, 16>;

/// Flat J on (0,1)-covectors: block-diagonal [[0, s], [-s, 0]] on pairs (2a, 2a+1).
CMatrix flat_j_matrix(int n, int sign);

/// Standard (2,0)-form sum_a dz^{2a} ^ dz^{2a+1}.
CMatrix standard_two_form(int n);

/// Coefficients of d d_J phi for complex Hessian H: A = B - B^T with B = -H M.
CMatrix ddj_coefficients(const CMatrix& hessian, const CMatrix& j);

/// Pfaffian by expansion along the first row. Throws std::invalid_argument
/// when A is not antisymmetric within 1e-10 (relative to its largest entry).
cd pfaffian(const CMatrix& a);

/// Projection onto J-invariant Hermitian matrices: 1/2 (H + M^T conj(H) conj(M)).
CMatrix j_project(const CMatrix& h, const CMatrix& j);

/// max |M^T conj(A) M - A|; zero for a q-real form.
double q_reality_defect(const CMatrix& a, const CMatrix& j);

/// Real 4n x 4n matrices of I and J acting on tangent vectors in the basis
/// d/dx^1..d/dx^{4n}.
RMatrix real_i(int n);
RMatrix real_j(const CMatrix& j);

/// Real symmetric metric G(u, v) = 2 Re Omega(u, J v), evaluated on basis vectors.
RMatrix real_metric_from_form(const CMatrix& a, const CMatrix& j);

/// g_{i jbar} = G_C(d_i, d_jbar).
CMatrix hermitian_from_real(const RMatrix& g);

/// Hermitian metric of a q-real positive form through the real route.
CMatrix metric_from_form(const CMatrix& a, const CMatrix& j);

/// Both sides of Omega^n ^ Omegabar^n / (n!)^2 = omega^{2n} / (2n)!, as
/// coefficients of dx^1 ^ ... ^ dx^{4n}.
std::pair<double, double> volume_form_sides(const CMatrix& a, const CMatrix& j);

/// Smallest eigenvalue of a Hermitian matrix.
double smallest_eigenvalue(const CMatrix& h);

/// log det of a positive definite Hermitian matrix (NaN if not positive definite).
double log_det_hermitian(const CMatrix& h);

/// max |H - H^*|.
double hermitian_defect(const CMatrix& h);

}  // namespace qmaflow
