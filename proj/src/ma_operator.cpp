#include "qmaflow/ma_operator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qmaflow/error.hpp"
#include "qmaflow/spectral.hpp"

namespace qmaflow {

namespace {

void require_kind(const MatrixField& f, MatrixKind kind, const char* who) {
    if (f.kind() != kind) throw std::invalid_argument(std::string(who) + ": matrix field kind mismatch");
}

}  // namespace

CMatrix background_form(const TorusGeometry& geom, std::size_t point) {
    return geom.conformal_factor(point) * geom.flat_form();
}

CMatrix background_metric(const TorusGeometry& geom, std::size_t point) {
    return geom.conformal_factor(point) * geom.flat_metric();
}

MatrixField background_metric_field(const GeometryPtr& geom) {
    MatrixField g(geom, MatrixKind::hermitian);
    for (std::size_t p = 0; p < geom->point_count(); ++p) g.set(p, background_metric(*geom, p));
    return g;
}

ScalarField volume_weight(const GeometryPtr& geom) {
    ScalarField w(geom);
    for (std::size_t p = 0; p < geom->point_count(); ++p) w[p] = std::norm(pfaffian(background_form(*geom, p)));
    return w;
}

MatrixField ddJ(const MatrixField& hessian) {
    require_kind(hessian, MatrixKind::hermitian, "ddJ");
    const TorusGeometry& geom = *hessian.geometry();
    MatrixField form(hessian.geometry(), MatrixKind::antisymmetric);
    for (std::size_t p = 0; p < hessian.size(); ++p) form.set(p, ddj_coefficients(hessian.at(p), geom.j_matrix()));
    return form;
}

double q_reality_defect(const MatrixField& form) {
    require_kind(form, MatrixKind::antisymmetric, "q_reality_defect");
    const CMatrix& j = form.geometry()->j_matrix();
    double sup = 0.0;
    for (std::size_t p = 0; p < form.size(); ++p) sup = std::max(sup, q_reality_defect(form.at(p), j));
    return sup;
}

ScalarField ma_ratio_from_hessian(const MatrixField& hessian) {
    require_kind(hessian, MatrixKind::hermitian, "ma_ratio");
    const TorusGeometry& geom = *hessian.geometry();
    ScalarField ratio(hessian.geometry());
    for (std::size_t p = 0; p < hessian.size(); ++p) {
        const CMatrix base = background_form(geom, p);
        const cd value = pfaffian(base + ddj_coefficients(hessian.at(p), geom.j_matrix())) / pfaffian(base);
        if (std::abs(value.imag()) > 1e-9 * std::max(1.0, std::abs(value.real())))
            throw ConventionError("ma_ratio: imaginary residue " + std::to_string(value.imag()) + " at grid point " +
                                  std::to_string(p));
        ratio[p] = value.real();
    }
    return ratio;
}

ScalarField ma_ratio(const ScalarField& phi) { return ma_ratio_from_hessian(complex_hessian(phi)); }

MatrixField j_projection(const MatrixField& h) {
    require_kind(h, MatrixKind::hermitian, "j_projection");
    const CMatrix& j = h.geometry()->j_matrix();
    MatrixField out(h.geometry(), MatrixKind::hermitian);
    for (std::size_t p = 0; p < h.size(); ++p) out.set(p, j_project(h.at(p), j));
    return out;
}

MatrixField metric_from_hessian(const MatrixField& hessian) {
    require_kind(hessian, MatrixKind::hermitian, "metric_from_hessian");
    const TorusGeometry& geom = *hessian.geometry();
    MatrixField g(hessian.geometry(), MatrixKind::hermitian);
    for (std::size_t p = 0; p < hessian.size(); ++p)
        g.set(p, background_metric(geom, p) + j_project(hessian.at(p), geom.j_matrix()));
    return g;
}

MatrixField metric_from_potential(const ScalarField& phi) { return metric_from_hessian(complex_hessian(phi)); }

MatrixField metric_from_form_field(const MatrixField& form) {
    require_kind(form, MatrixKind::antisymmetric, "metric_from_form_field");
    const CMatrix& j = form.geometry()->j_matrix();
    MatrixField g(form.geometry(), MatrixKind::hermitian);
    for (std::size_t p = 0; p < form.size(); ++p) g.set(p, metric_from_form(form.at(p), j));
    return g;
}

ScalarField positivity_margin(const MatrixField& g) {
    require_kind(g, MatrixKind::hermitian, "positivity_margin");
    ScalarField margin(g.geometry());
    for (std::size_t p = 0; p < g.size(); ++p) margin[p] = smallest_eigenvalue(g.at(p));
    return margin;
}

ScalarField log_det_ratio(const MatrixField& g, const MatrixField& reference) {
    ScalarField out(g.geometry());
    for (std::size_t p = 0; p < g.size(); ++p) out[p] = log_det_hermitian(g.at(p)) - log_det_hermitian(reference.at(p));
    return out;
}

ScalarField chern_trace(const MatrixField& g, const MatrixField& h) {
    ScalarField out(g.geometry());
    for (std::size_t p = 0; p < g.size(); ++p) out[p] = (g.at(p).inverse() * h.at(p)).trace().real();
    return out;
}

MatrixField chern_ricci_conformal(const ScalarField& u) {
    const MatrixField hess = complex_hessian(u);
    const double scale = -2.0 * u.geometry()->n();
    MatrixField ric(u.geometry(), MatrixKind::hermitian);
    for (std::size_t p = 0; p < hess.size(); ++p) ric.set(p, scale * hess.at(p));
    return ric;
}

MatrixField chern_ricci_form(const MatrixField& metric) {
    require_kind(metric, MatrixKind::hermitian, "chern_ricci_form");
    ScalarField log_det(metric.geometry());
    for (std::size_t p = 0; p < metric.size(); ++p) log_det[p] = log_det_hermitian(metric.at(p));
    const MatrixField hess = complex_hessian(log_det);
    MatrixField ric(metric.geometry(), MatrixKind::hermitian);
    for (std::size_t p = 0; p < hess.size(); ++p) ric.set(p, -hess.at(p));
    return ric;
}

}  // namespace qmaflow
