#include "qmaflow/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qmaflow/spectral.hpp"

namespace qmaflow {

namespace {

bool is_positive_multiple(const CMatrix& a, const CMatrix& reference) {
    const cd lambda = a(0, 1) / reference(0, 1);
    if (std::abs(lambda.imag()) > 1e-14 || lambda.real() <= 0.0) return false;
    return (a - lambda * reference).cwiseAbs().maxCoeff() < 1e-14;
}

}  // namespace

GeometryPtr build_flat_torus(int n, std::vector<int> grid_shape, std::vector<double> periods) {
    if (n < 1) throw std::invalid_argument("build_flat_torus: n must be positive, got " + std::to_string(n));
    const int real_dim = 4 * n;
    if (static_cast<int>(grid_shape.size()) != real_dim)
        throw std::invalid_argument("build_flat_torus: grid has " + std::to_string(grid_shape.size()) +
                                    " entries, expected 4n = " + std::to_string(real_dim));
    if (periods.empty()) periods.assign(real_dim, 2.0 * std::numbers::pi);
    if (static_cast<int>(periods.size()) != real_dim)
        throw std::invalid_argument("build_flat_torus: periods has " + std::to_string(periods.size()) +
                                    " entries, expected 4n = " + std::to_string(real_dim));
    for (int d = 0; d < real_dim; ++d) {
        if (grid_shape[d] < 1)
            throw std::invalid_argument("build_flat_torus: grid[" + std::to_string(d) + "] = " +
                                        std::to_string(grid_shape[d]) + " < 1");
        if (!(periods[d] > 0.0) || !std::isfinite(periods[d]))
            throw std::invalid_argument("build_flat_torus: periods[" + std::to_string(d) + "] must be positive");
    }

    std::shared_ptr<TorusGeometry> geom(new TorusGeometry());
    geom->n_ = n;
    geom->grid_ = std::move(grid_shape);
    geom->periods_ = std::move(periods);
    geom->strides_.assign(real_dim, 1);
    for (int d = real_dim - 2; d >= 0; --d)
        geom->strides_[d] = geom->strides_[d + 1] * static_cast<std::size_t>(geom->grid_[d + 1]);
    geom->points_ = geom->strides_[0] * static_cast<std::size_t>(geom->grid_[0]);

    // Calibrate the orientation of J: d d_J |z|^2 (complex Hessian = identity)
    // must be a positive multiple of Omega, and Omega must induce a positive metric.
    const CMatrix omega = standard_two_form(n);
    const CMatrix identity = CMatrix::Identity(2 * n, 2 * n);
    int chosen = 0;
    for (int sign : {1, -1}) {
        const CMatrix j = flat_j_matrix(n, sign);
        const CMatrix ddj_id = ddj_coefficients(identity, j);
        if (!is_positive_multiple(ddj_id, omega)) continue;
        if (smallest_eigenvalue(metric_from_form(omega, j)) <= 0.0) continue;
        if (chosen != 0) throw std::logic_error("build_flat_torus: both J orientations calibrate");
        chosen = sign;
    }
    if (chosen == 0) throw std::logic_error("build_flat_torus: no J orientation calibrates");
    geom->j_sign_ = chosen;
    geom->j_ = flat_j_matrix(n, chosen);
    geom->flat_form_ = omega;
    geom->flat_metric_ = metric_from_form(omega, geom->j_);
    geom->fourier_ = std::make_shared<FourierBasis>(geom->grid_, geom->periods_);
    return geom;
}

double TorusGeometry::conformal_factor(std::size_t point) const {
    return conformal_u_.empty() ? 1.0 : std::exp(conformal_u_[point]);
}

double TorusGeometry::min_active_spacing() const {
    double h = 0.0;
    for (int d = 0; d < real_dim(); ++d) {
        if (grid_[d] <= 1) continue;
        const double s = spacing(d);
        h = (h == 0.0) ? s : std::min(h, s);
    }
    return h;
}

int TorusGeometry::index_along(std::size_t point, int dim) const {
    return static_cast<int>((point / strides_[dim]) % static_cast<std::size_t>(grid_[dim]));
}

double TorusGeometry::coordinate(std::size_t point, int dim) const {
    return index_along(point, dim) * spacing(dim);
}

GeometryPtr TorusGeometry::with_conformal_factor(std::vector<double> u) const {
    if (u.size() != points_)
        throw std::invalid_argument("with_conformal_factor: field size does not match the grid");
    for (double v : u)
        if (!std::isfinite(v)) throw std::invalid_argument("with_conformal_factor: non-finite conformal factor");
    auto copy = std::shared_ptr<TorusGeometry>(new TorusGeometry(*this));
    copy->conformal_u_ = std::move(u);
    return copy;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(GeometryPtr geom, double value)
    : geom_(std::move(geom)), values_(geom_->point_count(), value) {}

ScalarField::ScalarField(GeometryPtr geom, std::vector<double> values)
    : geom_(std::move(geom)), values_(std::move(values)) {
    if (values_.size() != geom_->point_count())
        throw std::invalid_argument("ScalarField: value count does not match the grid");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    if (other.size() != size()) throw std::invalid_argument("ScalarField: shape mismatch");
    for (std::size_t p = 0; p < values_.size(); ++p) values_[p] += other.values_[p];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    if (other.size() != size()) throw std::invalid_argument("ScalarField: shape mismatch");
    for (std::size_t p = 0; p < values_.size(); ++p) values_[p] -= other.values_[p];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ComplexField::ComplexField(GeometryPtr geom) : geom_(std::move(geom)), values_(geom_->point_count()) {}

ComplexField::ComplexField(const ScalarField& real) : geom_(real.geometry()), values_(real.size()) {
    for (std::size_t p = 0; p < values_.size(); ++p) values_[p] = real[p];
}

ScalarField ComplexField::real_part() const {
    ScalarField out(geom_);
    for (std::size_t p = 0; p < values_.size(); ++p) out[p] = values_[p].real();
    return out;
}

ScalarField ComplexField::imag_part() const {
    ScalarField out(geom_);
    for (std::size_t p = 0; p < values_.size(); ++p) out[p] = values_[p].imag();
    return out;
}

MatrixField::MatrixField(GeometryPtr geom, MatrixKind kind)
    : geom_(std::move(geom)),
      kind_(kind),
      dim_(geom_->complex_dim()),
      values_(geom_->point_count() * static_cast<std::size_t>(dim_ * dim_)) {}

CMatrix MatrixField::at(std::size_t p) const {
    CMatrix m(dim_, dim_);
    const cd* src = values_.data() + offset(p);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) m(i, j) = src[i * dim_ + j];
    return m;
}

void MatrixField::set(std::size_t p, const CMatrix& m) {
    cd* dst = values_.data() + offset(p);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) dst[i * dim_ + j] = m(i, j);
}

double MatrixField::kind_defect() const {
    double scale = 0.0;
    double defect = 0.0;
    for (std::size_t p = 0; p < size(); ++p)
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                const cd a = entry(p, i, j);
                const cd b = entry(p, j, i);
                scale = std::max(scale, std::abs(a));
                const double d = kind_ == MatrixKind::hermitian ? std::abs(a - std::conj(b)) : std::abs(a + b);
                defect = std::max(defect, d);
            }
    return defect / std::max(1.0, scale);
}

double sup_difference(const MatrixField& a, const MatrixField& b) {
    if (a.size() != b.size() || a.dim() != b.dim()) throw std::invalid_argument("sup_difference: shape mismatch");
    double sup = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p)
        for (int i = 0; i < a.dim(); ++i)
            for (int j = 0; j < a.dim(); ++j) sup = std::max(sup, std::abs(a.entry(p, i, j) - b.entry(p, i, j)));
    return sup;
}

double sup_abs(std::span<const double> values) {
    double sup = 0.0;
    for (double v : values) sup = std::max(sup, std::abs(v));
    return sup;
}

double sup_difference(const ScalarField& a, const ScalarField& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sup_difference: shape mismatch");
    double sup = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) sup = std::max(sup, std::abs(a[p] - b[p]));
    return sup;
}

}  // namespace qmaflow
