#pragma once

// Flat hypercomplex torus T^{4n} with the standard quaternionic structure,
// sampled on a uniform periodic grid, and the fields that live on it.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "qmaflow/algebra.hpp"

namespace qmaflow {

class FourierBasis;
class TorusGeometry;

using GeometryPtr = std::shared_ptr<const TorusGeometry>;

/// Builds the flat torus. The sign of J is calibrated so that d d_J |z|^2 is
/// a positive multiple of the background form. Periods default to 2 pi when
/// `periods` is empty.
GeometryPtr build_flat_torus(int n, std::vector<int> grid_shape, std::vector<double> periods = {});

class TorusGeometry {
public:
    int n() const { return n_; }
    int complex_dim() const { return 2 * n_; }
    int real_dim() const { return 4 * n_; }

    const std::vector<int>& grid_shape() const { return grid_; }
    const std::vector<double>& periods() const { return periods_; }
    std::size_t point_count() const { return points_; }

    /// J on (0,1)-covectors; constant over the torus.
    const CMatrix& j_matrix() const { return j_; }
    int j_sign() const { return j_sign_; }

    /// Coefficients of the flat background Omega = sum_a dz^{2a} ^ dz^{2a+1}.
    const CMatrix& flat_form() const { return flat_form_; }
    /// Hermitian metric induced by the flat background form.
    const CMatrix& flat_metric() const { return flat_metric_; }

    /// Background Omega_u = e^u Omega; empty when flat.
    bool is_flat() const { return conformal_u_.empty(); }
    const std::vector<double>& conformal_u() const { return conformal_u_; }
    double conformal_factor(std::size_t point) const;

    double spacing(int dim) const { return periods_[dim] / grid_[dim]; }
    /// Smallest spacing over dimensions with more than one sample (0 if none).
    double min_active_spacing() const;
    double coordinate(std::size_t point, int dim) const;
    /// Index of `point` along `dim` (row-major, dimension 0 slowest).
    int index_along(std::size_t point, int dim) const;

    const FourierBasis& fourier() const { return *fourier_; }

    /// Copy of this geometry with background Omega replaced by e^u Omega.
    GeometryPtr with_conformal_factor(std::vector<double> u) const;

    friend GeometryPtr build_flat_torus(int n, std::vector<int> grid_shape,
                                        std::vector<double> periods);

private:
    TorusGeometry() = default;

    int n_ = 0;
    std::vector<int> grid_;
    std::vector<double> periods_;
    std::vector<std::size_t> strides_;
    std::size_t points_ = 0;
    CMatrix j_;
    int j_sign_ = 0;
    CMatrix flat_form_;
    CMatrix flat_metric_;
    std::vector<double> conformal_u_;
    std::shared_ptr<const FourierBasis> fourier_;
};

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GeometryPtr geom, double value = 0.0);
    ScalarField(GeometryPtr geom, std::vector<double> values);

    const GeometryPtr& geometry() const { return geom_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t p) { return values_[p]; }
    double operator[](std::size_t p) const { return values_[p]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);

private:
    GeometryPtr geom_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Samples fn(x) with x the real coordinates x^1..x^{4n} of each grid point.
template <class Fn>
ScalarField sample(const GeometryPtr& geom, Fn&& fn) {
    ScalarField out(geom);
    std::vector<double> x(geom->real_dim());
    for (std::size_t p = 0; p < geom->point_count(); ++p) {
        for (int d = 0; d < geom->real_dim(); ++d) x[d] = geom->coordinate(p, d);
        out[p] = fn(std::span<const double>(x));
    }
    return out;
}

class ComplexField {
public:
    ComplexField() = default;
    explicit ComplexField(GeometryPtr geom);
    explicit ComplexField(const ScalarField& real);

    const GeometryPtr& geometry() const { return geom_; }
    std::size_t size() const { return values_.size(); }
    cd& operator[](std::size_t p) { return values_[p]; }
    cd operator[](std::size_t p) const { return values_[p]; }
    std::vector<cd>& data() { return values_; }
    const std::vector<cd>& data() const { return values_; }

    ScalarField real_part() const;
    ScalarField imag_part() const;

private:
    GeometryPtr geom_;
    std::vector<cd> values_;
};

enum class MatrixKind { hermitian, antisymmetric };

/// Grid of 2n x 2n complex matrices.
class MatrixField {
public:
    MatrixField() = default;
    MatrixField(GeometryPtr geom, MatrixKind kind);

    const GeometryPtr& geometry() const { return geom_; }
    MatrixKind kind() const { return kind_; }
    int dim() const { return dim_; }
    std::size_t size() const { return geom_ ? geom_->point_count() : 0; }

    CMatrix at(std::size_t p) const;
    void set(std::size_t p, const CMatrix& m);
    cd entry(std::size_t p, int i, int j) const { return values_[offset(p) + i * dim_ + j]; }
    cd& entry(std::size_t p, int i, int j) { return values_[offset(p) + i * dim_ + j]; }

    /// Pointwise max of the symmetry defect relevant to `kind`, relative to
    /// the largest entry.
    double kind_defect() const;

private:
    std::size_t offset(std::size_t p) const { return p * static_cast<std::size_t>(dim_ * dim_); }

    GeometryPtr geom_;
    MatrixKind kind_ = MatrixKind::hermitian;
    int dim_ = 0;
    std::vector<cd> values_;
};

/// sup_p ||a(p) - b(p)||_max.
double sup_difference(const MatrixField& a, const MatrixField& b);
double sup_abs(std::span<const double> values);
double sup_difference(const ScalarField& a, const ScalarField& b);

}  // namespace qmaflow
