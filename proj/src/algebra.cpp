#include "qmaflow/algebra.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace qmaflow {

namespace {

// First-row expansion over the index set idx[0..count).
template <class Mat>
cd pfaffian_rows(const Mat& a, std::array<int, 16>& idx, int count) {
    if (count == 0) return {1.0, 0.0};
    if (count == 2) return a(idx[0], idx[1]);
    const int first = idx[0];
    cd total{0.0, 0.0};
    std::array<int, 16> rest{};
    for (int j = 1; j < count; ++j) {
        const cd entry = a(first, idx[j]);
        if (entry == cd{0.0, 0.0}) continue;
        int m = 0;
        for (int k = 1; k < count; ++k)
            if (k != j) rest[m++] = idx[k];
        const cd minor = pfaffian_rows(a, rest, count - 2);
        total += (j % 2 == 1 ? 1.0 : -1.0) * entry * minor;
    }
    return total;
}

template <class Mat>
cd checked_pfaffian(const Mat& a) {
    const int size = static_cast<int>(a.rows());
    if (a.cols() != size) throw std::invalid_argument("pfaffian: matrix is not square");
    if (size > 16) throw std::invalid_argument("pfaffian: size above 16");
    if (size % 2 == 1) return {0.0, 0.0};
    double scale = 0.0;
    double defect = 0.0;
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) {
            scale = std::max(scale, std::abs(a(i, j)));
            defect = std::max(defect, std::abs(a(i, j) + a(j, i)));
        }
    if (defect > 1e-10 * std::max(1.0, scale))
        throw std::invalid_argument("pfaffian: matrix is not antisymmetric (defect " +
                                    std::to_string(defect) + ")");
    std::array<int, 16> idx{};
    for (int i = 0; i < size; ++i) idx[i] = i;
    return pfaffian_rows(a, idx, size);
}

}  // namespace

CMatrix flat_j_matrix(int n, int sign) {
    CMatrix m = CMatrix::Zero(2 * n, 2 * n);
    for (int a = 0; a < n; ++a) {
        m(2 * a, 2 * a + 1) = static_cast<double>(sign);
        m(2 * a + 1, 2 * a) = -static_cast<double>(sign);
    }
    return m;
}

CMatrix standard_two_form(int n) { return flat_j_matrix(n, 1); }

CMatrix ddj_coefficients(const CMatrix& hessian, const CMatrix& j) {
    const CMatrix b = -(hessian * j);
    return b - b.transpose();
}

cd pfaffian(const CMatrix& a) { return checked_pfaffian(a); }

CMatrix j_project(const CMatrix& h, const CMatrix& j) {
    return 0.5 * (h + j.transpose() * h.conjugate() * j.conjugate());
}

double q_reality_defect(const CMatrix& a, const CMatrix& j) {
    return (j.transpose() * a.conjugate() * j - a).cwiseAbs().maxCoeff();
}

RMatrix real_i(int n) {
    const int dim = 2 * n;
    RMatrix i_mat = RMatrix::Zero(2 * dim, 2 * dim);
    for (int k = 0; k < dim; ++k) {
        // I d/dx^k = d/dx^{2n+k},  I d/dx^{2n+k} = -d/dx^k
        i_mat(dim + k, k) = 1.0;
        i_mat(k, dim + k) = -1.0;
    }
    return i_mat;
}

namespace {

// dz(e_a) for the real basis vector e_a.
Eigen::VectorXcd basis_coords(int dim, int a) {
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(dim);
    if (a < dim)
        w(a) = 1.0;
    else
        w(a - dim) = cd{0.0, 1.0};
    return w;
}

}  // namespace

RMatrix real_j(const CMatrix& j) {
    const int dim = static_cast<int>(j.rows());
    RMatrix j_mat = RMatrix::Zero(2 * dim, 2 * dim);
    for (int b = 0; b < 2 * dim; ++b) {
        // dzbar(J v) = M dz(v)  =>  dz(J v) = conj(M) conj(dz(v))
        const Eigen::VectorXcd w = basis_coords(dim, b);
        const Eigen::VectorXcd image = j.conjugate() * w.conjugate();
        for (int k = 0; k < dim; ++k) {
            j_mat(k, b) = image(k).real();
            j_mat(dim + k, b) = image(k).imag();
        }
    }
    return j_mat;
}

RMatrix real_metric_from_form(const CMatrix& a, const CMatrix& j) {
    const int dim = static_cast<int>(a.rows());
    const RMatrix jr = real_j(j);
    RMatrix g(2 * dim, 2 * dim);
    for (int p = 0; p < 2 * dim; ++p) {
        const Eigen::VectorXcd wu = basis_coords(dim, p);
        for (int q = 0; q < 2 * dim; ++q) {
            Eigen::VectorXcd wjv = Eigen::VectorXcd::Zero(dim);
            for (int k = 0; k < dim; ++k) wjv(k) = cd{jr(k, q), jr(dim + k, q)};
            const cd omega = 0.5 * (wu.transpose() * a * wjv)(0, 0);
            g(p, q) = 2.0 * omega.real();
        }
    }
    return g;
}

CMatrix hermitian_from_real(const RMatrix& g) {
    const int dim = static_cast<int>(g.rows()) / 2;
    CMatrix h(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k)
            h(i, k) = 0.25 * cd{g(i, k) + g(dim + i, dim + k), g(i, dim + k) - g(dim + i, k)};
    return h;
}

CMatrix metric_from_form(const CMatrix& a, const CMatrix& j) {
    return hermitian_from_real(real_metric_from_form(a, j));
}

std::pair<double, double> volume_form_sides(const CMatrix& a, const CMatrix& j) {
    const int dim = static_cast<int>(a.rows());
    const int n = dim / 2;

    // Rows dz^1..dz^{2n}, dzbar^1..dzbar^{2n} in the dx basis.
    CBigMatrix cov = CBigMatrix::Zero(2 * dim, 2 * dim);
    for (int k = 0; k < dim; ++k) {
        cov(k, k) = 1.0;
        cov(k, dim + k) = cd{0.0, 1.0};
        cov(dim + k, k) = 1.0;
        cov(dim + k, dim + k) = cd{0.0, -1.0};
    }
    const cd top = cov.determinant();
    const double pf_abs2 = std::norm(pfaffian(a));
    const double lhs = pf_abs2 * top.real();

    const RMatrix g = real_metric_from_form(a, j);
    const RMatrix i_mat = real_i(n);
    // omega(u, v) = g(I u, v); algebra coefficients are twice the bilinear values.
    const RMatrix omega = 2.0 * i_mat.transpose() * g;
    CBigMatrix omega_c = omega.cast<cd>();
    const double rhs = checked_pfaffian(omega_c).real();
    return {lhs, rhs};
}

double smallest_eigenvalue(const CMatrix& h) {
    if (h.rows() == 2) {
        const double a = h(0, 0).real();
        const double d = h(1, 1).real();
        const double half = 0.5 * (a - d);
        return 0.5 * (a + d) - std::sqrt(half * half + std::norm(h(0, 1)));
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

double log_det_hermitian(const CMatrix& h) {
    if (h.rows() == 2) {
        const double det = h(0, 0).real() * h(1, 1).real() - std::norm(h(0, 1));
        if (!(det > 0.0) || !(h(0, 0).real() > 0.0)) return std::nan("");
        return std::log(det);
    }
    Eigen::LLT<CMatrix> llt(h);
    if (llt.info() != Eigen::Success) return std::nan("");
    double s = 0.0;
    for (int i = 0; i < h.rows(); ++i) s += 2.0 * std::log(llt.matrixL()(i, i).real());
    return s;
}

double hermitian_defect(const CMatrix& h) { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace qmaflow
