#include "qmaflow/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qmaflow/quadrature.hpp"

namespace qmaflow {

namespace {

fftw_complex* as_fftw(cd* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cd* p) { return reinterpret_cast<fftw_complex*>(const_cast<cd*>(p)); }

}  // namespace

FourierBasis::FourierBasis(const std::vector<int>& grid, const std::vector<double>& periods) : grid_(grid) {
    const int dims = static_cast<int>(grid.size());
    strides_.assign(dims, 1);
    for (int d = dims - 2; d >= 0; --d) strides_[d] = strides_[d + 1] * static_cast<std::size_t>(grid[d + 1]);
    size_ = dims > 0 ? strides_[0] * static_cast<std::size_t>(grid[0]) : 1;

    symbols_.resize(dims);
    std::vector<int> active;
    for (int d = 0; d < dims; ++d) {
        const int count = grid[d];
        symbols_[d].assign(count, cd{0.0, 0.0});
        for (int m = 0; m < count; ++m) {
            if (count % 2 == 0 && m == count / 2) continue;  // Nyquist
            const int wave = m <= count / 2 ? m : m - count;
            symbols_[d][m] = cd{0.0, 2.0 * std::numbers::pi * wave / periods[d]};
        }
        if (count > 1) active.push_back(count);
    }

    if (!active.empty()) {
        fftw_complex* in = fftw_alloc_complex(size_);
        fftw_complex* out = fftw_alloc_complex(size_);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        const int rank = static_cast<int>(active.size());
        forward_plan_ = fftw_plan_dft(rank, active.data(), in, out, FFTW_FORWARD, flags);
        backward_plan_ = fftw_plan_dft(rank, active.data(), in, out, FFTW_BACKWARD, flags);
        fftw_free(in);
        fftw_free(out);
        if (!forward_plan_ || !backward_plan_) throw std::runtime_error("FourierBasis: FFTW planning failed");
    }
}

FourierBasis::~FourierBasis() {
    if (forward_plan_) fftw_destroy_plan(forward_plan_);
    if (backward_plan_) fftw_destroy_plan(backward_plan_);
}

void FourierBasis::forward(const std::vector<cd>& in, std::vector<cd>& out) const {
    out.resize(size_);
    if (!forward_plan_) {
        out = in;
        return;
    }
    fftw_execute_dft(forward_plan_, as_fftw(in.data()), as_fftw(out.data()));
}

void FourierBasis::backward(const std::vector<cd>& in, std::vector<cd>& out) const {
    out.resize(size_);
    if (!backward_plan_) {
        out = in;
        return;
    }
    fftw_execute_dft(backward_plan_, as_fftw(in.data()), as_fftw(out.data()));
    const double scale = 1.0 / static_cast<double>(size_);
    for (cd& v : out) v *= scale;
}

cd FourierBasis::derivative_symbol(std::size_t index, int dim) const {
    const int m = static_cast<int>((index / strides_[dim]) % static_cast<std::size_t>(grid_[dim]));
    return symbols_[dim][m];
}

namespace {

// Symbol of d_k (conjugate = false) or d_kbar (conjugate = true).
cd complex_symbol(const TorusGeometry& geom, std::size_t index, int k, bool conjugate) {
    const FourierBasis& basis = geom.fourier();
    const cd sx = basis.derivative_symbol(index, k);
    const cd sy = basis.derivative_symbol(index, geom.complex_dim() + k);
    const cd i_unit{0.0, 1.0};
    return conjugate ? 0.5 * (sx + i_unit * sy) : 0.5 * (sx - i_unit * sy);
}

void check_index(const TorusGeometry& geom, int k) {
    if (k < 0 || k >= geom.complex_dim())
        throw std::out_of_range("complex index " + std::to_string(k) + " outside [0, " +
                                std::to_string(geom.complex_dim()) + ")");
}

std::vector<cd> to_complex(const ScalarField& f) {
    std::vector<cd> out(f.size());
    for (std::size_t p = 0; p < f.size(); ++p) out[p] = f[p];
    return out;
}

}  // namespace

ComplexField complex_derivative(const ComplexField& field, int k, bool conjugate) {
    const TorusGeometry& geom = *field.geometry();
    check_index(geom, k);
    std::vector<cd> spectrum;
    geom.fourier().forward(field.data(), spectrum);
    for (std::size_t p = 0; p < spectrum.size(); ++p) spectrum[p] *= complex_symbol(geom, p, k, conjugate);
    ComplexField out(field.geometry());
    geom.fourier().backward(spectrum, out.data());
    return out;
}

ComplexField complex_derivative(const ScalarField& field, int k, bool conjugate) {
    return complex_derivative(ComplexField(field), k, conjugate);
}

MatrixField complex_hessian(const ScalarField& phi) {
    const TorusGeometry& geom = *phi.geometry();
    const int dim = geom.complex_dim();
    const std::size_t count = geom.point_count();

    std::vector<cd> spectrum;
    geom.fourier().forward(to_complex(phi), spectrum);

    std::vector<std::vector<cd>> d_sym(dim), dbar_sym(dim);
    for (int k = 0; k < dim; ++k) {
        d_sym[k].resize(count);
        dbar_sym[k].resize(count);
        for (std::size_t p = 0; p < count; ++p) {
            d_sym[k][p] = complex_symbol(geom, p, k, false);
            dbar_sym[k][p] = complex_symbol(geom, p, k, true);
        }
    }

    MatrixField hess(phi.geometry(), MatrixKind::hermitian);
    std::vector<cd> work(count), entry(count);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            for (std::size_t p = 0; p < count; ++p) work[p] = spectrum[p] * d_sym[i][p] * dbar_sym[j][p];
            geom.fourier().backward(work, entry);
            for (std::size_t p = 0; p < count; ++p) {
                if (i == j) {
                    hess.entry(p, i, i) = cd{entry[p].real(), 0.0};
                } else {
                    hess.entry(p, i, j) = entry[p];
                    hess.entry(p, j, i) = std::conj(entry[p]);
                }
            }
        }
    }
    return hess;
}

namespace {

double laplacian_symbol_with(const TorusGeometry& geom, const CMatrix& inv, std::size_t index) {
    const int dim = geom.complex_dim();
    cd total{0.0, 0.0};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            if (inv(j, i) == cd{0.0, 0.0}) continue;
            total += inv(j, i) * complex_symbol(geom, index, i, false) * complex_symbol(geom, index, j, true);
        }
    return total.real();
}

}  // namespace

double flat_laplacian_symbol(const TorusGeometry& geom, std::size_t index) {
    return laplacian_symbol_with(geom, geom.flat_metric().inverse(), index);
}

namespace {

std::vector<double> laplacian_symbols(const TorusGeometry& geom) {
    const CMatrix inv = geom.flat_metric().inverse();
    std::vector<double> sym(geom.point_count());
    for (std::size_t p = 0; p < sym.size(); ++p) sym[p] = laplacian_symbol_with(geom, inv, p);
    return sym;
}

template <class Op>
ScalarField apply_spectral(const ScalarField& f, Op&& op) {
    const TorusGeometry& geom = *f.geometry();
    std::vector<cd> spectrum, values;
    geom.fourier().forward(to_complex(f), spectrum);
    const std::vector<double> sym = laplacian_symbols(geom);
    for (std::size_t p = 0; p < spectrum.size(); ++p) spectrum[p] = op(spectrum[p], sym[p]);
    geom.fourier().backward(spectrum, values);
    ScalarField out(f.geometry());
    for (std::size_t p = 0; p < values.size(); ++p) out[p] = values[p].real();
    return out;
}

}  // namespace

ScalarField flat_laplacian(const ScalarField& phi) {
    return apply_spectral(phi, [](cd c, double lambda) { return c * lambda; });
}

ScalarField poisson_solve_flat(const ScalarField& rhs) {
    const double mean = weighted_mean(rhs);
    if (std::abs(mean) > 1e-10)
        throw std::invalid_argument("poisson_solve_flat: right-hand side has non-zero mean " + std::to_string(mean));
    return apply_spectral(rhs, [](cd c, double lambda) { return lambda == 0.0 ? cd{0.0, 0.0} : c / lambda; });
}

ScalarField solve_shifted(const ScalarField& rhs, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("solve_shifted: alpha must be non-negative");
    return apply_spectral(rhs, [alpha](cd c, double lambda) { return c / (1.0 - alpha * lambda); });
}

}  // namespace qmaflow
