#pragma once

// Fourier differentiation on the periodic grid. Complex derivatives are
// d_k = 1/2 (d/dx^k - i d/dx^{2n+k}) and d_kbar = 1/2 (d/dx^k + i d/dx^{2n+k}).
// The Nyquist mode of an even-sized axis is given a zero derivative symbol, so
// first and second derivatives stay consistent with each other.

#include <cstddef>
#include <vector>

#include <fftw3.h>

#include "qmaflow/geometry.hpp"

namespace qmaflow {

class FourierBasis {
public:
    FourierBasis(const std::vector<int>& grid, const std::vector<double>& periods);
    ~FourierBasis();
    FourierBasis(const FourierBasis&) = delete;
    FourierBasis& operator=(const FourierBasis&) = delete;

    std::size_t size() const { return size_; }

    /// Unnormalized forward DFT; `in` and `out` must not alias.
    void forward(const std::vector<cd>& in, std::vector<cd>& out) const;
    /// Inverse DFT including the 1/N factor.
    void backward(const std::vector<cd>& in, std::vector<cd>& out) const;

    /// Symbol of d/dx^dim for the spectral coefficient stored at `index`.
    cd derivative_symbol(std::size_t index, int dim) const;

private:
    std::vector<int> grid_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 1;
    std::vector<std::vector<cd>> symbols_;
    fftw_plan forward_plan_ = nullptr;
    fftw_plan backward_plan_ = nullptr;
};

ComplexField complex_derivative(const ComplexField& field, int k, bool conjugate);
ComplexField complex_derivative(const ScalarField& field, int k, bool conjugate);

/// H_{i jbar} = d_i d_jbar phi, Hermitian by construction.
MatrixField complex_hessian(const ScalarField& phi);

/// Symbol of Delta_flat = tr_g of the complex Hessian (g the flat metric).
double flat_laplacian_symbol(const TorusGeometry& geom, std::size_t index);

ScalarField flat_laplacian(const ScalarField& phi);

/// Zero-mean solution of Delta_flat phi = rhs. Throws std::invalid_argument
/// if rhs has mean above 1e-10.
ScalarField poisson_solve_flat(const ScalarField& rhs);

/// (Id - alpha Delta_flat)^{-1} rhs, alpha >= 0.
ScalarField solve_shifted(const ScalarField& rhs, double alpha);

}  // namespace qmaflow
