#pragma once

// Slow, definition-level implementations used to validate the fast kernels.
// Nothing here is called from the flow loop.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "qmaflow/geometry.hpp"

namespace qmaflow::oracle {

struct OracleReport {
    std::string name;
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
    std::size_t sample_count = 0;
    bool pass = false;
    double tolerance = 0.0;

    /// Sets `pass` from the recorded errors: by default the absolute error
    /// is compared against the tolerance.
    void finalize(bool use_relative = false);
};

nlohmann::json to_json(const OracleReport& report);

/// Coefficient of dz^1 ^ ... ^ dz^{2n} in (sum_{i<s} A_is dz^i ^ dz^s)^n / n!,
/// expanded term by term. Requires 2n <= 8.
cd wedge_power_oracle(const CMatrix& a, int n);

/// Second-order centered finite-difference complex Hessian. Requires at
/// least 3 samples along every active dimension.
MatrixField fd_hessian(const ScalarField& phi);

struct EllipticSolution {
    ScalarField phi_star;
    double b_star = 0.0;
};

/// Exact discrete solution of the n = 1 equation, where the Monge-Ampère
/// ratio is affine in the Hessian and the problem reduces to a Poisson solve.
EllipticSolution elliptic_exact_n1(const ScalarField& f);

/// Truncated trigonometric polynomial over the active dimensions:
/// modes 0 < |m|_1 <= max_mode, coefficients uniform in [-1, 1] * amp / (1 + |m|)^2.
ScalarField random_band_limited_field(const GeometryPtr& geom, std::uint64_t seed, double amp = 0.2,
                                      int max_mode = 3);

/// As above, halving the amplitude until g_phi has margin at least half of
/// the background's smallest eigenvalue.
ScalarField admissible_random_field(const GeometryPtr& geom, std::uint64_t seed, double amp = 0.2,
                                    int max_mode = 3);

}  // namespace qmaflow::oracle
