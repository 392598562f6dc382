#pragma once

// Seeded verification suites over random admissible potentials.

#include <cstdint>
#include <vector>

#include "qmaflow/oracles.hpp"

namespace qmaflow::oracle {

/// Structural identities of the operator: Pfaffian/determinant agreement,
/// trace identity, volume identity, Stokes constraint, q-reality, agreement of
/// the two metric routes, Hermitian Hessians and the first variation.
std::vector<OracleReport> run_invariant_suite(const GeometryPtr& geom, int samples, std::uint64_t seed);

/// Fast kernels against the slow oracles: wedge expansion, finite-difference
/// Hessian, exact n = 1 solution (n = 1 only) and log-det Chern-Ricci forms.
std::vector<OracleReport> run_oracle_suite(const GeometryPtr& geom, int samples, std::uint64_t seed);

}  // namespace qmaflow::oracle
