#pragma once

#include <span>

#include "qmaflow/geometry.hpp"

namespace qmaflow {

/// Pairwise (tree) summation; the order depends only on the length.
double pairwise_sum(std::span<const double> values);

/// (sum f w) / (sum w). Throws std::invalid_argument for non-positive total weight.
double weighted_mean(const ScalarField& f, const ScalarField& w);
double weighted_mean(const ScalarField& f);

double field_max(const ScalarField& f);
double field_min(const ScalarField& f);
inline double oscillation(const ScalarField& f) { return field_max(f) - field_min(f); }

}  // namespace qmaflow
