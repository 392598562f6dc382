#pragma once

#include <cmath>
#include <vector>

#include "qmaflow/geometry.hpp"

namespace qmaflow::testing {

// Small geometries exercising both n = 1 and reduced n = 2 grids.
inline std::vector<GeometryPtr> sample_geometries() {
    return {build_flat_torus(1, {16, 1, 16, 1}), build_flat_torus(1, {8, 8, 8, 8}),
            build_flat_torus(2, {16, 1, 16, 1, 1, 1, 1, 1}), build_flat_torus(2, {8, 8, 1, 1, 8, 8, 1, 1})};
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qmaflow::testing
