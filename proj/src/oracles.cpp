#include "qmaflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "qmaflow/algebra.hpp"
#include "qmaflow/ma_operator.hpp"
#include "qmaflow/quadrature.hpp"
#include "qmaflow/spectral.hpp"

namespace qmaflow::oracle {

void OracleReport::finalize(bool use_relative) {
    const double err = use_relative ? max_rel_error : max_abs_error;
    pass = std::isfinite(err) && err <= tolerance;
}

nlohmann::json to_json(const OracleReport& r) {
    return {{"name", r.name},
            {"max_abs_error", r.max_abs_error},
            {"max_rel_error", r.max_rel_error},
            {"sample_count", r.sample_count},
            {"pass", r.pass},
            {"tolerance", r.tolerance}};
}

cd wedge_power_oracle(const CMatrix& a, int n) {
    if (n < 1 || 2 * n > 8) throw std::invalid_argument("wedge_power_oracle: requires 1 <= n and 2n <= 8");
    const int dim = 2 * n;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < dim; ++i)
        for (int s = i + 1; s < dim; ++s) pairs.emplace_back(i, s);
    const int count = static_cast<int>(pairs.size());

    cd total{0.0, 0.0};
    std::vector<int> choice(n, 0);
    std::vector<int> word(dim);
    while (true) {
        cd term{1.0, 0.0};
        for (int f = 0; f < n; ++f) {
            word[2 * f] = pairs[choice[f]].first;
            word[2 * f + 1] = pairs[choice[f]].second;
            term *= a(pairs[choice[f]].first, pairs[choice[f]].second);
        }
        // Sign of the permutation `word` of 0..dim-1 (zero if an index repeats).
        std::vector<bool> seen(dim, false);
        bool repeated = false;
        for (int v : word) {
            if (seen[v]) repeated = true;
            seen[v] = true;
        }
        if (!repeated) {
            int inversions = 0;
            for (int x = 0; x < dim; ++x)
                for (int y = x + 1; y < dim; ++y)
                    if (word[x] > word[y]) ++inversions;
            total += (inversions % 2 == 0 ? 1.0 : -1.0) * term;
        }
        int pos = 0;
        while (pos < n && ++choice[pos] == count) choice[pos++] = 0;
        if (pos == n) break;
    }
    double factorial = 1.0;
    for (int k = 2; k <= n; ++k) factorial *= k;
    return total / factorial;
}

namespace {

std::size_t shifted(const TorusGeometry& geom, std::size_t p, int dim, int step) {
    const int count = geom.grid_shape()[dim];
    const int idx = geom.index_along(p, dim);
    const int target = ((idx + step) % count + count) % count;
    std::size_t stride = 1;
    for (int d = geom.real_dim() - 1; d > dim; --d) stride *= static_cast<std::size_t>(geom.grid_shape()[d]);
    return p + static_cast<std::size_t>(static_cast<long long>(target - idx) * static_cast<long long>(stride));
}

double fd_second(const ScalarField& f, std::size_t p, int a, int b) {
    const TorusGeometry& geom = *f.geometry();
    if (geom.grid_shape()[a] == 1 || geom.grid_shape()[b] == 1) return 0.0;
    const double ha = geom.spacing(a);
    const double hb = geom.spacing(b);
    if (a == b) return (f[shifted(geom, p, a, 1)] - 2.0 * f[p] + f[shifted(geom, p, a, -1)]) / (ha * ha);
    const std::size_t pa = shifted(geom, p, a, 1);
    const std::size_t ma = shifted(geom, p, a, -1);
    return (f[shifted(geom, pa, b, 1)] - f[shifted(geom, pa, b, -1)] - f[shifted(geom, ma, b, 1)] +
            f[shifted(geom, ma, b, -1)]) /
           (4.0 * ha * hb);
}

}  // namespace

MatrixField fd_hessian(const ScalarField& phi) {
    const TorusGeometry& geom = *phi.geometry();
    for (int d = 0; d < geom.real_dim(); ++d)
        if (geom.grid_shape()[d] > 1 && geom.grid_shape()[d] < 3)
            throw std::invalid_argument("fd_hessian: active dimension " + std::to_string(d) + " has fewer than 3 samples");
    const int dim = geom.complex_dim();
    MatrixField hess(phi.geometry(), MatrixKind::hermitian);
    for (std::size_t p = 0; p < geom.point_count(); ++p) {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                const int xi = i, yi = dim + i, xj = j, yj = dim + j;
                const double re = fd_second(phi, p, xi, xj) + fd_second(phi, p, yi, yj);
                const double im = fd_second(phi, p, xi, yj) - fd_second(phi, p, yi, xj);
                hess.entry(p, i, j) = 0.25 * cd{re, im};
            }
    }
    return hess;
}

EllipticSolution elliptic_exact_n1(const ScalarField& f) {
    const GeometryPtr& geom = f.geometry();
    if (geom->n() != 1) throw std::invalid_argument("elliptic_exact_n1: requires n = 1");
    if (!geom->is_flat()) throw std::invalid_argument("elliptic_exact_n1: requires a flat background");

    // For n = 1 the ratio is 1 + kappa * Delta_flat(phi); probe kappa with H = Id.
    const CMatrix id = CMatrix::Identity(2, 2);
    const CMatrix& omega = geom->flat_form();
    const double ratio_id = (pfaffian(omega + ddj_coefficients(id, geom->j_matrix())) / pfaffian(omega)).real();
    const double lap_id = (geom->flat_metric().inverse() * id).trace().real();
    const double kappa = (ratio_id - 1.0) / lap_id;

    ScalarField expf(geom);
    for (std::size_t p = 0; p < f.size(); ++p) expf[p] = std::exp(f[p]);
    EllipticSolution sol;
    sol.b_star = -std::log(weighted_mean(expf, volume_weight(geom)));

    ScalarField rhs(geom);
    for (std::size_t p = 0; p < f.size(); ++p) rhs[p] = (std::exp(f[p] + sol.b_star) - 1.0) / kappa;
    const double mean = weighted_mean(rhs);
    for (std::size_t p = 0; p < rhs.size(); ++p) rhs[p] -= mean;  // round-off only
    sol.phi_star = poisson_solve_flat(rhs);
    return sol;
}

ScalarField random_band_limited_field(const GeometryPtr& geom, std::uint64_t seed, double amp, int max_mode) {
    std::vector<int> active;
    for (int d = 0; d < geom->real_dim(); ++d)
        if (geom->grid_shape()[d] > 1) active.push_back(d);
    ScalarField out(geom);
    if (active.empty()) return out;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int a = static_cast<int>(active.size());
    std::vector<int> m(a, -max_mode);
    std::vector<double> phase(geom->point_count());
    while (true) {
        int l1 = 0;
        for (int v : m) l1 += std::abs(v);
        // Keep one representative of each +-m pair: first non-zero entry positive.
        int lead = 0;
        for (int v : m)
            if (v != 0) {
                lead = v;
                break;
            }
        if (l1 > 0 && l1 <= max_mode && lead > 0) {
            double norm2 = 0.0;
            for (int v : m) norm2 += double(v) * v;
            const double weight = amp / std::pow(1.0 + std::sqrt(norm2), 2);
            const double c = unit(rng) * weight;
            const double s = unit(rng) * weight;
            for (std::size_t p = 0; p < geom->point_count(); ++p) {
                double arg = 0.0;
                for (int k = 0; k < a; ++k) {
                    const int d = active[k];
                    arg += 2.0 * M_PI * m[k] * geom->coordinate(p, d) / geom->periods()[d];
                }
                out[p] += c * std::cos(arg) + s * std::sin(arg);
            }
        }
        int pos = a - 1;
        while (pos >= 0 && ++m[pos] > max_mode) m[pos--] = -max_mode;
        if (pos < 0) break;
    }
    return out;
}

ScalarField admissible_random_field(const GeometryPtr& geom, std::uint64_t seed, double amp, int max_mode) {
    const double floor = 0.5 * smallest_eigenvalue(geom->flat_metric());
    for (int attempt = 0; attempt < 30; ++attempt) {
        ScalarField phi = random_band_limited_field(geom, seed, amp, max_mode);
        const ScalarField margin = positivity_margin(metric_from_potential(phi));
        if (field_min(margin) >= floor) return phi;
        amp *= 0.5;
    }
    throw std::runtime_error("admissible_random_field: no admissible amplitude found");
}

}  // namespace qmaflow::oracle
