#include "qmaflow/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qmaflow/algebra.hpp"
#include "qmaflow/flow.hpp"
#include "qmaflow/ma_operator.hpp"
#include "qmaflow/quadrature.hpp"
#include "qmaflow/spectral.hpp"

namespace qmaflow::oracle {

namespace {

struct Tally {
    OracleReport report;
    bool relative;

    Tally(std::string name, double tol, bool rel) : relative(rel) {
        report.name = std::move(name);
        report.tolerance = tol;
    }
    void add(double abs_err, double scale = 1.0) {
        ++report.sample_count;
        if (!std::isfinite(abs_err)) {
            report.max_abs_error = report.max_rel_error = std::nan("");
            return;
        }
        report.max_abs_error = std::max(report.max_abs_error, abs_err);
        report.max_rel_error = std::max(report.max_rel_error, abs_err / std::max(std::abs(scale), 1e-300));
    }
    OracleReport done() {
        report.finalize(relative);
        return report;
    }
};

std::size_t stride_for(std::size_t points, std::size_t budget) { return std::max<std::size_t>(1, points / budget); }

CMatrix random_antisymmetric(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            a(i, j) = cd{u(rng), u(rng)};
            a(j, i) = -a(i, j);
        }
    return a;
}

}  // namespace

std::vector<OracleReport> run_invariant_suite(const GeometryPtr& geom, int samples, std::uint64_t seed) {
    Tally det("det_pfaffian_equivalence", 1e-9, true);
    Tally trace("trace_identity", 1e-9, false);
    Tally volume("volume_identity", 1e-12, true);
    Tally stokes("stokes_constraint", 1e-10, false);
    Tally qreal("q_reality", 1e-10, false);
    Tally routes("metric_routes", 1e-10, false);
    Tally herm("hessian_hermitian", 1e-12, false);
    Tally variation("first_variation_order", 0.02, false);

    const MatrixField background = background_metric_field(geom);
    const double dim = geom->complex_dim();
    {
        auto [lhs, rhs] = volume_form_sides(geom->flat_form(), geom->j_matrix());
        volume.add(std::abs(lhs - rhs), lhs);
    }

    for (int k = 0; k < samples; ++k) {
        const ScalarField phi = admissible_random_field(geom, seed + k);
        const MatrixField h = complex_hessian(phi);
        const MatrixField g = metric_from_hessian(h);
        const ScalarField ratio = ma_ratio_from_hessian(h);
        const MatrixField a = ddJ(h);

        const ScalarField ld = log_det_ratio(g, background);
        for (std::size_t p = 0; p < phi.size(); ++p) det.add(std::abs(std::exp(ld[p]) - ratio[p] * ratio[p]), ratio[p] * ratio[p]);

        const ScalarField lhs = chern_trace(g, background);
        const ScalarField lap = chern_trace(g, j_projection(h));
        for (std::size_t p = 0; p < phi.size(); ++p) trace.add(std::abs(lhs[p] - (dim - lap[p])));

        stokes.add(std::abs(weighted_mean(ratio, volume_weight(geom)) - 1.0));
        qreal.add(q_reality_defect(a));

        MatrixField form(geom, MatrixKind::antisymmetric);
        for (std::size_t p = 0; p < form.size(); ++p) form.set(p, a.at(p) + geom->flat_form());
        routes.add(sup_difference(metric_from_form_field(form), g));

        for (std::size_t p = 0; p < phi.size(); p += stride_for(phi.size(), 32)) {
            auto [l, r] = volume_form_sides(form.at(p), geom->j_matrix());
            volume.add(std::abs(l - r), l);
        }
        for (std::size_t p = 0; p < h.size(); ++p) herm.add(hermitian_defect(h.at(p)));

        if (k < 10) {
            const ScalarField psi = random_band_limited_field(geom, seed + 1000 + k, 1.0);
            const ScalarField zero(geom);
            const ScalarField tangent = qma_tangent(phi, psi);
            double prev = 0.0;
            for (double eps : {1e-2, 1e-3, 1e-4}) {
                const ScalarField fd = (0.5 / eps) * (qma_rhs(phi + eps * psi, zero) - qma_rhs(phi - eps * psi, zero));
                const double err = sup_difference(fd, tangent);
                if (prev > 0.0) variation.add(err / prev);
                prev = err;
            }
        }
    }
    return {det.done(), trace.done(), volume.done(), stokes.done(), qreal.done(), routes.done(), herm.done(),
            variation.done()};
}

std::vector<OracleReport> run_oracle_suite(const GeometryPtr& geom, int samples, std::uint64_t seed) {
    std::vector<OracleReport> out;
    const int n = geom->n();
    const cd base = wedge_power_oracle(geom->flat_form(), n);

    Tally pf("pfaffian_vs_wedge", 1e-12, true);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < samples; ++k) {
        const CMatrix a = random_antisymmetric(2 * n, rng);
        const cd w = wedge_power_oracle(a, n);
        pf.add(std::abs(pfaffian(a) - w), std::max(1.0, std::abs(w)));
    }
    out.push_back(pf.done());

    Tally ratio("ma_ratio_vs_wedge", 1e-12, true);
    for (int k = 0; k < std::min(samples, 10); ++k) {
        const ScalarField phi = admissible_random_field(geom, seed + k);
        const ScalarField r = ma_ratio(phi);
        const MatrixField a = ddJ(complex_hessian(phi));
        for (std::size_t p = 0; p < phi.size(); p += stride_for(phi.size(), 64)) {
            const cd w = wedge_power_oracle(a.at(p) + geom->flat_form(), n) / base;
            ratio.add(std::abs(cd{r[p], 0.0} - w), std::max(1.0, std::abs(w)));
        }
    }
    out.push_back(ratio.done());

    // Finite differences need a fine grid to reach their O(h^2) accuracy.
    std::vector<int> fine(4 * n, 1);
    fine[0] = fine[2] = 64;
    const GeometryPtr fine_geom = build_flat_torus(n, fine);
    Tally fd("hessian_vs_finite_differences", 1e-3, false);
    for (int k = 0; k < std::min(samples, 5); ++k) {
        const ScalarField phi = random_band_limited_field(fine_geom, seed + k);
        fd.add(sup_difference(fd_hessian(phi), complex_hessian(phi)));
    }
    out.push_back(fd.done());

    if (n == 1) {
        // e^f must be resolved up to the Nyquist mode, which the Hessian does not see.
        const GeometryPtr ell_geom = build_flat_torus(1, {32, 1, 32, 1});
        Tally ell("elliptic_exact_n1_roundtrip", 1e-10, false);
        for (int k = 0; k < std::min(samples, 10); ++k) {
            const ScalarField f = random_band_limited_field(ell_geom, seed + 500 + k);
            const EllipticSolution sol = elliptic_exact_n1(f);
            ell.add(elliptic_residual(sol.phi_star, f, sol.b_star));
        }
        out.push_back(ell.done());
    }

    Tally ric("chern_ricci_vs_logdet", 1e-10, false);
    for (int k = 0; k < std::min(samples, 10); ++k) {
        const ScalarField u = random_band_limited_field(geom, seed + 700 + k);
        const GeometryPtr curved = geom->with_conformal_factor(u.data());
        ric.add(sup_difference(chern_ricci_form(background_metric_field(curved)), chern_ricci_conformal(u)));
    }
    out.push_back(ric.done());
    return out;
}

}  // namespace qmaflow::oracle
