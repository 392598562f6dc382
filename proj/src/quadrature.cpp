#include "qmaflow/quadrature.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace qmaflow {

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double weighted_mean(const ScalarField& f, const ScalarField& w) {
    if (f.size() != w.size()) throw std::invalid_argument("weighted_mean: shape mismatch");
    std::vector<double> products(f.size());
    for (std::size_t p = 0; p < f.size(); ++p) products[p] = f[p] * w[p];
    const double total_weight = pairwise_sum(w.values());
    if (!(total_weight > 0.0)) throw std::invalid_argument("weighted_mean: total weight is not positive");
    return pairwise_sum(products) / total_weight;
}

double weighted_mean(const ScalarField& f) {
    if (f.size() == 0) throw std::invalid_argument("weighted_mean: empty field");
    return pairwise_sum(f.values()) / static_cast<double>(f.size());
}

double field_max(const ScalarField& f) { return *std::max_element(f.values().begin(), f.values().end()); }
double field_min(const ScalarField& f) { return *std::min_element(f.values().begin(), f.values().end()); }

}  // namespace qmaflow
