#pragma once

#include "cmf/field.hpp"
#include "cmf/median_filter.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace cmf::test {

inline ScalarField2D tabulate(const Grid2D& g, const std::function<double(double, double)>& fn) {
    ScalarField2D f(g);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) f(ix, iy) = fn((ix + 0.5) * g.h, (iy + 0.5) * g.h);
    return f;
}

inline ScalarField2D random_field(const Grid2D& g, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarField2D f(g);
    for (double& v : f.values()) v = u(rng);
    return f;
}

inline ScalarField2D random_binary(const Grid2D& g, std::mt19937_64& rng, double p = 0.5) {
    std::bernoulli_distribution b(p);
    ScalarField2D f(g);
    for (double& v : f.values()) v = b(rng) ? 1.0 : 0.0;
    return f;
}

inline BinaryField disk_indicator(const Grid2D& g, double cx, double cy, double r) {
    return BinaryField(tabulate(g, [&](double x, double y) { return std::hypot(x - cx, y - cy) <= r ? 1.0 : 0.0; }));
}

inline double max_abs_diff(const ScalarField2D& a, const ScalarField2D& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

} // namespace cmf::test
