#include "doctest.h"
#include "helpers.hpp"

#include "cmf/field.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cmf;
using cmf::test::tabulate;

TEST_CASE("grid rejects tiny or degenerate sizes") {
    CHECK_THROWS_AS(Grid2D(3, 8, 0.1), ConfigError);
    CHECK_THROWS_AS(Grid2D(8, 8, 0.0), ConfigError);
    CHECK(unit_grid(16, 16).area() == doctest::Approx(1.0));
}

TEST_CASE("boundary extension") {
    CHECK(Grid2D::wrap(-1, 8, BoundaryMode::mirror) == 0);
    CHECK(Grid2D::wrap(-2, 8, BoundaryMode::mirror) == 1);
    CHECK(Grid2D::wrap(8, 8, BoundaryMode::mirror) == 7);
    CHECK(Grid2D::wrap(9, 8, BoundaryMode::mirror) == 6);
    CHECK(Grid2D::wrap(-1, 8, BoundaryMode::periodic) == 7);
    CHECK(Grid2D::wrap(17, 8, BoundaryMode::periodic) == 1);
}

TEST_CASE("gaussian mask basics") {
    const Grid2D g = unit_grid(64, 64);
    SUBCASE("central weight is the unique maximum when sqrt(2 tau) = h") {
        const double tau = 0.5 * g.h * g.h;
        const KernelMask m = gaussian_kernel_mask(tau, g, 4.0);
        std::size_t centre = 0;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (m.offsets[j].dx == 0.0 && m.offsets[j].dy == 0.0) centre = j;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (j != centre) CHECK(m.weights[j] < m.weights[centre]);
        CHECK(m.half_width() == 4);
    }
    SUBCASE("weights sum to one and are point symmetric") {
        for (double tau : {1e-4, 7e-4, 3e-3}) {
            const KernelMask m = gaussian_kernel_mask(tau, g);
            double total = 0.0;
            for (double w : m.weights) total += w;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            CHECK_NOTHROW(m.validate());
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(gaussian_kernel_mask(-1.0, g), ConfigError);
        CHECK_THROWS_AS(gaussian_kernel_mask(1e-3, g, 2.0), ConfigError);
        CHECK_THROWS_AS(gaussian_kernel_mask(0.5, g), ConfigError); // window wider than the grid
    }
}

TEST_CASE("gaussian mask against cell quadrature of the heat kernel") {
    const Grid2D g = unit_grid(128, 128);
    const double tau = 1e-3;
    const KernelMask m = gaussian_kernel_mask(tau, g, 4.0);

    // Integrate G_tau over each cell with a 10x10 midpoint rule, then
    // normalize over the same window.
    const double s2 = 2.0 * tau / (g.h * g.h); // variance in grid units
    std::vector<double> q(m.size());
    double total = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        double acc = 0.0;
        for (int a = 0; a < 10; ++a)
            for (int b = 0; b < 10; ++b) {
                const double x = m.offsets[j].dx - 0.5 + (a + 0.5) / 10.0;
                const double y = m.offsets[j].dy - 0.5 + (b + 0.5) / 10.0;
                acc += std::exp(-(x * x + y * y) / (2.0 * s2));
            }
        q[j] = acc;
        total += acc;
    }
    double qmax = 0.0, worst = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        q[j] /= total;
        qmax = std::max(qmax, q[j]);
    }
    for (std::size_t j = 0; j < m.size(); ++j) {
        worst = std::max(worst, std::abs(m.weights[j] - q[j]));
        m2 += m.weights[j] * (m.offsets[j].dx * m.offsets[j].dx + m.offsets[j].dy * m.offsets[j].dy);
    }
    // Point sampling differs from cell averaging by about (1/12) / s2 at the peak.
    CHECK(worst / qmax < 3e-3);
    CHECK(m2 == doctest::Approx(2.0 * s2).epsilon(1e-3));
}

TEST_CASE("circle mask") {
    const Grid2D g = unit_grid(64, 64);
    SUBCASE("eight samples of weight 1/8") {
        const KernelMask m = circle_mask(8e-4, 8, g);
        REQUIRE(m.size() == 8);
        for (double w : m.weights) CHECK(w == 0.125);
        for (const auto& o : m.offsets) CHECK(std::hypot(o.dx, o.dy) == doctest::Approx(std::sqrt(1.6e-3) * 64).epsilon(1e-12));
        CHECK_FALSE(m.integer_offsets);
    }
    SUBCASE("four samples at radius h hit the axis neighbours") {
        const KernelMask m = circle_mask(0.5 * g.h * g.h, 4, g);
        REQUIRE(m.size() == 4);
        CHECK(m.integer_offsets);
        CHECK(m.offsets[0].dx == 1.0);
        CHECK(m.offsets[0].dy == 0.0);
        CHECK(m.offsets[1].dx == 0.0);
        CHECK(m.offsets[1].dy == 1.0);
        CHECK(m.offsets[2].dx == -1.0);
        CHECK(m.offsets[3].dy == -1.0);
    }
    SUBCASE("radius below one cell is rejected") {
        CHECK_THROWS_WITH_AS(circle_mask(0.1 * g.h * g.h, 8, g), doctest::Contains("radius below grid resolution"),
                             ConfigError);
        CHECK_THROWS_AS(circle_mask(1e-3, 5, g), ConfigError);
    }
}

TEST_CASE("bilinear sampling") {
    const Grid2D g = unit_grid(16, 16);
    std::mt19937_64 rng(3);
    const ScalarField2D f = cmf::test::random_field(g, rng);
    CHECK(bilinear_sample(f, 5.0, 7.0) == f(5, 7));
    CHECK(bilinear_sample(f, 5.5, 7.5) == doctest::Approx(0.25 * (f(5, 7) + f(6, 7) + f(5, 8) + f(6, 8))).epsilon(1e-15));

    ScalarField2D lin(g);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) lin(ix, iy) = 0.3 * ix - 1.7 * iy;
    std::uniform_real_distribution<double> pos(0.0, 14.999);
    for (int k = 0; k < 200; ++k) {
        const double x = pos(rng), y = pos(rng);
        CHECK(std::abs(bilinear_sample(lin, x, y) - (0.3 * x - 1.7 * y)) < 1e-12);
    }
}

TEST_CASE("convolution") {
    const Grid2D g = unit_grid(32, 32, BoundaryMode::periodic);
    const KernelMask m = gaussian_kernel_mask(2e-3, g);

    SUBCASE("constants are preserved") {
        const ScalarField2D out = convolve(ScalarField2D(g, 0.37), m);
        for (double v : out.values()) CHECK(v == doctest::Approx(0.37).epsilon(1e-13));
    }
    SUBCASE("impulse response reproduces the mask") {
        ScalarField2D delta(g, 0.0);
        delta(16, 16) = 1.0;
        const ScalarField2D out = convolve(delta, m);
        for (std::size_t j = 0; j < m.size(); ++j) {
            const int ix = 16 - static_cast<int>(m.offsets[j].dx), iy = 16 - static_cast<int>(m.offsets[j].dy);
            CHECK(out(ix, iy) == doctest::Approx(m.weights[j]).epsilon(1e-12));
        }
    }
    SUBCASE("separable path matches direct summation") {
        std::mt19937_64 rng(11);
        const ScalarField2D f = cmf::test::random_field(g, rng);
        CHECK(cmf::test::max_abs_diff(convolve(f, m), convolve_direct(f, m)) < 1e-13);
        const Grid2D gm = unit_grid(32, 32);
        const ScalarField2D fm = cmf::test::random_field(gm, rng);
        const KernelMask mm = gaussian_kernel_mask(2e-3, gm);
        CHECK(cmf::test::max_abs_diff(convolve(fm, mm), convolve_direct(fm, mm)) < 1e-13);
    }
    SUBCASE("fractional circle offsets go through bilinear sampling") {
        std::mt19937_64 rng(12);
        const ScalarField2D f = cmf::test::random_field(g, rng);
        const KernelMask c = circle_mask(1e-3, 8, g);
        const ScalarField2D out = convolve(f, c);
        double expect = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) expect += c.weights[j] * bilinear_sample(f, 3 + c.offsets[j].dx, 9 + c.offsets[j].dy);
        CHECK(out(3, 9) == doctest::Approx(expect).epsilon(1e-14));
    }
    SUBCASE("linearity and monotonicity") {
        std::mt19937_64 rng(13);
        const ScalarField2D a = cmf::test::random_field(g, rng), b = cmf::test::random_field(g, rng);
        ScalarField2D mix(g), upper(g);
        for (std::size_t i = 0; i < a.size(); ++i) {
            mix.values()[i] = 2.0 * a.values()[i] - 0.5 * b.values()[i];
            upper.values()[i] = a.values()[i] + 0.1 * b.values()[i];
        }
        const ScalarField2D ca = convolve(a, m), cb = convolve(b, m), cm = convolve(mix, m), cu = convolve(upper, m);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(cm.values()[i] - (2.0 * ca.values()[i] - 0.5 * cb.values()[i])) < 1e-12);
            CHECK(cu.values()[i] >= ca.values()[i]);
        }
    }
    SUBCASE("heat semigroup") {
        const Grid2D gp = unit_grid(64, 64, BoundaryMode::periodic);
        const ScalarField2D f = tabulate(gp, [](double x, double y) {
            return std::sin(2 * std::numbers::pi * x) * std::cos(4 * std::numbers::pi * y) + 0.3 * std::cos(2 * std::numbers::pi * (x + y));
        });
        const ScalarField2D twice = convolve(convolve(f, gaussian_kernel_mask(4e-4, gp)), gaussian_kernel_mask(6e-4, gp));
        const ScalarField2D once = convolve(f, gaussian_kernel_mask(1e-3, gp));
        CHECK(cmf::test::max_abs_diff(twice, once) < 1e-3);
    }
    SUBCASE("point reflection commutes with a symmetric mask") {
        const Grid2D gp = unit_grid(32, 32, BoundaryMode::periodic);
        std::mt19937_64 rng(14);
        ScalarField2D f = cmf::test::random_field(gp, rng);
        ScalarField2D r(gp);
        for (int iy = 0; iy < 32; ++iy)
            for (int ix = 0; ix < 32; ++ix) r(ix, iy) = f(31 - ix, 31 - iy);
        const ScalarField2D cf = convolve(f, m), cr = convolve(r, m);
        double worst = 0.0;
        for (int iy = 0; iy < 32; ++iy)
            for (int ix = 0; ix < 32; ++ix) worst = std::max(worst, std::abs(cr(ix, iy) - cf(31 - ix, 31 - iy)));
        CHECK(worst < 1e-13);
    }
}

TEST_CASE("local range covers the window") {
    const Grid2D g = unit_grid(16, 16);
    std::mt19937_64 rng(21);
    const ScalarField2D f = cmf::test::random_field(g, rng);
    const auto [lo, hi] = local_range(f, 2);
    for (int iy = 0; iy < 16; ++iy)
        for (int ix = 0; ix < 16; ++ix) {
            double a = 1e300, b = -1e300;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    a = std::min(a, f.at_extended(ix + dx, iy + dy));
                    b = std::max(b, f.at_extended(ix + dx, iy + dy));
                }
            CHECK(lo(ix, iy) == a);
            CHECK(hi(ix, iy) == b);
        }
}
