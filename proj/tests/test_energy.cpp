#include "doctest.h"
#include "helpers.hpp"

#include "cmf/energy.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

using namespace cmf;
using cmf::test::tabulate;

TEST_CASE("heat content perimeter") {
    SUBCASE("empty interface") {
        const Grid2D g = unit_grid(32, 32);
        const KernelMask m = gaussian_kernel_mask(1e-3, g);
        CHECK(heat_content_perimeter(ScalarField2D(g, 0.0), 1e-3, m) == 0.0);
        CHECK(heat_content_perimeter(ScalarField2D(g, 1.0), 1e-3, m) == 0.0);
    }
    SUBCASE("flat interface of unit length") {
        const Grid2D g = unit_grid(128, 128);
        const double tau = 1e-4;
        const ScalarField2D u = tabulate(g, [](double x, double) { return x < 0.5 ? 1.0 : 0.0; });
        CHECK(heat_content_perimeter(u, tau, gaussian_kernel_mask(tau, g)) == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("circle") {
        const Grid2D g = unit_grid(256, 256);
        const double r = 0.25, tau = std::pow(r / 8.0, 2);
        const ScalarField2D u = cmf::test::disk_indicator(g, 0.5, 0.5, r).field();
        CHECK(heat_content_perimeter(u, tau, gaussian_kernel_mask(tau, g)) ==
              doctest::Approx(2.0 * std::numbers::pi * r).epsilon(0.03));
    }
    SUBCASE("complement symmetry on periodic grids") {
        const Grid2D g = unit_grid(64, 64, BoundaryMode::periodic);
        std::mt19937_64 rng(4);
        const ScalarField2D u = cmf::test::random_binary(g, rng);
        ScalarField2D c = u;
        for (double& v : c.values()) v = 1.0 - v;
        const KernelMask m = gaussian_kernel_mask(5e-4, g);
        CHECK(heat_content_perimeter(u, 5e-4, m) == doctest::Approx(heat_content_perimeter(c, 5e-4, m)).epsilon(1e-12));
    }
}

TEST_CASE("binary energy") {
    const Grid2D g = unit_grid(32, 32);
    std::mt19937_64 rng(6);
    const ScalarField2D f1 = cmf::test::random_field(g, rng), f2 = cmf::test::random_field(g, rng);
    const KernelMask m = gaussian_kernel_mask(1e-3, g);
    CHECK(binary_energy(BinaryField(ScalarField2D(g, 0.0)), f1, f2, 0.6, m).total == doctest::Approx(f2.integral()));
    CHECK(binary_energy(BinaryField(ScalarField2D(g, 1.0)), f1, f2, 0.6, m).total == doctest::Approx(f1.integral()));

    const BinaryField disk = cmf::test::disk_indicator(g, 0.5, 0.5, 0.3);
    const ScalarField2D zero(g, 0.0);
    const EnergyReport e = binary_energy(disk, zero, zero, 0.6, m);
    CHECK(e.total == doctest::Approx(0.6 * heat_content_perimeter(disk.field(), 1e-3, m) * std::sqrt(1e-3 / std::numbers::pi)).epsilon(1e-12));
    CHECK(e.total == doctest::Approx(e.fidelity + 0.6 * e.perimeter).epsilon(1e-12));
}

TEST_CASE("relaxed energy") {
    std::mt19937_64 rng(9);
    SUBCASE("constant field has no interaction") {
        const Grid2D g = unit_grid(16, 16);
        CHECK(interaction_energy(ScalarField2D(g, 0.3), gaussian_kernel_mask(1e-3, g)) == 0.0);
    }
    SUBCASE("binary fields match the binary energy after rescaling") {
        for (BoundaryMode bc : {BoundaryMode::mirror, BoundaryMode::periodic}) {
            const Grid2D g = unit_grid(32, 32, bc);
            const KernelMask m = gaussian_kernel_mask(7e-4, g);
            for (int trial = 0; trial < 10; ++trial) {
                const ScalarField2D u = cmf::test::random_binary(g, rng, 0.3);
                const ScalarField2D f1 = cmf::test::random_field(g, rng), f2 = cmf::test::random_field(g, rng);
                const RelaxedEnergy r = relaxed_energy(LevelSetField(u), f1, f2, 0.6, m);
                const EnergyReport b = binary_energy(BinaryField(u), f1, f2, 0.6, m);
                CHECK(r.total * 0.3 == doctest::Approx(b.total).epsilon(1e-8));
                CHECK(r.weighted(0.6, 0.0).total == doctest::Approx(b.total).epsilon(1e-8));
            }
        }
    }
    SUBCASE("checkerboard maximizes interaction among balanced 4x4 patterns") {
        const Grid2D g(4, 4, 0.25, BoundaryMode::periodic);
        const KernelMask m = make_mask({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, {0.25, 0.25, 0.25, 0.25});
        ScalarField2D board(g);
        for (int iy = 0; iy < 4; ++iy)
            for (int ix = 0; ix < 4; ++ix) board(ix, iy) = (ix + iy) % 2;
        const double best = interaction_energy(board, m);
        for (unsigned bits = 0; bits < (1u << 16); ++bits) {
            if (std::popcount(bits) != 8) continue;
            ScalarField2D u(g);
            for (int i = 0; i < 16; ++i) u.values()[i] = (bits >> i) & 1u;
            CHECK(interaction_energy(u, m) <= best + 1e-15);
        }
    }
}

TEST_CASE("movement limiter") {
    const Grid2D g = unit_grid(24, 24);
    const KernelMask m = gaussian_kernel_mask(2e-3, g);
    std::mt19937_64 rng(12);
    const LevelSetField a(cmf::test::random_field(g, rng));
    CHECK(movement_limiter(a, a, m) == 0.0);
    for (int trial = 0; trial < 20; ++trial) {
        const LevelSetField p(cmf::test::random_field(g, rng)), q(cmf::test::random_field(g, rng));
        CHECK(movement_limiter(p, q, m) >= -1e-10);
    }
    CHECK(movement_limiter(LevelSetField(ScalarField2D(g, 1.0)), LevelSetField(ScalarField2D(g, 0.0)), m) ==
          doctest::Approx(2.0 * g.area()).epsilon(1e-12));
}

TEST_CASE("coarea identity") {
    const Grid2D g = unit_grid(48, 48);
    const KernelMask m = gaussian_kernel_mask(1e-3, g);
    std::mt19937_64 rng(15);
    SUBCASE("binary field") {
        const LevelSetField u(cmf::test::random_binary(g, rng));
        const CoareaResult r = coarea_check(u, m, 16);
        CHECK(std::abs(r.lhs - r.rhs) <= 1e-10 * r.lhs);
    }
    SUBCASE("three levels") {
        std::uniform_int_distribution<int> lvl(0, 2);
        ScalarField2D f(g);
        for (double& v : f.values()) v = 0.5 * lvl(rng);
        const CoareaResult r = coarea_check(LevelSetField(f), m, 16);
        CHECK(std::abs(r.lhs - r.rhs) <= 1e-10 * r.lhs);
    }
    SUBCASE("smooth radial field") {
        const LevelSetField phi(tabulate(g, [](double x, double y) {
            return std::clamp(1.0 - std::hypot(x - 0.5, y - 0.5) / 0.45, 0.0, 1.0);
        }));
        const CoareaResult r = coarea_check(phi, m, 256);
        CHECK(std::abs(r.lhs - r.rhs) <= 1e-2 * r.lhs);
    }
    SUBCASE("too few levels") { CHECK_THROWS_AS(coarea_check(LevelSetField(ScalarField2D(g, 0.5)), m, 8), ConfigError); }
}
