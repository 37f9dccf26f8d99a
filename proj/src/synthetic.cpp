#include "cmf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cmf {

namespace {

double node_x(const Grid2D& g, int ix) { return (ix + 0.5) * g.h; }
double node_y(const Grid2D& g, int iy) { return (iy + 0.5) * g.h; }

void check_overlaps(const std::vector<ShapeSpec>& shapes, const Grid2D& grid) {
    std::string clashes;
    for (std::size_t a = 0; a < shapes.size(); ++a)
        for (std::size_t b = a + 1; b < shapes.size(); ++b) {
            bool hit = false;
            for (int iy = 0; iy < grid.ny && !hit; ++iy)
                for (int ix = 0; ix < grid.nx && !hit; ++ix) {
                    const double x = node_x(grid, ix), y = node_y(grid, iy);
                    hit = shapes[a].contains(x, y) && shapes[b].contains(x, y);
                }
            if (hit) clashes += (clashes.empty() ? "" : ", ") + shapes[a].describe() + " / " + shapes[b].describe();
        }
    if (!clashes.empty()) throw ConfigError("overlapping shapes: " + clashes);
}

} // namespace

BinaryField rasterize_shapes(const std::vector<ShapeSpec>& shapes, const Grid2D& grid) {
    check_overlaps(shapes, grid);
    ScalarField2D u(grid);
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = node_x(grid, ix), y = node_y(grid, iy);
            for (const auto& s : shapes)
                if (s.contains(x, y)) u(ix, iy) = 1.0;
        }
    return BinaryField(std::move(u));
}

ScalarField2D clean_image(const ImageSpec& spec, const Grid2D& grid) {
    if (spec.contrast < 0.0 || spec.contrast > 1.0) throw ConfigError("contrast must lie in [0, 1]");
    if (spec.bias < 0.0 || spec.bias >= 1.0) throw ConfigError("bias must lie in [0, 1)");
    if (!(spec.range > 0.0)) throw ConfigError("range must be positive");
    const BinaryField mask = rasterize_shapes(spec.shapes, grid);
    const double lo = 0.5 - 0.5 * spec.contrast, hi = 0.5 + 0.5 * spec.contrast;
    ScalarField2D img(grid);
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double base = mask.field()(ix, iy) > 0.5 ? hi : lo;
            const double ramp = 1.0 + spec.bias * (node_x(grid, ix) + node_y(grid, iy) - 1.0);
            img(ix, iy) = std::clamp(base * ramp, 0.0, 1.0);
        }
    return img;
}

ScalarField2D generate_synthetic_image(const ImageSpec& spec, const Grid2D& grid) {
    if (spec.noise_sigma < 0.0) throw ConfigError("noise_sigma must be nonnegative");
    if (!spec.seed) throw ConfigError("synthetic image needs a seed");
    ScalarField2D img = clean_image(spec, grid);
    if (spec.noise_sigma > 0.0) {
        std::mt19937_64 rng(*spec.seed);
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (double& v : img.values()) v = std::clamp(v + noise(rng), 0.0, 1.0);
    }
    if (spec.range != 1.0)
        for (double& v : img.values()) v *= spec.range;
    return img;
}

LevelSetField cone_level_set(const Grid2D& grid) {
    const double cx = 0.5 * grid.nx * grid.h, cy = 0.5 * grid.ny * grid.h;
    const double reach = std::hypot(cx, cy);
    ScalarField2D f(grid);
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix)
            f(ix, iy) = std::max(0.0, 1.0 - std::hypot(node_x(grid, ix) - cx, node_y(grid, iy) - cy) / reach);
    return LevelSetField(std::move(f));
}

LevelSetField square_level_set(const Grid2D& grid, double cx, double cy, double half) {
    ScalarField2D f(grid);
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix)
            f(ix, iy) = std::abs(node_x(grid, ix) - cx) <= half && std::abs(node_y(grid, iy) - cy) <= half ? 1.0 : 0.0;
    return LevelSetField(std::move(f));
}

LevelSetField ramp_square_level_set(const Grid2D& grid, double cx, double cy, double half, double width,
                                    double jitter, std::uint64_t seed) {
    if (!(width > 0.0)) throw ConfigError("ramp width must be positive");
    if (jitter < 0.0) throw ConfigError("ramp jitter must be nonnegative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-jitter, jitter);
    ScalarField2D f(grid);
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            // Positive inside; the Chebyshev distance keeps the 1/2 level on the square.
            const double d = half - std::max(std::abs(node_x(grid, ix) - cx), std::abs(node_y(grid, iy) - cy));
            const double v = 0.5 + d / width + (jitter > 0.0 ? noise(rng) : 0.0);
            f(ix, iy) = d >= 0.0 ? std::clamp(v, 0.5, 1.0) : std::clamp(v, 0.0, 0.5 - 1e-9);
        }
    return LevelSetField(std::move(f));
}

LevelSetField disk_level_set(const Grid2D& grid, double cx, double cy, double r) {
    ScalarField2D f(grid);
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix)
            f(ix, iy) = std::hypot(node_x(grid, ix) - cx, node_y(grid, iy) - cy) <= r ? 1.0 : 0.0;
    return LevelSetField(std::move(f));
}

double jaccard(const BinaryField& a, const BinaryField& b) {
    require_same_grid(a.field(), b.field(), "jaccard");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.field().size(); ++i) {
        const bool x = a.field().values()[i] > 0.5, y = b.field().values()[i] > 0.5;
        inter += x && y;
        uni += x || y;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double symmetric_difference_fraction(const BinaryField& a, const BinaryField& b) {
    require_same_grid(a.field(), b.field(), "symmetric_difference");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.field().size(); ++i) diff += a.field().values()[i] != b.field().values()[i];
    return static_cast<double>(diff) / static_cast<double>(a.field().size());
}

} // namespace cmf
