#include "cmf/field.hpp"

#include "cmf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

namespace cmf {

Grid2D::Grid2D(int nx_, int ny_, double h_, BoundaryMode bc) : nx(nx_), ny(ny_), h(h_), boundary(bc) {
    if (nx < 4 || ny < 4) throw ConfigError("grid needs at least 4x4 cells");
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid spacing must be positive");
}

Grid2D unit_grid(int nx, int ny, BoundaryMode bc) { return Grid2D(nx, ny, 1.0 / nx, bc); }

int Grid2D::wrap(int i, int n, BoundaryMode bc) {
    if (i >= 0 && i < n) return i;
    if (bc == BoundaryMode::periodic) {
        int m = i % n;
        return m < 0 ? m + n : m;
    }
    // half-sample symmetric extension: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

ScalarField2D::ScalarField2D(const Grid2D& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField2D::ScalarField2D(const Grid2D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ConfigError("field value count does not match grid");
}

double ScalarField2D::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double ScalarField2D::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField2D::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField2D::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

int KernelMask::half_width() const {
    double r = 0.0;
    for (const auto& o : offsets) r = std::max({r, std::abs(o.dx), std::abs(o.dy)});
    return static_cast<int>(std::ceil(r - 1e-12));
}

void KernelMask::validate() const {
    if (offsets.empty() || offsets.size() != weights.size()) throw ConfigError("mask offsets and weights differ in length");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("mask weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "mask weights sum to " << total << ", expected 1";
        throw ConfigError(msg.str());
    }
    using Entry = std::tuple<double, double, double>;
    std::vector<Entry> fwd, rev;
    fwd.reserve(size());
    rev.reserve(size());
    for (std::size_t j = 0; j < size(); ++j) {
        fwd.emplace_back(offsets[j].dx, offsets[j].dy, weights[j]);
        rev.emplace_back(-offsets[j].dx == 0.0 ? 0.0 : -offsets[j].dx, -offsets[j].dy == 0.0 ? 0.0 : -offsets[j].dy,
                         weights[j]);
    }
    std::sort(fwd.begin(), fwd.end());
    std::sort(rev.begin(), rev.end());
    for (std::size_t j = 0; j < size(); ++j) {
        const auto& [ax, ay, aw] = fwd[j];
        const auto& [bx, by, bw] = rev[j];
        if (std::abs(ax - bx) > 1e-12 || std::abs(ay - by) > 1e-12 || std::abs(aw - bw) > 1e-12)
            throw ConfigError("mask is not symmetric under point reflection");
    }
}

KernelMask gaussian_kernel_mask(double tau, const Grid2D& grid, double truncation) {
    if (!(tau > 0.0)) throw ConfigError("gaussian mask: tau must be positive");
    if (!(truncation >= 3.0)) throw ConfigError("gaussian mask: truncation must be at least 3 standard deviations");
    const double stddev = std::sqrt(2.0 * tau);
    const int r = static_cast<int>(std::ceil(truncation * stddev / grid.h));
    if (r >= std::min(grid.nx, grid.ny)) {
        std::ostringstream msg;
        msg << "gaussian mask half-width " << r << " exceeds grid extent " << grid.nx << "x" << grid.ny;
        throw ConfigError(msg.str());
    }
    std::vector<double> g(2 * r + 1);
    for (int d = -r; d <= r; ++d) {
        const double x = d * grid.h;
        g[d + r] = std::exp(-x * x / (4.0 * tau));
    }
    const double gs = std::accumulate(g.begin(), g.end(), 0.0);
    for (double& v : g) v /= gs;

    KernelMask mask;
    mask.offsets.reserve(g.size() * g.size());
    mask.weights.reserve(g.size() * g.size());
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            mask.offsets.push_back({static_cast<double>(dx), static_cast<double>(dy)});
            mask.weights.push_back(g[dx + r] * g[dy + r]);
        }
    }
    mask.integer_offsets = true;
    mask.separable_1d = std::move(g);
    return mask;
}

KernelMask circle_mask(double tau, int samples, const Grid2D& grid) {
    if (samples < 4 || samples % 2 != 0) throw ConfigError("circle mask: sample count must be even and at least 4");
    if (!(tau > 0.0)) throw ConfigError("circle mask: tau must be positive");
    const double radius = std::sqrt(2.0 * tau) / grid.h;
    if (radius < 1.0 - 1e-12) throw ConfigError("circle mask: radius below grid resolution");

    auto snap = [](double v) {
        const double r = std::round(v);
        return std::abs(v - r) < 1e-12 ? r : v;
    };
    KernelMask mask;
    mask.integer_offsets = true;
    for (int j = 0; j < samples; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / samples;
        const Offset o{snap(radius * std::cos(theta)), snap(radius * std::sin(theta))};
        if (o.dx != std::round(o.dx) || o.dy != std::round(o.dy)) mask.integer_offsets = false;
        mask.offsets.push_back(o);
        mask.weights.push_back(1.0 / samples);
    }
    return mask;
}

KernelMask make_mask(std::vector<Offset> offsets, std::vector<double> weights) {
    KernelMask mask;
    mask.offsets = std::move(offsets);
    mask.weights = std::move(weights);
    mask.integer_offsets = std::all_of(mask.offsets.begin(), mask.offsets.end(), [](const Offset& o) {
        return o.dx == std::round(o.dx) && o.dy == std::round(o.dy);
    });
    mask.validate();
    return mask;
}

double bilinear_sample(const ScalarField2D& f, double x, double y) {
    const double fx0 = std::floor(x);
    const double fy0 = std::floor(y);
    const double tx = x - fx0;
    const double ty = y - fy0;
    const int x0 = static_cast<int>(fx0);
    const int y0 = static_cast<int>(fy0);
    const double v00 = f.at_extended(x0, y0);
    if (tx == 0.0 && ty == 0.0) return v00;
    const double v10 = f.at_extended(x0 + 1, y0);
    const double v01 = f.at_extended(x0, y0 + 1);
    const double v11 = f.at_extended(x0 + 1, y0 + 1);
    return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
}

ScalarField2D convolve_direct(const ScalarField2D& f, const KernelMask& mask) {
    ScalarField2D out(f.grid());
    const int nx = f.nx();
    parallel_for(f.ny(), [&](int iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double acc = 0.0;
            for (std::size_t j = 0; j < mask.size(); ++j)
                acc += mask.weights[j] * sample_offset(f, ix, iy, mask.offsets[j], mask.integer_offsets);
            out(ix, iy) = acc;
        }
    });
    return out;
}

namespace {

ScalarField2D convolve_separable(const ScalarField2D& f, const std::vector<double>& g) {
    const Grid2D& grid = f.grid();
    const int nx = grid.nx;
    const int ny = grid.ny;
    const int r = static_cast<int>(g.size() / 2);
    ScalarField2D tmp(grid);
    parallel_for(ny, [&](int iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double acc = 0.0;
            if (ix >= r && ix + r < nx) {
                const double* row = f.data() + f.index(ix - r, iy);
                for (int d = 0; d <= 2 * r; ++d) acc += g[d] * row[d];
            } else {
                for (int d = -r; d <= r; ++d) acc += g[d + r] * f(Grid2D::wrap(ix + d, nx, grid.boundary), iy);
            }
            tmp(ix, iy) = acc;
        }
    });
    ScalarField2D out(grid);
    parallel_for(ny, [&](int iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d) acc += g[d + r] * tmp(ix, Grid2D::wrap(iy + d, ny, grid.boundary));
            out(ix, iy) = acc;
        }
    });
    return out;
}

} // namespace

ScalarField2D convolve(const ScalarField2D& f, const KernelMask& mask) {
    if (mask.separable_1d) return convolve_separable(f, *mask.separable_1d);
    return convolve_direct(f, mask);
}

std::pair<ScalarField2D, ScalarField2D> local_range(const ScalarField2D& f, int hw) {
    const Grid2D& grid = f.grid();
    const int nx = grid.nx, ny = grid.ny;
    ScalarField2D rmin(grid), rmax(grid);
    parallel_for(ny, [&](int iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double lo = f(ix, iy), hi = lo;
            for (int d = -hw; d <= hw; ++d) {
                const double v = f(Grid2D::wrap(ix + d, nx, grid.boundary), iy);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            rmin(ix, iy) = lo;
            rmax(ix, iy) = hi;
        }
    });
    ScalarField2D cmin(grid), cmax(grid);
    parallel_for(ny, [&](int iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double lo = rmin(ix, iy), hi = rmax(ix, iy);
            for (int d = -hw; d <= hw; ++d) {
                const int jy = Grid2D::wrap(iy + d, ny, grid.boundary);
                lo = std::min(lo, rmin(ix, jy));
                hi = std::max(hi, rmax(ix, jy));
            }
            cmin(ix, iy) = lo;
            cmax(ix, iy) = hi;
        }
    });
    return {std::move(cmin), std::move(cmax)};
}

int mask_footprint(const KernelMask& mask) { return mask.half_width() + (mask.integer_offsets ? 0 : 1); }

void require_same_grid(const ScalarField2D& a, const ScalarField2D& b, const char* what) {
    if (!(a.grid() == b.grid())) throw ConfigError(std::string(what) + ": fields live on different grids");
}

double l2_change(const ScalarField2D& a, const ScalarField2D& b) {
    require_same_grid(a, b, "l2_change");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

} // namespace cmf
