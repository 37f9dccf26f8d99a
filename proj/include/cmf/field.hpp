#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmf {

/// Raised for invalid parameters or inconsistent inputs.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BoundaryMode { periodic, mirror };

/// Uniform square-cell grid on [0, nx*h] x [0, ny*h]. Node (ix, iy) sits at the
/// cell center ((ix + 1/2) h, (iy + 1/2) h).
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    BoundaryMode boundary = BoundaryMode::mirror;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double h_, BoundaryMode bc = BoundaryMode::mirror);

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    double area() const { return nx * h * ny * h; }
    double cell_area() const { return h * h; }

    /// Resolve an out-of-range index along an axis of length n.
    static int wrap(int i, int n, BoundaryMode bc);

    bool operator==(const Grid2D&) const = default;
};

/// Unit-square grid with h = 1/nx (ny cells tall, h shared).
Grid2D unit_grid(int nx, int ny, BoundaryMode bc = BoundaryMode::mirror);

class ScalarField2D {
public:
    ScalarField2D() = default;
    explicit ScalarField2D(const Grid2D& grid, double fill = 0.0);
    ScalarField2D(const Grid2D& grid, std::vector<double> values);

    const Grid2D& grid() const { return grid_; }
    int nx() const { return grid_.nx; }
    int ny() const { return grid_.ny; }
    std::size_t size() const { return values_.size(); }

    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid_.nx) + static_cast<std::size_t>(ix);
    }
    double& operator()(int ix, int iy) { return values_[index(ix, iy)]; }
    double operator()(int ix, int iy) const { return values_[index(ix, iy)]; }

    /// Value at an arbitrary integer node, extended by the grid's boundary mode.
    double at_extended(int ix, int iy) const {
        return (*this)(Grid2D::wrap(ix, grid_.nx, grid_.boundary), Grid2D::wrap(iy, grid_.ny, grid_.boundary));
    }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    double sum() const;
    /// Sum of node values times cell area.
    double integral() const { return sum() * grid_.cell_area(); }
    double min() const;
    double max() const;
    bool all_finite() const;

private:
    Grid2D grid_;
    std::vector<double> values_;
};

struct Offset {
    double dx = 0.0;
    double dy = 0.0;
};

/// Discrete averaging kernel. Offsets are in grid units, weights sum to one
/// and the set is symmetric under point reflection.
struct KernelMask {
    std::vector<Offset> offsets;
    std::vector<double> weights;
    bool integer_offsets = true;
    /// For masks that are outer products w(dx, dy) = g[dx + r] * g[dy + r].
    std::optional<std::vector<double>> separable_1d;

    std::size_t size() const { return weights.size(); }
    /// Largest |dx| or |dy| over all offsets, rounded up.
    int half_width() const;
    void validate() const;
};

KernelMask gaussian_kernel_mask(double tau, const Grid2D& grid, double truncation = 4.0);
KernelMask circle_mask(double tau, int samples, const Grid2D& grid);
/// Mask from explicit integer offsets and weights (validated).
KernelMask make_mask(std::vector<Offset> offsets, std::vector<double> weights);

/// Bilinear interpolation at (x, y) in grid-index units: node (ix, iy) is at (ix, iy).
double bilinear_sample(const ScalarField2D& f, double x, double y);

ScalarField2D convolve(const ScalarField2D& f, const KernelMask& mask);
/// Direct masked summation, ignoring any separable factorization.
ScalarField2D convolve_direct(const ScalarField2D& f, const KernelMask& mask);

/// Sample f at node (ix, iy) shifted by `o`.
inline double sample_offset(const ScalarField2D& f, int ix, int iy, const Offset& o, bool integer_offsets) {
    if (integer_offsets)
        return f.at_extended(ix + static_cast<int>(o.dx), iy + static_cast<int>(o.dy));
    return bilinear_sample(f, ix + o.dx, iy + o.dy);
}

/// Per-node (min, max) of f over the square window of half-width hw.
std::pair<ScalarField2D, ScalarField2D> local_range(const ScalarField2D& f, int hw);

/// Window half-width covering every node a mask sample can touch.
int mask_footprint(const KernelMask& mask);

void require_same_grid(const ScalarField2D& a, const ScalarField2D& b, const char* what);

/// Discrete L2 norm of a - b normalized by node count.
double l2_change(const ScalarField2D& a, const ScalarField2D& b);

} // namespace cmf
