#pragma once

#include "cmf/field.hpp"
#include "cmf/median_filter.hpp"
#include "cmf/segmentation.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cmf {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Edge { left, right, bottom, top };
enum class OpeningKind { inlet, outlet };

std::string to_string(Edge e);
Edge parse_edge(const std::string& s);

/// Parabolic normal-velocity profile on a boundary segment. `center` and
/// `height` are in domain units along the edge; `peak` is the centerline speed.
struct Opening {
    Edge edge = Edge::left;
    OpeningKind kind = OpeningKind::inlet;
    double center = 0.5;
    double height = 1.0;
    double peak = 1.0;

    double flux() const { return 2.0 / 3.0 * peak * height; }
    /// Normal speed at position s along the edge (zero outside the segment).
    double speed(double s) const;
};

struct FlowCase {
    double eta = 1.0;
    /// Maximum inverse permeability; 0 selects 2500 / h.
    double alpha_bar = 0.0;
    /// Target fluid fraction.
    double beta = 0.5;
    /// Walls everywhere except these openings.
    std::vector<Opening> openings;
    /// Optional cell-centered body force (fx, fy); zero when absent.
    std::optional<std::pair<ScalarField2D, ScalarField2D>> body_force;

    void validate() const;
    double inflow() const;
    double outflow() const;
    double resolved_alpha_bar(const Grid2D& grid) const { return alpha_bar > 0.0 ? alpha_bar : 2500.0 / grid.h; }
    /// Largest opening peak speed, the velocity scale for residuals.
    double velocity_scale() const;
};

/// Staggered velocities and cell pressures. vx(i, j) lives on the vertical face
/// at x = i h, i in [0, nx]; vy(i, j) on the horizontal face at y = j h.
struct StokesState {
    Grid2D grid;
    std::vector<double> vx; // (nx + 1) * ny
    std::vector<double> vy; // nx * (ny + 1)
    ScalarField2D p;
    double momentum_residual = 0.0;
    double continuity_residual = 0.0;

    explicit StokesState(const Grid2D& g);
    double& u(int i, int j) { return vx[static_cast<std::size_t>(j) * (grid.nx + 1) + i]; }
    double u(int i, int j) const { return vx[static_cast<std::size_t>(j) * (grid.nx + 1) + i]; }
    double& v(int i, int j) { return vy[static_cast<std::size_t>(j) * grid.nx + i]; }
    double v(int i, int j) const { return vy[static_cast<std::size_t>(j) * grid.nx + i]; }

    /// Net outward flux of cell (i, j) divided by h.
    double divergence(int i, int j) const;
    double max_divergence() const;
    /// Per cell: mean of squared face velocities per direction,
    /// (u_L^2 + u_R^2)/2 + (v_B^2 + v_T^2)/2.
    ScalarField2D speed_squared() const;
};

/// alpha = alpha_bar * (mask * (1 - phi)).
ScalarField2D brinkman_alpha(const LevelSetField& phi, double alpha_bar, const KernelMask& mask);

/// Brinkman-penalized Stokes on the MAC grid, reusing the sparsity analysis
/// across solves with different alpha.
class StokesSolver {
public:
    StokesSolver(const Grid2D& grid, FlowCase flow);
    ~StokesSolver();
    StokesSolver(StokesSolver&&) noexcept;
    StokesSolver& operator=(StokesSolver&&) noexcept;

    StokesState solve(const ScalarField2D& alpha);
    const FlowCase& flow() const { return flow_; }

private:
    struct Impl;
    Grid2D grid_;
    FlowCase flow_;
    std::unique_ptr<Impl> impl_;
};

StokesState solve_stokes(const ScalarField2D& alpha, const FlowCase& flow);

/// F1 = 0, F2 = alpha_bar/2 * mask * |v|^2 with |v|^2 from speed_squared().
Forces stokes_forces(const StokesState& state, double alpha_bar, const KernelMask& mask);

struct Dissipation {
    double viscous = 0.0;
    double brinkman = 0.0;
    double total() const { return viscous + brinkman; }
};

/// Discrete (eta/2) sum |grad v|^2 + (1/2) sum alpha |v|^2, times h^2: the
/// functional the discrete Stokes solution minimizes.
Dissipation dissipation_energy(const StokesState& state, const ScalarField2D& alpha, double eta);

} // namespace cmf
