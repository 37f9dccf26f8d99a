#pragma once

#include "cmf/energy.hpp"
#include "cmf/median_filter.hpp"
#include "cmf/stokes.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace cmf {

/// Uniform random node values in [0, 1].
LevelSetField random_level_set(const Grid2D& grid, std::uint64_t seed);

struct TopoptIterate {
    int iteration = 0;
    const LevelSetField& phi;
    const StokesState& state;
    const EnergyReport& energy;
};

/// Fluid topology optimization: phi = 1 is fluid. Each iteration solves the
/// Brinkman-Stokes problem for the current phi and takes one volume-constrained
/// quantile step with F1 = 0 and F2 from the velocity.
///
/// Trace row k describes phi^k (k >= 1, the first volume-feasible iterate):
/// fidelity is the dissipation of the solved flow, perimeter half the mask
/// interaction, total = fidelity + lambda_tilde * perimeter, multiplier the
/// one used to produce phi^k.
struct TopoptRun {
    SolverConfig config;
    FlowCase flow;
    LevelSetField phi0;
    double volume_tol = 1e-6;

    std::vector<EnergyReport> trace;
    std::vector<Dissipation> dissipation;
    std::vector<double> changes;
    std::vector<double> wall_ms;
    LevelSetField phi_final;
    std::optional<StokesState> final_state;
    bool converged = false;

    std::function<void(const TopoptIterate&)> observer;

    TopoptRun(SolverConfig cfg, FlowCase f, LevelSetField init)
        : config(cfg), flow(std::move(f)), phi0(init), phi_final(std::move(init)) {}
};

TopoptRun optimize_topology(TopoptRun run);

} // namespace cmf
