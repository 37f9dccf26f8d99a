#include "cmf/topopt.hpp"

#include <chrono>
#include <random>

namespace cmf {

LevelSetField random_level_set(const Grid2D& grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    ScalarField2D f(grid);
    for (double& v : f.values()) v = dist(rng);
    return LevelSetField(std::move(f));
}

TopoptRun optimize_topology(TopoptRun run) {
    run.config.validate();
    run.flow.validate();
    run.trace.clear();
    run.dissipation.clear();
    run.changes.clear();
    run.wall_ms.clear();
    run.final_state.reset();
    run.converged = false;
    run.phi_final = run.phi0;

    const Grid2D& grid = run.phi0.grid();
    const SolverConfig& cfg = run.config;
    const KernelMask mask = cfg.make_mask(grid);
    const double alpha_bar = run.flow.resolved_alpha_bar(grid);
    const double target = run.flow.beta * grid.area();
    StokesSolver solver(grid, run.flow);

    using clock = std::chrono::steady_clock;
    auto record = [&](int k, const LevelSetField& phi, const StokesState& state, const ScalarField2D& alpha,
                      double multiplier, double change, clock::time_point start) {
        const Dissipation d = dissipation_energy(state, alpha, run.flow.eta);
        EnergyReport e;
        e.fidelity = d.total();
        e.perimeter = 0.5 * interaction_energy(phi.field(), mask);
        e.total = e.fidelity + cfg.lambda_tilde * e.perimeter;
        e.volume = phi.volume();
        e.multiplier = multiplier;
        run.trace.push_back(e);
        run.dissipation.push_back(d);
        run.changes.push_back(change);
        run.wall_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - start).count());
        if (run.observer) run.observer(TopoptIterate{k, phi, state, run.trace.back()});
    };

    if (run.flow.beta >= 1.0) {
        const auto start = clock::now();
        LevelSetField fluid(ScalarField2D(grid, 1.0));
        const ScalarField2D alpha = brinkman_alpha(fluid, alpha_bar, mask);
        StokesState state = solver.solve(alpha);
        record(1, fluid, state, alpha, 0.0, l2_change(fluid.field(), run.phi0.field()), start);
        run.phi_final = std::move(fluid);
        run.final_state = std::move(state);
        run.converged = true;
        return run;
    }
    if (cfg.max_iterations == 0) return run;

    auto start = clock::now();
    LevelSetField phi = run.phi0;
    ScalarField2D alpha = brinkman_alpha(phi, alpha_bar, mask);
    StokesState state = solver.solve(alpha);
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        const Forces forces = stokes_forces(state, alpha_bar, mask);
        const ScalarField2D t = threshold_field(forces.f1, forces.f2, cfg.lambda_tilde);
        VolumeStepResult step = volume_constrained_step(phi, t, mask, target, run.volume_tol);
        const double change = l2_change(step.phi.field(), phi.field());
        phi = std::move(step.phi);
        alpha = brinkman_alpha(phi, alpha_bar, mask);
        state = solver.solve(alpha);
        record(k, phi, state, alpha, step.multiplier, change, start);
        start = clock::now();
        if (change < cfg.epsilon) {
            run.converged = true;
            break;
        }
    }
    run.phi_final = std::move(phi);
    run.final_state = std::move(state);
    return run;
}

} // namespace cmf
