#include "cmf/experiment.hpp"

#include "cmf/segmentation.hpp"
#include "cmf/synthetic.hpp"
#include "cmf/topopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <set>
#include <sstream>

namespace cmf {

std::pair<std::vector<int>, int> fluid_components(const ScalarField2D& phi) {
    const int nx = phi.nx(), ny = phi.ny();
    std::vector<int> label(phi.size(), -1);
    int count = 0;
    std::vector<int> stack;
    for (int start = 0; start < static_cast<int>(phi.size()); ++start) {
        if (label[start] >= 0 || phi.values()[start] < 0.5) continue;
        label[start] = count;
        stack.push_back(start);
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            const int ix = c % nx, iy = c / nx;
            const int nb[4][2] = {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}};
            for (const auto& n : nb) {
                if (n[0] < 0 || n[0] >= nx || n[1] < 0 || n[1] >= ny) continue;
                const int k = n[1] * nx + n[0];
                if (label[k] < 0 && phi.values()[k] >= 0.5) {
                    label[k] = count;
                    stack.push_back(k);
                }
            }
        }
        ++count;
    }
    return {std::move(label), count};
}

bool openings_connected(const ScalarField2D& phi, const FlowCase& flow) {
    const auto [label, count] = fluid_components(phi);
    const Grid2D& g = phi.grid();
    auto touching = [&](const Opening& o) {
        std::set<int> comps;
        const int n = (o.edge == Edge::left || o.edge == Edge::right) ? g.ny : g.nx;
        for (int k = 0; k < n; ++k) {
            const double pos = (k + 0.5) * g.h;
            if (std::abs(pos - o.center) >= 0.5 * o.height) continue;
            int ix = 0, iy = 0;
            switch (o.edge) {
            case Edge::left: ix = 0, iy = k; break;
            case Edge::right: ix = g.nx - 1, iy = k; break;
            case Edge::bottom: ix = k, iy = 0; break;
            case Edge::top: ix = k, iy = g.ny - 1; break;
            }
            const int l = label[phi.index(ix, iy)];
            if (l >= 0) comps.insert(l);
        }
        return comps;
    };
    std::vector<std::set<int>> inlets, outlets;
    for (const auto& o : flow.openings) (o.kind == OpeningKind::inlet ? inlets : outlets).push_back(touching(o));
    auto linked = [](const std::set<int>& a, const std::vector<std::set<int>>& others) {
        for (const auto& b : others)
            for (int c : a)
                if (b.count(c)) return true;
        return false;
    };
    for (const auto& s : inlets)
        if (!linked(s, outlets)) return false;
    for (const auto& s : outlets)
        if (!linked(s, inlets)) return false;
    return !inlets.empty() && !outlets.empty();
}

double binary_fraction(const ScalarField2D& phi, double tol) {
    std::size_t n = 0;
    for (double v : phi.values()) n += std::min(v, 1.0 - v) <= tol;
    return static_cast<double>(n) / static_cast<double>(phi.size());
}

namespace {

std::string tau_label(double tau) {
    std::ostringstream o;
    o << std::setprecision(3) << tau;
    return o.str();
}

std::string padded(int k) {
    std::ostringstream o;
    o << std::setw(4) << std::setfill('0') << k;
    return o.str();
}

LevelSetField initial_level_set(const ExperimentConfig& c, const Grid2D& grid) {
    const auto& p = c.init_params;
    auto need = [&](std::size_t n) {
        if (p.size() < n)
            throw ConfigError("init '" + c.init + "' needs " + std::to_string(n) + " values in init.params");
    };
    if (c.init == "cone") return cone_level_set(grid);
    if (c.init == "square") {
        need(3);
        return square_level_set(grid, p[0], p[1], p[2]);
    }
    if (c.init == "ramp_square") {
        need(4);
        return ramp_square_level_set(grid, p[0], p[1], p[2], p[3], p.size() > 4 ? p[4] : 0.0, c.seed);
    }
    if (c.init == "disk") {
        need(3);
        return disk_level_set(grid, p[0], p[1], p[2]);
    }
    if (c.init == "random") return random_level_set(grid, c.seed);
    if (c.init == "random_symmetric") {
        ScalarField2D f = random_level_set(grid, c.seed).field();
        for (int iy = 0; iy < grid.ny / 2; ++iy)
            for (int ix = 0; ix < grid.nx; ++ix) f(ix, grid.ny - 1 - iy) = f(ix, iy);
        return LevelSetField(std::move(f));
    }
    throw ConfigError("unknown init '" + c.init + "'");
}

bool is_checkpoint(const ExperimentConfig& c, int k) {
    if (c.snapshot_every > 0 && k % c.snapshot_every == 0) return true;
    return std::find(c.snapshots.begin(), c.snapshots.end(), k) != c.snapshots.end();
}

ArmResult run_segmentation_arm(const ExperimentConfig& c, const SolverConfig& solver, const ScalarField2D& image,
                               const LevelSetField& phi0, const BinaryField& truth, std::string name) {
    SegmentationRun run(solver, image, phi0);
    run.model = c.model;
    run.lif_sigma = c.lif_sigma;
    ArmResult arm{std::move(name), solver.filter, solver.tau, {}, phi0, phi0, false, {}, {}, {}};
    if (is_checkpoint(c, 0)) arm.checkpoints.emplace_back(0, phi0.field());
    run.observer = [&](const IterationView& v) {
        if (is_checkpoint(c, v.iteration)) arm.checkpoints.emplace_back(v.iteration, v.current.field());
    };
    run = segment(std::move(run));

    if (run.initial) arm.rows.push_back(make_row(0, *run.initial, 0.0, 0.0));
    for (std::size_t k = 0; k < run.trace.size(); ++k)
        arm.rows.push_back(make_row(static_cast<int>(k + 1), run.trace[k], run.changes[k], run.wall_ms[k]));
    arm.phi_final = run.phi_final;
    arm.converged = run.converged;

    const BinaryField final_mask = threshold_indicator(arm.phi_final.field(), 0.5);
    const auto hist = histogram(arm.phi_final.field(), 64);
    arm.metrics["iterations"] = static_cast<double>(run.trace.size());
    arm.metrics["converged"] = run.converged ? 1.0 : 0.0;
    arm.metrics["jaccard_to_truth"] = jaccard(final_mask, truth);
    arm.metrics["symdiff_to_initial"] = symmetric_difference_fraction(final_mask, threshold_indicator(phi0.field(), 0.5));
    arm.metrics["binary_fraction"] = binary_fraction(arm.phi_final.field());
    arm.metrics["extreme_bin_mass"] =
        static_cast<double>(hist.front() + hist.back()) / static_cast<double>(arm.phi_final.field().size());
    return arm;
}

ArmResult run_topopt_arm(const ExperimentConfig& c, const Grid2D& grid) {
    const LevelSetField phi0 = initial_level_set(c, grid);
    TopoptRun run(c.solver, c.flow, phi0);
    ArmResult arm{"main", c.solver.filter, c.solver.tau, {}, phi0, phi0, false, {}, {}, {}};
    if (is_checkpoint(c, 0)) arm.checkpoints.emplace_back(0, phi0.field());
    double max_asym = 0.0;
    run.observer = [&](const TopoptIterate& it) {
        if (is_checkpoint(c, it.iteration)) arm.checkpoints.emplace_back(it.iteration, it.phi.field());
        const ScalarField2D& f = it.phi.field();
        for (int iy = 0; iy < grid.ny / 2; ++iy)
            for (int ix = 0; ix < grid.nx; ++ix)
                max_asym = std::max(max_asym, std::abs(f(ix, iy) - f(ix, grid.ny - 1 - iy)));
    };
    run = optimize_topology(std::move(run));

    for (std::size_t k = 0; k < run.trace.size(); ++k)
        arm.rows.push_back(make_row(static_cast<int>(k + 1), run.trace[k], run.changes[k], run.wall_ms[k]));
    arm.phi_final = run.phi_final;
    arm.converged = run.converged;
    arm.flow_state = run.final_state;

    const ScalarField2D& f = arm.phi_final.field();
    double top = 0.0, bottom = 0.0;
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) (2 * iy < grid.ny ? bottom : top) += f(ix, iy);
    arm.metrics["iterations"] = static_cast<double>(run.trace.size());
    arm.metrics["converged"] = run.converged ? 1.0 : 0.0;
    arm.metrics["fluid_components"] = fluid_components(f).second;
    arm.metrics["openings_connected"] = openings_connected(f, c.flow) ? 1.0 : 0.0;
    arm.metrics["volume_asymmetry"] = std::abs(top - bottom) / std::max(top + bottom, 1e-300);
    arm.metrics["max_mirror_difference"] = max_asym;
    arm.metrics["binary_fraction"] = binary_fraction(f);
    if (!run.dissipation.empty()) {
        arm.metrics["dissipation"] = run.dissipation.back().total();
        arm.metrics["dissipation_viscous"] = run.dissipation.back().viscous;
    }
    double worst_volume = 0.0;
    for (const auto& e : run.trace) worst_volume = std::max(worst_volume, std::abs(e.volume - c.flow.beta * grid.area()));
    arm.metrics["max_volume_error"] = worst_volume;

    if (run.final_state) {
        const double abar = c.flow.resolved_alpha_bar(grid);
        const KernelMask mask = c.solver.make_mask(grid);
        const ScalarField2D alpha = brinkman_alpha(arm.phi_final, abar, mask);
        const StokesState& s = *run.final_state;
        double worst = 0.0;
        for (int iy = 0; iy < grid.ny; ++iy)
            for (int ix = 0; ix < grid.nx; ++ix) {
                if (alpha(ix, iy) < 0.9 * abar) continue;
                const double u = 0.5 * (s.u(ix, iy) + s.u(ix + 1, iy));
                const double v = 0.5 * (s.v(ix, iy) + s.v(ix, iy + 1));
                worst = std::max(worst, std::hypot(u, v));
            }
        arm.metrics["solid_speed_ratio"] = worst * std::sqrt(abar) / c.flow.velocity_scale();
    }
    return arm;
}

void write_arm(const std::string& dir, const ArmResult& arm) {
    write_trace_csv(dir + "/trace.csv", arm.rows);
    write_pgm(dir + "/phi0.pgm", arm.phi0.field());
    write_pgm(dir + "/final.pgm", arm.phi_final.field());
    write_pgm(dir + "/final_mask.pgm", threshold_indicator(arm.phi_final.field(), 0.5).field());
    write_histogram_csv(dir + "/histogram.csv", arm.phi_final.field());
    for (const auto& [k, f] : arm.checkpoints) {
        write_pgm(dir + "/phi_k" + padded(k) + ".pgm", f);
        write_histogram_csv(dir + "/histogram_k" + padded(k) + ".csv", f);
    }
    std::ostringstream m;
    m << std::setprecision(17);
    for (const auto& [k, v] : arm.metrics) m << k << " = " << v << '\n';
    write_text(dir + "/metrics.txt", m.str());
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& c, bool write_outputs) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result{c, {}, {}, {}, 0.0};
    const Grid2D grid = unit_grid(c.nx, c.ny);
    const std::string& out = c.output_dir;
    if (write_outputs) {
        std::filesystem::create_directories(out);
        write_manifest(out + "/manifest.txt", c.resolved);
    }

    const bool stokes = c.preset == Preset::stokes_contraction || c.preset == Preset::stokes_double_pipe ||
                        (c.preset == Preset::custom && !c.flow.openings.empty());
    if (stokes) {
        result.arms.push_back(run_topopt_arm(c, grid));
        if (write_outputs) {
            const ArmResult& arm = result.arms.front();
            write_arm(out, arm);
            if (arm.flow_state) {
                const StokesState& s = *arm.flow_state;
                ScalarField2D speed(grid);
                double vmax = 0.0;
                for (int iy = 0; iy < grid.ny; ++iy)
                    for (int ix = 0; ix < grid.nx; ++ix) {
                        speed(ix, iy) = std::hypot(0.5 * (s.u(ix, iy) + s.u(ix + 1, iy)), 0.5 * (s.v(ix, iy) + s.v(ix, iy + 1)));
                        vmax = std::max(vmax, speed(ix, iy));
                    }
                if (vmax > 0.0)
                    for (double& v : speed.values()) v /= vmax;
                write_pgm(out + "/speed.pgm", speed);
            }
        }
    } else {
        const ScalarField2D image = generate_synthetic_image(c.image, grid);
        const BinaryField truth = rasterize_shapes(c.image.shapes, grid);
        result.image = image;
        result.truth = truth;
        if (write_outputs) {
            write_pgm(out + "/image.pgm", image, c.image.range);
            write_pgm(out + "/truth.pgm", truth.field());
        }
        if (c.preset == Preset::pinning_compare) {
            if (c.init_params.size() < 4)
                throw ConfigError("pinning_compare needs init.params = cx,cy,half,ramp_width");
            const auto& p = c.init_params;
            const LevelSetField square = square_level_set(grid, p[0], p[1], p[2]);
            const LevelSetField ramp =
                ramp_square_level_set(grid, p[0], p[1], p[2], p[3], p.size() > 4 ? p[4] : 0.0, c.seed);
            std::ostringstream summary;
            summary << "method,tau,iterations,converged,symdiff_to_initial,jaccard_to_truth\n" << std::setprecision(10);
            for (double tau : c.tau_ladder) {
                for (FilterKind kind : {FilterKind::binary_td, FilterKind::weighted_quantile}) {
                    SolverConfig s = c.solver;
                    s.tau = tau;
                    s.filter = kind;
                    const std::string name = to_string(kind) + "_tau" + tau_label(tau);
                    ArmResult arm = run_segmentation_arm(c, s, image,
                                                         kind == FilterKind::binary_td ? square : ramp, truth, name);
                    summary << to_string(kind) << ',' << tau << ',' << arm.metrics["iterations"] << ','
                            << arm.metrics["converged"] << ',' << arm.metrics["symdiff_to_initial"] << ','
                            << arm.metrics["jaccard_to_truth"] << '\n';
                    if (write_outputs) write_arm(out + "/" + name, arm);
                    result.arms.push_back(std::move(arm));
                }
            }
            if (write_outputs) write_text(out + "/summary.csv", summary.str());
        } else {
            result.arms.push_back(run_segmentation_arm(c, c.solver, image, initial_level_set(c, grid), truth, "main"));
            if (write_outputs) write_arm(out, result.arms.front());
        }
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace cmf
