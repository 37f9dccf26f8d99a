#include "cmf/segmentation.hpp"

#include <chrono>
#include <cmath>

namespace cmf {

CVParams cv_update_params(const LevelSetField& phi, const ScalarField2D& image) {
    const ScalarField2D& p = phi.field();
    require_same_grid(p, image, "cv_update_params");
    double in_mass = 0.0, in_sum = 0.0, out_mass = 0.0, out_sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double w = p.values()[i];
        const double v = image.values()[i];
        in_mass += w;
        in_sum += w * v;
        out_mass += 1.0 - w;
        out_sum += (1.0 - w) * v;
    }
    if (!(in_mass > 0.0) || !(out_mass > 0.0)) throw DegeneratePartition("degenerate partition");
    return {in_sum / in_mass, out_sum / out_mass};
}

Forces cv_forces(const ScalarField2D& image, const CVParams& params) {
    Forces f{ScalarField2D(image.grid()), ScalarField2D(image.grid())};
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double v = image.values()[i];
        f.f1.values()[i] = (v - params.c1) * (v - params.c1);
        f.f2.values()[i] = (v - params.c2) * (v - params.c2);
    }
    return f;
}

LIFParams lif_update_means(const LevelSetField& phi, const ScalarField2D& image, const KernelMask& sigma_mask) {
    const ScalarField2D& p = phi.field();
    require_same_grid(p, image, "lif_update_means");
    const Grid2D& grid = p.grid();
    ScalarField2D pi(grid), q(grid), qi(grid);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double w = p.values()[i];
        const double v = image.values()[i];
        pi.values()[i] = w * v;
        q.values()[i] = 1.0 - w;
        qi.values()[i] = (1.0 - w) * v;
    }
    const ScalarField2D num1 = convolve(pi, sigma_mask);
    const ScalarField2D den1 = convolve(p, sigma_mask);
    const ScalarField2D num2 = convolve(qi, sigma_mask);
    const ScalarField2D den2 = convolve(q, sigma_mask);
    const double fallback = image.sum() / static_cast<double>(image.size());

    LIFParams out{ScalarField2D(grid), ScalarField2D(grid), 0.0};
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d1 = den1.values()[i];
        const double d2 = den2.values()[i];
        out.c1.values()[i] = d1 >= 1e-12 ? num1.values()[i] / d1 : fallback;
        out.c2.values()[i] = d2 >= 1e-12 ? num2.values()[i] / d2 : fallback;
    }
    return out;
}

Forces lif_forces(const ScalarField2D& image, const LIFParams& params, const KernelMask& sigma_mask) {
    const Grid2D& grid = image.grid();
    auto one = [&](const ScalarField2D& c) {
        ScalarField2D sq(grid);
        for (std::size_t i = 0; i < c.size(); ++i) sq.values()[i] = c.values()[i] * c.values()[i];
        const ScalarField2D g_sq = convolve(sq, sigma_mask);
        const ScalarField2D g_c = convolve(c, sigma_mask);
        ScalarField2D f(grid);
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double v = image.values()[i];
            f.values()[i] = g_sq.values()[i] - 2.0 * v * g_c.values()[i] + v * v;
        }
        return f;
    };
    return {one(params.c1), one(params.c2)};
}

std::string to_string(SegmentationModel m) {
    switch (m) {
    case SegmentationModel::chan_vese: return "chan_vese";
    case SegmentationModel::lif: return "lif";
    case SegmentationModel::curvature: return "curvature";
    }
    return "?";
}

SegmentationModel parse_segmentation_model(const std::string& s) {
    if (s == "chan_vese") return SegmentationModel::chan_vese;
    if (s == "lif") return SegmentationModel::lif;
    if (s == "curvature") return SegmentationModel::curvature;
    throw ConfigError("unknown segmentation model '" + s + "'");
}

double default_lif_sigma(const Grid2D& grid) {
    const double stddev = 10.0 * grid.h;
    return 0.5 * stddev * stddev;
}

KernelMask energy_mask(const SolverConfig& config, const Grid2D& grid) {
    if (config.filter == FilterKind::quadratic) return gaussian_kernel_mask(config.tau, grid, config.truncation);
    return config.make_mask(grid);
}

namespace {

// Parameter fit and forces for the current partition. CV keeps the previous
// means when a region empties.
class ForceModel {
public:
    ForceModel(const SegmentationRun& run)
        : model_(run.model), image_(run.image) {
        if (model_ == SegmentationModel::lif) {
            sigma_ = run.lif_sigma > 0.0 ? run.lif_sigma : default_lif_sigma(image_.grid());
            sigma_mask_ = gaussian_kernel_mask(sigma_, image_.grid(), run.config.truncation);
        }
    }

    Forces update(const LevelSetField& phi) {
        switch (model_) {
        case SegmentationModel::chan_vese:
            try {
                cv_ = cv_update_params(phi, image_);
            } catch (const DegeneratePartition&) {
                if (!cv_) throw;
            }
            return cv_forces(image_, *cv_);
        case SegmentationModel::lif: {
            LIFParams p = lif_update_means(phi, image_, *sigma_mask_);
            p.sigma = sigma_;
            return lif_forces(image_, p, *sigma_mask_);
        }
        case SegmentationModel::curvature:
            break;
        }
        return {ScalarField2D(image_.grid()), ScalarField2D(image_.grid())};
    }

private:
    SegmentationModel model_;
    const ScalarField2D& image_;
    double sigma_ = 0.0;
    std::optional<KernelMask> sigma_mask_;
    std::optional<CVParams> cv_;
};

EnergyReport evaluate(const LevelSetField& phi, const Forces& forces, const SolverConfig& cfg, const KernelMask& mask) {
    return relaxed_energy(phi, forces.f1, forces.f2, cfg.lambda_tilde, mask).weighted(cfg.lambda_tilde, phi.volume());
}

} // namespace

SegmentationRun segment(SegmentationRun run) {
    run.config.validate();
    require_same_grid(run.image, run.phi0.field(), "segment");
    run.trace.clear();
    run.changes.clear();
    run.wall_ms.clear();
    run.initial.reset();
    run.converged = false;
    run.phi_final = run.phi0;
    if (run.config.max_iterations == 0) return run;

    const Grid2D& grid = run.image.grid();
    const SolverConfig& cfg = run.config;
    const KernelMask mask = cfg.make_mask(grid);
    const KernelMask emask = energy_mask(cfg, grid);
    ForceModel model(run);

    LevelSetField phi = cfg.filter == FilterKind::binary_td ? threshold_indicator(run.phi0.field(), 0.5).as_level_set()
                                                            : run.phi0;
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        const auto start = std::chrono::steady_clock::now();
        const Forces forces = model.update(phi);
        if (k == 1) run.initial = evaluate(phi, forces, cfg, emask);
        const ScalarField2D t = threshold_field(forces.f1, forces.f2, cfg.lambda_tilde);

        LevelSetField next = [&] {
            switch (cfg.filter) {
            case FilterKind::binary_td:
                return binary_td_step(BinaryField(phi.field()), t, mask).as_level_set();
            case FilterKind::quadratic:
                return quadratic_quantile_step(phi, t, cfg.tau);
            case FilterKind::weighted_quantile:
                break;
            }
            return weighted_quantile_step(phi, t, mask);
        }();

        const EnergyReport energy = evaluate(next, forces, cfg, emask);
        const double change = l2_change(next.field(), phi.field());
        const auto stop = std::chrono::steady_clock::now();
        run.trace.push_back(energy);
        run.changes.push_back(change);
        run.wall_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        if (run.observer) run.observer(IterationView{k, phi, next, forces, energy});
        phi = std::move(next);
        if (change < cfg.epsilon) {
            run.converged = true;
            break;
        }
    }
    run.phi_final = std::move(phi);
    return run;
}

} // namespace cmf
