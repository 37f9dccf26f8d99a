#pragma once

#include "cmf/energy.hpp"
#include "cmf/field.hpp"
#include "cmf/median_filter.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cmf {

/// Region means for the two-phase piecewise-constant model.
struct CVParams {
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Local intensity means, smoothed with a Gaussian of time-scale `sigma`.
struct LIFParams {
    ScalarField2D c1;
    ScalarField2D c2;
    double sigma = 0.0;
};

struct Forces {
    ScalarField2D f1;
    ScalarField2D f2;
};

class DegeneratePartition : public ConfigError {
public:
    using ConfigError::ConfigError;
};

CVParams cv_update_params(const LevelSetField& phi, const ScalarField2D& image);
Forces cv_forces(const ScalarField2D& image, const CVParams& params);

LIFParams lif_update_means(const LevelSetField& phi, const ScalarField2D& image, const KernelMask& sigma_mask);
/// F_i = G*(C_i^2) - 2 I (G*C_i) + I^2.
Forces lif_forces(const ScalarField2D& image, const LIFParams& params, const KernelMask& sigma_mask);

enum class SegmentationModel { chan_vese, lif, curvature };
std::string to_string(SegmentationModel m);
SegmentationModel parse_segmentation_model(const std::string& s);

/// Default LIF time-scale: Gaussian standard deviation of ten cells.
double default_lif_sigma(const Grid2D& grid);

/// One completed iteration, handed to SegmentationRun::observer.
struct IterationView {
    int iteration = 0; // 1-based
    const LevelSetField& previous;
    const LevelSetField& current;
    const Forces& forces; // forces used to produce `current`
    const EnergyReport& energy;
};

struct SegmentationRun {
    SolverConfig config;
    SegmentationModel model = SegmentationModel::chan_vese;
    double lif_sigma = 0.0; // 0 selects default_lif_sigma
    ScalarField2D image;
    LevelSetField phi0;

    /// Energy of phi0 with parameters fitted to phi0; empty when no iteration ran.
    std::optional<EnergyReport> initial;
    std::vector<EnergyReport> trace;
    std::vector<double> changes;
    std::vector<double> wall_ms;
    LevelSetField phi_final;
    bool converged = false;

    std::function<void(const IterationView&)> observer;

    SegmentationRun(SolverConfig cfg, ScalarField2D img, LevelSetField init)
        : config(cfg), image(std::move(img)), phi0(init), phi_final(std::move(init)) {}
};

/// Alternating parameter update / median-filter iteration.
SegmentationRun segment(SegmentationRun run);

/// Energy-reporting mask for a configuration: the filter's own mask for
/// threshold and quantile steps, the Gaussian of the same tau otherwise.
KernelMask energy_mask(const SolverConfig& config, const Grid2D& grid);

} // namespace cmf
