#pragma once

#include "cmf/config.hpp"
#include "cmf/io.hpp"
#include "cmf/median_filter.hpp"
#include "cmf/stokes.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cmf {

struct ArmResult {
    std::string name;
    FilterKind filter = FilterKind::weighted_quantile;
    double tau = 0.0;
    std::vector<TraceRow> rows;
    LevelSetField phi0;
    LevelSetField phi_final;
    bool converged = false;
    std::vector<std::pair<int, ScalarField2D>> checkpoints;
    std::map<std::string, double> metrics;
    std::optional<StokesState> flow_state;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::optional<ScalarField2D> image;
    std::optional<BinaryField> truth;
    std::vector<ArmResult> arms;
    double seconds = 0.0;
};

/// Runs a resolved configuration. With `write_outputs`, creates
/// config.output_dir and writes traces, snapshots, histograms, a manifest and
/// per-preset summaries there.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs = true);

/// Labels 4-connected components of {phi >= 1/2}; returns the label field
/// (-1 for solid) and the component count.
std::pair<std::vector<int>, int> fluid_components(const ScalarField2D& phi);

/// True when every inlet shares a fluid component with some outlet and every
/// outlet with some inlet.
bool openings_connected(const ScalarField2D& phi, const FlowCase& flow);

/// Fraction of nodes with min(phi, 1 - phi) <= tol.
double binary_fraction(const ScalarField2D& phi, double tol = 0.05);

} // namespace cmf
