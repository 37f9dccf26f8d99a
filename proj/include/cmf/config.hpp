#pragma once

#include "cmf/median_filter.hpp"
#include "cmf/segmentation.hpp"
#include "cmf/stokes.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cmf {

/// Flat key/value settings in TOML syntax. `[section]` headers prefix the
/// keys that follow (`section.key`).
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);
/// Applies `key=value` overrides, as given on the command line.
void apply_override(ConfigMap& map, const std::string& assignment);

enum class Preset { pinning_compare, sharpness, quadratic_demo, lif_demo, stokes_contraction, stokes_double_pipe, custom };

std::string to_string(Preset p);
Preset parse_preset(const std::string& s);
std::vector<std::string> preset_names();

struct ShapeSpec {
    enum class Kind { disk, rectangle, annulus };
    Kind kind = Kind::disk;
    double cx = 0.5;
    double cy = 0.5;
    /// disk and annulus: outer radius; rectangle: half width.
    double a = 0.1;
    /// rectangle: half height; annulus: inner radius.
    double b = 0.0;

    bool contains(double x, double y) const;
    std::string describe() const;
};

/// Parses "disk(cx,cy,r); rect(cx,cy,hw,hh); annulus(cx,cy,ro,ri)".
std::vector<ShapeSpec> parse_shapes(const std::string& s);
std::string format_shapes(const std::vector<ShapeSpec>& shapes);

struct ImageSpec {
    std::vector<ShapeSpec> shapes;
    double contrast = 1.0;
    double noise_sigma = 0.0;
    /// Amplitude of the multiplicative illumination ramp, 0 for none.
    double bias = 0.0;
    /// Intensity of a full-contrast foreground pixel, e.g. 255 for 8-bit data.
    double range = 1.0;
    std::optional<std::uint64_t> seed;
};

/// Parses "left:inlet:center:height:peak; ...".
std::vector<Opening> parse_openings(const std::string& s);
std::string format_openings(const std::vector<Opening>& openings);

struct ExperimentConfig {
    Preset preset = Preset::custom;
    int nx = 128;
    int ny = 128;
    SolverConfig solver;
    SegmentationModel model = SegmentationModel::chan_vese;
    double lif_sigma = 0.0;
    ImageSpec image;
    /// Initial level set: cone, square, ramp_square, disk, random.
    std::string init = "cone";
    /// Center x, center y, size (half width or radius), ramp width.
    std::vector<double> init_params;
    FlowCase flow;
    std::uint64_t seed = 1;
    std::vector<double> tau_ladder;
    std::vector<int> snapshots;
    int snapshot_every = 0;
    std::string output_dir = "out";
    int threads = 0;

    /// Every resolved setting, in the key/value form accepted on input.
    ConfigMap resolved;
};

/// Default settings of a preset as key/value pairs.
ConfigMap preset_defaults(Preset p);

/// Merges preset defaults, file settings and overrides, then validates.
/// Unknown keys are rejected.
ExperimentConfig resolve_config(const ConfigMap& settings);

} // namespace cmf
