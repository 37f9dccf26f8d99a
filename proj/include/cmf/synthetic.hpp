#pragma once

#include "cmf/config.hpp"
#include "cmf/field.hpp"
#include "cmf/median_filter.hpp"

namespace cmf {

/// Noise-free indicator of the union of shapes, sampled at node centers.
BinaryField rasterize_shapes(const std::vector<ShapeSpec>& shapes, const Grid2D& grid);

/// Background 0.5 - contrast/2, shapes 0.5 + contrast/2, times the bias ramp
/// 1 + bias (x + y - 1), plus Gaussian noise, clipped to [0, 1], then scaled
/// by spec.range.
ScalarField2D generate_synthetic_image(const ImageSpec& spec, const Grid2D& grid);

/// Same scene without noise or range scaling (bias still applied).
ScalarField2D clean_image(const ImageSpec& spec, const Grid2D& grid);

/// Initial level sets for the segmentation presets.
LevelSetField cone_level_set(const Grid2D& grid);
LevelSetField square_level_set(const Grid2D& grid, double cx, double cy, double half);
/// Continuous field whose 1/2 super-level set is the square: a linear ramp of
/// the signed box distance over `width`. A nonzero `jitter` adds seeded uniform
/// noise of that amplitude, kept on the same side of 1/2.
LevelSetField ramp_square_level_set(const Grid2D& grid, double cx, double cy, double half, double width,
                                    double jitter = 0.0, std::uint64_t seed = 0);
LevelSetField disk_level_set(const Grid2D& grid, double cx, double cy, double r);

double jaccard(const BinaryField& a, const BinaryField& b);
/// Nodes where the two indicators differ, as a fraction of all nodes.
double symmetric_difference_fraction(const BinaryField& a, const BinaryField& b);

} // namespace cmf
