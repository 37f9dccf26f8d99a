#pragma once

#include "cmf/field.hpp"

#include <array>
#include <span>
#include <string>

namespace cmf {

/// Relaxed partition: every node value lies in [0, 1].
class LevelSetField {
public:
    explicit LevelSetField(ScalarField2D field);
    const ScalarField2D& field() const { return field_; }
    const Grid2D& grid() const { return field_.grid(); }
    double volume() const { return field_.integral(); }

private:
    ScalarField2D field_;
};

/// Characteristic function: every node value is exactly 0 or 1.
class BinaryField {
public:
    explicit BinaryField(ScalarField2D field);
    const ScalarField2D& field() const { return field_; }
    const Grid2D& grid() const { return field_.grid(); }
    LevelSetField as_level_set() const { return LevelSetField(field_); }

private:
    ScalarField2D field_;
};

/// Indicator of {phi >= level}.
BinaryField threshold_indicator(const ScalarField2D& phi, double level);

enum class FilterKind { binary_td, weighted_quantile, quadratic };
enum class MaskKind { gaussian, circle };

std::string to_string(FilterKind k);
FilterKind parse_filter_kind(const std::string& s);
std::string to_string(MaskKind k);
MaskKind parse_mask_kind(const std::string& s);

struct SolverConfig {
    double tau = 1e-3;
    /// Effective fidelity weight, lambda * sqrt(pi / tau).
    double lambda_tilde = 0.6;
    /// Circle sample count for circle masks.
    int samples = 8;
    double epsilon = 1e-7;
    int max_iterations = 200;
    FilterKind filter = FilterKind::weighted_quantile;
    MaskKind mask = MaskKind::gaussian;
    double truncation = 4.0;

    void validate() const;
    /// The averaging mask used by binary_td / weighted_quantile steps.
    KernelMask make_mask(const Grid2D& grid) const;
};

/// T = 1/2 + (F1 - F2) / (2 lambda_tilde), unclamped.
ScalarField2D threshold_field(const ScalarField2D& f1, const ScalarField2D& f2, double lambda_tilde);

/// u'(x) = 1 iff (mask * u)(x) >= T(x).
BinaryField binary_td_step(const BinaryField& u, const ScalarField2D& threshold, const KernelMask& mask);

/// Reference weighted quantile: stable descending sort, first index whose
/// cumulative weight reaches T. T <= 0 selects the maximum, T > 1 the minimum.
double weighted_quantile_sorted(std::span<const double> values, std::span<const double> weights, double threshold);

struct WeightedValue {
    double value;
    double weight;
};

/// Same selection as weighted_quantile_sorted in expected linear time.
/// Reorders `items` in place.
double weighted_quantile_select(std::span<WeightedValue> items, double threshold);

LevelSetField weighted_quantile_step(const LevelSetField& phi, const ScalarField2D& threshold, const KernelMask& mask);

/// Local potential whose minimizer over [0, 1] is the quantile update:
/// sum_j w_j |xi - v_j| + (xi F1 + (1 - xi) F2) / lambda_tilde.
double pointwise_potential(double xi, std::span<const double> neighbors, std::span<const double> weights, double f1,
                           double f2, double lambda_tilde);

/// Value phi* whose super-level set {P >= phi*} covers the fraction T of the
/// circle, where P is the piecewise-quadratic interpolant of 8 equally spaced
/// samples (4 quarter-arc segments). Samples are ordered by angle 2 pi j / 8.
double quadratic_circle_quantile(const std::array<double, 8>& samples, double threshold);

/// Angular measure of {theta : P(theta) < level} for the piecewise quadratic.
double quadratic_sublevel_measure(const std::array<double, 8>& samples, double level);

LevelSetField quadratic_quantile_step(const LevelSetField& phi, const ScalarField2D& threshold, double tau);

/// Brute-force check of the quantile selection: potential at the selected
/// value minus the smallest potential on a grid of spacing `step` over the
/// neighbor range, with F1 - F2 reconstructed from T (lambda_tilde = 1).
/// Positive values mean the selection is beaten by some grid point.
double quantile_optimality_gap(std::span<const double> values, std::span<const double> weights, double threshold,
                               double step = 1e-3);

struct VolumeStepResult {
    LevelSetField phi;
    double multiplier = 0.0;
    double volume = 0.0;
    int evaluations = 0;
    /// True when the target fell inside a jump of V(multiplier) and the
    /// nodes that switch there were interpolated.
    bool blended = false;
};

/// Weighted quantile step with threshold T + multiplier, the multiplier found by
/// bisection on [-2, 2] so that |volume - target| <= tol * |Omega|.
VolumeStepResult volume_constrained_step(const LevelSetField& phi, const ScalarField2D& threshold,
                                         const KernelMask& mask, double target_volume, double tol);

} // namespace cmf
