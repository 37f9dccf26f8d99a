#include "cmf/median_filter.hpp"

#include "cmf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace cmf {

LevelSetField::LevelSetField(ScalarField2D field) : field_(std::move(field)) {
    for (double v : field_.values())
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("level-set values must lie in [0, 1]");
}

BinaryField::BinaryField(ScalarField2D field) : field_(std::move(field)) {
    for (double v : field_.values())
        if (v != 0.0 && v != 1.0) throw ConfigError("binary field values must be 0 or 1");
}

BinaryField threshold_indicator(const ScalarField2D& phi, double level) {
    ScalarField2D u(phi.grid());
    for (std::size_t i = 0; i < phi.size(); ++i) u.values()[i] = phi.values()[i] >= level ? 1.0 : 0.0;
    return BinaryField(std::move(u));
}

std::string to_string(FilterKind k) {
    switch (k) {
    case FilterKind::binary_td: return "binary_td";
    case FilterKind::weighted_quantile: return "weighted_quantile";
    case FilterKind::quadratic: return "quadratic";
    }
    return "?";
}

FilterKind parse_filter_kind(const std::string& s) {
    if (s == "binary_td") return FilterKind::binary_td;
    if (s == "weighted_quantile") return FilterKind::weighted_quantile;
    if (s == "quadratic") return FilterKind::quadratic;
    throw ConfigError("unknown filter kind '" + s + "'");
}

std::string to_string(MaskKind k) { return k == MaskKind::gaussian ? "gaussian" : "circle"; }

MaskKind parse_mask_kind(const std::string& s) {
    if (s == "gaussian") return MaskKind::gaussian;
    if (s == "circle") return MaskKind::circle;
    throw ConfigError("unknown mask kind '" + s + "'");
}

void SolverConfig::validate() const {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(lambda_tilde > 0.0)) throw ConfigError("lambda_tilde must be positive");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
}

KernelMask SolverConfig::make_mask(const Grid2D& grid) const {
    if (mask == MaskKind::circle) return circle_mask(tau, samples, grid);
    return gaussian_kernel_mask(tau, grid, truncation);
}

ScalarField2D threshold_field(const ScalarField2D& f1, const ScalarField2D& f2, double lambda_tilde) {
    require_same_grid(f1, f2, "threshold_field");
    ScalarField2D t(f1.grid());
    const double scale = 1.0 / (2.0 * lambda_tilde);
    for (std::size_t i = 0; i < t.size(); ++i) t.values()[i] = 0.5 + (f1.values()[i] - f2.values()[i]) * scale;
    return t;
}

BinaryField binary_td_step(const BinaryField& u, const ScalarField2D& threshold, const KernelMask& mask) {
    require_same_grid(u.field(), threshold, "binary_td_step");
    const ScalarField2D smoothed = convolve(u.field(), mask);
    ScalarField2D out(u.grid());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values()[i] = smoothed.values()[i] >= threshold.values()[i] ? 1.0 : 0.0;
    return BinaryField(std::move(out));
}

double weighted_quantile_sorted(std::span<const double> values, std::span<const double> weights, double threshold) {
    if (values.empty() || values.size() != weights.size())
        throw ConfigError("weighted quantile: values and weights differ in length");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    if (threshold <= 0.0) return values[order.front()];
    if (threshold > 1.0) return values[order.back()];
    double cumulative = 0.0;
    for (std::size_t m = 0; m < order.size(); ++m) {
        cumulative += weights[order[m]];
        if (cumulative >= threshold) return values[order[m]];
    }
    return values[order.back()];
}

namespace {

// Walks a short range sorted in descending order.
double select_small(std::span<WeightedValue> items, double accumulated, double threshold) {
    std::sort(items.begin(), items.end(), [](const WeightedValue& a, const WeightedValue& b) { return a.value > b.value; });
    for (const auto& it : items) {
        accumulated += it.weight;
        if (accumulated >= threshold) return it.value;
    }
    return items.back().value;
}

} // namespace

double weighted_quantile_select(std::span<WeightedValue> items, double threshold) {
    if (items.empty()) throw ConfigError("weighted quantile: empty neighborhood");
    if (threshold <= 0.0 || threshold > 1.0) {
        auto [lo, hi] = std::minmax_element(items.begin(), items.end(),
                                            [](const WeightedValue& a, const WeightedValue& b) { return a.value < b.value; });
        return threshold <= 0.0 ? hi->value : lo->value;
    }
    std::size_t lo = 0;
    std::size_t hi = items.size();
    double accumulated = 0.0; // weight of everything known to exceed items[lo, hi)
    double last = items.front().value;
    while (hi - lo > 16) {
        const double a = items[lo].value;
        const double b = items[lo + (hi - lo) / 2].value;
        const double c = items[hi - 1].value;
        const double pivot = std::max(std::min(a, b), std::min(std::max(a, b), c));
        // three-way partition into [greater | equal | less]
        std::size_t gt = lo, i = lo, lt = hi;
        double w_gt = 0.0, w_eq = 0.0;
        while (i < lt) {
            const double v = items[i].value;
            if (v > pivot) {
                w_gt += items[i].weight;
                std::swap(items[gt++], items[i++]);
            } else if (v < pivot) {
                std::swap(items[i], items[--lt]);
            } else {
                w_eq += items[i].weight;
                ++i;
            }
        }
        if (accumulated + w_gt >= threshold) {
            hi = gt;
        } else if (accumulated + w_gt + w_eq >= threshold) {
            return pivot;
        } else {
            accumulated += w_gt + w_eq;
            last = pivot;
            lo = lt;
            if (lo == hi) return last;
        }
    }
    if (lo == hi) return last;
    return select_small(items.subspan(lo, hi - lo), accumulated, threshold);
}

namespace {

void gather(const ScalarField2D& f, int ix, int iy, const KernelMask& mask, std::vector<WeightedValue>& out) {
    out.resize(mask.size());
    for (std::size_t j = 0; j < mask.size(); ++j)
        out[j] = {sample_offset(f, ix, iy, mask.offsets[j], mask.integer_offsets), mask.weights[j]};
}

} // namespace

LevelSetField weighted_quantile_step(const LevelSetField& phi, const ScalarField2D& threshold, const KernelMask& mask) {
    const ScalarField2D& f = phi.field();
    require_same_grid(f, threshold, "weighted_quantile_step");
    const auto [lmin, lmax] = local_range(f, mask_footprint(mask));
    ScalarField2D out(f.grid());
    const int nx = f.nx();
    parallel_for(f.ny(), [&](int iy) {
        std::vector<WeightedValue> buf;
        for (int ix = 0; ix < nx; ++ix) {
            if (lmin(ix, iy) == lmax(ix, iy)) {
                out(ix, iy) = lmin(ix, iy);
                continue;
            }
            gather(f, ix, iy, mask, buf);
            out(ix, iy) = weighted_quantile_select(buf, threshold(ix, iy));
        }
    });
    return LevelSetField(std::move(out));
}

double pointwise_potential(double xi, std::span<const double> neighbors, std::span<const double> weights, double f1,
                           double f2, double lambda_tilde) {
    if (neighbors.size() != weights.size()) throw ConfigError("pointwise_potential: size mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < neighbors.size(); ++j) acc += weights[j] * std::abs(xi - neighbors[j]);
    return acc + (xi * f1 + (1.0 - xi) * f2) / lambda_tilde;
}

double quantile_optimality_gap(std::span<const double> values, std::span<const double> weights, double threshold,
                               double step) {
    if (!(step > 0.0)) throw ConfigError("scan step must be positive");
    const double f1 = 2.0 * threshold - 1.0, f2 = 0.0;
    const double chosen = weighted_quantile_sorted(values, weights, threshold);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double best = pointwise_potential(*lo, values, weights, f1, f2, 1.0);
    best = std::min(best, pointwise_potential(*hi, values, weights, f1, f2, 1.0));
    for (long k = static_cast<long>(std::ceil(*lo / step)); k * step <= *hi; ++k)
        best = std::min(best, pointwise_potential(k * step, values, weights, f1, f2, 1.0));
    return pointwise_potential(chosen, values, weights, f1, f2, 1.0) - best;
}

namespace {

// Length of {s in [0, 1] : a s^2 + b s + c < 0}.
double negative_length(double a, double b, double c) {
    double roots[2];
    int count = 0;
    if (a == 0.0) {
        if (b != 0.0) roots[count++] = -c / b;
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc > 0.0) {
            const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
            if (q != 0.0) {
                roots[count++] = q / a;
                roots[count++] = c / q;
            } else {
                roots[count++] = 0.0;
            }
        }
    }
    double cuts[4] = {0.0, 0.0, 0.0, 1.0};
    int n = 1;
    for (int k = 0; k < count; ++k)
        if (roots[k] > 0.0 && roots[k] < 1.0) cuts[n++] = roots[k];
    cuts[n++] = 1.0;
    std::sort(cuts, cuts + n);
    double length = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
        const double s = 0.5 * (cuts[k] + cuts[k + 1]);
        if ((a * s + b) * s + c < 0.0) length += cuts[k + 1] - cuts[k];
    }
    return length;
}

} // namespace

double quadratic_sublevel_measure(const std::array<double, 8>& samples, double level) {
    constexpr double quarter = std::numbers::pi / 2.0;
    double measure = 0.0;
    for (int seg = 0; seg < 4; ++seg) {
        const double p0 = samples[2 * seg];
        const double p1 = samples[2 * seg + 1];
        const double p2 = samples[(2 * seg + 2) % 8];
        if (p0 == p1 && p1 == p2) {
            if (p0 < level) measure += quarter;
            continue;
        }
        // Lagrange form on s in [0, 1] with nodes 0, 1/2, 1.
        const double a = 2.0 * p0 - 4.0 * p1 + 2.0 * p2;
        const double b = -3.0 * p0 + 4.0 * p1 - p2;
        measure += quarter * negative_length(a, b, p0 - level);
    }
    return measure;
}

double quadratic_circle_quantile(const std::array<double, 8>& samples, double threshold) {
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    double lo = *mn, hi = *mx;
    if (lo == hi || threshold <= 0.0) return hi;
    if (threshold >= 1.0) return lo;
    const double target = 2.0 * std::numbers::pi * (1.0 - threshold);
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (quadratic_sublevel_measure(samples, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

LevelSetField quadratic_quantile_step(const LevelSetField& phi, const ScalarField2D& threshold, double tau) {
    const ScalarField2D& f = phi.field();
    require_same_grid(f, threshold, "quadratic_quantile_step");
    const double radius = std::sqrt(2.0 * tau) / f.grid().h;
    if (radius < 1.0 - 1e-12) throw ConfigError("quadratic filter: radius below grid resolution");
    std::array<Offset, 8> ring;
    for (int j = 0; j < 8; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / 8.0;
        ring[j] = {radius * std::cos(theta), radius * std::sin(theta)};
    }
    const auto [lmin, lmax] = local_range(f, static_cast<int>(std::ceil(radius)) + 1);
    ScalarField2D out(f.grid());
    const int nx = f.nx();
    parallel_for(f.ny(), [&](int iy) {
        std::array<double, 8> s;
        for (int ix = 0; ix < nx; ++ix) {
            if (lmin(ix, iy) == lmax(ix, iy)) {
                out(ix, iy) = lmin(ix, iy);
                continue;
            }
            for (int j = 0; j < 8; ++j) s[j] = bilinear_sample(f, ix + ring[j].dx, iy + ring[j].dy);
            out(ix, iy) = quadratic_circle_quantile(s, threshold(ix, iy));
        }
    });
    return LevelSetField(std::move(out));
}

namespace {

// Sorted neighborhoods of every non-constant node, so that the selection for
// any shifted threshold is a binary search.
class QuantileTable {
public:
    QuantileTable(const ScalarField2D& f, const KernelMask& mask) : base_(f.grid()) {
        const auto [lmin, lmax] = local_range(f, mask_footprint(mask));
        const std::size_t n = mask.size();
        for (int iy = 0; iy < f.ny(); ++iy)
            for (int ix = 0; ix < f.nx(); ++ix) {
                base_(ix, iy) = lmin(ix, iy);
                if (lmin(ix, iy) != lmax(ix, iy)) active_.push_back(f.index(ix, iy));
            }
        values_.resize(active_.size() * n);
        cumulative_.resize(active_.size() * n);
        parallel_for(static_cast<int>(active_.size()), [&](int a) {
            std::vector<WeightedValue> buf;
            const int ix = static_cast<int>(active_[a] % f.nx());
            const int iy = static_cast<int>(active_[a] / f.nx());
            gather(f, ix, iy, mask, buf);
            std::stable_sort(buf.begin(), buf.end(),
                             [](const WeightedValue& p, const WeightedValue& q) { return p.value > q.value; });
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                acc += buf[j].weight;
                values_[a * n + j] = buf[j].value;
                cumulative_[a * n + j] = acc;
            }
        });
        width_ = n;
    }

    ScalarField2D evaluate(const ScalarField2D& threshold, double shift) const {
        ScalarField2D out = base_;
        for (std::size_t a = 0; a < active_.size(); ++a) {
            const double t = threshold.values()[active_[a]] + shift;
            const double* v = values_.data() + a * width_;
            const double* s = cumulative_.data() + a * width_;
            double chosen;
            if (t <= 0.0)
                chosen = v[0];
            else if (t > 1.0)
                chosen = v[width_ - 1];
            else {
                const double* it = std::lower_bound(s, s + width_, t);
                chosen = it == s + width_ ? v[width_ - 1] : v[it - s];
            }
            out.values()[active_[a]] = chosen;
        }
        return out;
    }

private:
    ScalarField2D base_;
    std::vector<std::size_t> active_;
    std::vector<double> values_;
    std::vector<double> cumulative_;
    std::size_t width_ = 0;
};

} // namespace

VolumeStepResult volume_constrained_step(const LevelSetField& phi, const ScalarField2D& threshold,
                                         const KernelMask& mask, double target_volume, double tol) {
    const ScalarField2D& f = phi.field();
    require_same_grid(f, threshold, "volume_constrained_step");
    const double domain = f.grid().area();
    if (!(target_volume > 0.0 && target_volume < domain))
        throw ConfigError("volume target must lie strictly between 0 and the domain area");
    if (!(tol > 0.0)) throw ConfigError("volume tolerance must be positive");

    const QuantileTable table(f, mask);
    const double slack = tol * domain;
    int evaluations = 0;
    auto eval = [&](double shift) {
        ++evaluations;
        ScalarField2D out = table.evaluate(threshold, shift);
        const double v = out.integral();
        return std::pair{std::move(out), v};
    };

    double lo = -2.0, hi = 2.0;
    auto [phi_lo, v_lo] = eval(lo);
    auto [phi_hi, v_hi] = eval(hi);
    if (target_volume > v_lo + slack || target_volume < v_hi - slack) {
        std::ostringstream msg;
        msg << "volume unreachable: target " << target_volume << " outside [" << v_hi << ", " << v_lo << "]";
        throw ConfigError(msg.str());
    }
    if (std::abs(v_lo - target_volume) <= slack) return {LevelSetField(std::move(phi_lo)), lo, v_lo, evaluations, false};
    if (std::abs(v_hi - target_volume) <= slack) return {LevelSetField(std::move(phi_hi)), hi, v_hi, evaluations, false};

    // Bisect to a narrow bracket rather than stopping at the first admissible
    // volume, so nodes whose switching multipliers differ only by rounding
    // end up on the same side.
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        auto [phi_mid, v_mid] = eval(mid);
        if (v_mid >= target_volume) {
            lo = mid;
            phi_lo = std::move(phi_mid);
            v_lo = v_mid;
        } else {
            hi = mid;
            phi_hi = std::move(phi_mid);
            v_hi = v_mid;
        }
    }
    if (v_lo - v_hi <= 0.0 || std::abs(v_lo - target_volume) <= 1e-15 * domain)
        return {LevelSetField(std::move(phi_lo)), lo, v_lo, evaluations, false};

    // The target sits inside a jump: nodes whose quantile switches between the
    // bracket ends take an interpolated value, which is still a minimizer of
    // the shifted local potentials at the limiting multiplier.
    const double theta = (target_volume - v_hi) / (v_lo - v_hi);
    ScalarField2D blended(f.grid());
    for (std::size_t i = 0; i < blended.size(); ++i) {
        const double a = phi_hi.values()[i], b = phi_lo.values()[i];
        blended.values()[i] = a == b ? a : std::clamp(a + theta * (b - a), std::min(a, b), std::max(a, b));
    }
    const double v = blended.integral();
    return {LevelSetField(std::move(blended)), 0.5 * (lo + hi), v, evaluations, true};
}

} // namespace cmf
