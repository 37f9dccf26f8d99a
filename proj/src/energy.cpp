#include "cmf/energy.hpp"

#include "cmf/parallel.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace cmf {

namespace {

// Row partial sums reduced in row order, independent of the thread count.
template <class RowFn>
double reduce_rows(int ny, RowFn&& row) {
    std::vector<double> partial(static_cast<std::size_t>(ny), 0.0);
    parallel_for(ny, [&](int iy) { partial[iy] = row(iy); });
    double acc = 0.0;
    for (double v : partial) acc += v;
    return acc;
}

} // namespace

EnergyReport RelaxedEnergy::weighted(double lambda_tilde, double volume) const {
    EnergyReport r;
    r.fidelity = fidelity;
    r.perimeter = 0.5 * interaction;
    r.total = fidelity + lambda_tilde * r.perimeter;
    r.volume = volume;
    return r;
}

double heat_content_sum(const ScalarField2D& u, const KernelMask& mask) {
    const ScalarField2D smoothed = convolve(u, mask);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += (1.0 - u.values()[i]) * smoothed.values()[i];
    return acc * u.grid().cell_area();
}

double heat_content_perimeter(const ScalarField2D& u, double tau, const KernelMask& mask) {
    return std::sqrt(std::numbers::pi / tau) * heat_content_sum(u, mask);
}

double fidelity_integral(const ScalarField2D& u, const ScalarField2D& f1, const ScalarField2D& f2) {
    require_same_grid(u, f1, "fidelity");
    require_same_grid(u, f2, "fidelity");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double p = u.values()[i];
        acc += p * f1.values()[i] + (1.0 - p) * f2.values()[i];
    }
    return acc * u.grid().cell_area();
}

EnergyReport binary_energy(const BinaryField& u, const ScalarField2D& f1, const ScalarField2D& f2,
                           double lambda_tilde, const KernelMask& mask) {
    EnergyReport r;
    r.fidelity = fidelity_integral(u.field(), f1, f2);
    r.perimeter = heat_content_sum(u.field(), mask);
    r.total = r.fidelity + lambda_tilde * r.perimeter;
    r.volume = u.field().integral();
    return r;
}

double interaction_energy(const ScalarField2D& phi, const KernelMask& mask) {
    const auto [lmin, lmax] = local_range(phi, mask_footprint(mask));
    const int nx = phi.nx();
    const double acc = reduce_rows(phi.ny(), [&](int iy) {
        double row = 0.0;
        for (int ix = 0; ix < nx; ++ix) {
            if (lmin(ix, iy) == lmax(ix, iy)) continue;
            const double center = phi(ix, iy);
            double local = 0.0;
            for (std::size_t j = 0; j < mask.size(); ++j)
                local += mask.weights[j] *
                         std::abs(center - sample_offset(phi, ix, iy, mask.offsets[j], mask.integer_offsets));
            row += local;
        }
        return row;
    });
    return acc * phi.grid().cell_area();
}

RelaxedEnergy relaxed_energy(const LevelSetField& phi, const ScalarField2D& f1, const ScalarField2D& f2,
                             double lambda_tilde, const KernelMask& mask) {
    RelaxedEnergy e;
    e.interaction = interaction_energy(phi.field(), mask);
    e.fidelity = fidelity_integral(phi.field(), f1, f2);
    e.total = e.interaction + 2.0 / lambda_tilde * e.fidelity;
    return e;
}

double movement_limiter(const LevelSetField& phi, const LevelSetField& phi_k, const KernelMask& mask) {
    const ScalarField2D& a = phi.field();
    const ScalarField2D& b = phi_k.field();
    require_same_grid(a, b, "movement_limiter");
    const int nx = a.nx();
    const double acc = reduce_rows(a.ny(), [&](int iy) {
        double row = 0.0;
        for (int ix = 0; ix < nx; ++ix) {
            const double ax = a(ix, iy), bx = b(ix, iy);
            double local = 0.0;
            for (std::size_t j = 0; j < mask.size(); ++j) {
                const auto& o = mask.offsets[j];
                const double ay = sample_offset(a, ix, iy, o, mask.integer_offsets);
                const double by = sample_offset(b, ix, iy, o, mask.integer_offsets);
                local += mask.weights[j] * (2.0 * std::abs(ax - by) - std::abs(ax - ay) - std::abs(bx - by));
            }
            row += local;
        }
        return row;
    });
    return acc * a.grid().cell_area();
}

CoareaResult coarea_check(const LevelSetField& phi, const KernelMask& mask, int levels) {
    if (levels < 16) throw ConfigError("coarea_check needs at least 16 levels");
    CoareaResult r;
    r.lhs = interaction_energy(phi.field(), mask);
    double acc = 0.0;
    for (int k = 0; k < levels; ++k) {
        const double mu = (k + 0.5) / levels;
        const BinaryField chi = threshold_indicator(phi.field(), mu);
        acc += heat_content_sum(chi.field(), mask);
    }
    r.rhs = 2.0 * acc / levels;
    return r;
}

} // namespace cmf
