#pragma once

#include "cmf/field.hpp"
#include "cmf/median_filter.hpp"

namespace cmf {

/// Per-iteration energy decomposition in the lambda-weighted convention:
/// total = fidelity + lambda_tilde * perimeter, where `perimeter` is the raw
/// heat-content sum (no sqrt(pi/tau) prefactor).
struct EnergyReport {
    double fidelity = 0.0;
    double perimeter = 0.0;
    double total = 0.0;
    double volume = 0.0;
    double multiplier = 0.0;
};

/// Relaxed energy in its native scaling: total = interaction + (2/lambda) fidelity.
struct RelaxedEnergy {
    double interaction = 0.0;
    double fidelity = 0.0;
    double total = 0.0;

    /// Same state in the lambda-weighted convention; equals (lambda/2) * total.
    EnergyReport weighted(double lambda_tilde, double volume) const;
};

/// sqrt(pi/tau) * sum (1 - u) (mask * u) h^2.
double heat_content_perimeter(const ScalarField2D& u, double tau, const KernelMask& mask);

/// sum (1 - u) (mask * u) h^2.
double heat_content_sum(const ScalarField2D& u, const KernelMask& mask);

/// sum (u F1 + (1 - u) F2) h^2 for u in [0, 1].
double fidelity_integral(const ScalarField2D& u, const ScalarField2D& f1, const ScalarField2D& f2);

EnergyReport binary_energy(const BinaryField& u, const ScalarField2D& f1, const ScalarField2D& f2,
                           double lambda_tilde, const KernelMask& mask);

/// sum_x sum_j w_j |phi(x) - phi(x + y_j)| h^2.
double interaction_energy(const ScalarField2D& phi, const KernelMask& mask);

RelaxedEnergy relaxed_energy(const LevelSetField& phi, const ScalarField2D& f1, const ScalarField2D& f2,
                             double lambda_tilde, const KernelMask& mask);

/// Nonnegative for positive semidefinite masks and zero when phi == phi_k.
double movement_limiter(const LevelSetField& phi, const LevelSetField& phi_k, const KernelMask& mask);

struct CoareaResult {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Interaction energy versus twice the level-averaged heat content of the
/// super-level sets {phi >= mu}, mu at the midpoints of `levels` uniform bins.
CoareaResult coarea_check(const LevelSetField& phi, const KernelMask& mask, int levels);

} // namespace cmf
