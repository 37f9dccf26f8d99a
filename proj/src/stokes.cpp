#include "cmf/stokes.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace cmf {

std::string to_string(Edge e) {
    switch (e) {
    case Edge::left: return "left";
    case Edge::right: return "right";
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
    }
    return "?";
}

Edge parse_edge(const std::string& s) {
    if (s == "left") return Edge::left;
    if (s == "right") return Edge::right;
    if (s == "bottom") return Edge::bottom;
    if (s == "top") return Edge::top;
    throw ConfigError("unknown edge '" + s + "'");
}

double Opening::speed(double s) const {
    const double d = 2.0 * (s - center) / height;
    if (std::abs(d) >= 1.0) return 0.0;
    return peak * (1.0 - d * d);
}

double FlowCase::inflow() const {
    double acc = 0.0;
    for (const auto& o : openings)
        if (o.kind == OpeningKind::inlet) acc += o.flux();
    return acc;
}

double FlowCase::outflow() const {
    double acc = 0.0;
    for (const auto& o : openings)
        if (o.kind == OpeningKind::outlet) acc += o.flux();
    return acc;
}

double FlowCase::velocity_scale() const {
    double m = 0.0;
    for (const auto& o : openings) m = std::max(m, o.peak);
    return m > 0.0 ? m : 1.0;
}

void FlowCase::validate() const {
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    if (!(alpha_bar >= 0.0)) throw ConfigError("alpha_bar must be nonnegative");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
    for (const auto& o : openings) {
        if (!(o.height > 0.0)) throw ConfigError("opening height must be positive");
        if (!(o.peak > 0.0)) throw ConfigError("opening peak speed must be positive");
        if (o.center - 0.5 * o.height < -1e-12 || o.center + 0.5 * o.height > 1.0 + 1e-12)
            throw ConfigError("opening on " + to_string(o.edge) + " edge extends past the domain");
    }
    const double in = inflow(), out = outflow();
    if (std::abs(in - out) > 1e-12 * std::max(1.0, in))
        throw ConfigError("net inflow " + std::to_string(in) + " does not match net outflow " + std::to_string(out));
}

StokesState::StokesState(const Grid2D& g)
    : grid(g), vx(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0), vy(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0),
      p(g) {}

double StokesState::divergence(int i, int j) const {
    return (u(i + 1, j) - u(i, j) + v(i, j + 1) - v(i, j)) / grid.h;
}

double StokesState::max_divergence() const {
    double m = 0.0;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) m = std::max(m, std::abs(divergence(i, j)));
    return m;
}

ScalarField2D StokesState::speed_squared() const {
    ScalarField2D q(grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const double a = u(i, j), b = u(i + 1, j), c = v(i, j), d = v(i, j + 1);
            q(i, j) = 0.5 * (a * a + b * b) + 0.5 * (c * c + d * d);
        }
    return q;
}

ScalarField2D brinkman_alpha(const LevelSetField& phi, double alpha_bar, const KernelMask& mask) {
    ScalarField2D solid(phi.grid());
    for (std::size_t i = 0; i < solid.size(); ++i) solid.values()[i] = 1.0 - phi.field().values()[i];
    ScalarField2D a = convolve(solid, mask);
    for (double& v : a.values()) v = alpha_bar * std::clamp(v, 0.0, 1.0);
    return a;
}

namespace {

// Prescribed normal velocities on the boundary faces. Outlet faces are scaled
// so the discrete inflow and outflow agree to rounding.
void apply_boundary(StokesState& s, const FlowCase& flow) {
    const Grid2D& g = s.grid;
    const int nx = g.nx, ny = g.ny;
    struct Face {
        double* value;
        double in;
        double out;
        double sign; // +1 when positive component points into the domain
    };
    std::vector<Face> faces;
    auto profile = [&](Edge e, double pos, Face& f) {
        for (const auto& o : flow.openings) {
            if (o.edge != e) continue;
            (o.kind == OpeningKind::inlet ? f.in : f.out) += o.speed(pos);
        }
    };
    for (int j = 0; j < ny; ++j) {
        const double pos = (j + 0.5) * g.h;
        Face l{&s.u(0, j), 0.0, 0.0, 1.0}, r{&s.u(nx, j), 0.0, 0.0, -1.0};
        profile(Edge::left, pos, l);
        profile(Edge::right, pos, r);
        faces.push_back(l);
        faces.push_back(r);
    }
    for (int i = 0; i < nx; ++i) {
        const double pos = (i + 0.5) * g.h;
        Face b{&s.v(i, 0), 0.0, 0.0, 1.0}, t{&s.v(i, ny), 0.0, 0.0, -1.0};
        profile(Edge::bottom, pos, b);
        profile(Edge::top, pos, t);
        faces.push_back(b);
        faces.push_back(t);
    }
    double in = 0.0, out = 0.0;
    for (const auto& f : faces) {
        in += f.in;
        out += f.out;
    }
    const double scale = out > 0.0 ? in / out : 1.0;
    for (auto& f : faces) *f.value = f.sign * (f.in - scale * f.out);
}

} // namespace

struct StokesSolver::Impl {
    int nu = 0, nv = 0, np = 0;
    std::vector<int> uid, vid; // unknown index per face, -1 for boundary faces
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    StokesState boundary;

    explicit Impl(const Grid2D& g) : boundary(g) {
        const int nx = g.nx, ny = g.ny;
        uid.assign(static_cast<std::size_t>(nx + 1) * ny, -1);
        vid.assign(static_cast<std::size_t>(nx) * (ny + 1), -1);
        int n = 0;
        for (int j = 0; j < ny; ++j)
            for (int i = 1; i < nx; ++i) uid[static_cast<std::size_t>(j) * (nx + 1) + i] = n++;
        nu = n;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) vid[static_cast<std::size_t>(j) * nx + i] = n++;
        nv = n - nu;
        np = nx * ny;
    }
    int pid(const Grid2D& g, int i, int j) const { return nu + nv + j * g.nx + i; }
};

StokesSolver::StokesSolver(const Grid2D& grid, FlowCase flow) : grid_(grid), flow_(std::move(flow)) {
    flow_.validate();
    if (grid.nx < 2 || grid.ny < 2) throw ConfigError("Stokes grid needs at least 2x2 cells");
    if (flow_.body_force) {
        require_same_grid(flow_.body_force->first, ScalarField2D(grid), "body force");
        require_same_grid(flow_.body_force->second, ScalarField2D(grid), "body force");
    }
    impl_ = std::make_unique<Impl>(grid);
    apply_boundary(impl_->boundary, flow_);
}

StokesSolver::~StokesSolver() = default;
StokesSolver::StokesSolver(StokesSolver&&) noexcept = default;
StokesSolver& StokesSolver::operator=(StokesSolver&&) noexcept = default;

StokesState StokesSolver::solve(const ScalarField2D& alpha) {
    require_same_grid(alpha, ScalarField2D(grid_), "solve_stokes");
    if (!alpha.all_finite() || alpha.min() < 0.0) throw ConfigError("alpha must be finite and nonnegative");
    Impl& m = *impl_;
    const Grid2D& g = grid_;
    const int nx = g.nx, ny = g.ny;
    const double h = g.h, eta = flow_.eta;
    const double visc = eta / (h * h);
    const StokesState& bnd = m.boundary;
    const int n = m.nu + m.nv + m.np;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 7);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    auto body = [&](int comp, int ca_i, int ca_j, int cb_i, int cb_j) {
        if (!flow_.body_force) return 0.0;
        const ScalarField2D& f = comp == 0 ? flow_.body_force->first : flow_.body_force->second;
        return 0.5 * (f(ca_i, ca_j) + f(cb_i, cb_j));
    };

    // x-momentum on interior vertical faces.
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const int row = m.uid[static_cast<std::size_t>(j) * (nx + 1) + i];
            double diag = 0.5 * (alpha(i - 1, j) + alpha(i, j));
            auto couple = [&](int ni, int nj, double w) {
                diag += w * visc;
                const int col = m.uid[static_cast<std::size_t>(nj) * (nx + 1) + ni];
                if (col >= 0) trip.emplace_back(row, col, -w * visc);
                else rhs[row] += w * visc * bnd.u(ni, nj);
            };
            couple(i - 1, j, 1.0);
            couple(i + 1, j, 1.0);
            if (j > 0) couple(i, j - 1, 1.0);
            else diag += 2.0 * visc;
            if (j < ny - 1) couple(i, j + 1, 1.0);
            else diag += 2.0 * visc;
            trip.emplace_back(row, row, diag);
            trip.emplace_back(row, m.pid(g, i, j), 1.0 / h);
            trip.emplace_back(row, m.pid(g, i - 1, j), -1.0 / h);
            rhs[row] += body(0, i - 1, j, i, j);
        }
    // y-momentum on interior horizontal faces.
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int row = m.vid[static_cast<std::size_t>(j) * nx + i];
            double diag = 0.5 * (alpha(i, j - 1) + alpha(i, j));
            auto couple = [&](int ni, int nj, double w) {
                diag += w * visc;
                const int col = m.vid[static_cast<std::size_t>(nj) * nx + ni];
                if (col >= 0) trip.emplace_back(row, col, -w * visc);
                else rhs[row] += w * visc * bnd.v(ni, nj);
            };
            couple(i, j - 1, 1.0);
            couple(i, j + 1, 1.0);
            if (i > 0) couple(i - 1, j, 1.0);
            else diag += 2.0 * visc;
            if (i < nx - 1) couple(i + 1, j, 1.0);
            else diag += 2.0 * visc;
            trip.emplace_back(row, row, diag);
            trip.emplace_back(row, m.pid(g, i, j), 1.0 / h);
            trip.emplace_back(row, m.pid(g, i, j - 1), -1.0 / h);
            rhs[row] += body(1, i, j - 1, i, j);
        }
    // Continuity, -div v = 0, with one pressure pinned.
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int row = m.pid(g, i, j);
            if (i == 0 && j == 0) {
                trip.emplace_back(row, row, 1.0);
                continue;
            }
            auto face = [&](int id, double known, double sign) {
                if (id >= 0) trip.emplace_back(row, id, -sign / h);
                else rhs[row] += sign * known / h;
            };
            face(m.uid[static_cast<std::size_t>(j) * (nx + 1) + i + 1], bnd.u(i + 1, j), 1.0);
            face(m.uid[static_cast<std::size_t>(j) * (nx + 1) + i], bnd.u(i, j), -1.0);
            face(m.vid[static_cast<std::size_t>(j + 1) * nx + i], bnd.v(i, j + 1), 1.0);
            face(m.vid[static_cast<std::size_t>(j) * nx + i], bnd.v(i, j), -1.0);
        }

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    if (!m.analyzed) {
        m.lu.analyzePattern(A);
        m.analyzed = true;
    }
    m.lu.factorize(A);
    if (m.lu.info() != Eigen::Success) throw SolverError("Stokes factorization failed: " + m.lu.lastErrorMessage());
    Eigen::VectorXd x = m.lu.solve(rhs);
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd r = rhs - A * x;
        if (r.lpNorm<Eigen::Infinity>() == 0.0) break;
        x += m.lu.solve(r);
    }

    StokesState s = bnd;
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) s.u(i, j) = x[m.uid[static_cast<std::size_t>(j) * (nx + 1) + i]];
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) s.v(i, j) = x[m.vid[static_cast<std::size_t>(j) * nx + i]];
    double pmean = 0.0;
    for (int c = 0; c < m.np; ++c) pmean += x[m.nu + m.nv + c];
    pmean /= m.np;
    for (int c = 0; c < m.np; ++c) s.p.values()[c] = x[m.nu + m.nv + c] - pmean;

    const double U = flow_.velocity_scale();
    const Eigen::VectorXd r = rhs - A * x;
    double rmom = 0.0;
    for (int k = 0; k < m.nu + m.nv; ++k) rmom = std::max(rmom, std::abs(r[k]));
    s.momentum_residual = rmom / ((visc + alpha.max()) * U);
    s.continuity_residual = s.max_divergence() * h / U;
    if (!(s.momentum_residual <= 1e-8) || !(s.continuity_residual <= 1e-8))
        throw SolverError("Stokes residual too large: momentum " + std::to_string(s.momentum_residual) +
                          ", continuity " + std::to_string(s.continuity_residual));
    return s;
}

StokesState solve_stokes(const ScalarField2D& alpha, const FlowCase& flow) {
    StokesSolver solver(alpha.grid(), flow);
    return solver.solve(alpha);
}

Forces stokes_forces(const StokesState& state, double alpha_bar, const KernelMask& mask) {
    ScalarField2D f2 = convolve(state.speed_squared(), mask);
    for (double& v : f2.values()) v *= 0.5 * alpha_bar;
    return {ScalarField2D(state.grid), std::move(f2)};
}

Dissipation dissipation_energy(const StokesState& s, const ScalarField2D& alpha, double eta) {
    require_same_grid(alpha, s.p, "dissipation_energy");
    const int nx = s.grid.nx, ny = s.grid.ny;
    double acc = 0.0;
    auto sq = [](double d) { return d * d; };
    // Horizontal velocity: differences across cells, along columns, and
    // half-cell differences to the no-slip walls. Boundary columns carry half width.
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) acc += sq(s.u(i + 1, j) - s.u(i, j));
    for (int i = 0; i <= nx; ++i) {
        const double c = (i == 0 || i == nx) ? 0.5 : 1.0;
        double col = 2.0 * sq(s.u(i, 0)) + 2.0 * sq(s.u(i, ny - 1));
        for (int j = 0; j + 1 < ny; ++j) col += sq(s.u(i, j + 1) - s.u(i, j));
        acc += c * col;
    }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) acc += sq(s.v(i, j + 1) - s.v(i, j));
    for (int j = 0; j <= ny; ++j) {
        const double c = (j == 0 || j == ny) ? 0.5 : 1.0;
        double row = 2.0 * sq(s.v(0, j)) + 2.0 * sq(s.v(nx - 1, j));
        for (int i = 0; i + 1 < nx; ++i) row += sq(s.v(i + 1, j) - s.v(i, j));
        acc += c * row;
    }
    Dissipation d;
    d.viscous = 0.5 * eta * acc;
    const ScalarField2D q = s.speed_squared();
    double b = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) b += alpha.values()[k] * q.values()[k];
    d.brinkman = 0.5 * b * s.grid.cell_area();
    return d;
}

} // namespace cmf
