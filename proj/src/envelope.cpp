#include "fekete/envelope.hpp"

#include "fekete/sphere_charts.hpp"

namespace fekete {

namespace {

struct TorusStencil {
    double caa, cbb, cab, h;
    explicit TorusStencil(const ModelSurface& torus, int n) {
        const double re = torus.tau().real(), im = torus.tau().imag();
        caa = 1.0 + (re / im) * (re / im);
        cbb = 1.0 / (im * im);
        cab = -2.0 * re / (im * im);
        h = 1.0 / n;
    }
};

// One projected-SOR pass over the torus lattice; returns the sup update.
double torus_psor_sweep(const Grid& grid, const TorusStencil& st, double f_rhs,
                        const Eigen::ArrayXd& phi,
                        const Eigen::Array<bool, Eigen::Dynamic, 1>& mask, double relax,
                        Eigen::ArrayXd& U) {
    const int N = grid.n1;
    const double h2 = st.h * st.h;
    const double diag = 2.0 * (st.caa + st.cbb) / h2;
    double delta = 0.0;
    for (int i = 0; i < N; ++i) {
        const int ip = (i + 1) % N, im = (i + N - 1) % N;
        for (int j = 0; j < N; ++j) {
            const int jp = (j + 1) % N, jm = (j + N - 1) % N;
            const int k = i * N + j;
            const double cross = U[ip * N + jp] - U[ip * N + jm] - U[im * N + jp] +
                                 U[im * N + jm];
            const double rest = st.caa * (U[ip * N + j] + U[im * N + j]) / h2 +
                                st.cbb * (U[i * N + jp] + U[i * N + jm]) / h2 +
                                st.cab * cross / (4.0 * h2);
            double next = (rest - f_rhs) / diag;
            next = U[k] + relax * (next - U[k]);
            if (mask[k] && next > phi[k]) next = phi[k];
            delta = std::max(delta, std::abs(next - U[k]));
            U[k] = next;
        }
    }
    return delta;
}

// Discrete curvature density of U in area-form units: [dd^c U]/omega + 1.
Eigen::ArrayXd torus_curvature_density(const Grid& grid, const TorusStencil& st,
                                       const Eigen::ArrayXd& U, double im_tau) {
    const int N = grid.n1;
    const double h2 = st.h * st.h;
    Eigen::ArrayXd nu(N * N);
    for (int i = 0; i < N; ++i) {
        const int ip = (i + 1) % N, im = (i + N - 1) % N;
        for (int j = 0; j < N; ++j) {
            const int jp = (j + 1) % N, jm = (j + N - 1) % N;
            const int k = i * N + j;
            const double cross = U[ip * N + jp] - U[ip * N + jm] - U[im * N + jp] +
                                 U[im * N + jm];
            const double lap = st.caa * (U[ip * N + j] - 2.0 * U[k] + U[im * N + j]) / h2 +
                               st.cbb * (U[i * N + jp] - 2.0 * U[k] + U[i * N + jm]) / h2 +
                               st.cab * cross / (4.0 * h2);
            nu[k] = im_tau / kTwoPi * lap + 1.0;
        }
    }
    return nu;
}

EnvelopeSolution solve_torus(const GreenKernel& kernel, const WeightedSet& ws,
                             int resolution, const EnvelopeOptions& opts) {
    const auto& torus = kernel.surface();
    const double im_tau = torus.tau().imag();

    // Coarse-to-fine cascade; projected SOR is the smoother at every level.
    std::vector<int> levels;
    for (int r = resolution; r >= 64; r /= 2) levels.push_back(r);
    std::reverse(levels.begin(), levels.end());

    Eigen::ArrayXd U;
    int total_sweeps = 0;
    double last_delta = 0.0;
    GridPtr grid;
    Eigen::ArrayXd phi;
    Eigen::Array<bool, Eigen::Dynamic, 1> mask;

    for (std::size_t lev = 0; lev < levels.size(); ++lev) {
        const int n = levels[lev];
        grid = make_grid(torus, n);
        phi = ws.phi.sample(*grid);
        mask = ws.region.mask(*grid);
        const TorusStencil st(torus, n);
        const double f_rhs = -kTwoPi / im_tau; // chart Laplacian off contact

        if (lev == 0) {
            double lo = 1e300;
            for (int k = 0; k < grid->size(); ++k)
                if (mask[k]) lo = std::min(lo, phi[k]);
            U = Eigen::ArrayXd::Constant(grid->size(), lo);
        } else {
            // bilinear prolongation from the previous level
            const int nc = levels[lev - 1];
            Eigen::ArrayXd Uf(grid->size());
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double fi = (i + 0.5) / n * nc - 0.5;
                    const double fj = (j + 0.5) / n * nc - 0.5;
                    const int i0 = static_cast<int>(std::floor(fi));
                    const int j0 = static_cast<int>(std::floor(fj));
                    const double si = fi - i0, sj = fj - j0;
                    auto at = [&](int a, int b) {
                        return U[((a % nc + nc) % nc) * nc + ((b % nc + nc) % nc)];
                    };
                    Uf[i * n + j] = (1 - si) * (1 - sj) * at(i0, j0) +
                                    si * (1 - sj) * at(i0 + 1, j0) +
                                    (1 - si) * sj * at(i0, j0 + 1) +
                                    si * sj * at(i0 + 1, j0 + 1);
                }
            U = Uf;
            for (int k = 0; k < grid->size(); ++k)
                if (mask[k] && U[k] > phi[k]) U[k] = phi[k];
        }

        const double level_tol = (lev + 1 == levels.size()) ? opts.tol : 10.0 * opts.tol;
        int sweep = 0;
        for (; sweep < opts.max_sweeps; ++sweep) {
            last_delta = torus_psor_sweep(*grid, st, f_rhs, phi, mask, opts.relaxation, U);
            if (last_delta < level_tol) break;
        }
        total_sweeps += sweep;
        if (sweep == opts.max_sweeps)
            throw ConvergenceError("extremal_function: projected SOR did not converge",
                                   last_delta);
    }

    EnvelopeSolution sol;
    sol.grid = grid;
    sol.U = U;
    sol.sweeps = total_sweeps;
    sol.final_update = last_delta;

    const TorusStencil st(torus, grid->n1);
    Eigen::ArrayXd nu = torus_curvature_density(*grid, st, U, im_tau);
    for (int k = 0; k < nu.size(); ++k)
        if (nu[k] < 0.0) nu[k] = 0.0; // tiny negatives from the stencil
    if (ws.region.kind != Region::Kind::FullSurface) {
        // the equilibrium measure lives on K; remove the convergence-tail
        // density outside the one-cell dilation
        const double cell = std::max(1.0, std::abs(torus.tau())) / grid->n1 / std::sqrt(im_tau);
        const auto keep = dilate_region(ws.region, 1.5 * cell).mask(*grid);
        for (int k = 0; k < nu.size(); ++k)
            if (!keep[k]) nu[k] = 0.0;
    }
    nu /= (grid->weights * nu).sum();
    sol.nu = Measure::grid_density(grid, nu);

    sol.contact.resize(grid->size());
    for (int k = 0; k < grid->size(); ++k)
        sol.contact[k] = mask[k] && (phi[k] - U[k] <= 1e-9);

    sol.min_energy = min_energy_of(kernel, sol, ws);
    return sol;
}

EnvelopeSolution solve_sphere(const GreenKernel& kernel, const WeightedSet& ws,
                              int resolution, const EnvelopeOptions& opts) {
    const auto& sphere = kernel.surface();
    const SphereChartLattice lat(resolution);
    const int n = lat.n;

    // Per-chart samples of the weight, the region mask, and the unknown.
    std::array<Eigen::ArrayXd, 2> phi, U;
    std::array<Eigen::Array<bool, Eigen::Dynamic, 1>, 2> mask, own;
    double lo = 1e300;
    for (int c = 0; c < 2; ++c) {
        phi[c].resize(lat.size());
        U[c].resize(lat.size());
        mask[c].resize(lat.size());
        own[c].resize(lat.size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const auto p = lat.point(c, i, j);
                const int k = lat.index(i, j);
                phi[c][k] = ws.phi(sphere, p);
                mask[c][k] = ws.region.contains(sphere, p);
                own[c][k] = lat.owned(i, j);
                if (mask[c][k]) lo = std::min(lo, phi[c][k]);
            }
    }
    U[0].setConstant(lo);
    U[1].setConstant(lo);

    // Ghost refresh: values outside the owned disc come from the other chart.
    auto refresh_ghosts = [&](int c) {
        const int other = 1 - c;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (own[c][lat.index(i, j)]) continue;
                const Complex cc = lat.chart_coord(i, j);
                U[c][lat.index(i, j)] = lat.interpolate(U[other], 1.0 / cc);
            }
    };

    const double h2 = lat.h * lat.h;
    int sweep = 0;
    double delta = 1e300;
    for (; sweep < opts.max_sweeps; ++sweep) {
        delta = 0.0;
        for (int c = 0; c < 2; ++c) {
            refresh_ghosts(c);
            for (int i = 1; i + 1 < n; ++i)
                for (int j = 1; j + 1 < n; ++j) {
                    const int k = lat.index(i, j);
                    if (!own[c][k]) continue;
                    const double s = lat.ddc_scale(i, j);
                    const double rest = U[c][lat.index(i + 1, j)] + U[c][lat.index(i - 1, j)] +
                                        U[c][lat.index(i, j + 1)] + U[c][lat.index(i, j - 1)];
                    double next = (rest + h2 / s) / 4.0;
                    next = U[c][k] + opts.relaxation * (next - U[c][k]);
                    if (mask[c][k] && next > phi[c][k]) next = phi[c][k];
                    delta = std::max(delta, std::abs(next - U[c][k]));
                    U[c][k] = next;
                }
        }
        if (delta < opts.tol) break;
    }
    if (sweep == opts.max_sweeps)
        throw ConvergenceError("extremal_function: projected SOR did not converge", delta);
    refresh_ghosts(0);
    refresh_ghosts(1);

    // Curvature density on owned nodes, then transfer to the quadrature grid.
    std::array<Eigen::ArrayXd, 2> nu_chart;
    for (int c = 0; c < 2; ++c) {
        nu_chart[c] = Eigen::ArrayXd::Zero(lat.size());
        for (int i = 1; i + 1 < n; ++i)
            for (int j = 1; j + 1 < n; ++j) {
                const int k = lat.index(i, j);
                const double lap = (U[c][lat.index(i + 1, j)] + U[c][lat.index(i - 1, j)] +
                                    U[c][lat.index(i, j + 1)] + U[c][lat.index(i, j - 1)] -
                                    4.0 * U[c][k]) /
                                   h2;
                nu_chart[c][k] = lat.ddc_scale(i, j) * lap + 1.0;
            }
    }

    const auto grid = make_grid(sphere, resolution);
    EnvelopeSolution sol;
    sol.grid = grid;
    sol.U.resize(grid->size());
    Eigen::ArrayXd nu(grid->size());
    sol.contact.resize(grid->size());
    for (int k = 0; k < grid->size(); ++k) {
        const auto& p = grid->nodes[k];
        const double az = std::abs(p.z);
        const int c = (az <= 1.0) ? 0 : 1;
        const Complex coord = (c == 0) ? p.z : 1.0 / p.z;
        sol.U[k] = lat.interpolate(U[c], coord);
        nu[k] = std::max(0.0, lat.interpolate(nu_chart[c], coord));
        const double phik = ws.phi(sphere, p);
        sol.contact[k] = ws.region.contains(sphere, p) && (phik - sol.U[k] <= 1e-6);
    }
    if (ws.region.kind != Region::Kind::FullSurface) {
        const double cell = lat.h / std::sqrt(kPi);
        const auto keep = dilate_region(ws.region, 1.5 * cell).mask(*grid);
        for (int k = 0; k < nu.size(); ++k)
            if (!keep[k]) nu[k] = 0.0;
    }
    nu /= (grid->weights * nu).sum();
    sol.nu = Measure::grid_density(grid, nu);
    sol.sweeps = sweep;
    sol.final_update = delta;
    sol.min_energy = min_energy_of(kernel, sol, ws);
    return sol;
}

} // namespace

EnvelopeSolution extremal_function(const GreenKernel& kernel, const WeightedSet& ws,
                                   int resolution, const EnvelopeOptions& opts) {
    if (resolution < 64) throw std::invalid_argument("extremal_function: resolution >= 64");
    ws.validate(kernel.surface());
    if (kernel.surface().is_torus()) return solve_torus(kernel, ws, resolution, opts);
    return solve_sphere(kernel, ws, resolution, opts);
}

double min_energy_of(const GreenKernel& kernel, const EnvelopeSolution& sol,
                     const WeightedSet& ws) {
    const auto& grid = *sol.grid;
    const double mean_u = (grid.weights * sol.U).sum();
    const Eigen::ArrayXd ustar = sol.U - mean_u;
    KahanSum pot, wgt;
    for (int k = 0; k < grid.size(); ++k) {
        const double mass = grid.weights[k] * sol.nu.density[k];
        if (mass == 0.0) continue;
        pot.add(mass * ustar[k]);
        wgt.add(mass * ws.phi(grid.surface, grid.nodes[k]));
    }
    return -pot.value() + 2.0 * wgt.value();
}

SolminReport verify_solmin(const GreenKernel& kernel, const EnvelopeSolution& sol,
                           const WeightedSet& ws) {
    const auto& grid = *sol.grid;
    const Eigen::ArrayXd phi = ws.phi.sample(grid);
    KahanSum wsum;
    for (int k = 0; k < grid.size(); ++k)
        wsum.add(grid.weights[k] * sol.nu.density[k] * phi[k]);
    const double phi_mass = wsum.value();
    const double shift = phi_mass - sol.min_energy;

    SolminReport rep;
    const double nu_floor = 1e-3 * sol.nu.density.maxCoeff();

    if (grid.surface.is_torus()) {
        const auto pot = potential_field(kernel, sol.nu, sol.grid);
        for (int k = 0; k < grid.size(); ++k) {
            rep.global_residual =
                std::max(rep.global_residual, std::abs(pot.values[k] - sol.U[k] - shift));
            if (sol.nu.density[k] > nu_floor)
                rep.contact_residual =
                    std::max(rep.contact_residual, std::abs(pot.values[k] - phi[k] - shift));
        }
        return rep;
    }

    // Sphere: sample the independent potential at a deterministic subset.
    std::vector<int> samples;
    const int stride = std::max(1, grid.size() / 400);
    for (int k = 0; k < grid.size(); k += stride) samples.push_back(k);
    for (int k : samples) {
        const double u = potential_of_measure(kernel, sol.nu, grid.nodes[k]).value();
        rep.global_residual = std::max(rep.global_residual, std::abs(u - sol.U[k] - shift));
        if (sol.nu.density[k] > nu_floor)
            rep.contact_residual = std::max(rep.contact_residual, std::abs(u - phi[k] - shift));
    }
    return rep;
}

Region dilate_region(const Region& region, double delta) {
    Region out = region;
    switch (region.kind) {
        case Region::Kind::FullSurface:
            break;
        case Region::Kind::UnionOfDiscs:
            for (auto& r : out.radii) r += delta;
            break;
        case Region::Kind::ComplementOfDiscs:
            for (auto& r : out.radii) r = std::max(1e-6, r - delta);
            break;
    }
    return out;
}

} // namespace fekete
