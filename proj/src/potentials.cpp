#include "fekete/potentials.hpp"

#include <unsupported/Eigen/FFT>

#include "fekete/special.hpp"

namespace fekete {

namespace {

// Unnormalized 2D DFT of an N x N row-major field (node index i*N + j).
Eigen::MatrixXcd dft2(const Eigen::ArrayXd& field, int N, bool inverse) {
    Eigen::FFT<double> fft;
    Eigen::MatrixXcd work(N, N);
    std::vector<std::complex<double>> in(N), out(N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) in[j] = Complex(field[i * N + j], 0.0);
        if (inverse)
            fft.inv(out, in);
        else
            fft.fwd(out, in);
        for (int j = 0; j < N; ++j) work(i, j) = out[j];
    }
    if (inverse)
        for (auto& v : work.reshaped()) v *= static_cast<double>(N); // undo 1/N
    Eigen::MatrixXcd res(N, N);
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) in[i] = work(i, j);
        if (inverse)
            fft.inv(out, in);
        else
            fft.fwd(out, in);
        for (int i = 0; i < N; ++i) res(i, j) = out[i];
    }
    if (inverse)
        for (auto& v : res.reshaped()) v *= static_cast<double>(N);
    return res;
}

int signed_frequency(int m, int N) { return (m <= N / 2) ? m : m - N; }

// Spectral convolution U(node) = sum over frequencies of G_hat * nu_hat.
// Half-cell node offsets cancel between analysis and synthesis.
Eigen::ArrayXd torus_green_convolution(const GreenKernel& kernel, const Grid& grid,
                                       const Eigen::ArrayXd& omega_density) {
    const int N = grid.n1;
    Eigen::MatrixXcd spec = dft2(omega_density, N, false);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n)
            spec(m, n) *= kernel.torus_fourier_coefficient(signed_frequency(m, N),
                                                           signed_frequency(n, N)) /
                          (static_cast<double>(N) * N);
    Eigen::ArrayXd out(N * N);
    Eigen::ArrayXd re(N * N);
    // inverse transform of the (complex) spectrum
    {
        Eigen::FFT<double> fft;
        std::vector<std::complex<double>> in(N), outv(N);
        Eigen::MatrixXcd work(N, N);
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) in[j] = spec(i, j);
            fft.inv(outv, in);
            for (int j = 0; j < N; ++j) work(i, j) = outv[j] * static_cast<double>(N);
        }
        for (int j = 0; j < N; ++j) {
            for (int i = 0; i < N; ++i) in[i] = work(i, j);
            fft.inv(outv, in);
            for (int i = 0; i < N; ++i) re[i * N + j] = outv[i].real() * N;
        }
    }
    out = re;
    return out;
}

// Average of G over the grid cell around a node, used when an evaluation
// point falls onto a density node.
double cell_average_diagonal(const GreenKernel& kernel, double cell_mass) {
    return std::log(std::sqrt(cell_mass / kPi)) - 0.5 + kernel.smooth_remainder_diagonal();
}

// Exact diagonal rule for uniform circle discretizations: the value that
// makes the M-point pair sum reproduce the continuum circle energy of the
// pure log kernel.
double circle_diagonal(const GreenKernel& kernel, double radius, int count) {
    const auto& surface = kernel.surface();
    if (surface.is_torus()) {
        const double rho_chart = radius * std::sqrt(surface.tau().imag());
        return std::log(rho_chart / count) +
               std::log(std::abs(theta1_prime0(surface.tau()))) + kernel.normalization();
    }
    const double alpha = 2.0 * std::sqrt(kPi) * radius;
    return std::log(std::sin(alpha) / (2.0 * count)) + kernel.normalization();
}

double injectivity_scale(const ModelSurface& surface) {
    if (surface.is_sphere()) return 0.5 * std::sqrt(kPi); // half circumference
    double lmin = 1e300;
    for (int m = -1; m <= 1; ++m)
        for (int n = -1; n <= 1; ++n)
            if (m != 0 || n != 0)
                lmin = std::min(lmin,
                                std::abs(static_cast<double>(m) + static_cast<double>(n) * surface.tau()));
    return 0.5 * lmin / std::sqrt(surface.tau().imag());
}

} // namespace

std::vector<SurfacePoint> circle_points(const ModelSurface& surface, const SurfacePoint& p,
                                        double r, int count) {
    std::vector<SurfacePoint> pts;
    pts.reserve(count);
    if (surface.is_torus()) {
        const double rho = r * std::sqrt(surface.tau().imag());
        for (int k = 0; k < count; ++k) {
            const double th = kTwoPi * k / count;
            pts.push_back(surface.point(p.z + rho * Complex(std::cos(th), std::sin(th))));
        }
        return pts;
    }
    const double alpha = 2.0 * std::sqrt(kPi) * r;
    const Eigen::Vector3d u = ModelSurface::sphere_unit3(p);
    Eigen::Vector3d e1 = u.cross(Eigen::Vector3d(0.0, 0.0, 1.0));
    if (e1.norm() < 1e-8) e1 = u.cross(Eigen::Vector3d(1.0, 0.0, 0.0));
    e1.normalize();
    const Eigen::Vector3d e2 = u.cross(e1);
    for (int k = 0; k < count; ++k) {
        const double th = kTwoPi * k / count;
        const Eigen::Vector3d v =
            std::cos(alpha) * u + std::sin(alpha) * (std::cos(th) * e1 + std::sin(th) * e2);
        if (v.z() > 1.0 - 1e-14) {
            pts.push_back(SurfacePoint{Complex(0, 0), true});
        } else {
            pts.push_back(SurfacePoint{Complex(v.x(), v.y()) / (1.0 - v.z()), false});
        }
    }
    return pts;
}

ExtReal potential_of_measure(const GreenKernel& kernel, const Measure& nu,
                             const SurfacePoint& x) {
    const auto& surface = kernel.surface();
    switch (nu.kind) {
        case Measure::Kind::Atoms: {
            KahanSum s;
            for (std::size_t i = 0; i < nu.points.size(); ++i) {
                if (surface.distance(nu.points[i], x) < kCollisionTol) return ExtReal::neg_inf();
                s.add(nu.atom_weights[static_cast<int>(i)] * kernel(nu.points[i], x));
            }
            return ExtReal(s.value());
        }
        case Measure::Kind::GridDensity: {
            KahanSum s;
            const auto& grid = *nu.grid;
            for (int k = 0; k < grid.size(); ++k) {
                const double mass = grid.weights[k] * nu.density[k];
                if (mass == 0.0) continue;
                if (surface.distance(grid.nodes[k], x) < kCollisionTol)
                    s.add(mass * cell_average_diagonal(kernel, grid.weights[k]));
                else
                    s.add(mass * kernel(grid.nodes[k], x));
            }
            return ExtReal(s.value());
        }
        case Measure::Kind::CircleUniform: {
            const int M = 256;
            const auto pts = circle_points(surface, nu.center, nu.radius, M);
            KahanSum s;
            for (const auto& y : pts) {
                if (surface.distance(y, x) < kCollisionTol) return ExtReal::neg_inf();
                s.add(kernel(y, x) / M);
            }
            return ExtReal(s.value());
        }
    }
    return ExtReal(0.0);
}

Potential potential_field(const GreenKernel& kernel, const Measure& nu, GridPtr grid,
                          PotentialNormalization norm) {
    const auto& surface = kernel.surface();
    Potential pot;
    pot.grid = grid;
    pot.normalization = norm;

    if (nu.kind == Measure::Kind::GridDensity && surface.is_torus() &&
        nu.grid->size() == grid->size() && nu.grid->n1 == grid->n1) {
        pot.values = torus_green_convolution(kernel, *grid, nu.density);
    } else {
        pot.values.resize(grid->size());
        Measure work = nu;
        if (nu.kind == Measure::Kind::CircleUniform) {
            const int M = 256;
            auto pts = circle_points(surface, nu.center, nu.radius, M);
            work = Measure::atoms(std::move(pts), Eigen::ArrayXd::Constant(M, 1.0 / M));
        }
        for (int k = 0; k < grid->size(); ++k) {
            const auto& x = grid->nodes[k];
            KahanSum s;
            if (work.kind == Measure::Kind::Atoms) {
                for (std::size_t i = 0; i < work.points.size(); ++i) {
                    const double w = work.atom_weights[static_cast<int>(i)];
                    if (surface.distance(work.points[i], x) < kCollisionTol)
                        s.add(w * cell_average_diagonal(kernel, grid->weights[k]));
                    else
                        s.add(w * kernel(work.points[i], x));
                }
            } else {
                const auto& g = *work.grid;
                for (int l = 0; l < g.size(); ++l) {
                    const double mass = g.weights[l] * work.density[l];
                    if (mass == 0.0) continue;
                    if (surface.distance(g.nodes[l], x) < kCollisionTol)
                        s.add(mass * cell_average_diagonal(kernel, g.weights[l]));
                    else
                        s.add(mass * kernel(g.nodes[l], x));
                }
            }
            pot.values[k] = s.value();
        }
    }

    if (norm == PotentialNormalization::MaxZero) pot.values -= pot.values.maxCoeff();
    return pot;
}

double density_pairing(const GreenKernel& kernel, const Measure& a, const Measure& b) {
    if (a.kind != Measure::Kind::GridDensity || b.kind != Measure::Kind::GridDensity)
        throw std::invalid_argument("density_pairing: grid densities only");
    if (a.grid->size() != b.grid->size())
        throw std::invalid_argument("density_pairing: mismatched grids");
    const auto& surface = kernel.surface();
    const auto& grid = *a.grid;

    if (surface.is_torus()) {
        const int N = grid.n1;
        const Eigen::MatrixXcd fa = dft2(a.density, N, false);
        const Eigen::MatrixXcd fb = dft2(b.density, N, false);
        KahanSum s;
        for (int m = 0; m < N; ++m)
            for (int n = 0; n < N; ++n) {
                const double g = kernel.torus_fourier_coefficient(signed_frequency(m, N),
                                                                  signed_frequency(n, N));
                if (g == 0.0) continue;
                s.add(g * (fa(m, n) * std::conj(fb(m, n))).real());
            }
        const double scale = 1.0 / (static_cast<double>(N) * N);
        return s.value() * scale * scale;
    }

    // direct double sum with cell-averaged diagonal
    KahanSum s;
    for (int k = 0; k < grid.size(); ++k) {
        const double mk = grid.weights[k] * a.density[k];
        if (mk == 0.0) continue;
        for (int l = 0; l < grid.size(); ++l) {
            const double ml = grid.weights[l] * b.density[l];
            if (ml == 0.0) continue;
            if (k == l)
                s.add(mk * ml * (std::log(std::sqrt(grid.weights[k] / kPi)) - 0.75 +
                                 kernel.smooth_remainder_diagonal()));
            else
                s.add(mk * ml * kernel(grid.nodes[k], grid.nodes[l]));
        }
    }
    return s.value();
}

ExtReal energy_I(const GreenKernel& kernel, const Measure& nu, const WeightField& phi) {
    const auto& surface = kernel.surface();
    if (nu.is_signed || std::abs(nu.total_mass() - 1.0) > 1e-8)
        throw std::invalid_argument("energy_I: nu must be a probability measure");

    switch (nu.kind) {
        case Measure::Kind::Atoms:
            return ExtReal::pos_inf();
        case Measure::Kind::GridDensity: {
            const double pair = density_pairing(kernel, nu, nu);
            KahanSum wsum;
            for (int k = 0; k < nu.grid->size(); ++k) {
                const double mass = nu.grid->weights[k] * nu.density[k];
                if (mass != 0.0) wsum.add(mass * phi(surface, nu.grid->nodes[k]));
            }
            return ExtReal(-pair + 2.0 * wsum.value());
        }
        case Measure::Kind::CircleUniform: {
            CircleSweep uniform;
            uniform.center = nu.center;
            uniform.radius = nu.radius;
            uniform.nodes = circle_points(surface, nu.center, nu.radius, 256);
            uniform.weights = Eigen::ArrayXd::Constant(256, 1.0 / 256.0);
            const double pair = sweep_self_energy(kernel, uniform);
            KahanSum wsum;
            for (const auto& y : uniform.nodes) wsum.add(phi(surface, y) / 256.0);
            return ExtReal(-pair + 2.0 * wsum.value());
        }
    }
    return ExtReal(0.0);
}

ExtReal discrete_energy(const GreenKernel& kernel, const Configuration& config) {
    const int m = config.size();
    if (m < 2) throw std::invalid_argument("discrete_energy: need at least two points");
    const auto& surface = kernel.surface();
    for (int j = 0; j < m; ++j)
        for (int k = j + 1; k < m; ++k)
            if (surface.distance(config.points[j], config.points[k]) < kCollisionTol)
                return ExtReal::neg_inf();
    KahanSum s;
    for (int j = 0; j < m; ++j)
        for (int k = j + 1; k < m; ++k) s.add(kernel(config.points[j], config.points[k]));
    return ExtReal(2.0 * s.value() / (static_cast<double>(m) * m));
}

double mean_weight(const ModelSurface& surface, const WeightField& phi,
                   const Configuration& config) {
    KahanSum s;
    for (const auto& p : config.points) s.add(phi(surface, p));
    return s.value() / config.size();
}

ExtReal functional_J(const GreenKernel& kernel, const Configuration& config,
                     const WeightField& phi) {
    const ExtReal e = discrete_energy(kernel, config);
    if (e.is_neg_inf()) return ExtReal::pos_inf();
    return ExtReal(-e.value() + 2.0 * mean_weight(kernel.surface(), phi, config));
}

ExtReal functional_Km(const GreenKernel& kernel, const Configuration& config,
                      const WeightField& phi) {
    const int m = config.size();
    if (m < 2) throw std::invalid_argument("functional_Km: need at least two points");
    const ExtReal e = discrete_energy(kernel, config);
    if (e.is_neg_inf()) return ExtReal::pos_inf();
    return ExtReal(-(static_cast<double>(m) / (m - 1)) * e.value() +
                   2.0 * mean_weight(kernel.surface(), phi, config));
}

CircleSweep sweep_to_circle(const GreenKernel& kernel, const SurfacePoint& p, double r,
                            int circle_nodes) {
    const auto& surface = kernel.surface();
    if (!(r > 0.0) || r > 0.4 * injectivity_scale(surface))
        throw std::invalid_argument("sweep_to_circle: radius outside the chart scale");

    CircleSweep sweep;
    sweep.center = p;
    sweep.radius = r;
    sweep.nodes = circle_points(surface, p, r, circle_nodes);

    // Collocation on a slightly larger circle: the swept potential has to
    // match the point potential there up to one additive constant.
    const auto colloc = circle_points(surface, p, 1.06 * r, circle_nodes);
    const int M = circle_nodes;
    Eigen::MatrixXd A(M + 1, M + 1);
    Eigen::VectorXd rhs(M + 1);
    for (int j = 0; j < M; ++j) {
        for (int k = 0; k < M; ++k) A(j, k) = kernel(colloc[j], sweep.nodes[k]) / M;
        A(j, M) = -1.0;
        rhs[j] = kernel(colloc[j], p);
    }
    for (int k = 0; k < M; ++k) A(M, k) = 1.0 / M;
    A(M, M) = 0.0;
    rhs[M] = 1.0;

    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
    sweep.weights = sol.head(M).array() / M;
    return sweep;
}

double sweep_potential(const GreenKernel& kernel, const CircleSweep& sweep,
                       const SurfacePoint& x) {
    KahanSum s;
    for (std::size_t k = 0; k < sweep.nodes.size(); ++k)
        s.add(sweep.weights[static_cast<int>(k)] * kernel(sweep.nodes[k], x));
    return s.value();
}

double sweep_self_energy(const GreenKernel& kernel, const CircleSweep& sweep) {
    const int M = static_cast<int>(sweep.nodes.size());
    const double diag = circle_diagonal(kernel, sweep.radius, M);
    KahanSum s;
    for (int j = 0; j < M; ++j)
        for (int k = 0; k < M; ++k) {
            const double w = sweep.weights[j] * sweep.weights[k];
            s.add(w * (j == k ? diag : kernel(sweep.nodes[j], sweep.nodes[k])));
        }
    return s.value();
}

double sweep_cross_energy(const GreenKernel& kernel, const CircleSweep& a,
                          const CircleSweep& b) {
    KahanSum s;
    for (std::size_t j = 0; j < a.nodes.size(); ++j)
        for (std::size_t k = 0; k < b.nodes.size(); ++k)
            s.add(a.weights[static_cast<int>(j)] * b.weights[static_cast<int>(k)] *
                  kernel(a.nodes[j], b.nodes[k]));
    return s.value();
}

} // namespace fekete
