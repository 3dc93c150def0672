#include "fekete/green.hpp"

#include <functional>
#include <random>

#include "fekete/special.hpp"
#include "fekete/sphere_charts.hpp"

namespace fekete {

namespace {

// Tanh-sinh rule; handles the integrable log endpoint of the zonal kernel.
double tanh_sinh_integral(const std::function<double(double)>& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const double h = 1.0 / 64.0;
    KahanSum s;
    for (int k = -260; k <= 260; ++k) {
        const double t = k * h;
        const double sh = 0.5 * kPi * std::sinh(t);
        const double x = std::tanh(sh);
        const double w = 0.5 * kPi * std::cosh(t) / (std::cosh(sh) * std::cosh(sh));
        if (w < 1e-18) continue;
        const double y = mid + half * x;
        if (y <= a || y >= b) continue;
        s.add(w * f(y));
    }
    return s.value() * half * h;
}

// Mean of the sphere kernel log sin(Theta/2) against the area form; zonal,
// so it reduces to one dimension. (Closed form -1/2, recovered numerically.)
double sphere_zonal_kernel_mean() {
    static const double value = tanh_sinh_integral(
        [](double th) { return std::log(std::sin(0.5 * th)) * 0.5 * std::sin(th); }, 0.0, kPi);
    return value;
}

double torus_min_lattice_length(Complex tau) {
    double best = 1e300;
    for (int m = -1; m <= 1; ++m)
        for (int n = -1; n <= 1; ++n) {
            if (m == 0 && n == 0) continue;
            best = std::min(best, std::abs(static_cast<double>(m) + static_cast<double>(n) * tau));
        }
    return best;
}

// Screened log template on the torus: sum over the 3x3 image block of
// -(1/2) E_1(eta^2 |u + lambda|^2) in chart coordinates.
double torus_template(const ModelSurface& surface, double eta2, Complex u) {
    const Complex uc = surface.shortest_representative(u);
    const Complex tau = surface.tau();
    KahanSum s;
    for (int m = -1; m <= 1; ++m)
        for (int n = -1; n <= 1; ++n) {
            const Complex w = uc + static_cast<double>(m) + static_cast<double>(n) * tau;
            const double r2 = std::norm(w);
            if (r2 < 1e-300) return -1e300; // caller guards the pole
            const double arg = eta2 * r2;
            if (arg > 46.0) continue;
            s.add(-0.5 * expint_e1(arg));
        }
    return s.value();
}

// Chart Laplacian of the torus template away from the pole.
double torus_template_chart_laplacian(const ModelSurface& surface, double eta2, Complex u) {
    const Complex uc = surface.shortest_representative(u);
    const Complex tau = surface.tau();
    KahanSum s;
    for (int m = -1; m <= 1; ++m)
        for (int n = -1; n <= 1; ++n) {
            const Complex w = uc + static_cast<double>(m) + static_cast<double>(n) * tau;
            const double arg = eta2 * std::norm(w);
            if (arg > 46.0) continue;
            s.add(-2.0 * eta2 * std::exp(-arg));
        }
    return s.value();
}

constexpr double kSphereEta2 = 6.0;

// Sphere screen in t = sin^2(Theta/2): -(1/2) E_1(eta^2 t). Its spherical
// Laplacian is (1/2) e^{-eta^2 t} (eta^2 (t - 1) - 1) away from the pole.
double sphere_template(double t) {
    if (t < 1e-300) return -1e300;
    return -0.5 * expint_e1(kSphereEta2 * t);
}
double sphere_template_s2_laplacian(double t) {
    return 0.5 * std::exp(-kSphereEta2 * t) * (kSphereEta2 * (t - 1.0) - 1.0);
}

double compute_c0(const ModelSurface& surface, double eta2, int resolution,
                  const SurfacePoint& base) {
    if (surface.is_sphere()) {
        // The kernel mean is independent of the base point by rotation
        // invariance; one zonal integral determines the constant.
        (void)resolution;
        (void)base;
        return -sphere_zonal_kernel_mean();
    }
    const auto grid = make_grid(surface, resolution);
    const double im = surface.tau().imag();
    KahanSum s;
    for (int k = 0; k < grid->size(); ++k) {
        const Complex u = grid->nodes[k].z - base.z;
        const double core = log_theta1_gaussian(u, surface.tau());
        s.add(grid->weights[k] * (core - torus_template(surface, eta2, u)));
    }
    const double template_mean = -kPi / (2.0 * im * eta2);
    return -(s.value() + template_mean);
}

} // namespace

GreenKernel::GreenKernel(const ModelSurface& surface, int constant_resolution)
    : surface_(surface), constant_resolution_(constant_resolution) {
    if (surface_.is_torus()) {
        const double l = torus_min_lattice_length(surface_.tau());
        eta2_ = 15.0 / (l * l);
    } else {
        eta2_ = kSphereEta2;
    }
    c0_ = compute_c0(surface_, eta2_, constant_resolution_,
                     surface_.point(Complex(0.37, surface_.is_torus() ? 0.29 * surface_.tau().imag() : 0.0)));
}

double GreenKernel::kernel_core(const SurfacePoint& x, const SurfacePoint& y) const {
    if (surface_.is_torus())
        return log_theta1_gaussian(x.z - y.z, surface_.tau());
    return std::log(ModelSurface::sphere_sin_half_angle(x, y));
}

double GreenKernel::operator()(const SurfacePoint& x, const SurfacePoint& y) const {
    if (surface_.distance(x, y) < kCollisionTol)
        throw std::domain_error("green: kernel pole at coincident points");
    return kernel_core(x, y) + c0_;
}

double GreenKernel::smooth_remainder(const SurfacePoint& x, const SurfacePoint& y) const {
    const double d = surface_.distance(x, y);
    if (d < kCollisionTol) return smooth_remainder_diagonal();
    return kernel_core(x, y) + c0_ - std::log(d);
}

double GreenKernel::smooth_remainder_diagonal() const {
    if (surface_.is_torus())
        return std::log(std::abs(theta1_prime0(surface_.tau()))) +
               0.5 * std::log(surface_.tau().imag()) + c0_;
    return 0.5 * std::log(kPi) + c0_;
}

double GreenKernel::torus_fourier_coefficient(int m, int n) const {
    if (!surface_.is_torus())
        throw std::invalid_argument("torus_fourier_coefficient: torus only");
    if (m == 0 && n == 0) return 0.0;
    const Complex tau = surface_.tau();
    const Complex w = static_cast<double>(n) - static_cast<double>(m) * std::conj(tau);
    return -tau.imag() / (kTwoPi * std::norm(w));
}

double GreenKernel::screened_template(const SurfacePoint& x, const SurfacePoint& y) const {
    if (surface_.is_torus()) return torus_template(surface_, eta2_, y.z - x.z);
    const double s = ModelSurface::sphere_sin_half_angle(x, y);
    return sphere_template(s * s);
}

double GreenKernel::screened_template_mean() const {
    if (surface_.is_torus()) return -kPi / (2.0 * surface_.tau().imag() * eta2_);
    // Zonal integral of the sphere screen against the area form.
    return tanh_sinh_integral(
        [](double th) {
            const double sh = std::sin(0.5 * th);
            return sphere_template(sh * sh) * 0.5 * std::sin(th);
        },
        0.0, kPi);
}

double GreenKernel::screened_template_ddc(const SurfacePoint& x, const SurfacePoint& y) const {
    if (surface_.is_torus()) {
        const double lap = torus_template_chart_laplacian(surface_, eta2_, y.z - x.z);
        return surface_.tau().imag() / kTwoPi * lap;
    }
    const double s = ModelSurface::sphere_sin_half_angle(x, y);
    return 2.0 * sphere_template_s2_laplacian(s * s);
}

VerifyGreenReport GreenKernel::verify(const SurfacePoint& x, int resolution,
                                      double pole_guard) const {
    const auto grid = make_grid(surface_, resolution);
    VerifyGreenReport report;

    // Smooth part W = G - T on the grid; the template carries the log pole.
    Eigen::ArrayXd W(grid->size());
    double min_dist = 1e300;
    for (int k = 0; k < grid->size(); ++k) {
        const auto& node = grid->nodes[k];
        min_dist = std::min(min_dist, surface_.distance(x, node));
        W[k] = kernel_core(x, node) + c0_ - screened_template(x, node);
    }
    if (min_dist < pole_guard)
        throw std::invalid_argument("verify_green: base point collides with a grid node");

    // Mean residual. Torus: spectral lattice rule on the smooth part plus the
    // exact template mean. Sphere: the kernel mean is zonal; reduce to 1D.
    if (surface_.is_torus()) {
        KahanSum s;
        for (int k = 0; k < grid->size(); ++k) s.add(grid->weights[k] * W[k]);
        report.mean_residual = std::abs(s.value() + screened_template_mean());
    } else {
        report.mean_residual = std::abs(sphere_zonal_kernel_mean() + c0_);
    }

    // Discrete dd^c of W plus the analytic template contribution, in units
    // of the area form; G satisfies dd^c G = -omega off the pole.
    double metric_step;
    double max_lap = 0.0;
    if (surface_.is_torus()) {
        const Complex tau = surface_.tau();
        const int N = grid->n1;
        const double h = 1.0 / N;
        const double im = tau.imag(), re = tau.real();
        const double caa = 1.0 + (re / im) * (re / im);
        const double cbb = 1.0 / (im * im);
        const double cab = -2.0 * re / (im * im);
        metric_step = std::max(1.0, std::abs(tau)) / N / std::sqrt(im);
        const double excl = 5.0 * metric_step;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const int k = grid->index(i, j);
                if (surface_.distance(x, grid->nodes[k]) <= excl) continue;
                const double wij = W[k];
                const double da = W[grid->index(grid->wrap1(i + 1), j)] - 2.0 * wij +
                                  W[grid->index(grid->wrap1(i - 1), j)];
                const double db = W[grid->index(i, grid->wrap2(j + 1))] - 2.0 * wij +
                                  W[grid->index(i, grid->wrap2(j - 1))];
                const double dab = W[grid->index(grid->wrap1(i + 1), grid->wrap2(j + 1))] -
                                   W[grid->index(grid->wrap1(i + 1), grid->wrap2(j - 1))] -
                                   W[grid->index(grid->wrap1(i - 1), grid->wrap2(j + 1))] +
                                   W[grid->index(grid->wrap1(i - 1), grid->wrap2(j - 1))];
                const double lap_chart = (caa * da + cbb * db) / (h * h) + cab * dab / (4.0 * h * h);
                const double resid = im / kTwoPi * lap_chart +
                                     screened_template_ddc(x, grid->nodes[k]) + 1.0;
                max_lap = std::max(max_lap, std::abs(resid));
            }
    } else {
        // Flat 5-point stencil on the two stereographic chart lattices; the
        // latitude grid has no second-order stencil at its coordinate poles.
        const SphereChartLattice lat(resolution);
        metric_step = lat.h / std::sqrt(kPi);
        const double excl = 5.0 * metric_step;
        Eigen::ArrayXd V(lat.size());
        for (int chart = 0; chart < 2; ++chart) {
            for (int i = 0; i < lat.n; ++i)
                for (int j = 0; j < lat.n; ++j) {
                    const auto p = lat.point(chart, i, j);
                    V[lat.index(i, j)] =
                        kernel_core(x, p) + c0_ - screened_template(x, p);
                }
            for (int i = 1; i + 1 < lat.n; ++i)
                for (int j = 1; j + 1 < lat.n; ++j) {
                    if (!lat.owned(i, j)) continue;
                    const auto p = lat.point(chart, i, j);
                    if (surface_.distance(x, p) <= excl) continue;
                    const double lap = (V[lat.index(i + 1, j)] + V[lat.index(i - 1, j)] +
                                        V[lat.index(i, j + 1)] + V[lat.index(i, j - 1)] -
                                        4.0 * V[lat.index(i, j)]) /
                                       (lat.h * lat.h);
                    const double resid = lat.ddc_scale(i, j) * lap +
                                         screened_template_ddc(x, p) + 1.0;
                    max_lap = std::max(max_lap, std::abs(resid));
                }
        }
    }
    report.laplacian_residual = max_lap;

    // Sampled Lipschitz quotient of the remainder G - log dist.
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_int_distribution<int> pick(0, grid->size() - 1);
    double max_quot = 0.0;
    for (int trial = 0; trial < 400; ++trial) {
        const auto& y1 = grid->nodes[pick(rng)];
        const auto& y2 = grid->nodes[pick(rng)];
        const double d12 = surface_.distance(y1, y2);
        if (d12 < 1e-6) continue;
        if (surface_.distance(x, y1) < pole_guard || surface_.distance(x, y2) < pole_guard)
            continue;
        const double q = std::abs(smooth_remainder(x, y1) - smooth_remainder(x, y2)) / d12;
        max_quot = std::max(max_quot, q);
    }
    report.lipschitz_bound = max_quot;
    return report;
}

double green_normalization(const ModelSurface& surface, int resolution) {
    return green_normalization(surface, resolution,
                               surface.point(Complex(0.37, surface.is_torus()
                                                               ? 0.29 * surface.tau().imag()
                                                               : 0.0)));
}

double green_normalization(const ModelSurface& surface, int resolution,
                           const SurfacePoint& base) {
    double eta2 = kSphereEta2;
    if (surface.is_torus()) {
        const double l = torus_min_lattice_length(surface.tau());
        eta2 = 15.0 / (l * l);
    }
    return compute_c0(surface, eta2, resolution, base);
}

} // namespace fekete
