#include "fekete/surface.hpp"

namespace fekete {

GridPtr make_grid(const ModelSurface& surface, int resolution) {
    if (resolution < 16) throw std::invalid_argument("make_grid: resolution must be >= 16");
    auto grid = std::make_shared<Grid>();
    grid->surface = surface;
    grid->resolution = resolution;

    if (surface.is_torus()) {
        const int n = resolution;
        grid->n1 = n;
        grid->n2 = n;
        grid->nodes.resize(static_cast<std::size_t>(n) * n);
        grid->weights = Eigen::ArrayXd::Constant(n * n, 1.0 / (static_cast<double>(n) * n));
        const Complex tau = surface.tau();
        for (int i = 0; i < n; ++i) {
            const double a = (i + 0.5) / n;
            for (int j = 0; j < n; ++j) {
                const double b = (j + 0.5) / n;
                grid->nodes[grid->index(i, j)] =
                    SurfacePoint{Complex(a + b * tau.real(), b * tau.imag()), false};
            }
        }
        return grid;
    }

    // Sphere: midpoint latitudes, uniform longitudes. The half-cell offset in
    // theta keeps both poles off the node set.
    const int n1 = resolution;
    const int n2 = 2 * resolution;
    grid->n1 = n1;
    grid->n2 = n2;
    grid->theta.resize(n1);
    grid->nodes.resize(static_cast<std::size_t>(n1) * n2);
    grid->weights.resize(n1 * n2);
    const double dth = kPi / n1;
    const double dph = kTwoPi / n2;
    for (int i = 0; i < n1; ++i) {
        const double th = (i + 0.5) * dth;
        grid->theta[i] = th;
        const double w = std::sin(th) * dth * dph / (4.0 * kPi);
        const double r = std::tan(0.5 * th); // stereographic radius from the south-chart pole
        for (int j = 0; j < n2; ++j) {
            const double ph = j * dph;
            grid->nodes[grid->index(i, j)] =
                SurfacePoint{Complex(r * std::cos(ph), r * std::sin(ph)), false};
            grid->weights[grid->index(i, j)] = w;
        }
    }
    grid->weights /= grid->weights.sum();
    return grid;
}

double WeightField::operator()(const ModelSurface& surface, const SurfacePoint& x) const {
    if (name == "zero") return 0.0;
    if (name == "const") return params.at(0);
    if (name == "smooth") {
        const double amp = params.at(0);
        if (surface.is_torus()) {
            auto [a, b] = surface.lattice_coords(x.z);
            return amp * (std::cos(kTwoPi * a) + 0.5 * std::sin(kTwoPi * b) +
                          0.25 * std::cos(kTwoPi * (a + b)));
        }
        const Eigen::Vector3d u = ModelSurface::sphere_unit3(x);
        return amp * (u.z() + 0.5 * u.x() * u.y() + 0.25 * u.x());
    }
    if (name == "hoelder") {
        const double amp = params.at(0);
        const double g = params.at(1);
        const SurfacePoint x0 = surface.point(Complex(params.at(2), params.at(3)));
        return amp * std::pow(surface.distance(x, x0), g);
    }
    if (name == "gauss") {
        const double amp = params.at(0);
        const double w = params.at(1);
        const SurfacePoint x0 = surface.point(Complex(params.at(2), params.at(3)));
        const double d = surface.distance(x, x0);
        return amp * std::exp(-d * d / (w * w));
    }
    throw std::invalid_argument("WeightField: unknown builtin '" + name + "'");
}

} // namespace fekete
