#pragma once

// Two stereographic chart lattices covering the sphere. Chart 0 holds the
// |z| <= 1 hemisphere, chart 1 the image of w = 1/z. Each chart is a uniform
// Cartesian lattice with half-cell offsets; a node is "owned" when its chart
// coordinate lies in the closed unit disc, and stencils at owned nodes only
// reach nodes of the same lattice (the margin rings cover the overlap).

#include <complex>
#include <vector>

#include "fekete/surface.hpp"

namespace fekete {

struct SphereChartLattice {
    int n = 0;       // nodes per side
    double h = 0.0;  // spacing
    double extent = 0.0;

    explicit SphereChartLattice(int resolution) {
        h = 2.2 / resolution;
        n = resolution + 8;
        extent = 0.5 * n * h;
    }

    double coord(int i) const { return -extent + (i + 0.5) * h; }
    int index(int i, int j) const { return i * n + j; }
    int size() const { return n * n; }

    Complex chart_coord(int i, int j) const { return Complex(coord(i), coord(j)); }

    // Surface point of a node in the given chart (0: z = c, 1: z = 1/c).
    SurfacePoint point(int chart, int i, int j) const {
        const Complex c = chart_coord(i, j);
        if (chart == 0) return SurfacePoint{c, false};
        if (std::abs(c) < 1e-14) return SurfacePoint{Complex(0, 0), true};
        return SurfacePoint{1.0 / c, false};
    }

    bool owned(int i, int j) const { return std::abs(chart_coord(i, j)) <= 1.0; }

    // dd^c scale: [dd^c u]/omega = (1 + |c|^2)^2 / 2 * Laplacian_chart(u).
    double ddc_scale(int i, int j) const {
        const double r2 = std::norm(chart_coord(i, j));
        return 0.5 * (1.0 + r2) * (1.0 + r2);
    }

    // Bilinear interpolation of chart-sampled values at coordinate c.
    double interpolate(const Eigen::ArrayXd& values, Complex c) const {
        const double fi = (c.real() + extent) / h - 0.5;
        const double fj = (c.imag() + extent) / h - 0.5;
        int i0 = static_cast<int>(std::floor(fi));
        int j0 = static_cast<int>(std::floor(fj));
        i0 = std::max(0, std::min(n - 2, i0));
        j0 = std::max(0, std::min(n - 2, j0));
        const double si = fi - i0, sj = fj - j0;
        return (1 - si) * (1 - sj) * values[index(i0, j0)] +
               si * (1 - sj) * values[index(i0 + 1, j0)] +
               (1 - si) * sj * values[index(i0, j0 + 1)] +
               si * sj * values[index(i0 + 1, j0 + 1)];
    }
};

} // namespace fekete
