#pragma once

// Model-surface geometry: the round sphere (stereographic chart, normalized
// Fubini-Study area form) and flat tori C/(Z + tau Z) (flat area form).
// Total area-form mass is 1 on both surfaces, so the form doubles as the
// reference probability measure. Distances are the ones induced by that
// normalization: the sphere has radius 1/(2 sqrt(pi)), the torus metric is
// |dz|/sqrt(Im tau).

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fekete/numerics.hpp"

namespace fekete {

enum class SurfaceKind { Sphere, Torus };

struct SurfacePoint {
    Complex z{0.0, 0.0};
    bool at_infinity = false;
};

class ModelSurface {
public:
    static ModelSurface sphere() { return ModelSurface(SurfaceKind::Sphere, Complex(0.0, 1.0)); }
    static ModelSurface torus(Complex tau) {
        if (!(tau.imag() > 0.0)) throw std::invalid_argument("torus: Im(tau) must be positive");
        return ModelSurface(SurfaceKind::Torus, tau);
    }

    SurfaceKind kind() const { return kind_; }
    bool is_torus() const { return kind_ == SurfaceKind::Torus; }
    bool is_sphere() const { return kind_ == SurfaceKind::Sphere; }
    Complex tau() const { return tau_; }
    int genus() const { return is_torus() ? 1 : 0; }

    // Lebesgue area of the fundamental domain (torus only).
    double cell_area() const { return tau_.imag(); }

    // Canonical point: tori reduce to the fundamental domain {a + b tau : a,b in [0,1)}.
    SurfacePoint point(Complex z) const {
        SurfacePoint p;
        p.z = is_torus() ? to_fundamental(z) : z;
        return p;
    }
    SurfacePoint infinity() const {
        if (!is_sphere()) throw std::invalid_argument("infinity: sphere only");
        SurfacePoint p;
        p.at_infinity = true;
        return p;
    }

    // Lattice coefficients of z: z = a + b tau.
    std::array<double, 2> lattice_coords(Complex z) const {
        const double b = z.imag() / tau_.imag();
        const double a = z.real() - b * tau_.real();
        return {a, b};
    }

    Complex to_fundamental(Complex z) const {
        auto [a, b] = lattice_coords(z);
        a -= std::floor(a);
        b -= std::floor(b);
        if (a >= 1.0) a = 0.0; // guard against -1e-17 rounding to 1
        if (b >= 1.0) b = 0.0;
        return Complex(a + b * tau_.real(), b * tau_.imag());
    }

    // Shortest lattice representative of a difference vector.
    Complex shortest_representative(Complex u) const {
        auto [a, b] = lattice_coords(u);
        const double a0 = a - std::round(a);
        const double b0 = b - std::round(b);
        Complex best(0.0, 0.0);
        double best2 = 1e300;
        for (int da = -1; da <= 1; ++da)
            for (int db = -1; db <= 1; ++db) {
                const Complex cand((a0 + da) + (b0 + db) * tau_.real(), (b0 + db) * tau_.imag());
                const double n2 = std::norm(cand);
                if (n2 < best2) {
                    best2 = n2;
                    best = cand;
                }
            }
        return best;
    }

    double distance(const SurfacePoint& x, const SurfacePoint& y) const {
        if (is_torus()) {
            if (x.at_infinity || y.at_infinity)
                throw std::invalid_argument("distance: infinity is not a torus point");
            return std::abs(shortest_representative(x.z - y.z)) / std::sqrt(tau_.imag());
        }
        const double s = sphere_sin_half_angle(x, y);
        return std::asin(std::min(1.0, s)) / std::sqrt(kPi); // R * Theta, R = 1/(2 sqrt(pi))
    }

    // Unit 3-vector of a stereographic point; stable for any |z|.
    static Eigen::Vector3d sphere_unit3(const SurfacePoint& p) {
        if (p.at_infinity) return Eigen::Vector3d(0.0, 0.0, 1.0);
        const double n2 = std::norm(p.z);
        const double d = 1.0 + n2;
        return Eigen::Vector3d(2.0 * p.z.real() / d, 2.0 * p.z.imag() / d, (n2 - 1.0) / d);
    }

    // sin(Theta/2) for the central angle Theta between two sphere points.
    static double sphere_sin_half_angle(const SurfacePoint& x, const SurfacePoint& y) {
        return 0.5 * (sphere_unit3(x) - sphere_unit3(y)).norm();
    }

private:
    ModelSurface(SurfaceKind k, Complex tau) : kind_(k), tau_(tau) {}
    SurfaceKind kind_;
    Complex tau_;
};

inline bool same_surface(const ModelSurface& a, const ModelSurface& b) {
    return a.kind() == b.kind() && (!a.is_torus() || a.tau() == b.tau());
}

// Structured quadrature grid. Tori carry a uniform (a, b) lattice with
// half-cell offsets; spheres a latitude-longitude grid, midpoint in the
// polar angle. Node (i, j) lives at flat index i * n2 + j.
struct Grid {
    ModelSurface surface = ModelSurface::sphere();
    int resolution = 0;
    int n1 = 0, n2 = 0;
    std::vector<SurfacePoint> nodes;
    Eigen::ArrayXd weights; // probability weights, sum = 1

    // sphere only: polar angles and their quadrature structure
    Eigen::ArrayXd theta; // size n1

    int size() const { return n1 * n2; }
    int index(int i, int j) const { return i * n2 + j; }
    int wrap1(int i) const { return (i % n1 + n1) % n1; }
    int wrap2(int j) const { return (j % n2 + n2) % n2; }
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(const ModelSurface& surface, int resolution);

inline double integrate(const Grid& grid, const Eigen::ArrayXd& field) {
    return (grid.weights * field).sum();
}

// Compact region with C^2 (circle) boundary pieces. Closed: boundary points
// are members.
struct Region {
    enum class Kind { FullSurface, UnionOfDiscs, ComplementOfDiscs };
    Kind kind = Kind::FullSurface;
    std::vector<SurfacePoint> centers;
    std::vector<double> radii;

    static Region full() { return Region{}; }
    static Region union_of_discs(std::vector<SurfacePoint> c, std::vector<double> r) {
        check_sizes(c, r);
        return Region{Kind::UnionOfDiscs, std::move(c), std::move(r)};
    }
    static Region complement_of_discs(std::vector<SurfacePoint> c, std::vector<double> r) {
        check_sizes(c, r);
        return Region{Kind::ComplementOfDiscs, std::move(c), std::move(r)};
    }

    bool contains(const ModelSurface& surface, const SurfacePoint& x) const {
        switch (kind) {
            case Kind::FullSurface:
                return true;
            case Kind::UnionOfDiscs: {
                for (std::size_t i = 0; i < centers.size(); ++i)
                    if (surface.distance(centers[i], x) <= radii[i]) return true;
                return false;
            }
            case Kind::ComplementOfDiscs: {
                for (std::size_t i = 0; i < centers.size(); ++i)
                    if (surface.distance(centers[i], x) < radii[i]) return false;
                return true;
            }
        }
        return false;
    }

    Eigen::Array<bool, Eigen::Dynamic, 1> mask(const Grid& grid) const {
        Eigen::Array<bool, Eigen::Dynamic, 1> m(grid.size());
        for (int k = 0; k < grid.size(); ++k) m[k] = contains(grid.surface, grid.nodes[k]);
        return m;
    }

private:
    static void check_sizes(const std::vector<SurfacePoint>& c, const std::vector<double>& r) {
        if (c.empty() || c.size() != r.size())
            throw std::invalid_argument("Region: need matching nonempty centers/radii");
        for (double rad : r)
            if (!(rad > 0.0)) throw std::invalid_argument("Region: radii must be positive");
    }
};

// Probability or signed measure in one of three concrete representations.
struct Measure {
    enum class Kind { GridDensity, Atoms, CircleUniform };
    Kind kind = Kind::GridDensity;

    // GridDensity: density w.r.t. the area form, sampled on grid nodes.
    GridPtr grid;
    Eigen::ArrayXd density;

    // Atoms
    std::vector<SurfacePoint> points;
    Eigen::ArrayXd atom_weights;

    // CircleUniform: arclength-uniform unit mass on a metric circle.
    SurfacePoint center;
    double radius = 0.0;

    bool is_signed = false;

    static Measure omega(GridPtr g) {
        Measure m;
        m.kind = Kind::GridDensity;
        m.grid = std::move(g);
        m.density = Eigen::ArrayXd::Ones(m.grid->size());
        return m;
    }
    static Measure grid_density(GridPtr g, Eigen::ArrayXd dens, bool signed_measure = false) {
        Measure m;
        m.kind = Kind::GridDensity;
        m.grid = std::move(g);
        m.density = std::move(dens);
        m.is_signed = signed_measure;
        if (m.density.size() != m.grid->size())
            throw std::invalid_argument("Measure: density size mismatch");
        if (!signed_measure && (m.density < -1e-12).any())
            throw std::invalid_argument("Measure: negative density in unsigned measure");
        return m;
    }
    static Measure atoms(std::vector<SurfacePoint> pts, Eigen::ArrayXd w, bool signed_measure = false) {
        Measure m;
        m.kind = Kind::Atoms;
        m.points = std::move(pts);
        m.atom_weights = std::move(w);
        m.is_signed = signed_measure;
        if (static_cast<int>(m.points.size()) != m.atom_weights.size())
            throw std::invalid_argument("Measure: atom weight size mismatch");
        return m;
    }
    static Measure dirac(const SurfacePoint& p) {
        return atoms({p}, Eigen::ArrayXd::Ones(1));
    }
    static Measure circle_uniform(const SurfacePoint& c, double r) {
        if (!(r > 0.0)) throw std::invalid_argument("Measure: circle radius must be positive");
        Measure m;
        m.kind = Kind::CircleUniform;
        m.center = c;
        m.radius = r;
        return m;
    }

    double total_mass() const {
        switch (kind) {
            case Kind::GridDensity:
                return integrate(*grid, density);
            case Kind::Atoms:
                return atom_weights.sum();
            case Kind::CircleUniform:
                return 1.0;
        }
        return 0.0;
    }
};

// Named weight field; evaluation dispatches on the builtin id so configs
// round-trip exactly through JSON.
struct WeightField {
    std::string name = "zero";
    std::vector<double> params;

    static WeightField zero() { return WeightField{}; }
    static WeightField constant(double c) { return WeightField{"const", {c}}; }
    // amp * (sum of a few fixed low-frequency smooth modes)
    static WeightField smooth(double amp) { return WeightField{"smooth", {amp}}; }
    // amp * dist(x, x0)^gamma: exactly gamma-Hoelder, not C^1
    static WeightField hoelder_cusp(double amp, double gamma, Complex x0) {
        return WeightField{"hoelder", {amp, gamma, x0.real(), x0.imag()}};
    }
    static WeightField gauss_bump(double amp, double width, Complex x0) {
        return WeightField{"gauss", {amp, width, x0.real(), x0.imag()}};
    }

    double operator()(const ModelSurface& surface, const SurfacePoint& x) const;

    Eigen::ArrayXd sample(const Grid& grid) const {
        Eigen::ArrayXd v(grid.size());
        for (int k = 0; k < grid.size(); ++k) v[k] = (*this)(grid.surface, grid.nodes[k]);
        return v;
    }
};

// A weighted set (K, phi, mu) together with the Hoelder exponent of phi.
struct WeightedSet {
    Region region;
    WeightField phi;
    double gamma = 1.0;
    Measure mu;

    void validate(const ModelSurface& surface) const {
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw std::invalid_argument("WeightedSet: gamma must lie in (0, 1]");
        if (!mu.is_signed && std::abs(mu.total_mass() - 1.0) > 1e-10)
            throw std::invalid_argument("WeightedSet: mu must be a probability measure");
        if (mu.kind == Measure::Kind::GridDensity) {
            for (int k = 0; k < mu.grid->size(); ++k)
                if (mu.density[k] > 1e-12 && !region.contains(surface, mu.grid->nodes[k]))
                    throw std::invalid_argument("WeightedSet: supp(mu) exceeds the region");
        } else if (mu.kind == Measure::Kind::Atoms) {
            for (const auto& p : mu.points)
                if (!region.contains(surface, p))
                    throw std::invalid_argument("WeightedSet: atom outside the region");
        }
    }
};

} // namespace fekete
