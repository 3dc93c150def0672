#include "doctest.h"

#include <cmath>
#include <random>

#include "fekete/surface.hpp"

using namespace fekete;

namespace {

// Independent oracle for the sphere meridian length: numeric quadrature of
// the chart line element 1/(sqrt(pi) (1 + r^2)) over r in [0, inf), folded
// onto [0, 1] by the r -> 1/r symmetry.
double meridian_length_oracle() {
    const int n = 20000;
    const double h = 1.0 / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r0 = i * h, r1 = (i + 1) * h, rm = r0 + 0.5 * h;
        auto f = [](double r) { return 1.0 / (std::sqrt(kPi) * (1.0 + r * r)); };
        s += h / 6.0 * (f(r0) + 4.0 * f(rm) + f(r1));
    }
    return 2.0 * s;
}

SurfacePoint random_point(const ModelSurface& surface, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (surface.is_torus()) {
        const Complex tau = surface.tau();
        const double a = u01(rng), b = u01(rng);
        return surface.point(Complex(a + b * tau.real(), b * tau.imag()));
    }
    // area-uniform on the sphere
    const double z = 2.0 * u01(rng) - 1.0;
    const double ph = kTwoPi * u01(rng);
    const double th = std::acos(z);
    const double r = std::tan(0.5 * th);
    return SurfacePoint{Complex(r * std::cos(ph), r * std::sin(ph)), false};
}

} // namespace

TEST_CASE("torus distances: flat metric periods") {
    const auto torus = ModelSurface::torus(Complex(0.0, 1.0));
    CHECK(torus.distance(torus.point(0.0), torus.point(0.5)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(torus.distance(torus.point(0.0), torus.point(Complex(0.5, 0.5))) ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
    // wrap-around: 0.9 is 0.1 away from 0
    CHECK(torus.distance(torus.point(0.0), torus.point(0.9)) == doctest::Approx(0.1).epsilon(1e-13));
}

TEST_CASE("sphere distance pole to pole") {
    const auto sphere = ModelSurface::sphere();
    const double d = sphere.distance(sphere.point(0.0), sphere.infinity());
    CHECK(d == doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-12));
    CHECK(d == doctest::Approx(meridian_length_oracle()).epsilon(1e-7));
}

TEST_CASE("distance symmetry and triangle inequality") {
    for (const auto& surface : {ModelSurface::torus(Complex(0.3, 1.2)), ModelSurface::sphere()}) {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto x = random_point(surface, rng);
            const auto y = random_point(surface, rng);
            const auto z = random_point(surface, rng);
            const double dxy = surface.distance(x, y);
            const double dyx = surface.distance(y, x);
            CHECK(std::abs(dxy - dyx) <= 1e-12);
            CHECK(surface.distance(x, z) <= dxy + surface.distance(y, z) + 1e-12);
            CHECK(dxy >= 0.0);
        }
        const auto p = random_point(surface, rng);
        CHECK(surface.distance(p, p) == 0.0);
    }
}

TEST_CASE("torus quadrature grid: uniform flat weights") {
    const auto torus = ModelSurface::torus(Complex(0.0, 1.0));
    const auto grid = make_grid(torus, 64);
    CHECK(grid->size() == 4096);
    CHECK(grid->weights.minCoeff() == doctest::Approx(1.0 / 4096).epsilon(1e-15));
    CHECK(grid->weights.maxCoeff() == doctest::Approx(1.0 / 4096).epsilon(1e-15));
    CHECK(std::abs(grid->weights.sum() - 1.0) < 1e-12);
}

TEST_CASE("grid mass is one on both surfaces") {
    for (const auto& surface : {ModelSurface::torus(Complex(0.2, 0.9)), ModelSurface::sphere()}) {
        for (int res : {16, 37, 128}) {
            const auto grid = make_grid(surface, res);
            CHECK(std::abs(grid->weights.sum() - 1.0) < 1e-12);
            CHECK(grid->weights.minCoeff() > 0.0);
        }
    }
    CHECK_THROWS_AS(make_grid(ModelSurface::sphere(), 8), std::invalid_argument);
}

TEST_CASE("sphere quadrature kills an antisymmetric harmonic") {
    const auto sphere = ModelSurface::sphere();
    const auto grid = make_grid(sphere, 128);
    KahanSum s;
    for (int k = 0; k < grid->size(); ++k) {
        const Complex z = grid->nodes[k].z;
        s.add(grid->weights[k] * z.real() / (1.0 + std::norm(z)));
    }
    CHECK(std::abs(s.value()) < 1e-6);
}

TEST_CASE("quadrature refinement order on the flat torus") {
    const auto torus = ModelSurface::torus(Complex(0.0, 1.0));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uamp(0.5, 1.5), uph(0.0, kTwoPi);
    std::uniform_int_distribution<int> ufreq(1, 3);

    double slope_sum = 0.0;
    int slope_count = 0;
    for (int field = 0; field < 20; ++field) {
        const double amp = uamp(rng), phase = uph(rng);
        const int k1 = ufreq(rng), k2 = ufreq(rng);
        auto f = [&](const SurfacePoint& p) {
            auto [a, b] = torus.lattice_coords(p.z);
            return std::exp(amp * std::sin(kTwoPi * (k1 * a + k2 * b) + phase));
        };
        std::vector<double> logR, logE;
        for (int R : {16, 24, 32, 48}) {
            const auto g1 = make_grid(torus, R);
            const auto g2 = make_grid(torus, 2 * R);
            KahanSum s1, s2;
            for (int k = 0; k < g1->size(); ++k) s1.add(g1->weights[k] * f(g1->nodes[k]));
            for (int k = 0; k < g2->size(); ++k) s2.add(g2->weights[k] * f(g2->nodes[k]));
            const double err = std::abs(s1.value() - s2.value());
            if (err > 1e-15) {
                logR.push_back(std::log(static_cast<double>(R)));
                logE.push_back(std::log(err));
            }
        }
        if (logR.size() < 2) continue; // already at machine precision
        // least-squares slope
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < logR.size(); ++i) { mx += logR[i]; my += logE[i]; }
        mx /= logR.size();
        my /= logE.size();
        double num = 0, den = 0;
        for (std::size_t i = 0; i < logR.size(); ++i) {
            num += (logR[i] - mx) * (logE[i] - my);
            den += (logR[i] - mx) * (logR[i] - mx);
        }
        slope_sum += num / den;
        ++slope_count;
    }
    if (slope_count > 0) CHECK(slope_sum / slope_count <= -1.8);
}

TEST_CASE("region membership") {
    const auto torus = ModelSurface::torus(Complex(0.0, 1.0));
    const auto full = Region::full();
    CHECK(full.contains(torus, torus.point(Complex(0.123, 0.7))));

    const auto disc = Region::union_of_discs({torus.point(0.0)}, {0.2});
    CHECK(disc.contains(torus, torus.point(0.1)));
    CHECK(!disc.contains(torus, torus.point(0.5)));
    CHECK(disc.contains(torus, torus.point(0.2))); // boundary is inside

    const auto hole = Region::complement_of_discs({torus.point(0.0)}, {0.2});
    CHECK(!hole.contains(torus, torus.point(0.1)));
    CHECK(hole.contains(torus, torus.point(0.5)));
    CHECK(hole.contains(torus, torus.point(0.2))); // boundary is inside
}

TEST_CASE("region mask idempotence") {
    const auto torus = ModelSurface::torus(Complex(0.1, 1.3));
    const auto grid = make_grid(torus, 32);
    const auto region =
        Region::union_of_discs({torus.point(Complex(0.2, 0.3)), torus.point(Complex(0.7, 0.9))},
                               {0.15, 0.22});
    const auto m1 = region.mask(*grid);
    const auto m2 = region.mask(*grid);
    REQUIRE(m1.size() == m2.size());
    for (int k = 0; k < m1.size(); ++k) CHECK(m1[k] == m2[k]);
    CHECK(m1.count() > 0);
    CHECK(m1.count() < m1.size());
}

TEST_CASE("weighted set validation") {
    const auto torus = ModelSurface::torus(Complex(0.0, 1.0));
    const auto grid = make_grid(torus, 32);

    WeightedSet ok{Region::full(), WeightField::zero(), 1.0, Measure::omega(grid)};
    CHECK_NOTHROW(ok.validate(torus));

    WeightedSet bad_gamma{Region::full(), WeightField::zero(), 1.5, Measure::omega(grid)};
    CHECK_THROWS_AS(bad_gamma.validate(torus), std::invalid_argument);

    auto heavy = Measure::grid_density(grid, Eigen::ArrayXd::Constant(grid->size(), 2.0));
    WeightedSet bad_mass{Region::full(), WeightField::zero(), 1.0, heavy};
    CHECK_THROWS_AS(bad_mass.validate(torus), std::invalid_argument);

    // mass escapes the region
    WeightedSet escaped{Region::union_of_discs({torus.point(0.0)}, {0.1}),
                        WeightField::zero(), 1.0, Measure::omega(grid)};
    CHECK_THROWS_AS(escaped.validate(torus), std::invalid_argument);
}

TEST_CASE("point canonicalization on the torus") {
    const auto torus = ModelSurface::torus(Complex(0.25, 0.8));
    const auto p = torus.point(Complex(3.7, -1.9) + Complex(5.0, 0.0));
    auto [a, b] = torus.lattice_coords(p.z);
    CHECK(a >= 0.0);
    CHECK(a < 1.0);
    CHECK(b >= 0.0);
    CHECK(b < 1.0);
    // same lattice class as the original
    const auto q = torus.point(Complex(3.7, -1.9) + Complex(5.0, 0.0) + Complex(2.0, 0.0) +
                               Complex(0.25, 0.8) * 3.0);
    CHECK(std::abs(p.z - q.z) < 1e-12);
}
