#include "support.hpp"

#include "holodisc/errors.hpp"
#include "holodisc/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace holodisc;
using holodisc::testing::smooth_function;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("grid layout") {
    const DiscGrid g(8);
    CHECK(g.nt() == 16);
    CHECK(g.rings() == 9);
    CHECK(g.size() == 9 * 16);
    CHECK(g.radius(0) == doctest::Approx(1.0 / 16));
    CHECK(g.radius(8) == 1.0);
    CHECK(g.ring_weight(8) == 0.0);
    CHECK(g.boundary_index().size() == 16);
    CHECK(g.is_boundary(g.index(8, 3)));
    CHECK_FALSE(g.is_boundary(g.index(7, 3)));
    CHECK(std::abs(g.node(g.index(8, 4)) - cplx(0, 1)) < 1e-15);
    CHECK(g.h() == doctest::Approx(std::max(1.0 / 8, 2 * kPi / 16)));
}

TEST_CASE("grid rejects bad sizes") {
    CHECK_THROWS_AS(DiscGrid(1), DomainError);
    CHECK_THROWS_AS(DiscGrid(8, 6), DomainError);
}

TEST_CASE("per-grid cache builds once") {
    const GridPtr g = make_grid(4);
    int calls = 0;
    auto make = [&] {
        ++calls;
        return std::make_shared<const int>(7);
    };
    CHECK(*g->cached<int>("k", make) == 7);
    CHECK(*g->cached<int>("k", make) == 7);
    CHECK(calls == 1);
}

TEST_CASE("quadrature of radial monomials") {
    const GridPtr g = make_grid(64);
    CHECK(quadrature(GridField::sample(g, [](cplx) { return cplx(1); }))(0).real() == doctest::Approx(kPi).epsilon(1e-12));
    const double r2 = quadrature(GridField::sample(g, [](cplx z) { return cplx(std::norm(z)); }))(0).real();
    CHECK(r2 == doctest::Approx(kPi / 2).epsilon(1e-3));
    CHECK(std::abs(quadrature(GridField::sample(g, [](cplx z) { return z * z; }))(0)) < 1e-12);
}

TEST_CASE("Wirtinger derivatives of polynomials") {
    const GridPtr g = make_grid(64);
    const auto inner = nodes_within(*g, 0.9);
    const GridField z = GridField::sample(g, [](cplx t) { return t; });
    const GridField zb = z.conj();
    const GridField one = GridField::sample(g, [](cplx) { return cplx(1); });
    CHECK(max_norm(dbar(zb) - one, inner) < 1e-2);
    CHECK(max_norm(d(z) - one, inner) < 1e-2);
    CHECK(max_norm(dbar(z), inner) < 1e-2);
    const GridField zb2 = GridField::sample(g, [](cplx t) { return std::conj(t * t); });
    CHECK(max_norm(dbar(zb2) - 2.0 * zb, inner) < 2e-2);
    const GridField x = GridField::sample(g, [](cplx t) { return cplx(t.real()); });
    CHECK(max_norm(dx(x) - one, inner) < 1e-2);
    CHECK(max_norm(dy(x), inner) < 1e-2);
}

TEST_CASE("d and dbar commute with conjugation") {
    const auto fn = smooth_function(3);
    double err[2];
    int i = 0;
    for (int nr : {32, 64}) {
        const GridPtr g = make_grid(nr);
        const GridField f = GridField::sample(g, fn);
        err[i++] = max_norm(d(f.conj()) - dbar(f).conj(), nodes_within(*g, 0.8));
    }
    CHECK(err[0] < 1e-10);
    CHECK(err[1] < 1e-10);
}

TEST_CASE("interpolation reproduces smooth functions") {
    const GridPtr g = make_grid(64);
    const auto fn = smooth_function(9);
    const GridField f = GridField::sample(g, fn);
    for (cplx p : {cplx(0.0, 0.0), cplx(0.3, -0.2), cplx(-0.71, 0.5), cplx(0.999, 0.0), cplx(0.01, 0.0)})
        CHECK(std::abs(interpolate(f, p)(0) - fn(p)) < 5e-3);
    CHECK_THROWS_AS(interpolate(f, cplx(1.5, 0.0)), DomainError);
}

TEST_CASE("norms") {
    const GridPtr g = make_grid(32);
    const GridField one = GridField::sample(g, [](cplx) { return cplx(1); });
    CHECK(lp_norm(one, 2.0) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
    CHECK(lp_norm(one, 4.0) == doctest::Approx(std::pow(kPi, 0.25)).epsilon(1e-12));
    CHECK_THROWS_AS(lp_norm(one, 0.5), DomainError);

    const GridField pair = GridField::sample(g, 2, [](cplx) { return CVector{{cplx(3, 0), cplx(0, 4)}}; });
    CHECK(pointwise_norm(pair).maxCoeff() == doctest::Approx(5.0));
    CHECK(max_norm(pair) == doctest::Approx(5.0));

    CHECK(scale_norm(CVector::Ones(2), 1.0, default_scale_weights(2)) == doctest::Approx(std::sqrt(5.0)));
    CHECK(scale_norm(CVector::Ones(2), 0.0, default_scale_weights(2)) == doctest::Approx(std::sqrt(2.0)));

    const GridField z = GridField::sample(g, [](cplx t) { return t; });
    CHECK(holder_seminorm(z, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(holder_seminorm(one, 0.5) == 0.0);
}

TEST_CASE("Morrey ratio is stable for a smooth field") {
    const auto fn = smooth_function(21);
    const MorreyReport rep = morrey_check([&](GridPtr g) { return GridField::sample(g, fn); }, 4.0, {32, 64});
    CHECK(rep.stable);
    CHECK(rep.ratio.size() == 2);
    CHECK_THROWS_AS(morrey_check([&](GridPtr g) { return GridField::sample(g, fn); }, 2.0, {32}), DomainError);
}

TEST_CASE("field arithmetic and shape checks") {
    const GridPtr g = make_grid(8);
    const GridField a = GridField::sample(g, smooth_function(1));
    const GridField b = GridField::sample(g, smooth_function(2));
    CHECK(max_norm((a + b) - b - a) < 1e-14);
    CHECK(max_norm(a.conj().conj() - a) == 0.0);
    CHECK(max_norm(2.0 * a - (a + a)) < 1e-14);

    GridField two(g, 2);
    two.set_component(1, a);
    CHECK(max_norm(two.component(1) - a) == 0.0);
    CHECK_THROWS_AS(two + a, ShapeError);
    CHECK_NOTHROW(a + GridField::sample(make_grid(8), smooth_function(1)));
    CHECK_THROWS_AS(a + GridField::sample(make_grid(16), smooth_function(1)), ShapeError);
    CHECK_THROWS_AS(GridField(g, 0), ShapeError);
    CHECK_THROWS_AS(two.set_scale_weights({1.0}), ShapeError);
}
