#include "support.hpp"

#include "holodisc/beltrami.hpp"
#include "holodisc/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace holodisc;

namespace {

StructureField scalar_constant(double a) { return StructureField::constant(CMatrix::Constant(1, 1, a)); }

StructureField wavy(double a) {
    return StructureField(
        1,
        [a](const CVector& z) {
            return CMatrix::Constant(1, 1, a * std::tanh(std::abs(z(0))) * std::exp(cplx(0, z(0).real())));
        },
        a);
}

GridField identity_disc(const GridPtr& g) { return GridField::sample(g, [](cplx z) { return z; }); }

}  // namespace

TEST_CASE("zero structure returns the holomorphic seed") {
    const GridPtr g = make_grid(32);
    const GridField W = GridField::sample(g, [](cplx z) { return std::exp(z); });
    const DiscSolution sol = solve_local(StructureField::zero(1), W);
    CHECK(sol.converged);
    CHECK(max_norm(sol.Z - W) == 0.0);
}

TEST_CASE("constant structure has the affine exact solution") {
    for (double a : {0.1, 0.3, 0.6}) {
        const GridPtr g = make_grid(48);
        const DiscSolution sol = solve_local(scalar_constant(a), identity_disc(g));
        CHECK(sol.converged);
        const GridField exact = GridField::sample(g, [a](cplx z) { return z + a * std::conj(z); });
        CHECK(max_norm(sol.Z - exact) < 5 * g->h());
        CHECK(pde_residual_max(exact, scalar_constant(a)) < 1e-2);
        // successive differences contract at rate about a
        for (std::size_t k = 2; k + 2 < sol.history.size(); ++k)
            CHECK(sol.history[k] <= (a + 0.05) * sol.history[k - 1]);
    }
}

TEST_CASE("residual and source of a Beltrami map") {
    const GridPtr g = make_grid(32);
    const GridField Z = GridField::sample(g, [](cplx z) { return z + 0.2 * std::conj(z); });
    const GridField r = pde_residual(Z, scalar_constant(0.2));
    // polar differences of a linear map are exact only up to O(h^2)
    CHECK(max_norm(r, nodes_within(*g, kInteriorRadius)) < 5e-3);
    const GridField src = beltrami_source(Z, scalar_constant(0.2));
    CHECK(max_norm(src - dbar(Z), nodes_within(*g, kInteriorRadius)) < 5e-3);
    CHECK_THROWS_AS(pde_residual(Z, StructureField::zero(2)), ShapeError);
}

TEST_CASE("Anderson acceleration reaches the same fixed point") {
    const GridPtr g = make_grid(32);
    SolveOptions plain, accel;
    accel.anderson_depth = 3;
    const DiscSolution a = solve_local(wavy(0.4), identity_disc(g), plain);
    const DiscSolution b = solve_local(wavy(0.4), identity_disc(g), accel);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(max_norm(a.Z - b.Z) < 1e-8);
    CHECK(b.iterations <= a.iterations);
}

TEST_CASE("iteration budget exhaustion is reported") {
    const GridPtr g = make_grid(16);
    SolveOptions opt;
    opt.max_iter = 2;
    opt.tol = 1e-14;
    try {
        solve_local(scalar_constant(0.5), identity_disc(g), opt);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.history().size() == 2);
    }
}

TEST_CASE("disc through a point") {
    const GridPtr g = make_grid(48);
    CVector p(1), v(1);
    p(0) = cplx(-0.2, 0.4);
    v(0) = cplx(0.0, 1.0);
    const ThroughPointResult r = disc_through_point(wavy(0.2), g, p, v, 1.0);
    CHECK(r.centre_error < 1e-6);
    CHECK(r.direction_angle < 1e-4);
    CHECK(r.disc.residual_pde < 1e-2);
    CHECK((r.value_at_centre - p).norm() == doctest::Approx(r.centre_error));
    CHECK_THROWS_AS(disc_through_point(wavy(0.2), g, p, CVector::Zero(1), 1.0), DomainError);
    CHECK_THROWS_AS(disc_through_point(wavy(0.2), g, CVector::Zero(2), v, 1.0), ShapeError);
}

TEST_CASE("centre jet of an affine disc") {
    const GridPtr g = make_grid(32);
    const GridField Z = GridField::sample(g, [](cplx z) { return cplx(0.1, 0.2) + z + 0.3 * std::conj(z); });
    const CentreJet jet = centre_jet(Z, scalar_constant(0.3), CVector::Constant(1, cplx(0.1, 0.2)), CVector::Ones(1));
    CHECK(std::abs(jet.value(0) - cplx(0.1, 0.2)) < 1e-3);
    CHECK(std::abs(jet.dx(0) - 1.3) < 1e-2);
}

TEST_CASE("regularity smoke test") {
    const RegularityReport rep =
        regularity_smoke(wavy(0.3), [](GridPtr g) { return identity_disc(g); }, {24, 48});
    CHECK(rep.levels.size() == 2);
    CHECK(rep.stable);
}
