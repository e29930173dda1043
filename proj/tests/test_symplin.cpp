#include "support.hpp"

#include "holodisc/errors.hpp"
#include "holodisc/symplin.hpp"

#include <doctest.h>

#include <cmath>

using namespace holodisc;
using holodisc::testing::random_vector;

namespace {

RLinearOp random_op(Eigen::Index n, std::mt19937_64& rng) {
    CMatrix P(n, n), Q(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        P.col(j) = random_vector(n, rng);
        Q.col(j) = random_vector(n, rng);
    }
    return {P, Q};
}

double distance(const RLinearOp& a, const RLinearOp& b) {
    return (a.P() - b.P()).norm() + (a.Q() - b.Q()).norm();
}

}  // namespace

TEST_CASE("R-linear operators act as P u + Q conj(u)") {
    std::mt19937_64 rng(1);
    const RLinearOp f = random_op(3, rng);
    const CVector u = random_vector(3, rng);
    CHECK((f(u) - (f.P() * u + f.Q() * u.conjugate())).norm() < 1e-14);
    CHECK((RLinearOp::standard_complex(3)(u) - cplx(0, 1) * u).norm() < 1e-15);
    CHECK((RLinearOp::conjugation(3)(u) - u.conjugate()).norm() < 1e-15);
}

TEST_CASE("real view round trip and algebra") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 1 + trial % 4;
        const RLinearOp f = random_op(n, rng), g = random_op(n, rng);
        CHECK(distance(RLinearOp::from_real(f.real_matrix()), f) < 1e-12);
        const CVector u = random_vector(n, rng);
        CHECK(((f * g)(u) - f(g(u))).norm() < 1e-11 * (1 + u.norm()));
        CHECK(((f + g)(u) - (f(u) + g(u))).norm() < 1e-12 * (1 + u.norm()));
        CHECK(distance(f * f.inverse(), RLinearOp::identity(n)) < 1e-9);
        // real adjoint: Re <f u, v> = Re <u, f^* v>
        const CVector v = random_vector(n, rng);
        CHECK(std::abs(f(u).dot(v).real() - u.dot(f.adjoint()(v)).real()) < 1e-10);
        CHECK(f.norm() == doctest::Approx(f.real_matrix().operatorNorm()).epsilon(1e-10));
    }
    CHECK_THROWS_AS(RLinearOp::zero(2).inverse(), SingularityError);
    CHECK_THROWS_AS(RLinearOp(CMatrix::Zero(2, 2), CMatrix::Zero(3, 3)), ShapeError);
}

TEST_CASE("symplectic form") {
    std::mt19937_64 rng(3);
    const CVector u = random_vector(4, rng), v = random_vector(4, rng);
    CHECK(omega(u, cplx(0, 1) * u) == doctest::Approx(u.squaredNorm()));
    CHECK(omega(u, v) == doctest::Approx(-omega(v, u)));
    CVector e1 = CVector::Zero(1), ei = CVector::Zero(1);
    e1(0) = 1.0;
    ei(0) = cplx(0, 1);
    CHECK(omega(e1, ei) == doctest::Approx(1.0));
}

TEST_CASE("random symplectomorphisms preserve omega") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index n = 1 + trial % 5;
        const RLinearOp f = random_symplectomorphism(n, 0.6, rng);
        const CVector u = random_vector(n, rng), v = random_vector(n, rng);
        CHECK(omega(f(u), f(v)) == doctest::Approx(omega(u, v)).epsilon(1e-9));
        CHECK(preserves_omega(f).preserves);
        CHECK(dual_identities(f).preserves);
        CHECK(distance(symplectic_inverse(f), f.inverse()) < 1e-8);
        const double ratio = norm_antiholomorphic_ratio(f);
        CHECK(ratio < 1.0);
        CHECK(ratio == doctest::Approx(antiholomorphic_ratio_closed_form(f)).epsilon(1e-9));
    }
    CHECK_FALSE(preserves_omega(2.0 * RLinearOp::identity(2)).preserves);
    CHECK_THROWS_AS(symplectic_inverse(2.0 * RLinearOp::identity(2)), DomainError);
}

TEST_CASE("Hamiltonian flows form a one-parameter group") {
    RMatrix S = RMatrix::Zero(4, 4);
    S << 2, 1, 0, 0, 1, 1, 0.5, 0, 0, 0.5, 3, 0, 0, 0, 0, 1;
    const RLinearOp a = hamiltonian_flow(S, 0.3), b = hamiltonian_flow(S, 0.2), ab = hamiltonian_flow(S, 0.5);
    CHECK(distance(a * b, ab) < 1e-12);
    CHECK(preserves_omega(ab, 1e-12).preserves);
    CHECK(distance(hamiltonian_flow(S, 0.0), RLinearOp::identity(2)) < 1e-15);
    // H = |z|^2 / 2 generates the unitary rotation e^{-it}
    const RLinearOp rot = hamiltonian_flow(RMatrix::Identity(2, 2), 0.7);
    CHECK(std::abs(std::abs(rot.P()(0, 0)) - 1.0) < 1e-12);
    CHECK(rot.Q().norm() < 1e-14);
    CHECK_THROWS_AS(hamiltonian_flow(RMatrix::Identity(3, 3), 1.0), ShapeError);
}

TEST_CASE("linear almost complex structures") {
    const LinearACS st = LinearACS::standard(3);
    CHECK(complex_representation(st).norm() < 1e-14);
    CHECK(is_compatible(st));
    CHECK(is_tamed(st));

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const RLinearOp f = random_symplectomorphism(2 + trial % 3, 0.4, rng);
        const LinearACS J = LinearACS::direct_image(f);
        const CVector u = random_vector(J.dim(), rng);
        CHECK((J.J()(J.J()(u)) + u).norm() < 1e-9 * u.norm());
        const CompatibilityReport rep = compatibility_report(J);
        CHECK(rep.compatible);
        CHECK(rep.norm_A < 1.0);
        CHECK(is_tamed(J, 300, 9));
        const LBoundReport L = taming_bound_L(J, 200, 3);
        CHECK(L.strict);
        CHECK(L.max_ratio <= rep.norm_A + 1e-9);
    }
    CHECK_THROWS_AS(LinearACS(RLinearOp::identity(2)), DomainError);
}

TEST_CASE("tamed but not compatible structure with norm approaching one") {
    for (int n : {1, 3, 6}) {
        std::vector<double> c;
        for (int k = 1; k <= n; ++k) c.push_back(1.0 - std::ldexp(1.0, -k));
        const LinearACS J = build_unit_norm_example(c);
        CHECK(J.dim() == 2 * n);
        CHECK(is_tamed(J));
        CHECK_FALSE(is_compatible(J));
        CHECK(spectral_norm(complex_representation(J)) == doctest::Approx(c.back()).epsilon(1e-12));
        const TamingReport t = taming_report(J, 200, 1);
        CHECK(t.min_symmetric_eig > 0.0);
    }
    CHECK_THROWS_AS(build_unit_norm_example({}), DomainError);
    CHECK_THROWS_AS(build_unit_norm_example({1.0}), DomainError);
}

TEST_CASE("structure fields") {
    const StructureField zero = StructureField::zero(2);
    CHECK(zero.is_zero());
    CHECK(zero(CVector::Ones(2)).norm() == 0.0);

    const StructureField c = StructureField::constant(CMatrix::Constant(1, 1, 0.4));
    CHECK(c.bound() == doctest::Approx(0.4));
    CHECK_THROWS_AS(StructureField::constant(CMatrix::Constant(1, 1, 1.2)), DomainError);

    const StructureField radial(
        1, [](const CVector& z) { return CMatrix::Constant(1, 1, 0.5 * std::abs(z(0))); }, 0.3);
    CVector p(1);
    p(0) = 0.4;
    CHECK(radial.check_bound({p}) == doctest::Approx(0.2));
    p(0) = 0.9;
    CHECK_THROWS_AS(radial.check_bound({p}), DomainError);
    const StructureField shrunk = radial.dilated(0.5);
    CHECK(std::abs(shrunk(p)(0, 0)) == doctest::Approx(0.225));
    CHECK_THROWS_AS(radial(CVector::Ones(2)), ShapeError);
}
