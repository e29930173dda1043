#include "support.hpp"

#include "holodisc/beltrami.hpp"
#include "holodisc/errors.hpp"
#include "holodisc/singular.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace holodisc;
using holodisc::testing::smooth_function;

namespace {

constexpr double kPi = std::numbers::pi;

GridField sample(const GridPtr& g, const std::function<cplx(cplx)>& f) { return GridField::sample(g, f); }

}  // namespace

TEST_CASE("Cauchy transform of monomials in conj(z)") {
    // T(conj(z)^k) = conj(z)^{k+1} / (k+1) inside the disc
    const GridPtr g = make_grid(64);
    for (int k = 0; k <= 3; ++k) {
        const GridField f = sample(g, [k](cplx z) { return std::pow(std::conj(z), k); });
        const GridField exact = sample(g, [k](cplx z) { return std::pow(std::conj(z), k + 1) / double(k + 1); });
        CHECK(max_norm(cauchy_T(f) - exact) < 2e-3);
    }
    // T(z) = |z|^2 - 1
    const GridField Tz = cauchy_T(sample(g, [](cplx z) { return z; }));
    CHECK(max_norm(Tz - sample(g, [](cplx z) { return cplx(std::norm(z) - 1.0); })) < 2e-3);
}

TEST_CASE("FFT evaluation agrees with the direct sum") {
    const GridPtr g = make_grid(12);
    const GridField f = sample(g, smooth_function(4));
    CHECK(max_norm(cauchy_T(f) - cauchy_T_direct(f)) < 1e-11);
}

TEST_CASE("pointwise Cauchy transform") {
    const GridPtr g = make_grid(48);
    const GridField one = sample(g, [](cplx) { return cplx(1); });
    // outside the disc T1 = 1/z
    CHECK(std::abs(cauchy_T_at(one, cplx(2.0, 0.0))(0) - 0.5) < 1e-3);
    CHECK(std::abs(cauchy_T_at(one, cplx(0.2, 0.3))(0) - cplx(0.2, -0.3)) < 1e-3);
    const GridField f = sample(g, smooth_function(5));
    const GridField T = cauchy_T(f);
    const Eigen::Index n = g->index(20, 7);
    CHECK(std::abs(cauchy_T_at(f, g->node(n))(0) - T(n)) < 1e-3);

    const GridField R = cauchy_T_reflected(f);
    for (auto b : g->boundary_index()) CHECK(R(b) == T(b));
}

TEST_CASE("dbar inverts T, T1 and T2 in the interior") {
    const auto fn = smooth_function(6);
    const FieldOperator ops[] = {cauchy_T, op_T1, [](const GridField& f) { return op_T2(f); }};
    for (const auto& op : ops) {
        double err[2];
        int i = 0;
        for (int nr : {32, 64}) {
            const GridPtr g = make_grid(nr);
            const GridField f = sample(g, fn);
            err[i++] = max_norm(dbar(op(f)) - f, nodes_within(*g, kInteriorRadius));
        }
        CHECK(err[1] < 0.65 * err[0]);
        CHECK(err[1] < 0.05);
    }
}

TEST_CASE("Beurling transform") {
    const GridPtr g = make_grid(64);
    const auto inner = nodes_within(*g, 0.8);
    // S(z) = conj(z), S(conj z) = 0
    CHECK(max_norm(beurling_S(sample(g, [](cplx z) { return z; })) - sample(g, [](cplx z) { return std::conj(z); }),
                   inner) < 2e-2);
    CHECK(max_norm(beurling_S(sample(g, [](cplx z) { return std::conj(z); })), inner) < 2e-2);

    const GridPtr small = make_grid(16);
    const GridField f = sample(small, smooth_function(8));
    const auto mid = nodes_within(*small, 0.6);
    CHECK(max_norm(beurling_S(f) - beurling_S_pv(f), mid) < 0.1 * max_norm(beurling_S(f), mid));
}

TEST_CASE("discrete Beurling transform has no growing modes") {
    // power iteration for the largest gain of f -> conj(S f) on random data
    for (int nr : {16, 48}) {
        const GridPtr g = make_grid(nr);
        std::mt19937_64 rng(1);
        std::normal_distribution<double> normal;
        GridField f(g, 1);
        for (Eigen::Index n = 0; n < g->size(); ++n) f(n) = cplx(normal(rng), normal(rng));
        double gain = 0.0;
        for (int it = 0; it < 100; ++it) {
            const GridField next = beurling_S(f).conj();
            gain = lp_norm(next, 2) / lp_norm(f, 2);
            f = next * cplx(1.0 / max_norm(next));
        }
        CAPTURE(nr);
        CHECK(gain < 1.05);
    }
}

TEST_CASE("weighted T1 converges to T1 at first order") {
    double previous = 0.0;
    for (int nr : {32, 64}) {
        const GridPtr g = make_grid(nr);
        const GridField f = sample(g, smooth_function(10));
        const double gap = max_norm(op_T1_weighted(f) - op_T1(f));
        if (previous > 0.0) CHECK(gap < 0.6 * previous);
        previous = gap;
    }
    CHECK(previous < 0.06);
}

TEST_CASE("boundary conditions of T1 and T2") {
    const GridPtr g = make_grid(64);
    for (int trial = 0; trial < 3; ++trial) {
        const GridField f = sample(g, smooth_function(10 + trial));
        const GridField t1 = op_T1(f), t2 = op_T2(f);
        for (auto b : g->boundary_index()) {
            CHECK(std::abs(t1(b).real()) < 1e-12);
            CHECK(triangle_bc_residual(g->node(b), t2(b)) < 1e-10);
        }
    }
    // T1(1) = conj(z) - z
    const GridField T1one = op_T1(sample(g, [](cplx) { return cplx(1); }));
    CHECK(max_norm(T1one - sample(g, [](cplx z) { return std::conj(z) - z; })) < 2e-3);
}

TEST_CASE("triangle line conditions") {
    CHECK(triangle_arc(0.3) == 1);
    CHECK(triangle_arc(2.0) == 2);
    CHECK(triangle_arc(4.0) == 3);
    // on arc 3 (lower half circle) the value must be real
    CHECK(triangle_bc_residual(std::polar(1.0, 4.0), cplx(0.3, 0.0)) == 0.0);
    CHECK(triangle_bc_residual(std::polar(1.0, 4.0), cplx(0.3, 0.2)) == doctest::Approx(0.2));
    // on arc 1 the value must lie on the line of slope -1
    CHECK(triangle_bc_residual(std::polar(1.0, 0.3), cplx(0.5, -0.5)) < 1e-15);
    CHECK(std::abs(sqrt_cut_positive(cplx(-1.0, 0.0)) - cplx(0, 1)) < 1e-15);
}

TEST_CASE("weights") {
    const WeightSpec q = boundary_weight();
    CHECK(std::abs(q(cplx(0.3, 0.1)) - (cplx(0.3, 0.1) - 1.0)) < 1e-14);
    CHECK(q.sum_alpha() == 1.0);
    const WeightSpec r = triangle_weight();
    CHECK(std::abs(r(0.0) - std::polar(1.0, 3 * kPi / 4)) < 1e-14);
    CHECK(r.sum_alpha() == doctest::Approx(1.0));
    const cplx z(0.2, -0.4);
    const double h = 1e-6;
    const cplx fd = (r(z + h) - r(z - h)) / (2 * h);
    CHECK(std::abs(fd / r(z) - r.log_derivative(z)) < 1e-6);
    CHECK(r.in_window(2.05));
    CHECK_THROWS_AS(WeightSpec({{cplx(0.5, 0.0), 0.5}}), DomainError);
    CHECK_THROWS_AS(WeightSpec({{cplx(1.0, 0.0), 1.5}}), DomainError);
}

TEST_CASE("weighted operators") {
    const GridPtr g = make_grid(64);
    const GridField f = sample(g, smooth_function(14));
    const auto inner = nodes_within(*g, kInteriorRadius);
    WeightReport rep;
    const GridField tq = weighted_TQ(f, triangle_weight(), &rep);
    CHECK(rep.excluded_nodes == 3);
    CHECK(max_norm(dbar(tq) - f, inner) < 0.05);
    CHECK(max_norm(weighted_SQ(f, triangle_weight()) - d(tq), inner) < 0.05);
    const Eigen::Index n = g->index(30, 11);
    CHECK(std::abs(weighted_TQ_at(f, triangle_weight(), g->node(n))(0) - tq(n)) < 5e-3);
    CHECK(std::abs(op_T2_at(f, g->node(n))(0) - op_T2(f)(n)) < 5e-3);
    CHECK(std::abs(op_T1_at(f, g->node(n))(0) - op_T1(f)(n)) < 5e-3);
}

TEST_CASE("Cauchy integral and Schwarz integral") {
    const GridPtr g = make_grid(32);
    CMatrix trace(g->nt(), 1);
    for (int k = 0; k < g->nt(); ++k) {
        const cplx t = std::polar(1.0, g->angle(k));
        trace(k, 0) = t * t + 1.0 / t;
    }
    const GridField K = boundary_cauchy_K(g, trace);
    CHECK(max_norm(K - sample(g, [](cplx z) { return z * z; })) < 1e-12);

    CMatrix real(g->nt(), 1);
    for (int k = 0; k < g->nt(); ++k) real(k, 0) = std::cos(g->angle(k)) + 2.0;
    const GridField F = schwarz_integral(g, real);
    CHECK(max_norm(F - sample(g, [](cplx z) { return z + 2.0; })) < 1e-12);

    const CMatrix tr = boundary_trace(F);
    CHECK(tr.rows() == g->nt());
    CHECK_THROWS_AS(boundary_cauchy_K(g, CMatrix::Zero(3, 1)), ShapeError);
}

TEST_CASE("operator norm estimates") {
    const GridPtr g = make_grid(32);
    const OpNormEstimate id = estimate_opnorm([](const GridField& f) { return f; }, g, 3.0, 8, 1);
    CHECK(id.estimate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(id.running.size() == 8);
    CHECK(std::is_sorted(id.running.begin(), id.running.end()));

    const GridField a = opnorm_test_field(g, 12, 3), b = opnorm_test_field(g, 12, 3);
    CHECK(max_norm(a - b) == 0.0);

    const double s = estimate_opnorm([](const GridField& f) { return beurling_S(f); }, g, 2.0, 20, 1).estimate;
    CHECK(s > 0.95);
    CHECK(s < 1.05);
    CHECK_THROWS_AS(estimate_opnorm([](const GridField& f) { return f; }, g, 2.0, 0, 1), DomainError);
}

TEST_CASE("singular integral J(alpha, beta) against a series") {
    // For z = 0 and z0 = 1 the angular average of |1 - r e^{it}|^{-alpha} is
    // sum_k c_k^2 r^{2k} with c_k = (alpha/2)_k / k!.
    const double alpha = 0.5, beta = 1.8;
    double c = 1.0, series = 0.0;
    for (int k = 0; k < 400000; ++k) {
        series += c * c / (2.0 * k + 2.0 - beta);
        c *= (alpha / 2 + k) / (k + 1.0);
    }
    const double expected = 2 * kPi * series;
    CHECK(j_alpha_beta(alpha, beta, cplx(1, 0), cplx(0, 0)) == doctest::Approx(expected).epsilon(1e-6));
    CHECK_THROWS_AS(j_alpha_beta(0.5, 1.0, cplx(1, 0), 0.0), DomainError);
    CHECK_THROWS_AS(j_alpha_beta(1.0, 1.5, cplx(0.5, 0), 0.0), DomainError);
}
