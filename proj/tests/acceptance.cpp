// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.

#include "runner.hpp"

#include "holodisc/beltrami.hpp"
#include "holodisc/gluing.hpp"
#include "holodisc/nonsqueeze.hpp"
#include "holodisc/singular.hpp"
#include "holodisc/symplin.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace holodisc;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Verdict()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    fmt::print("[{}] {:2d} {:<28} {} ({:.1f} s)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail, secs);
    std::fflush(stdout);
}

/// Smooth non-holomorphic test function with random coefficients.
std::function<cplx(cplx)> smooth_function(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<cplx> c(10);
    for (auto& x : c) x = cplx(normal(rng), normal(rng));
    return [c](cplx z) {
        const cplx zb = std::conj(z);
        return c[0] + c[1] * z + c[2] * zb + c[3] * z * zb + c[4] * z * z + c[5] * zb * zb +
               c[6] * std::exp(0.5 * z * zb) + c[7] * std::sin(z + zb) + c[8] * z * z * zb +
               c[9] * std::cos(2.0 * z - zb);
    };
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

Verdict symplectic_identities() {
    std::mt19937_64 rng(2024);
    double id1 = 0.0, id2 = 0.0, ratio = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Eigen::Index n = 1 + i % 8;
        const RLinearOp f = random_symplectomorphism(n, 0.5 + 0.1 * (i % 5), rng);
        const CMatrix& P = f.P();
        const CMatrix& Q = f.Q();
        const CMatrix I = CMatrix::Identity(n, n);
        id1 = std::max({id1, (P.adjoint() * P - Q.transpose() * Q.conjugate() - I).norm(),
                        (P.transpose() * Q.conjugate() - Q.adjoint() * P).norm()});
        id2 = std::max({id2, (P * P.adjoint() - Q * Q.adjoint() - I).norm(),
                        (P * Q.transpose() - Q * P.transpose()).norm()});
        const double q = spectral_norm(Q);
        ratio = std::max(ratio, std::abs(norm_antiholomorphic_ratio(f) - q / std::sqrt(1.0 + q * q)));
    }
    return {id1 <= 1e-8 && id2 <= 1e-8 && ratio <= 1e-8,
            fmt::format("identity1 {:.1e}, identity2 {:.1e}, ratio {:.1e} (tol 1e-8)", id1, id2, ratio)};
}

Verdict unit_norm_example() {
    bool ok = true;
    std::string detail;
    for (int n : {2, 4, 8, 16}) {
        std::vector<double> c;
        for (int k = 1; k <= n; ++k) c.push_back(1.0 - std::ldexp(1.0, -k));
        const LinearACS J = build_unit_norm_example(c);
        const double normA = spectral_norm(complex_representation(J));
        const double err = std::abs(normA - *std::max_element(c.begin(), c.end()));
        const bool tamed = is_tamed(J), compatible = is_compatible(J);
        ok = ok && tamed && !compatible && err <= 1e-10;
        detail += fmt::format("n={}: |A|={:.6f} err {:.0e} tamed {} compat {}; ", n, normA, err, tamed, compatible);
    }
    return {ok, detail};
}

Verdict dbar_inverse() {
    double lo = 1e9, hi = 0.0;
    const GridPtr coarse = make_grid(64), fine = make_grid(128);
    const FieldOperator ops[] = {cauchy_T, op_T1, [](const GridField& f) { return op_T2(f); }};
    for (int trial = 0; trial < 5; ++trial) {
        const auto fn = smooth_function(11 + trial);
        for (const auto& op : ops) {
            double err[2];
            int level = 0;
            for (const GridPtr& g : {coarse, fine}) {
                const GridField f = GridField::sample(g, fn);
                err[level++] = max_norm(dbar(op(f)) - f, nodes_within(*g, kInteriorRadius));
            }
            lo = std::min(lo, err[1] / err[0]);
            hi = std::max(hi, err[1] / err[0]);
        }
    }
    return {lo >= 0.4 && hi <= 0.6, fmt::format("error ratio 128/64 in [{:.3f}, {:.3f}] (need [0.4, 0.6])", lo, hi)};
}

Verdict beurling_isometry() {
    const FieldOperator S = [](const GridField& f) { return beurling_S(f); };
    const double s64 = estimate_opnorm(S, make_grid(64), 2.0, 50, 1).estimate;
    const GridPtr g = make_grid(128);
    const double s128 = estimate_opnorm(S, g, 2.0, 50, 1).estimate;
    const double s1 = estimate_opnorm(op_S1, g, 2.05, 50, 1).estimate;
    const double s2 = estimate_opnorm(op_S2, g, 2.05, 50, 1).estimate;
    const bool ok = s128 >= 0.98 && s128 <= 1.02 && std::abs(s128 - 1) < std::abs(s64 - 1) &&
                    std::abs(s1 - 1) <= 0.05 && std::abs(s2 - 1) <= 0.05;
    return {ok, fmt::format("|S| {:.5f} (nr 64: {:.5f}), |S1| {:.4f}, |S2| {:.4f}", s128, s64, s1, s2)};
}

Verdict boundary_conditions() {
    const GridPtr g = make_grid(128);
    double re = 0.0, lines = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const GridField f = GridField::sample(g, smooth_function(31 + trial));
        const GridField t1 = op_T1(f), t2 = op_T2(f);
        for (auto n : g->boundary_index()) {
            re = std::max(re, std::abs(t1(n).real()));
            lines = std::max(lines, triangle_bc_residual(g->node(n), t2(n)));
        }
    }
    const double h = g->h();
    return {re <= 5 * h && lines <= 10 * std::sqrt(h),
            fmt::format("Re T1 {:.1e} (5h {:.1e}), T2 lines {:.1e} (10h^1/2 {:.1e})", re, 5 * h, lines,
                        10 * std::sqrt(h))};
}

Verdict exact_beltrami() {
    const GridPtr g = make_grid(96);
    const StructureField A = StructureField::constant(CMatrix::Constant(1, 1, 0.3));
    const DiscSolution sol = solve_local(A, GridField::sample(g, [](cplx z) { return z; }));
    double ratio = 0.0;
    for (std::size_t k = 1; k < sol.history.size(); ++k)
        if (sol.history[k] > 1e-12) ratio = std::max(ratio, sol.history[k] / sol.history[k - 1]);
    const double err = max_norm(sol.Z - GridField::sample(g, [](cplx z) { return z + 0.3 * std::conj(z); }));
    return {sol.converged && ratio <= 0.35 && err <= 5 * g->h(),
            fmt::format("converged {}, ratio {:.3f}, error {:.1e} (5h {:.1e})", sol.converged, ratio, err, 5 * g->h())};
}

Verdict through_point() {
    const StructureField A(
        1,
        [](const CVector& z) {
            return CMatrix::Constant(1, 1, 0.2 * std::tanh(std::abs(z(0))) * std::exp(cplx(0, z(0).real())));
        },
        0.2);
    CVector p(1), v(1);
    p(0) = cplx(0.3, 0.2);
    v(0) = 1.0;
    const ThroughPointResult r = disc_through_point(A, make_grid(96), p, v, 1.0);
    return {r.centre_error <= 1e-6 && r.disc.residual_pde <= 1e-3,
            fmt::format("|Z(0)-p| {:.1e}, pde {:.1e}", r.centre_error, r.disc.residual_pde)};
}

Verdict triangle_map() {
    const TriangleMap phi;
    const double verr = phi.vertex_error(), area = phi.area_boundary();
    return {verr <= 1e-8 && std::abs(area - 1) <= 1e-4,
            fmt::format("vertex error {:.1e}, area {:.8f}", verr, area)};
}

Verdict cylinder() {
    const GridPtr g = make_grid(96);
    const cplx z0(0.1, 0.3);
    const CVector w0 = CVector::Constant(1, cplx(0.2, 0.1));
    const CylinderSolution flat = solve_cylinder({StructureField::zero(2), z0, w0}, g);
    const GridField phi = TriangleMap().sample(g);
    double werr = 0.0;
    for (Eigen::Index n = 0; n < g->size(); ++n) werr = std::max(werr, std::abs(flat.disc.Z(n, 1) - w0(0)));
    const double zerr = max_norm(flat.disc.Z.component(0) - phi);

    CMatrix M = CMatrix::Zero(2, 2);
    M(0, 0) = M(1, 1) = 0.1;
    const CylinderSolution bent = solve_cylinder({StructureField::constant(M), z0, w0}, g);
    const bool ok = zerr <= 1e-10 && werr <= 1e-10 && std::abs(flat.disc.area - 1) <= 1e-4 &&
                    bent.disc.converged && bent.disc.residual_boundary <= 5 * g->h() &&
                    bent.disc.area >= 0.95 && bent.disc.area <= 1.05;
    return {ok, fmt::format("A=0: |z-Phi| {:.0e} |w-w0| {:.0e} area {:.6f}; a=0.1: conv {} bres {:.1e} area {:.4f}",
                            zerr, werr, flat.disc.area, bent.disc.converged, bent.disc.residual_boundary,
                            bent.disc.area)};
}

Verdict torus() {
    bool ok = true;
    std::string detail;
    for (int n : {2, 4}) {
        TorusProblem tp;
        tp.n = n;
        tp.a = [](cplx, cplx w) { return 0.2 * w; };
        tp.b = [](cplx z, cplx w) { return 0.2 * w * std::conj(z); };
        tp.a0 = tp.b0 = 0.2;
        double C[2];
        int level = 0;
        for (int nr : {64, 96}) {
            const GridPtr g = make_grid(nr);
            const TorusSolution s = solve_torus(tp, g);
            ok = ok && s.disc.converged && s.modulus_z <= 5 * g->h() && s.modulus_w <= 5 * g->h() && s.winding == 1;
            C[level++] = s.decay_constant;
            detail += fmt::format("n={} nr={}: moduli {:.0e}/{:.0e} wind {} C {:.4f}; ", n, nr, s.modulus_z,
                                  s.modulus_w, s.winding, s.decay_constant);
        }
        ok = ok && std::abs(C[1] - C[0]) <= 0.25 * std::max(C[0], C[1]);
    }
    return {ok, detail};
}

Verdict riemann_hilbert() {
    const GridPtr g = make_grid(128);
    const auto inner = nodes_within(*g, kInteriorRadius);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    double dbar_err = 0.0, bres = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const GridField f = GridField::sample(g, smooth_function(51 + trial));
        const double a = normal(rng), b = normal(rng), c = normal(rng), e = normal(rng);
        RVector h(g->nt());
        CMatrix data(g->nt(), 1);
        for (int k = 0; k < g->nt(); ++k) {
            const double t = g->angle(k);
            h(k) = a * std::cos(2 * t) + b * std::sin(t) + 0.1;
            data(k, 0) = c * std::sin(t) + e * std::cos(3 * t);
        }
        const RVector d = RVector::Constant(1, normal(rng));
        const GridField z = rh_solve_z(f, h, cplx(normal(rng), normal(rng)), normal(rng));
        const GridField w = rh_solve_w(f, data, d);
        dbar_err = std::max({dbar_err, max_norm(dbar(z) - f, inner), max_norm(dbar(w) - f, inner)});
        bres = std::max({bres, rh_z_boundary_residual(z, h), rh_w_boundary_residual(w, data, d)});
    }
    return {dbar_err <= 10 * g->h() && bres <= 10 * g->h(),
            fmt::format("dbar {:.1e}, boundary {:.1e} (10h {:.1e})", dbar_err, bres, 10 * g->h())};
}

Verdict nonsqueeze() {
    const GridPtr g = make_grid(64);
    const double r = 1.0, R = 1.0, eps = 0.05;
    const double lower = kPi * (r - 2 * eps) * (r - 2 * eps) - 0.02;
    const RMatrix S = random_quadratic_hamiltonian(4, 11);
    SqueezeReport flow;
    double t_used = 0.0;
    for (double t : {0.08, 0.06, 0.04, 0.02}) {
        if (structure_c1_bound(quadratic_flow(S, t), r, 200, 7).c1() > 0.05) continue;
        t_used = t;
        flow = nonsqueezing_experiment(quadratic_flow(S, t), r, R, g);
        break;
    }
    const SqueezeReport id = nonsqueezing_experiment(identity_map(4), r, R, g);
    auto good = [&](const SqueezeReport& rep) {
        return rep.failure.empty() && std::abs(rep.disc_area - kPi) <= 0.05 && rep.projected_area >= lower &&
               rep.verdict;
    };
    return {t_used > 0.0 && good(id) && good(flow),
            fmt::format("identity: area {:.4f} proj {:.4f} verdict {}; flow t={} c1 {:.3f}: area {:.4f} proj {:.4f} "
                        "verdict {} (need proj >= {:.4f})",
                        id.disc_area, id.projected_area, id.verdict, t_used, flow.bound.c1(), flow.disc_area,
                        flow.projected_area, flow.verdict, lower)};
}

Verdict morrey() {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto fn = smooth_function(71 + trial);
        const MorreyReport rep =
            morrey_check([&](GridPtr g) { return GridField::sample(g, fn); }, 4.0, {32, 64, 128}, 0.2);
        worst = std::max(worst, rep.max_relative_variation);
    }
    return {worst <= 0.2, fmt::format("max relative variation {:.3f} (tol 0.2)", worst)};
}

Verdict determinism() {
    const fs::path root = fs::temp_directory_path() / "holodisc-acceptance";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> runs = {
        {"symplin-check", {}},
        {"opnorm-study", {{"op", "S1"}, {"p", "2.05,3"}, {"nr", "32"}, {"trials", "10"}}},
        {"beltrami-solve", {{"nr", "32"}}},
        {"glue-cylinder", {{"nr", "32"}}},
        {"glue-torus", {{"nr", "32"}}},
        {"nonsqueeze", {{"nr", "32"}, {"phi", "quadratic"}}},
    };
    int compared = 0;
    std::string mismatch;
    for (const auto& [sub, overrides] : runs) {
        for (int rep = 0; rep < 2; ++rep) {
            cli::Settings s;
            s.subcommand = sub;
            s.params = cli::default_params(sub);
            for (const auto& [k, v] : overrides) cli::apply_override(s, k, {v});
            s.seed = 42;
            s.plots = true;
            s.out = root / fmt::format("{}-{}", sub, rep);
            cli::validate(s);
            cli::execute(s);
        }
        for (const auto& entry : fs::directory_iterator(root / (sub + "-0"))) {
            const auto ext = entry.path().extension();
            if (ext != ".csv" && ext != ".json" && ext != ".svg" && ext != ".field") continue;
            ++compared;
            if (slurp(entry.path()) != slurp(root / (sub + "-1") / entry.path().filename()))
                mismatch += sub + "/" + entry.path().filename().string() + " ";
        }
    }
    fs::remove_all(root);
    return {mismatch.empty() && compared > 0,
            mismatch.empty() ? fmt::format("{} artifacts identical across two runs", compared)
                             : "differs: " + mismatch};
}

}  // namespace

int main() {
    criterion(1, "symplectic identities", symplectic_identities);
    criterion(2, "unit-norm structure", unit_norm_example);
    criterion(3, "dbar inverse", dbar_inverse);
    criterion(4, "Beurling isometry", beurling_isometry);
    criterion(5, "boundary conditions", boundary_conditions);
    criterion(6, "exact Beltrami solution", exact_beltrami);
    criterion(7, "disc through point", through_point);
    criterion(8, "triangle map", triangle_map);
    criterion(9, "cylinder gluing", cylinder);
    criterion(10, "torus gluing", torus);
    criterion(11, "Riemann-Hilbert solvers", riemann_hilbert);
    criterion(12, "non-squeezing pipeline", nonsqueeze);
    criterion(13, "Morrey ratio", morrey);
    criterion(14, "determinism", determinism);
    fmt::print("{} of 14 criteria failed\n", failures);
    return failures;
}
