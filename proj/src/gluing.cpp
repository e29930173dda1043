#include "holodisc/gluing.hpp"

#include "holodisc/errors.hpp"
#include "holodisc/nonsqueeze.hpp"
#include "holodisc/singular.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace holodisc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

const std::array<cplx, 3> kPrevertex{cplx(1.0, 0.0), cplx(-1.0, 0.0), cplx(0.0, 1.0)};
const std::array<double, 3> kExponent{-0.75, -0.75, -0.5};
constexpr double kPrevertexSnap = 1e-12;

int prevertex_at(cplx z) {
    for (int k = 0; k < 3; ++k)
        if (std::abs(z - kPrevertex[k]) < kPrevertexSnap) return k;
    return -1;
}

double segment_distance(cplx a, cplx b, cplx p) {
    const cplx ab = b - a;
    const double L2 = std::norm(ab);
    double t = L2 > 0 ? std::real(std::conj(ab) * (p - a)) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(a + t * ab - p);
}

}  // namespace

QuadratureRule gauss_jacobi(int n, double a, double b) {
    if (n < 1) throw DomainError("gauss_jacobi: need at least one node");
    if (!(a > -1.0 && b > -1.0)) throw DomainError("gauss_jacobi: exponents must exceed -1");
    RMatrix J = RMatrix::Zero(n, n);
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        J(k, k) = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double m = k + 1.0;
            const double t = 2.0 * m + ab;
            const double beta = 4.0 * m * (m + a) * (m + b) * (m + ab) / (t * t * (t + 1.0) * (t - 1.0));
            J(k, k + 1) = J(k + 1, k) = std::sqrt(beta);
        }
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(J);
    const double mu0 = std::pow(2.0, ab + 1.0) * boost::math::tgamma(a + 1.0) *
                       boost::math::tgamma(b + 1.0) / boost::math::tgamma(ab + 2.0);
    QuadratureRule rule;
    for (int k = 0; k < n; ++k) {
        rule.nodes.push_back(es.eigenvalues()(k));
        const double v0 = es.eigenvectors()(0, k);
        rule.weights.push_back(mu0 * v0 * v0);
    }
    return rule;
}

double triangle_boundary_distance(cplx z) {
    return std::min({segment_distance(kPrevertex[1], kPrevertex[0], z),
                     segment_distance(kPrevertex[0], kPrevertex[2], z),
                     segment_distance(kPrevertex[2], kPrevertex[1], z)});
}

bool inside_triangle(cplx z, double margin) {
    const double x = z.real(), y = z.imag();
    return y > margin && y < 1.0 - std::abs(x) - margin * std::numbers::sqrt2;
}

// ---------------------------------------------------------------------------

TriangleMap::TriangleMap() : legendre_(gauss_jacobi(20, 0.0, 0.0)) {
    for (double beta : kExponent) jacobi_.push_back(gauss_jacobi(48, beta, 0.0));
    const cplx to_plus = integrate_to_prevertex(0.0, 0);
    const cplx to_minus = integrate_to_prevertex(0.0, 1);
    C_ = 2.0 / (to_plus - to_minus);
    phi0_ = 1.0 - C_ * to_plus;
}

cplx TriangleMap::F(cplx z) const {
    cplx f = 1.0;
    for (int k = 0; k < 3; ++k) f *= std::pow(1.0 - z * std::conj(kPrevertex[k]), kExponent[k]);
    return f;
}

cplx TriangleMap::cofactor(cplx z, int k) const {
    cplx f = 1.0;
    for (int j = 0; j < 3; ++j)
        if (j != k) f *= std::pow(1.0 - z * std::conj(kPrevertex[j]), kExponent[j]);
    return f;
}

cplx TriangleMap::integrate_to_prevertex(cplx a, int k) const {
    return integrate_from_offset(1.0 - a * std::conj(kPrevertex[k]), k);
}

// int_a^v F with a = v (1 - u): substituting 1 - s conj(v) = u x leaves the
// weight x^beta on [0, 1].
cplx TriangleMap::integrate_from_offset(cplx u, int k) const {
    const cplx v = kPrevertex[k];
    constexpr double kJacobiReach = 0.25;
    if (std::abs(u) > kJacobiReach) {
        const cplx um = u * (kJacobiReach / std::abs(u));
        return integrate_smooth(v * (1.0 - u), v * (1.0 - um), 0) + integrate_from_offset(um, k);
    }
    const double beta = kExponent[k];
    const auto& rule = jacobi_[k];
    cplx sum = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double x = 0.5 * (1.0 - rule.nodes[j]);
        sum += rule.weights[j] * cofactor(v * (1.0 - u * x), k);
    }
    return v * std::pow(u, beta + 1.0) * std::pow(2.0, -beta - 1.0) * sum;
}

cplx TriangleMap::integrate_smooth(cplx a, cplx b, int depth) const {
    double delta = std::numeric_limits<double>::infinity();
    for (const cplx& z : kPrevertex) delta = std::min(delta, segment_distance(a, b, z));
    if (std::abs(b - a) <= 0.5 * delta || depth > 80) {
        const cplx half = 0.5 * (b - a), mid = 0.5 * (a + b);
        cplx sum = 0.0;
        for (std::size_t j = 0; j < legendre_.nodes.size(); ++j)
            sum += legendre_.weights[j] * F(mid + half * legendre_.nodes[j]);
        return half * sum;
    }
    const cplx m = 0.5 * (a + b);
    return integrate_smooth(a, m, depth + 1) + integrate_smooth(m, b, depth + 1);
}

cplx TriangleMap::integrate(cplx a, cplx b) const {
    const int kb = prevertex_at(b), ka = prevertex_at(a);
    if (kb >= 0) return integrate_to_prevertex(a, kb);
    if (ka >= 0) return -integrate_to_prevertex(b, ka);
    return integrate_smooth(a, b, 0);
}

cplx TriangleMap::operator()(cplx z) const {
    if (std::abs(z) > 1.0 + 1e-12) throw DomainError("TriangleMap: point outside the closed disc");
    const int k = prevertex_at(z);
    if (k >= 0) return phi0_ + C_ * integrate_to_prevertex(0.0, k);
    if (std::abs(z) > 1.0 - 1e-9) {
        // on the circle: reach z along the chord from the nearest vertex
        int best = 0;
        for (int j = 1; j < 3; ++j)
            if (std::abs(z - kPrevertex[j]) < std::abs(z - kPrevertex[best])) best = j;
        return kPrevertex[best] - C_ * integrate_to_prevertex(z, best);
    }
    return phi0_ + C_ * integrate(0.0, z);
}

cplx TriangleMap::derivative(cplx z) const {
    if (prevertex_at(z) >= 0) return cplx(std::numeric_limits<double>::infinity(), 0.0);
    return C_ * F(z);
}

cplx TriangleMap::inverse(cplx w, double tol) const {
    cplx z = 0.0;
    for (int it = 0; it < 100; ++it) {
        const cplx step = ((*this)(z) - w) / derivative(z);
        cplx next = z - step;
        double lambda = 1.0;
        while (std::abs(next) >= 1.0 && lambda > 1e-6) {
            lambda *= 0.5;
            next = z - lambda * step;
        }
        z = next;
        if (std::abs(step) * lambda < tol) return z;
    }
    throw ConvergenceError("TriangleMap::inverse: Newton did not converge", {});
}

double TriangleMap::vertex_error() const {
    double e = 0.0;
    for (int k = 0; k < 3; ++k)
        e = std::max(e, std::abs(phi0_ + C_ * integrate_to_prevertex(0.0, k) - kPrevertex[k]));
    return e;
}

GridField TriangleMap::sample(const GridPtr& grid) const {
    const DiscGrid& g = *grid;
    GridField out(grid, 1);
    for (int k = 0; k < g.nt(); ++k) {
        cplx prev = 0.0, value = phi0_;
        for (int i = 0; i <= g.nr(); ++i) {
            const auto n = g.index(i, k);
            const cplx z = g.node(n);
            value += C_ * integrate(prev, z);
            prev = z;
            out(n) = value;
        }
    }
    return out;
}

GridField TriangleMap::sample_derivative(const GridPtr& grid) const {
    const DiscGrid& g = *grid;
    GridField out(grid, 1);
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        const cplx z = g.node(n);
        out(n) = prevertex_at(z) >= 0 ? cplx(0.0) : C_ * F(z);
    }
    return out;
}

double TriangleMap::area_boundary(double tol) const {
    boost::math::quadrature::tanh_sinh<double> rule;
    // arcs between consecutive prevertices, counterclockwise
    const std::array<std::pair<int, int>, 3> arcs{{{0, 2}, {2, 1}, {1, 0}}};
    const double cuts[] = {0.0, 0.5 * kPi, kPi, 2.0 * kPi};
    double area = 0.0;
    for (int a = 0; a < 3; ++a) {
        const auto [left, right] = arcs[a];
        // xc is the signed distance to the nearer end, so the vertex offset
        // u = 1 - e^{+-i delta} is formed without cancellation
        auto integrand = [&, left = left, right = right](double, double xc) {
            const int k = xc < 0 ? left : right;
            const double delta = -xc;
            const cplx rot = std::polar(1.0, delta);
            const cplx u = cplx(0.0, -2.0 * std::sin(0.5 * delta)) * std::polar(1.0, 0.5 * delta);
            const cplx v = kPrevertex[k];
            const cplx z = v * rot;
            const cplx phi = v - C_ * integrate_from_offset(u, k);
            const cplx dphi = C_ * std::pow(u, kExponent[k]) * cofactor(z, k);
            return 0.5 * std::imag(std::conj(phi) * cplx(0.0, 1.0) * z * dphi);
        };
        area += rule.integrate(integrand, cuts[a], cuts[a + 1], tol);
    }
    return area;
}

double TriangleMap::area_grid(const GridPtr& grid) const {
    const GridField dphi = sample_derivative(grid);
    double a = 0.0;
    for (Eigen::Index n = 0; n < dphi.size(); ++n) a += grid->weight(n) * std::norm(dphi(n));
    return a;
}

// ---------------------------------------------------------------------------

ContractionReport solve_uv_contraction(const GridField& zw, const StructureField& A,
                                       const GridField& dphi, double p, double tol, int max_iter,
                                       const ContractionReport* warm) {
    const Eigen::Index N = A.dim();
    if (zw.dim() != N) throw ShapeError("solve_uv_contraction: dimension mismatch");
    if (dphi.dim() != 1) throw ShapeError("solve_uv_contraction: Phi' must be scalar");
    const GridPtr& grid = zw.grid_ptr();
    ContractionReport rep{GridField(grid, 1), GridField(grid, std::max<Eigen::Index>(N - 1, 1))};
    if (N == 1) rep.v = GridField(grid, 1);
    if (A.is_zero()) return rep;
    if (warm) {
        rep.u = warm->u;
        rep.v = warm->v;
    }
    std::vector<CMatrix> An(grid->size());
    for (Eigen::Index n = 0; n < grid->size(); ++n) An[n] = A(zw.at(n));

    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const GridField s2 = op_S2(rep.u);
        const GridField s1 = N > 1 ? op_S1(rep.v) : GridField(grid, 1);
        GridField u(grid, 1), v(grid, rep.v.dim());
        CVector rhs(N);
        for (Eigen::Index n = 0; n < grid->size(); ++n) {
            rhs(0) = std::conj(s2(n) + dphi(n));
            for (Eigen::Index j = 1; j < N; ++j) rhs(j) = std::conj(s1(n, j - 1));
            const CVector out = An[n] * rhs;
            u(n) = out(0);
            for (Eigen::Index j = 1; j < N; ++j) v(n, j - 1) = out(j);
        }
        const double diff = std::pow(std::pow(lp_norm(u - rep.u, p), p) +
                                         (N > 1 ? std::pow(lp_norm(v - rep.v, p), p) : 0.0),
                                     1.0 / p);
        rep.u = std::move(u);
        if (N > 1) rep.v = std::move(v);
        rep.history.push_back(diff);
        rep.iterations = it + 1;
        if (it > 0 && prev > 0.0) rep.ratio = diff / prev;
        if (it >= 3 && rep.ratio >= 1.0 && diff > tol)
            throw DomainError("solve_uv_contraction: iteration is not contracting");
        if (diff <= tol) return rep;
        if (!std::isfinite(diff)) break;
        prev = diff;
    }
    throw ConvergenceError("solve_uv_contraction: no convergence", rep.history);
}

namespace {

/// z(t) = T2 u(t) + Phi(t): solve z(t) = z0 by Newton with a finite-difference
/// real Jacobian, keeping t inside the disc.
cplx locate_tau(const GridField& u, const TriangleMap& map, cplx z0, cplx start) {
    auto z_at = [&](cplx t) { return op_T2_at(u, t)(0) + map(t); };
    cplx t = start;
    cplx r = z_at(t) - z0;
    for (int it = 0; it < 30 && std::abs(r) > 1e-13; ++it) {
        const double h = 1e-7;
        const cplx dx = (z_at(t + h) - z_at(t - h)) / (2 * h);
        const cplx dy = (z_at(t + kI * h) - z_at(t - kI * h)) / (2 * h);
        Eigen::Matrix2d J;
        J << dx.real(), dy.real(), dx.imag(), dy.imag();
        const Eigen::Vector2d step = J.partialPivLu().solve(Eigen::Vector2d(r.real(), r.imag()));
        cplx next = t - cplx(step(0), step(1));
        double lambda = 1.0;
        while ((std::abs(next) >= 1.0 || std::abs(z_at(next) - z0) > std::abs(r)) && lambda > 1e-4) {
            lambda *= 0.5;
            next = t - lambda * cplx(step(0), step(1));
        }
        if (std::abs(next) >= 1.0) throw DomainError("solve_cylinder: tau left the disc");
        t = next;
        r = z_at(t) - z0;
    }
    return t;
}

}  // namespace

CylinderSolution solve_cylinder(const CylinderProblem& problem, const GridPtr& grid,
                                const CylinderOptions& opt) {
    const StructureField& A = problem.A;
    const Eigen::Index N = A.dim();
    if (N < 2) throw ShapeError("solve_cylinder: need at least one w component");
    if (problem.w0.size() != N - 1) throw ShapeError("solve_cylinder: w0 has the wrong size");
    if (!inside_triangle(problem.z0, 1e-12))
        throw DomainError("solve_cylinder: z0 must lie strictly inside the triangle");

    const TriangleMap map;
    const GridField phi = map.sample(grid);
    const GridField dphi = map.sample_derivative(grid);
    cplx tau = map.inverse(problem.z0);

    auto assemble = [&](const GridField& zc, const GridField& wc) {
        GridField Z(grid, N);
        Z.set_component(0, zc);
        for (Eigen::Index j = 1; j < N; ++j) Z.set_component(j, wc.component(j - 1));
        return Z;
    };
    GridField w_const(grid, N - 1);
    for (Eigen::Index n = 0; n < grid->size(); ++n) w_const.values().row(n) = problem.w0.transpose();
    GridField Z = assemble(phi, w_const);

    DiscSolution disc{Z};
    std::vector<double> inner_ratios;
    std::optional<ContractionReport> uv;
    for (int k = 0; k < opt.max_outer; ++k) {
        uv = solve_uv_contraction(Z, A, dphi, opt.p, opt.inner_tol, 200, uv ? &*uv : nullptr);
        inner_ratios.push_back(uv->ratio);
        GridField z_new = op_T2(uv->u) + phi;
        tau = locate_tau(uv->u, map, problem.z0, tau);
        GridField w_new = op_T1(uv->v);
        const CVector shift = op_T1_at(uv->v, tau);
        for (Eigen::Index n = 0; n < grid->size(); ++n)
            w_new.values().row(n) += (problem.w0 - shift).transpose();
        GridField Z_new = assemble(z_new, w_new);
        const double diff = max_norm(Z_new - Z);
        disc.history.push_back(diff);
        disc.iterations = k + 1;
        if (opt.damping < 1.0)
            Z = Z + opt.damping * (Z_new - Z);
        else
            Z = std::move(Z_new);
        if (diff <= opt.tol) {
            disc.converged = true;
            break;
        }
        if (!std::isfinite(diff) || (k > 3 && diff > 1e3 * disc.history.front()))
            break;
    }
    if (!disc.converged)
        throw ConvergenceError("solve_cylinder: outer iteration stagnated", disc.history);

    disc.Z = Z;
    disc.residual_pde = pde_residual_max(Z, A);
    double bres = 0.0;
    for (auto n : grid->boundary_index()) bres = std::max(bres, triangle_boundary_distance(Z(n, 0)));
    disc.residual_boundary = bres;
    disc.area = symplectic_area(Z, AreaMethod::Boundary);

    CylinderSolution sol{std::move(disc), tau};
    sol.area_interior = symplectic_area(Z, AreaMethod::Interior);
    for (Eigen::Index j = 1; j < N; ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto n : grid->boundary_index()) {
            lo = std::min(lo, Z(n, j).real());
            hi = std::max(hi, Z(n, j).real());
        }
        sol.w_trace_drift = std::max(sol.w_trace_drift, hi - lo);
    }
    sol.inner_ratios = std::move(inner_ratios);
    return sol;
}

// ---------------------------------------------------------------------------

StructureField torus_structure(const TorusProblem& problem) {
    const double bound = std::hypot(problem.a0, problem.b0);
    auto a = problem.a;
    auto b = problem.b;
    return StructureField(
        2,
        [a, b](const CVector& Z) {
            CMatrix m = CMatrix::Zero(2, 2);
            m(0, 0) = a(Z(0), Z(1));
            m(1, 0) = b(Z(0), Z(1));
            return m;
        },
        bound);
}

int winding_number(const std::vector<cplx>& curve) {
    double total = 0.0;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const cplx a = curve[k], b = curve[(k + 1) % curve.size()];
        if (a == cplx(0.0) || b == cplx(0.0)) throw DomainError("winding_number: curve passes through 0");
        total += std::arg(b / a);
    }
    return int(std::lround(total / (2 * kPi)));
}

TorusSolution solve_torus(const TorusProblem& problem, const GridPtr& grid, const TorusOptions& opt) {
    if (!problem.a || !problem.b) throw DomainError("solve_torus: coefficients missing");
    if (!(problem.a0 < 1.0)) throw DomainError("solve_torus: |a| bound must be < 1");
    if (!(problem.r > 0.0 && problem.r <= 1.0)) throw DomainError("solve_torus: r must lie in (0,1]");
    if (problem.n < 0) throw DomainError("solve_torus: n must be nonnegative");
    if (std::abs(std::abs(problem.V) - problem.r) > 1e-12)
        throw DomainError("solve_torus: |V| must equal r");

    const DiscGrid& g = *grid;
    const double r = problem.r;
    const int n = problem.n;
    const double phase = std::arg(problem.V);
    const auto one = g.index(g.nr(), 0);
    const StructureField A = torus_structure(problem);

    GridField u(grid, 1), v(grid, 1);
    for (Eigen::Index k = 0; k < g.size(); ++k) v(k) = kI * phase;

    auto build = [&](const GridField& uu, const GridField& vv) {
        GridField Z(grid, 2);
        for (Eigen::Index k = 0; k < g.size(); ++k) {
            const cplx zeta = g.node(k);
            Z(k, 0) = zeta * std::exp(uu(k));
            Z(k, 1) = r * std::pow(zeta, n) * std::exp(vv(k));
        }
        return Z;
    };

    TorusSolution sol{DiscSolution{GridField(grid, 2)}, u, v};
    sol.alternative_regime = (n == 0);
    DiscSolution& disc = sol.disc;
    for (int it = 0; it < opt.max_iter; ++it) {
        const GridField Z = build(u, v);
        const GridField du = d(u);
        GridField fu(grid, 1), fv(grid, 1);
        for (Eigen::Index k = 0; k < g.size(); ++k) {
            const cplx zeta = g.node(k);
            const cplx zz = Z(k, 0), ww = Z(k, 1);
            const cplx common = std::exp(std::conj(u(k))) * (1.0 + std::conj(zeta) * std::conj(du(k)));
            fu(k) = problem.a(zz, ww) * std::exp(-u(k)) * common / zeta;
            fv(k) = problem.b(zz, ww) * common * std::exp(-v(k)) / (r * std::pow(zeta, n));
        }
        GridField u_new = weighted_TQ(fu, boundary_weight());
        GridField v_new = op_T1(fv);
        const cplx shift = v_new(one);
        for (Eigen::Index k = 0; k < g.size(); ++k) v_new(k) += kI * phase - shift;

        const double diff = std::max(max_norm(u_new - u), max_norm(v_new - v));
        disc.history.push_back(diff);
        disc.iterations = it + 1;
        if (opt.damping < 1.0) {
            u = u + opt.damping * (u_new - u);
            v = v + opt.damping * (v_new - v);
        } else {
            u = std::move(u_new);
            v = std::move(v_new);
        }
        if (diff <= opt.tol) {
            disc.converged = true;
            break;
        }
        if (!std::isfinite(diff) || (it > 5 && diff > 1e3 * disc.history.front())) break;
    }
    if (!disc.converged) throw ConvergenceError("solve_torus: iteration did not converge", disc.history);

    disc.Z = build(u, v);
    sol.u = u;
    sol.v = v;
    const GridField& Z = disc.Z;
    std::vector<cplx> curve;
    for (auto k : g.boundary_index()) {
        sol.modulus_z = std::max(sol.modulus_z, std::abs(std::abs(Z(k, 0)) - 1.0));
        sol.modulus_w = std::max(sol.modulus_w, std::abs(std::abs(Z(k, 1)) - r));
        curve.push_back(Z(k, 0));
    }
    const CVector z0 = interpolate(Z, cplx(0.0));
    sol.normalisation = std::max({std::abs(z0(0)), std::abs(Z(one, 0) - 1.0), std::abs(Z(one, 1) - problem.V)});
    sol.winding = winding_number(curve);
    for (Eigen::Index k = 0; k < g.size(); ++k)
        sol.decay_constant = std::max(sol.decay_constant, std::exp(v(k).real()));
    disc.residual_boundary = std::max(sol.modulus_z, sol.modulus_w);
    disc.residual_pde = pde_residual_max(Z, A);
    disc.area = symplectic_area(Z, AreaMethod::Interior);
    if (sol.winding != 1) throw DomainError("solve_torus: z is not a homeomorphism (winding != 1)");
    return sol;
}

}  // namespace holodisc
