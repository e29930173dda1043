#include "holodisc/nonsqueeze.hpp"

#include "holodisc/errors.hpp"
#include "holodisc/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

namespace holodisc {

namespace {

constexpr double kPi = std::numbers::pi;

GridField zeta_field(const GridPtr& grid) {
    return GridField::sample(grid, [](cplx z) { return z; });
}

/// Schwarz integral of real trace data evaluated at a single point.
cplx schwarz_at(const RVector& g, cplx z) {
    const auto nt = g.size();
    cplx sum = 0.0, zm = 1.0;
    for (Eigen::Index m = 0; m <= nt / 2; ++m) {
        cplx c = 0.0;
        for (Eigen::Index k = 0; k < nt; ++k) c += g(k) * std::polar(1.0, -2.0 * kPi * double(m * k) / double(nt));
        c /= double(nt);
        const double factor = (m == 0) ? 1.0 : (m == nt / 2 ? 1.0 : 2.0);
        sum += factor * c * zm;
        zm *= z;
    }
    return sum;
}

/// Particular solution of the index-1 problem with zero free polynomial, at z.
cplx rh_z_particular_at(const GridField& zprime, const RVector& h, cplx z) {
    cplx v = cauchy_T_at(zprime, z)(0);
    if (std::abs(z) > 1e-14) v -= z * z * std::conj(cauchy_T_at(zprime, 1.0 / std::conj(z))(0));
    return v + z * schwarz_at(0.5 * h, z);
}

}  // namespace

RVector symplectic_area_components(const GridField& Z, AreaMethod method) {
    const DiscGrid& g = Z.grid();
    RVector out = RVector::Zero(Z.dim());
    if (method == AreaMethod::Interior) {
        const GridField dz = d(Z), dbz = dbar(Z);
        for (Eigen::Index n = 0; n < g.size(); ++n) {
            const double w = g.weight(n);
            if (w == 0.0) continue;
            for (Eigen::Index j = 0; j < Z.dim(); ++j)
                out(j) += w * (std::norm(dz(n, j)) - std::norm(dbz(n, j)));
        }
        return out;
    }
    const auto idx = g.boundary_index();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto a = idx[k], b = idx[(k + 1) % idx.size()];
        for (Eigen::Index j = 0; j < Z.dim(); ++j)
            out(j) += 0.5 * std::imag(std::conj(Z(a, j)) * Z(b, j));
    }
    return out;
}

double symplectic_area(const GridField& Z, AreaMethod method) {
    return symplectic_area_components(Z, method).sum();
}

GridField rh_solve_w(const GridField& wprime, const CMatrix& g, const RVector& d,
                     const RVector& c0) {
    const GridPtr& grid = wprime.grid_ptr();
    const Eigen::Index M = wprime.dim();
    if (g.rows() != grid->nt() || g.cols() != M) throw ShapeError("rh_solve_w: g must be nt x M");
    if (d.size() != M) throw ShapeError("rh_solve_w: d must have M entries");
    if (c0.size() != 0 && c0.size() != M) throw ShapeError("rh_solve_w: c0 must have M entries");
    GridField w = op_T1(wprime) + schwarz_integral(grid, g);
    for (Eigen::Index n = 0; n < w.size(); ++n)
        for (Eigen::Index j = 0; j < M; ++j)
            w(n, j) += cplx(d(j), c0.size() ? c0(j) : 0.0);
    return w;
}

GridField rh_solve_z(const GridField& zprime, const RVector& h, cplx c0, double c1) {
    const GridPtr& grid = zprime.grid_ptr();
    if (zprime.dim() != 1) throw ShapeError("rh_solve_z: z' must be scalar");
    if (h.size() != grid->nt()) throw ShapeError("rh_solve_z: h must have nt entries");
    const GridField reflected = cauchy_T_reflected(zprime);
    const GridField schwarz = schwarz_integral(grid, CMatrix((0.5 * h).cast<cplx>()));
    GridField z = cauchy_T(zprime);
    for (Eigen::Index n = 0; n < z.size(); ++n) {
        const cplx t = grid->node(n);
        z(n) += -t * t * std::conj(reflected(n)) + t * schwarz(n) + c0 + cplx(0.0, c1) * t -
                std::conj(c0) * t * t;
    }
    return z;
}

double rh_w_boundary_residual(const GridField& w, const CMatrix& g, const RVector& d) {
    const DiscGrid& grid = w.grid();
    double r = 0.0;
    for (int k = 0; k < grid.nt(); ++k) {
        const auto n = grid.index(grid.nr(), k);
        for (Eigen::Index j = 0; j < w.dim(); ++j)
            r = std::max(r, std::abs(w(n, j).real() - g(k, j).real() - d(j)));
    }
    return r;
}

double rh_z_boundary_residual(const GridField& z, const RVector& h) {
    const DiscGrid& grid = z.grid();
    double r = 0.0;
    for (int k = 0; k < grid.nt(); ++k) {
        const auto n = grid.index(grid.nr(), k);
        r = std::max(r, std::abs(2.0 * std::real(std::conj(grid.node(n)) * z(n)) - h(k)));
    }
    return r;
}

GridField flat_family(const GridPtr& grid, const CVector& p_rest) {
    return GridField::sample(grid, p_rest.size() + 1, [&](cplx z) {
        CVector v(p_rest.size() + 1);
        v(0) = z;
        v.tail(p_rest.size()) = p_rest;
        return v;
    });
}

PerturbedDisc perturb_family(const StructureField& A, const CVector& p, const GridPtr& grid,
                             const PerturbOptions& opt) {
    const Eigen::Index N = A.dim();
    if (p.size() != N) throw ShapeError("perturb_family: point has the wrong dimension");
    if (!(std::abs(p(0)) < 1.0)) throw DomainError("perturb_family: |p_1| must be < 1");
    if (!(A.bound() < 1.0)) throw DomainError("perturb_family: bound must be < 1");
    const DiscGrid& g = *grid;
    const Eigen::Index M = N - 1;
    const cplx tau = p(0);
    const CVector p_rest = p.tail(M);
    const GridField zeta = zeta_field(grid);
    const auto trace = g.boundary_index();

    GridField Z = flat_family(grid, p_rest);
    DiscSolution disc{Z};
    for (int it = 0; it < opt.max_iter; ++it) {
        const GridField G = beltrami_source(Z, A);
        const GridField Gz = G.component(0);
        RVector h(g.nt());
        for (int k = 0; k < g.nt(); ++k) h(k) = -std::norm(Z(trace[k], 0) - zeta(trace[k]));

        GridField zdot = rh_solve_z(Gz, h);
        const cplx b = rh_z_particular_at(Gz, h, tau);
        const cplx c0 = -(b + tau * tau * std::conj(b)) / (1.0 - std::pow(std::abs(tau), 4));
        GridField Z_new(grid, N);
        for (Eigen::Index n = 0; n < g.size(); ++n) {
            const cplx t = g.node(n);
            Z_new(n, 0) = t + zdot(n) + c0 - std::conj(c0) * t * t;
        }
        if (M > 0) {
            GridField Gw(grid, M);
            Gw.values() = G.values().rightCols(M);
            GridField w = op_T1(Gw);
            const CVector shift = op_T1_at(Gw, tau);
            for (Eigen::Index n = 0; n < g.size(); ++n)
                Z_new.values().row(n).tail(M) = (w.at(n) - shift + p_rest).transpose();
        }
        const double diff = max_norm(Z_new - Z);
        disc.history.push_back(diff);
        disc.iterations = it + 1;
        Z = std::move(Z_new);
        if (diff <= opt.tol) {
            disc.converged = true;
            break;
        }
        if (!std::isfinite(diff) || (disc.history.front() > 0.0 && diff > opt.divergence * disc.history.front()))
            break;
    }
    if (!disc.converged) throw ConvergenceError("perturb_family: iteration did not converge", disc.history);

    disc.Z = Z;
    disc.residual_pde = pde_residual_max(Z, A);
    disc.area = symplectic_area(Z, AreaMethod::Interior);

    PerturbedDisc out{std::move(disc), tau, RVector::Zero(M)};
    for (auto n : trace) out.modulus_residual = std::max(out.modulus_residual, std::abs(std::abs(Z(n, 0)) - 1.0));
    for (Eigen::Index j = 0; j < M; ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        for (auto n : trace) {
            const double re = Z(n, j + 1).real();
            lo = std::min(lo, re);
            hi = std::max(hi, re);
            sum += re;
        }
        out.d(j) = sum / double(trace.size());
        out.re_w_residual = std::max(out.re_w_residual, hi - lo);
    }
    out.disc.residual_boundary = std::max(out.modulus_residual, out.re_w_residual);
    out.point_residual = (interpolate(Z, tau) - p).norm();
    return out;
}

// ---------------------------------------------------------------------------

SymplecticMap identity_map(Eigen::Index n) {
    return {"identity", n, [](const CVector& x) { return x; }, [](const CVector& x) { return x; },
            [n](const CVector&) { return RLinearOp::identity(n); }};
}

SymplecticMap rotation_map(const RVector& phases) {
    const Eigen::Index n = phases.size();
    CVector u(n);
    for (Eigen::Index j = 0; j < n; ++j) u(j) = std::polar(1.0, phases(j));
    return {"rotation", n, [u](const CVector& x) { return CVector(u.cwiseProduct(x)); },
            [u](const CVector& x) { return CVector(u.conjugate().cwiseProduct(x)); },
            [u](const CVector&) {
                return RLinearOp(u.asDiagonal().toDenseMatrix(), CMatrix::Zero(u.size(), u.size()));
            }};
}

SymplecticMap quadratic_flow(const RMatrix& S, double t) {
    const RLinearOp L = hamiltonian_flow(S, t);
    const RLinearOp Linv = symplectic_inverse(L, 1e-8);
    return {"quadratic", L.dim(), [L](const CVector& x) { return L(x); },
            [Linv](const CVector& x) { return Linv(x); }, [L](const CVector&) { return L; }};
}

RMatrix random_quadratic_hamiltonian(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    RMatrix S(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        for (Eigen::Index j = 0; j < S.cols(); ++j) S(i, j) = normal(rng);
    const RMatrix sym = 0.5 * (S + S.transpose());
    return sym / spectral_norm(sym);
}

SymplecticMap cubic_shear(Eigen::Index n, double c) {
    auto shift = [c](const CVector& x) {
        CVector s(x.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) s(j) = cplx(0.0, c * x(j).real() * x(j).real());
        return s;
    };
    return {"cubic_shear", n, [shift](const CVector& x) { return CVector(x + shift(x)); },
            [shift](const CVector& x) { return CVector(x - shift(x)); },
            [n, c](const CVector& x) {
                RMatrix m = RMatrix::Identity(2 * n, 2 * n);
                for (Eigen::Index j = 0; j < n; ++j) m(n + j, j) = 2.0 * c * x(j).real();
                return RLinearOp::from_real(m);
            }};
}

CMatrix pushed_structure(const SymplecticMap& phi, const CVector& x) {
    const RLinearOp D = phi.differential(x);
    // A conj(P) = Q
    const CMatrix Pbar = D.P().conjugate();
    Eigen::PartialPivLU<CMatrix> lu(Pbar.transpose());
    return lu.solve(D.Q().transpose()).transpose();
}

StructureBound structure_c1_bound(const SymplecticMap& phi, double radius, int samples,
                                  std::uint64_t seed) {
    const Eigen::Index n = phi.dim;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr double kStep = 1e-5;
    StructureBound b;
    for (int s = 0; s < samples; ++s) {
        CVector x(n);
        for (Eigen::Index j = 0; j < n; ++j) x(j) = cplx(normal(rng), normal(rng));
        const double rho = radius * std::pow(unit(rng), 1.0 / double(2 * n));
        if (x.norm() > 0.0) x *= rho / x.norm();
        const CMatrix A0 = pushed_structure(phi, x);
        b.sup = std::max(b.sup, spectral_norm(A0));
        const CVector y0 = phi.forward(x);
        for (Eigen::Index j = 0; j < 2 * n; ++j) {
            CVector e = CVector::Zero(n);
            e(j % n) = j < n ? cplx(kStep, 0.0) : cplx(0.0, kStep);
            const double moved = (phi.forward(x + e) - y0).norm();
            if (moved <= 0.0) continue;
            b.lipschitz = std::max(b.lipschitz, spectral_norm(CMatrix(pushed_structure(phi, x + e) - A0)) / moved);
        }
    }
    return b;
}

double area_inside_ball(const GridField& X, double s) {
    const DiscGrid& g = X.grid();
    const GridField dz = d(X), dbz = dbar(X);
    GridField modulus(X.grid_ptr(), 1);
    for (Eigen::Index n = 0; n < g.size(); ++n) modulus(n) = X.at(n).norm();
    const GridField mr = radial_derivative(modulus), mt = angular_derivative(modulus);
    double area = 0.0;
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        const double w = g.weight(n);
        if (w == 0.0) continue;
        const double extent = std::abs(mr(n).real()) * g.dr() + std::abs(mt(n).real()) * g.dtheta();
        const double offset = s - modulus(n).real();
        double inside;
        if (extent > 0.0)
            inside = std::clamp(offset / extent + 0.5, 0.0, 1.0);
        else
            inside = offset >= 0.0 ? 1.0 : 0.0;
        if (inside == 0.0) continue;
        double density = 0.0;
        for (Eigen::Index j = 0; j < X.dim(); ++j) density += std::norm(dz(n, j)) - std::norm(dbz(n, j));
        area += inside * w * density;
    }
    return area;
}

SqueezeReport nonsqueezing_experiment(const SymplecticMap& phi, double r, double R,
                                      const GridPtr& grid, const SqueezeOptions& opt) {
    if (!(r > 0.0 && R > 0.0)) throw DomainError("nonsqueezing_experiment: radii must be positive");
    if (!(opt.epsilon >= 0.0 && r - 2.0 * opt.epsilon > 0.0))
        throw DomainError("nonsqueezing_experiment: need 0 <= eps < r/2");
    const Eigen::Index N = phi.dim;
    SqueezeReport rep;
    rep.map = phi.name;
    rep.r = r;
    rep.R = R;
    rep.epsilon = opt.epsilon;
    rep.lower_bound = kPi * (r - 2.0 * opt.epsilon) * (r - 2.0 * opt.epsilon);

    rep.bound = structure_c1_bound(phi, r, opt.samples, opt.seed);
    rep.bound_certified = rep.bound.c1() <= opt.eps0;
    if (!rep.bound_certified) {
        rep.failure = "structure bound exceeds eps0";
        return rep;
    }

    const CVector p = phi.forward(CVector::Zero(N));
    if (!(std::abs(p(0)) < R)) {
        rep.failure = "image of the centre lies outside the cylinder";
        return rep;
    }
    const bool flat = rep.bound.sup == 0.0 && rep.bound.lipschitz == 0.0;
    const StructureField A_unit =
        flat ? StructureField::zero(N)
             : StructureField(
                   N,
                   [phi, R](const CVector& Z) { return pushed_structure(phi, phi.inverse(CVector(R * Z))); },
                   std::max(rep.bound.sup, 1e-300));

    PerturbedDisc pd = [&] {
        try {
            return std::optional<PerturbedDisc>(perturb_family(A_unit, p / R, grid, opt.perturb));
        } catch (const ConvergenceError&) {
            return std::optional<PerturbedDisc>();
        }
    }().value_or(PerturbedDisc{DiscSolution{GridField(grid, N)}, 0.0, RVector()});
    rep.iterations = pd.disc.iterations;
    if (!pd.disc.converged) {
        rep.failure = "perturbation did not converge";
        return rep;
    }

    GridField Z = pd.disc.Z;
    Z *= R;
    rep.point_residual = R * pd.point_residual;
    rep.disc_area = symplectic_area(Z, AreaMethod::Interior);
    rep.disc_area_boundary = symplectic_area(Z, AreaMethod::Boundary);

    GridField X(grid, N);
    for (Eigen::Index n = 0; n < grid->size(); ++n) X.values().row(n) = phi.inverse(Z.at(n)).transpose();
    if (!flat)
        for (Eigen::Index n = 0; n < grid->size(); ++n)
            rep.bound.sup = std::max(rep.bound.sup, spectral_norm(pushed_structure(phi, X.at(n))));

    rep.projected_area = area_inside_ball(X, r - 2.0 * opt.epsilon);
    rep.cut_area = area_inside_ball(X, r - opt.epsilon);
    for (int k = 0; k < 4; ++k) {
        const double e = opt.epsilon * std::ldexp(1.0, -k);
        rep.chain_epsilon.push_back(e);
        rep.chain_area.push_back(area_inside_ball(X, r - 2.0 * e));
    }

    const double tol = opt.tolerance;
    const bool lower_ok = rep.projected_area >= rep.lower_bound - tol;
    const bool monotone = rep.projected_area <= rep.disc_area + tol;
    const bool upper_ok = rep.disc_area <= kPi * R * R + tol;
    rep.verdict = lower_ok && monotone && upper_ok;
    if (!lower_ok) rep.failure = "projected area below the monotonicity bound";
    else if (!monotone) rep.failure = "projected area exceeds the disc area";
    else if (!upper_ok) rep.failure = "disc area exceeds pi R^2";
    return rep;
}

}  // namespace holodisc
