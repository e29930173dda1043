#include "holodisc/beltrami.hpp"

#include "holodisc/errors.hpp"
#include "holodisc/singular.hpp"

#include <cmath>
#include <deque>
#include <numbers>

namespace holodisc {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dims(const GridField& Z, const StructureField& A) {
    if (Z.dim() != A.dim()) throw ShapeError("beltrami: field and structure dimensions differ");
}

RVector flatten(const GridField& f) {
    const auto n = f.values().size();
    RVector x(2 * n);
    const cplx* data = f.values().data();
    for (Eigen::Index i = 0; i < n; ++i) {
        x(2 * i) = data[i].real();
        x(2 * i + 1) = data[i].imag();
    }
    return x;
}

void unflatten(const RVector& x, GridField& f) {
    cplx* data = f.values().data();
    for (Eigen::Index i = 0; i < f.values().size(); ++i) data[i] = cplx(x(2 * i), x(2 * i + 1));
}

}  // namespace

GridField beltrami_source(const GridField& Z, const StructureField& A) {
    check_dims(Z, A);
    GridField out(Z.grid_ptr(), Z.dim());
    if (A.is_zero()) return out;
    const GridField dz = d(Z);
    for (Eigen::Index n = 0; n < Z.size(); ++n)
        out.values().row(n) = (A(Z.at(n)) * dz.at(n).conjugate()).transpose();
    return out;
}

GridField pde_residual(const GridField& Z, const StructureField& A) {
    check_dims(Z, A);
    GridField r = dbar(Z);
    r -= beltrami_source(Z, A);
    return r;
}

double pde_residual_max(const GridField& Z, const StructureField& A, double radius) {
    return max_norm(pde_residual(Z, A), nodes_within(Z.grid(), radius));
}

DiscSolution solve_local(const StructureField& A, const GridField& W, const SolveOptions& opt,
                         const std::optional<GridField>& start) {
    check_dims(W, A);
    if (!(A.bound() < 1.0)) throw DomainError("solve_local: bound must be < 1");
    DiscSolution sol{start ? *start : W};
    auto step = [&](const GridField& Z) { return W + cauchy_T(beltrami_source(Z, A)); };

    if (A.is_zero()) {
        sol.Z = W;
        sol.iterations = 1;
        sol.converged = true;
        sol.history.push_back(start ? lp_norm(W - *start, opt.p) : 0.0);
        sol.residual_pde = pde_residual_max(sol.Z, A, opt.interior_radius);
        return sol;
    }

    std::deque<RVector> dX, dF;
    RVector x_prev, f_prev;
    for (int k = 0; k < opt.max_iter; ++k) {
        GridField next = step(sol.Z);
        const double diff = lp_norm(next - sol.Z, opt.p);
        sol.history.push_back(diff);
        sol.iterations = k + 1;
        if (opt.anderson_depth > 0) {
            const RVector x = flatten(sol.Z), gx = flatten(next);
            const RVector f = gx - x;
            if (k > 0) {
                dX.push_back(gx - x_prev);
                dF.push_back(f - f_prev);
                if (int(dF.size()) > opt.anderson_depth) {
                    dX.pop_front();
                    dF.pop_front();
                }
            }
            x_prev = gx;
            f_prev = f;
            if (!dF.empty() && diff > opt.tol) {
                RMatrix F(f.size(), Eigen::Index(dF.size())), G(f.size(), Eigen::Index(dF.size()));
                for (std::size_t j = 0; j < dF.size(); ++j) {
                    F.col(Eigen::Index(j)) = dF[j];
                    G.col(Eigen::Index(j)) = dX[j];
                }
                const RVector gamma = F.colPivHouseholderQr().solve(f);
                unflatten(gx - G * gamma, next);
            }
        }
        sol.Z = std::move(next);
        if (diff <= opt.tol) {
            sol.converged = true;
            break;
        }
        if (!std::isfinite(diff)) break;
    }
    if (!sol.converged)
        throw ConvergenceError("solve_local: Picard iteration did not converge", sol.history);
    sol.residual_pde = pde_residual_max(sol.Z, A, opt.interior_radius);
    return sol;
}

CentreJet centre_jet(const GridField& Z, const StructureField& A, const CVector& q,
                     const CVector& tv) {
    const GridField g = beltrami_source(Z, A);
    const DiscGrid& grid = Z.grid();
    CVector Tg0 = CVector::Zero(Z.dim());
    CVector Sg0 = CVector::Zero(Z.dim());
    for (Eigen::Index n = 0; n < grid.size(); ++n) {
        const double w = grid.weight(n);
        if (w == 0.0) continue;
        const cplx t = grid.node(n);
        Tg0 += (w / t) * g.at(n);
        Sg0 += (w / (t * t)) * g.at(n);
    }
    Tg0 *= -1.0 / kPi;
    Sg0 *= -1.0 / kPi;
    const CVector g0 = interpolate(g, cplx(0.0));
    return {q + Tg0, tv + Sg0 + g0};
}

ThroughPointResult disc_through_point(const StructureField& A, const GridPtr& grid, const CVector& p,
                                      const CVector& v, double t0, const ThroughPointOptions& opt) {
    const Eigen::Index N = A.dim();
    if (p.size() != N || v.size() != N) throw ShapeError("disc_through_point: dimension mismatch");
    if (!(v.norm() > 0.0)) throw DomainError("disc_through_point: direction must be nonzero");
    if (!(t0 > 0.0)) throw DomainError("disc_through_point: scale must be positive");

    double a_effective = 0.0;
    int newton_iterations = 0;
    // Shrink the disc until the structure seen on its image is small enough.
    auto sampled_bound = [&](double t) {
        double worst = 0.0;
        for (int i = 0; i <= 4; ++i)
            for (int k = 0; k < 16; ++k) {
                const cplx z = std::polar(i / 4.0, 2 * kPi * k / 16);
                worst = std::max(worst, spectral_norm(A(p + t * z * v)));
            }
        return worst;
    };
    double t = t0;
    a_effective = sampled_bound(t);
    for (int s = 0; s < opt.max_shrink && a_effective > opt.a_target; ++s) {
        t *= 0.5;
        a_effective = sampled_bound(t);
    }

    const CVector target_dx = t * v;
    CVector q = p, w = v;
    std::optional<GridField> warm;
    auto solve_for = [&](const CVector& qq, const CVector& ww) {
        GridField W = GridField::sample(grid, N, [&](cplx z) { return CVector(qq + t * z * ww); });
        DiscSolution s = solve_local(A, W, opt.solve, warm);
        return s;
    };
    auto residual = [&](const DiscSolution& s, const CVector& qq, const CVector& ww) {
        const CentreJet jet = centre_jet(s.Z, A, qq, t * ww);
        RVector r(4 * N);
        for (Eigen::Index j = 0; j < N; ++j) {
            const cplx a = jet.value(j) - p(j), b = jet.dx(j) - target_dx(j);
            r(j) = a.real();
            r(N + j) = a.imag();
            r(2 * N + j) = b.real() / t;
            r(3 * N + j) = b.imag() / t;
        }
        return std::make_pair(r, jet);
    };
    auto unpack = [&](const RVector& x, CVector& qq, CVector& ww) {
        for (Eigen::Index j = 0; j < N; ++j) {
            qq(j) = cplx(x(j), x(N + j));
            ww(j) = cplx(x(2 * N + j), x(3 * N + j));
        }
    };
    auto pack = [&](const CVector& qq, const CVector& ww) {
        RVector x(4 * N);
        for (Eigen::Index j = 0; j < N; ++j) {
            x(j) = qq(j).real();
            x(N + j) = qq(j).imag();
            x(2 * N + j) = ww(j).real();
            x(3 * N + j) = ww(j).imag();
        }
        return x;
    };

    DiscSolution sol = solve_for(q, w);
    warm = sol.Z;
    auto [r, jet] = residual(sol, q, w);
    std::optional<RMatrix> jac;
    for (int it = 0; it < opt.newton_steps && r.norm() > opt.newton_tol; ++it) {
        if (!jac || it % 4 == 0) {
            RMatrix J(4 * N, 4 * N);
            const RVector x0 = pack(q, w);
            for (Eigen::Index c = 0; c < 4 * N; ++c) {
                RVector x = x0;
                x(c) += opt.fd_step;
                CVector qq(N), ww(N);
                unpack(x, qq, ww);
                const DiscSolution sc = solve_for(qq, ww);
                J.col(c) = (residual(sc, qq, ww).first - r) / opt.fd_step;
            }
            jac = J;
        }
        const RVector x = pack(q, w) - jac->partialPivLu().solve(r);
        unpack(x, q, w);
        sol = solve_for(q, w);
        warm = sol.Z;
        std::tie(r, jet) = residual(sol, q, w);
        newton_iterations = it + 1;
    }
    const cplx inner = v.dot(jet.dx);
    const double along = std::real(inner) / (v.norm() * jet.dx.norm());
    const double c = std::abs(inner) / (v.norm() * jet.dx.norm());
    return ThroughPointResult{std::move(sol),
                              t,
                              a_effective,
                              jet.value,
                              jet.dx,
                              (jet.value - p).norm(),
                              along >= 0 ? std::acos(std::min(1.0, c)) : kPi,
                              newton_iterations};
}

RegularityReport regularity_smoke(const StructureField& A,
                                  const std::function<GridField(GridPtr)>& make_W,
                                  const std::vector<int>& levels, double alpha, double eps,
                                  double tolerance, const SolveOptions& opt) {
    RegularityReport rep;
    rep.alpha = alpha;
    rep.radius = 1.0 - 2.0 * eps;
    for (int nr : levels) {
        auto grid = make_grid(nr);
        const DiscSolution s = solve_local(A, make_W(grid), opt);
        RegularityLevel lv;
        lv.nr = nr;
        lv.holder_Z = holder_seminorm_within(s.Z, alpha, rep.radius);
        lv.holder_dZ = std::max(holder_seminorm_within(d(s.Z), alpha, rep.radius),
                                holder_seminorm_within(dbar(s.Z), alpha, rep.radius));
        rep.levels.push_back(lv);
    }
    auto variation = [&](auto get) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& l : rep.levels) {
            lo = std::min(lo, get(l));
            hi = std::max(hi, get(l));
        }
        return hi > 0.0 ? (hi - lo) / hi : 0.0;
    };
    rep.variation_Z = variation([](const RegularityLevel& l) { return l.holder_Z; });
    rep.variation_dZ = variation([](const RegularityLevel& l) { return l.holder_dZ; });
    if (!rep.levels.empty() && rep.levels.front().holder_dZ > 0.0)
        rep.growth_dZ = rep.levels.back().holder_dZ / rep.levels.front().holder_dZ;
    rep.stable = rep.variation_Z <= tolerance && rep.variation_dZ <= tolerance;
    return rep;
}

}  // namespace holodisc
