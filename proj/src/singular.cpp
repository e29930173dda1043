#include "holodisc/singular.hpp"

#include "holodisc/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace holodisc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Angular correlation kernels of 1/(t - z) between every target ring and every
// source ring. Target ring i sits at radius R_i (r_i, or 1/r_i when
// reflected). For a source node t = rho_j e^{i l dtheta} and target
// z = R_i e^{i k dtheta}:
//   w_j / (t - z) = e^{-i k dtheta} * kappa_ij(l - k),
//   kappa_ij(d) = w_j / (rho_j e^{i d dtheta} - R_i).
// mode[m](i, j) = sum_d kappa_ij(d) e^{+2 pi i m d / nt}, so the correlation
// sum_l kappa_ij(l - k) g_j(l) has DFT ghat_j(m) * mode[m](i, j).
struct CauchyKernel {
    std::vector<CMatrix> mode;    // nt matrices, (nr+1) x nr
    std::vector<cplx> rowsum;     // sum_j sum_d kappa_ij(d), per target ring
    std::vector<double> radius;   // target radius per ring
};

std::shared_ptr<const CauchyKernel> cauchy_kernel(const DiscGrid& g, bool reflected) {
    return g.cached<CauchyKernel>(reflected ? "cauchy.reflected" : "cauchy.direct", [&] {
        auto K = std::make_shared<CauchyKernel>();
        const int nr = g.nr(), nt = g.nt();
        K->mode.assign(nt, CMatrix(nr + 1, nr));
        K->rowsum.assign(nr + 1, cplx(0.0));
        K->radius.resize(nr + 1);
        Eigen::FFT<double> fft;
        std::vector<cplx> kappa(nt), khat(nt);
        std::vector<cplx> rot(nt);
        for (int d = 0; d < nt; ++d) rot[d] = std::polar(1.0, d * g.dtheta());
        for (int i = 0; i <= nr; ++i) {
            const double R = (reflected && i < nr) ? 1.0 / g.radius(i) : g.radius(i);
            K->radius[i] = R;
            for (int j = 0; j < nr; ++j) {
                const double rho = g.radius(j), w = g.ring_weight(j);
                cplx sum = 0.0;
                for (int d = 0; d < nt; ++d) {
                    if (!reflected && i == j && d == 0) {
                        kappa[d] = 0.0;
                        continue;
                    }
                    kappa[d] = w / (rho * rot[d] - R);
                    sum += kappa[d];
                }
                K->rowsum[i] += sum;
                fft.inv(khat, kappa);
                for (int m = 0; m < nt; ++m) K->mode[m](i, j) = khat[m] * double(nt);
            }
        }
        return std::shared_ptr<const CauchyKernel>(std::move(K));
    });
}

// Closed form of int_D dA(t) / (t - z).
cplx disc_cauchy_closed_form(cplx z) {
    const double a = std::abs(z);
    return a <= 1.0 ? -kPi * std::conj(z) : -kPi / z;
}

// Highest angular mode kept on ring j: half the Nyquist mode of a ring whose
// angular cells are as wide as the radial ones.
int resolved_modes(int ring) { return int(std::floor(0.5 * kPi * (ring + 0.5))); }

// Removes, ring by ring, the angular modes above resolved_modes. Rings far
// enough from the origin are returned unchanged.
GridField band_limit(const GridField& f) {
    const DiscGrid& g = f.grid();
    const int nt = g.nt();
    GridField out = f;
    Eigen::FFT<double> fft;
    std::vector<cplx> buf(nt), spec(nt);
    for (int j = 0; j < g.nr(); ++j) {
        const int M = resolved_modes(j);
        if (2 * M >= nt) break;
        for (Eigen::Index c = 0; c < f.dim(); ++c) {
            for (int k = 0; k < nt; ++k) buf[k] = f(g.index(j, k), c);
            fft.fwd(spec, buf);
            for (int m = M + 1; m < nt - M; ++m) spec[m] = 0.0;
            fft.inv(buf, spec);
            for (int k = 0; k < nt; ++k) out(g.index(j, k), c) = buf[k];
        }
    }
    return out;
}

// -(1/pi) [ sum w (g(t) - g(a)) / (t - z) + g(a) * int_D dA/(t - z) ] at every
// node, with the anchor a = the node itself and z its (possibly reflected)
// evaluation point.
GridField apply_kernel(const GridField& f, bool reflected) {
    const DiscGrid& g = f.grid();
    const int nr = g.nr(), nt = g.nt();
    auto K = cauchy_kernel(g, reflected);
    Eigen::FFT<double> fft;
    GridField out(f.grid_ptr(), f.dim());
    std::vector<cplx> buf(nt), spec(nt);
    CMatrix G(nr, nt), H(nr + 1, nt);
    std::vector<cplx> unphase(nt);
    for (int k = 0; k < nt; ++k) unphase[k] = std::polar(1.0, -g.angle(k));

    for (Eigen::Index c = 0; c < f.dim(); ++c) {
        for (int j = 0; j < nr; ++j) {
            for (int k = 0; k < nt; ++k) buf[k] = f(g.index(j, k), c);
            fft.fwd(spec, buf);
            for (int m = 0; m < nt; ++m) G(j, m) = spec[m];
        }
        for (int m = 0; m < nt; ++m) H.col(m).noalias() = K->mode[m] * G.col(m);
        for (int i = 0; i <= nr; ++i) {
            for (int m = 0; m < nt; ++m) spec[m] = H(i, m);
            fft.inv(buf, spec);
            const double R = K->radius[i];
            for (int k = 0; k < nt; ++k) {
                const auto n = g.index(i, k);
                const cplx anchor = f(n, c);
                const cplx z = std::polar(R, g.angle(k));
                const cplx sum = unphase[k] * (buf[k] - anchor * K->rowsum[i]);
                out(n, c) = -(sum + anchor * disc_cauchy_closed_form(z)) / kPi;
            }
        }
    }
    return out;
}

}  // namespace

GridField cauchy_T(const GridField& f) { return apply_kernel(band_limit(f), false); }

GridField cauchy_T_reflected(const GridField& f) { return apply_kernel(band_limit(f), true); }

CVector cauchy_T_at(const GridField& input, cplx z) {
    const GridField f = band_limit(input);
    const DiscGrid& g = f.grid();
    const double a = std::abs(z);
    CVector anchor;
    if (a <= 1.0)
        anchor = interpolate(f, z);
    else
        anchor = interpolate(f, 1.0 / std::conj(z));
    CVector sum = CVector::Zero(f.dim());
    for (int j = 0; j < g.nr(); ++j) {
        const double w = g.ring_weight(j);
        for (int l = 0; l < g.nt(); ++l) {
            const auto n = g.index(j, l);
            const cplx diff = g.node(n) - z;
            if (std::abs(diff) < 1e-14) continue;
            sum += (w / diff) * (f.values().row(n).transpose() - anchor);
        }
    }
    return -(sum + anchor * disc_cauchy_closed_form(z)) / kPi;
}

GridField cauchy_T_direct(const GridField& input) {
    const GridField f = band_limit(input);
    const DiscGrid& g = f.grid();
    GridField out(f.grid_ptr(), f.dim());
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        const cplx z = g.node(n);
        const CVector anchor = f.at(n);
        CVector sum = CVector::Zero(f.dim());
        for (Eigen::Index s = 0; s < g.size(); ++s) {
            if (s == n || g.is_boundary(s)) continue;
            sum += (g.weight(s) / (g.node(s) - z)) * (f.at(s) - anchor);
        }
        out.values().row(n) = (-(sum + anchor * disc_cauchy_closed_form(z)) / kPi).transpose();
    }
    return out;
}

GridField beurling_S(const GridField& f, AngularDiff mode) { return d(cauchy_T(f), mode); }

GridField beurling_S_pv(const GridField& f) {
    const DiscGrid& g = f.grid();
    GridField fz = d(f), fzb = dbar(f);
    GridField out(f.grid_ptr(), f.dim());
    constexpr int kAngles = 1024;
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        const cplx z = g.node(n);
        if (g.is_boundary(n)) continue;
        // E(z) = int_D (tbar - zbar)/(t - z)^2 dA = int e^{-3i phi} L(phi) dphi
        cplx E = 0.0;
        for (int q = 0; q < kAngles; ++q) {
            const double phi = 2 * kPi * q / kAngles;
            const cplx e = std::polar(1.0, phi);
            const double b = std::real(std::conj(z) * e);
            const double L = -b + std::sqrt(1.0 - std::norm(z) + b * b);
            E += std::polar(L, -3 * phi);
        }
        E *= 2 * kPi / kAngles;
        const CVector f0 = f.at(n), a = fz.at(n), b = fzb.at(n);
        CVector sum = CVector::Zero(f.dim());
        for (Eigen::Index s = 0; s < g.size(); ++s) {
            if (s == n || g.is_boundary(s)) continue;
            const cplx u = g.node(s) - z;
            const CVector rest = f.at(s) - f0 - a * u - b * std::conj(u);
            sum += (g.weight(s) / (u * u)) * rest;
        }
        // PV int dA/(t-z)^2 = 0 inside the disc; int dA/(t-z) = -pi conj(z)
        sum += a * disc_cauchy_closed_form(z) + b * E;
        out.values().row(n) = (-sum / kPi).transpose();
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

cplx default_prefactor(const std::vector<WeightSpec::Point>& points) {
    cplx c = 1.0;
    for (const auto& p : points) c *= std::pow(-p.z, p.alpha);
    return c;
}

}  // namespace

WeightSpec::WeightSpec(std::vector<Point> points)
    : WeightSpec(points, default_prefactor(points)) {}

WeightSpec::WeightSpec(std::vector<Point> points, cplx prefactor)
    : points_(std::move(points)), prefactor_(prefactor) {
    if (points_.empty()) throw DomainError("WeightSpec: at least one point required");
    for (std::size_t a = 0; a < points_.size(); ++a) {
        if (std::abs(std::abs(points_[a].z) - 1.0) > 1e-12)
            throw DomainError("WeightSpec: points must be unimodular");
        if (!(points_[a].alpha > 0.0 && points_[a].alpha <= 1.0))
            throw DomainError("WeightSpec: exponents must lie in (0,1]");
        for (std::size_t b = 0; b < a; ++b)
            if (std::abs(points_[a].z - points_[b].z) < 1e-12)
                throw DomainError("WeightSpec: points must be distinct");
    }
    if (std::abs(std::abs(prefactor_) - 1.0) > 1e-12)
        throw DomainError("WeightSpec: prefactor must be unimodular");
}

double WeightSpec::sum_alpha() const noexcept {
    double s = 0.0;
    for (const auto& p : points_) s += p.alpha;
    return s;
}

cplx WeightSpec::operator()(cplx z) const {
    cplx q = prefactor_;
    for (const auto& p : points_) {
        const cplx base = 1.0 - z * std::conj(p.z);
        if (base == cplx(0.0)) return 0.0;
        q *= std::pow(base, p.alpha);
    }
    return q;
}

cplx WeightSpec::log_derivative(cplx z) const {
    cplx s = 0.0;
    for (const auto& p : points_) s += p.alpha / (z - p.z);
    return s;
}

double WeightSpec::p_lower() const {
    double v = 1.0;
    for (const auto& p : points_) v = std::max(v, 2.0 / (2.0 - p.alpha));
    return v;
}

double WeightSpec::p_upper() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& p : points_) v = std::min(v, 2.0 / (1.0 - p.alpha));
    return v;
}

WeightSpec boundary_weight() { return WeightSpec({{cplx(1.0, 0.0), 1.0}}, cplx(-1.0, 0.0)); }

WeightSpec triangle_weight() {
    return WeightSpec({{cplx(1.0, 0.0), 0.25}, {cplx(-1.0, 0.0), 0.25}, {cplx(0.0, 1.0), 0.5}},
                      std::polar(1.0, 0.75 * kPi));
}

cplx sqrt_cut_positive(cplx z) {
    double t = std::arg(z);
    if (t < 0) t += 2 * kPi;
    return std::polar(std::sqrt(std::abs(z)), 0.5 * t);
}

cplx triangle_X(cplx z) { return triangle_weight()(z) / sqrt_cut_positive(z); }

int triangle_arc(double theta) {
    double t = std::fmod(theta, 2 * kPi);
    if (t < 0) t += 2 * kPi;
    constexpr double eps = 1e-12;
    if (t < eps || std::abs(t - 0.5 * kPi) < eps || std::abs(t - kPi) < eps || t > 2 * kPi - eps)
        return 0;
    if (t < 0.5 * kPi) return 1;
    if (t < kPi) return 2;
    return 3;
}

double triangle_bc_residual(cplx z, cplx value) {
    switch (triangle_arc(std::arg(z))) {
        case 1: return std::abs(std::imag(cplx(1, 1) * value));
        case 2: return std::abs(std::imag(cplx(1, -1) * value));
        case 3: return std::abs(std::imag(value));
        default: return 0.0;
    }
}

namespace {

GridField divide_by_weight(const GridField& f, const WeightSpec& w, std::vector<cplx>& q,
                           WeightReport* report) {
    const DiscGrid& g = f.grid();
    q.resize(g.size());
    GridField out(f.grid_ptr(), f.dim());
    int excluded = 0;
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        const cplx z = g.node(n);
        q[n] = w(z);
        const bool at_zero = std::any_of(w.points().begin(), w.points().end(),
                                         [z](const WeightSpec::Point& p) { return std::abs(z - p.z) < 1e-12; });
        if (at_zero) {
            q[n] = 0.0;
            ++excluded;
            continue;
        }
        out.values().row(n) = f.values().row(n) / q[n];
    }
    if (report) report->excluded_nodes = excluded;
    return out;
}

/// H with T_Q f = Q H.
GridField weighted_inner(const GridField& f, const WeightSpec& w, std::vector<cplx>& q,
                         WeightReport* report) {
    const DiscGrid& g = f.grid();
    GridField h = divide_by_weight(f, w, q, report);
    GridField a = cauchy_T(h);
    const GridField b = cauchy_T_reflected(h);
    for (Eigen::Index n = 0; n < g.size(); ++n)
        a.values().row(n) += b.values().row(n).conjugate() / g.node(n);
    return a;
}

}  // namespace

GridField weighted_TQ(const GridField& f, const WeightSpec& w, WeightReport* report) {
    std::vector<cplx> q;
    GridField out = weighted_inner(f, w, q, report);
    for (Eigen::Index n = 0; n < out.size(); ++n) out.values().row(n) *= q[n];
    return out;
}

// d(Q H) = Q (H Q'/Q + dH): the singular factor is differentiated exactly
GridField weighted_SQ(const GridField& f, const WeightSpec& w, WeightReport* report) {
    const DiscGrid& g = f.grid();
    std::vector<cplx> q;
    const GridField H = weighted_inner(f, w, q, report);
    GridField out = d(H);
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        if (std::abs(q[n]) < 1e-300) {
            out.values().row(n).setZero();
            continue;
        }
        out.values().row(n) = q[n] * (out.values().row(n) + w.log_derivative(g.node(n)) * H.values().row(n));
    }
    return out;
}

CVector weighted_TQ_at(const GridField& f, const WeightSpec& w, cplx z) {
    std::vector<cplx> q;
    GridField h = divide_by_weight(f, w, q, nullptr);
    const cplx qz = w(z);
    if (std::abs(z) < 1e-12) {
        // z^{-1} conj(T h(1/conj z)) -> conj(int h dA)/pi as z -> 0
        return qz * (cauchy_T_at(h, z) + quadrature(h).conjugate() / kPi);
    }
    return qz * (cauchy_T_at(h, z) + cauchy_T_at(h, 1.0 / std::conj(z)).conjugate() / z);
}

// ---------------------------------------------------------------------------

GridField op_T1(const GridField& f) {
    GridField a = cauchy_T(f);
    a -= cauchy_T_reflected(f).conj();
    return a;
}

GridField op_T1_weighted(const GridField& f) {
    const DiscGrid& g = f.grid();
    GridField out = weighted_TQ(f, boundary_weight());
    const CVector tf1 = cauchy_T_at(f, cplx(1.0, 0.0));
    for (Eigen::Index n = 0; n < g.size(); ++n)
        for (Eigen::Index c = 0; c < f.dim(); ++c) out(n, c) += 2.0 * kI * std::imag(tf1[c]);
    return out;
}

GridField op_S1(const GridField& f) { return d(op_T1(f)); }

CVector op_T1_at(const GridField& f, cplx z) {
    if (std::abs(z) < 1e-12) {
        // conj(Tf(1/conj z)) -> 0 as z -> 0
        return cauchy_T_at(f, z);
    }
    return cauchy_T_at(f, z) - cauchy_T_at(f, 1.0 / std::conj(z)).conjugate();
}

GridField op_T2(const GridField& f, WeightReport* report) {
    return weighted_TQ(f, triangle_weight(), report);
}

GridField op_S2(const GridField& f) { return weighted_SQ(f, triangle_weight()); }

CVector op_T2_at(const GridField& f, cplx z) { return weighted_TQ_at(f, triangle_weight(), z); }

// ---------------------------------------------------------------------------

CMatrix boundary_trace(const GridField& f) {
    const DiscGrid& g = f.grid();
    return f.values().middleRows(g.index(g.nr(), 0), g.nt());
}

GridField boundary_cauchy_K(const GridPtr& grid, const CMatrix& trace) {
    const DiscGrid& g = *grid;
    const int nt = g.nt();
    if (trace.rows() != nt) throw ShapeError("boundary_cauchy_K: trace must have nt rows");
    GridField out(grid, trace.cols());
    Eigen::FFT<double> fft;
    std::vector<cplx> buf(nt), spec(nt), coef(nt), back(nt);
    for (Eigen::Index c = 0; c < trace.cols(); ++c) {
        for (int k = 0; k < nt; ++k) buf[k] = trace(k, c);
        fft.fwd(spec, buf);
        for (int i = 0; i <= g.nr(); ++i) {
            const double r = g.radius(i);
            double rm = 1.0;
            for (int m = 0; m < nt; ++m) coef[m] = 0.0;
            for (int m = 0; m < nt / 2; ++m) {
                coef[m] = spec[m] * rm;
                rm *= r;
            }
            coef[nt / 2] = 0.5 * spec[nt / 2] * rm;
            fft.inv(back, coef);
            for (int k = 0; k < nt; ++k) out(g.index(i, k), c) = back[k];
        }
    }
    return out;
}

GridField schwarz_integral(const GridPtr& grid, const CMatrix& trace) {
    const CMatrix real = trace.real().cast<cplx>();
    GridField k = boundary_cauchy_K(grid, real);
    const CVector mean = real.colwise().mean().transpose();
    k *= 2.0;
    for (Eigen::Index n = 0; n < k.size(); ++n) k.values().row(n) -= mean.transpose();
    return k;
}

// ---------------------------------------------------------------------------

GridField opnorm_test_field(const GridPtr& grid, int trial, std::uint64_t seed) {
    constexpr int kProbes = 4;
    if (trial < kProbes) {
        const int n = trial + 1;
        return GridField::sample(grid, [n](cplx z) { return std::pow(z, n); });
    }
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(trial + 1)));
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> bump_pick(0, 2);
    constexpr int kDeg = 3;
    std::vector<std::pair<std::pair<int, int>, cplx>> terms;
    for (int a = 0; a <= kDeg; ++a)
        for (int b = 0; a + b <= kDeg; ++b) terms.push_back({{a, b}, cplx(normal(rng), normal(rng))});
    const int q = bump_pick(rng);
    return GridField::sample(grid, [&](cplx z) {
        cplx s = 0.0;
        for (const auto& [ab, c] : terms) s += c * std::pow(z, ab.first) * std::pow(std::conj(z), ab.second);
        return s * std::pow(1.0 - std::norm(z), q);
    });
}

OpNormEstimate estimate_opnorm(const FieldOperator& op, const GridPtr& grid, double p, int trials,
                               std::uint64_t seed) {
    if (trials < 1) throw DomainError("estimate_opnorm: trials must be >= 1");
    OpNormEstimate est;
    for (int t = 0; t < trials; ++t) {
        GridField f = opnorm_test_field(grid, t, seed);
        const double den = lp_norm(f, p);
        const double ratio = den > 0.0 ? lp_norm(op(f), p) / den : 0.0;
        est.ratios.push_back(ratio);
        est.estimate = std::max(est.estimate, ratio);
        est.running.push_back(est.estimate);
    }
    return est;
}

double j_alpha_beta(double alpha, double beta, cplx z0, cplx z, double tolerance) {
    if (!(alpha > 0.0 && alpha < 2.0 && beta > 0.0 && beta < 2.0))
        throw DomainError("j_alpha_beta: exponents must lie in (0,2)");
    if (!(alpha + beta > 2.0)) throw DomainError("j_alpha_beta: requires alpha + beta > 2");
    if (std::abs(std::abs(z0) - 1.0) > 1e-12) throw DomainError("j_alpha_beta: |z0| must be 1");
    if (!(std::abs(z) < 1.0)) throw DomainError("j_alpha_beta: z must lie in the open disc");
    boost::math::quadrature::tanh_sinh<double> radial, angular;
    const double phi0 = std::arg(z0 - z);
    auto inner = [&](double phi) {
        const cplx e = std::polar(1.0, phi);
        const double b = std::real(std::conj(z) * e);
        const double L = -b + std::sqrt(1.0 - std::norm(z) + b * b);
        auto f = [&](double rho) {
            if (rho <= 0.0) return 0.0;
            const double dist = std::abs(z + rho * e - z0);
            if (dist <= 0.0) return 0.0;
            return std::pow(rho, 1.0 - beta) * std::pow(dist, -alpha);
        };
        return radial.integrate(f, 0.0, L, tolerance);
    };
    return angular.integrate(inner, phi0, phi0 + 2 * kPi, tolerance);
}

}  // namespace holodisc
