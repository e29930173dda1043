#include "holodisc/grid.hpp"

#include "holodisc/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace holodisc {

namespace {
constexpr double kPi = std::numbers::pi;
}

DiscGrid::DiscGrid(int nr, int nt)
    : nr_(nr), nt_(nt == 0 ? 2 * nr : nt), cache_(std::make_shared<Cache>()) {
    if (nr_ < 2) throw DomainError("DiscGrid: nr must be >= 2");
    if (nt_ < 4 || nt_ % 4 != 0) throw DomainError("DiscGrid: nt must be a positive multiple of 4");
    dtheta_ = 2.0 * kPi / nt_;
    radii_.resize(nr_ + 1);
    ring_weight_.resize(nr_ + 1);
    for (int i = 0; i < nr_; ++i) {
        radii_[i] = (i + 0.5) / nr_;
        ring_weight_[i] = radii_[i] * dr() * dtheta_;
    }
    radii_[nr_] = 1.0;
    ring_weight_[nr_] = 0.0;
    nodes_.resize(size());
    for (int i = 0; i <= nr_; ++i)
        for (int k = 0; k < nt_; ++k) nodes_[index(i, k)] = std::polar(radii_[i], angle(k));
}

std::vector<Eigen::Index> DiscGrid::boundary_index() const {
    std::vector<Eigen::Index> out(nt_);
    for (int k = 0; k < nt_; ++k) out[k] = index(nr_, k);
    return out;
}

// ---------------------------------------------------------------------------

GridField::GridField(GridPtr grid, Eigen::Index dim)
    : grid_(std::move(grid)), values_(CMatrix::Zero(grid_->size(), dim)) {
    if (dim < 1) throw ShapeError("GridField: dim must be >= 1");
}

GridField::GridField(GridPtr grid, CMatrix values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() != grid_->size()) throw ShapeError("GridField: row count != grid size");
    if (values_.cols() < 1) throw ShapeError("GridField: dim must be >= 1");
    if (!values_.allFinite()) throw DomainError("GridField: non-finite values");
}

GridField GridField::sample(GridPtr grid, const std::function<cplx(cplx)>& f) {
    GridField out(grid, 1);
    for (Eigen::Index n = 0; n < grid->size(); ++n) out.values_(n, 0) = f(grid->node(n));
    return out;
}

GridField GridField::sample(GridPtr grid, Eigen::Index dim, const std::function<CVector(cplx)>& f) {
    GridField out(grid, dim);
    for (Eigen::Index n = 0; n < grid->size(); ++n) {
        CVector v = f(grid->node(n));
        if (v.size() != dim) throw ShapeError("GridField::sample: function returned wrong dimension");
        out.values_.row(n) = v.transpose();
    }
    return out;
}

GridField GridField::component(Eigen::Index c) const {
    return GridField(grid_, CMatrix(values_.col(c)));
}

void GridField::set_component(Eigen::Index c, const GridField& scalar) {
    check_compatible(scalar);
    values_.col(c) = scalar.values_.col(0);
}

GridField GridField::conj() const {
    GridField out(*this);
    out.values_ = values_.conjugate();
    return out;
}

void GridField::set_scale_weights(std::vector<double> theta) {
    if (Eigen::Index(theta.size()) != dim()) throw ShapeError("scale weights: one weight per component");
    for (double t : theta)
        if (!(t > 0)) throw DomainError("scale weights must be positive");
    scale_ = std::move(theta);
}

void GridField::check_compatible(const GridField& o) const {
    if (o.grid_.get() != grid_.get() && (o.grid_->nr() != grid_->nr() || o.grid_->nt() != grid_->nt()))
        throw ShapeError("GridField: fields live on different grids");
}

GridField& GridField::operator+=(const GridField& o) {
    check_compatible(o);
    if (o.dim() != dim()) throw ShapeError("GridField: dimension mismatch");
    values_ += o.values_;
    return *this;
}

GridField& GridField::operator-=(const GridField& o) {
    check_compatible(o);
    if (o.dim() != dim()) throw ShapeError("GridField: dimension mismatch");
    values_ -= o.values_;
    return *this;
}

GridField& GridField::operator*=(cplx s) {
    values_ *= s;
    return *this;
}

// ---------------------------------------------------------------------------

CVector quadrature(const GridField& f) {
    const DiscGrid& g = f.grid();
    CVector sum = CVector::Zero(f.dim());
    for (int i = 0; i < g.nr(); ++i) {
        const double w = g.ring_weight(i);
        sum += w * f.values().middleRows(g.index(i, 0), g.nt()).colwise().sum().transpose();
    }
    return sum;
}

namespace {

// Three-point first-derivative weights at x0 from samples at x0-h1, x0, x0+h2.
struct Stencil {
    double a, b, c;
};

Stencil centred(double h1, double h2) {
    return {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))};
}

// Weights at x0 from samples at x0, x0+s1, x0+s2 (s1, s2 may be negative).
Stencil one_sided(double s1, double s2) {
    const double a = -(s1 + s2) / (s1 * s2);
    const double b = s2 / (s1 * (s2 - s1));
    const double c = -s1 / (s2 * (s2 - s1));
    return {a, b, c};
}

}  // namespace

GridField radial_derivative(const GridField& f) {
    const DiscGrid& g = f.grid();
    const int nt = g.nt();
    GridField out(f.grid_ptr(), f.dim());
    const CMatrix& v = f.values();
    CMatrix& o = out.values();
    auto ring = [&](const CMatrix& m, int i) { return m.middleRows(g.index(i, 0), nt); };
    for (int i = 0; i <= g.nr(); ++i) {
        auto dst = o.middleRows(g.index(i, 0), nt);
        if (i == 0) {
            // the line through the origin continues ring 0 at angle theta + pi
            const double r0 = g.radius(0);
            const Stencil s = centred(2.0 * r0, g.radius(1) - r0);
            const int half = nt / 2;
            for (int k = 0; k < nt; ++k)
                dst.row(k) = s.a * v.row(g.index(0, (k + half) % nt)) + s.b * v.row(g.index(0, k)) +
                             s.c * v.row(g.index(1, k));
        } else if (i == g.nr()) {
            const double r = g.radius(i);
            const Stencil s = one_sided(g.radius(i - 1) - r, g.radius(i - 2) - r);
            dst = s.a * ring(v, i) + s.b * ring(v, i - 1) + s.c * ring(v, i - 2);
        } else {
            const Stencil s = centred(g.radius(i) - g.radius(i - 1), g.radius(i + 1) - g.radius(i));
            dst = s.a * ring(v, i - 1) + s.b * ring(v, i) + s.c * ring(v, i + 1);
        }
    }
    return out;
}

GridField angular_derivative(const GridField& f, AngularDiff mode) {
    const DiscGrid& g = f.grid();
    const int nt = g.nt();
    GridField out(f.grid_ptr(), f.dim());
    if (mode == AngularDiff::FiniteDifference) {
        const double inv = 1.0 / (2.0 * g.dtheta());
        for (int i = 0; i <= g.nr(); ++i)
            for (int k = 0; k < nt; ++k) {
                const auto kp = g.index(i, (k + 1) % nt);
                const auto km = g.index(i, (k + nt - 1) % nt);
                out.values().row(g.index(i, k)) = (f.values().row(kp) - f.values().row(km)) * inv;
            }
        return out;
    }
    Eigen::FFT<double> fft;
    std::vector<cplx> in(nt), spec(nt), back(nt);
    for (Eigen::Index c = 0; c < f.dim(); ++c)
        for (int i = 0; i <= g.nr(); ++i) {
            for (int k = 0; k < nt; ++k) in[k] = f(g.index(i, k), c);
            fft.fwd(spec, in);
            for (int m = 0; m < nt; ++m) {
                int freq = m <= nt / 2 ? m : m - nt;
                if (m == nt / 2) freq = 0;
                spec[m] *= cplx(0.0, double(freq));
            }
            fft.inv(back, spec);
            for (int k = 0; k < nt; ++k) out(g.index(i, k), c) = back[k];
        }
    return out;
}

namespace {

// e^{+-i theta}/2 * (f_r +- (i/r) f_theta)
GridField wirtinger(const GridField& f, AngularDiff mode, double sign) {
    const DiscGrid& g = f.grid();
    GridField fr = radial_derivative(f);
    GridField ft = angular_derivative(f, mode);
    GridField out(f.grid_ptr(), f.dim());
    for (int i = 0; i <= g.nr(); ++i) {
        const double r = g.radius(i);
        for (int k = 0; k < g.nt(); ++k) {
            const auto n = g.index(i, k);
            const cplx phase = std::polar(0.5, sign * g.angle(k));
            out.values().row(n) =
                phase * (fr.values().row(n) + cplx(0.0, sign / r) * ft.values().row(n));
        }
    }
    return out;
}

}  // namespace

GridField dbar(const GridField& f, AngularDiff mode) { return wirtinger(f, mode, +1.0); }
GridField d(const GridField& f, AngularDiff mode) { return wirtinger(f, mode, -1.0); }

GridField dx(const GridField& f, AngularDiff mode) {
    GridField a = d(f, mode);
    a += dbar(f, mode);
    return a;
}

GridField dy(const GridField& f, AngularDiff mode) {
    // f_y = i (f_z - f_zbar)
    GridField a = d(f, mode);
    a -= dbar(f, mode);
    return a * cplx(0.0, 1.0);
}

CVector interpolate(const GridField& f, cplx z) {
    const DiscGrid& g = f.grid();
    const int nt = g.nt();
    double rho = std::abs(z);
    if (rho > 1.0 + 1e-12) throw DomainError("interpolate: point outside the closed disc");
    rho = std::min(rho, 1.0);
    double phi = std::arg(z);
    if (phi < 0) phi += 2 * kPi;
    const double s = phi / g.dtheta();
    const int k0 = int(std::floor(s)) % nt;
    const int k1 = (k0 + 1) % nt;
    const double ta = s - std::floor(s);
    auto on_ring = [&](int i) -> CVector {
        return ((1 - ta) * f.values().row(g.index(i, k0)) + ta * f.values().row(g.index(i, k1)))
            .transpose();
    };
    const double r0 = g.radius(0);
    if (rho <= r0) {
        CVector centre = f.values().middleRows(0, nt).colwise().mean().transpose();
        const double t = rho / r0;
        return (1 - t) * centre + t * on_ring(0);
    }
    // rings are uniformly spaced except the last gap
    int i = std::min(int(std::floor(rho * g.nr() - 0.5)), g.nr() - 1);
    i = std::max(i, 0);
    const double ra = g.radius(i), rb = g.radius(i + 1);
    const double t = std::clamp((rho - ra) / (rb - ra), 0.0, 1.0);
    return (1 - t) * on_ring(i) + t * on_ring(i + 1);
}

// ---------------------------------------------------------------------------

std::vector<double> default_scale_weights(Eigen::Index n) {
    std::vector<double> w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = double(i + 1);
    return w;
}

double scale_norm(const CVector& x, double s, const std::vector<double>& theta) {
    if (Eigen::Index(theta.size()) != x.size()) throw ShapeError("scale_norm: weight count mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(theta[i], 2 * s) * std::norm(x[i]);
    return std::sqrt(acc);
}

RVector pointwise_norm(const GridField& f, double s) {
    if (s == 0.0) return f.values().rowwise().norm();
    const std::vector<double> theta =
        f.scale_weights() ? *f.scale_weights() : default_scale_weights(f.dim());
    RVector out(f.size());
    for (Eigen::Index n = 0; n < f.size(); ++n) out[n] = scale_norm(f.at(n), s, theta);
    return out;
}

double lp_norm(const GridField& f, double p, double s) {
    if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
    const DiscGrid& g = f.grid();
    const RVector pn = pointwise_norm(f, s);
    double acc = 0.0;
    for (int i = 0; i < g.nr(); ++i) {
        double ring = 0.0;
        for (int k = 0; k < g.nt(); ++k) ring += std::pow(pn[g.index(i, k)], p);
        acc += g.ring_weight(i) * ring;
    }
    return std::pow(acc, 1.0 / p);
}

double sobolev_norm(const GridField& f, double p) {
    const double a = lp_norm(f, p), bx = lp_norm(dx(f), p), by = lp_norm(dy(f), p);
    return std::pow(std::pow(a, p) + std::pow(bx, p) + std::pow(by, p), 1.0 / p);
}

namespace {

double holder_on(const GridField& f, double alpha, const std::vector<Eigen::Index>& pool,
                 int sample_pairs, std::uint64_t seed) {
    const DiscGrid& g = f.grid();
    double best = 0.0;
    auto consider = [&](Eigen::Index a, Eigen::Index b) {
        const double dist = std::abs(g.node(a) - g.node(b));
        if (dist <= 0.0) return;
        const double num = (f.values().row(a) - f.values().row(b)).norm();
        best = std::max(best, num / std::pow(dist, alpha));
    };
    if (pool.size() < 2) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int s = 0; s < sample_pairs; ++s) consider(pool[pick(rng)], pool[pick(rng)]);
    // structured pairs: antipodal on each ring, nearest neighbours in r and theta
    std::vector<char> in_pool(g.size(), 0);
    for (auto n : pool) in_pool[n] = 1;
    const int nt = g.nt();
    for (auto n : pool) {
        const int i = g.ring_of(n), k = g.angle_of(n);
        const auto anti = g.index(i, (k + nt / 2) % nt);
        const auto next = g.index(i, (k + 1) % nt);
        if (in_pool[anti]) consider(n, anti);
        if (in_pool[next]) consider(n, next);
        if (i + 1 <= g.nr() && in_pool[g.index(i + 1, k)]) consider(n, g.index(i + 1, k));
    }
    return best;
}

}  // namespace

double holder_seminorm(const GridField& f, double alpha, int sample_pairs, std::uint64_t seed) {
    return holder_seminorm_within(f, alpha, 1.0, sample_pairs, seed);
}

double holder_seminorm_within(const GridField& f, double alpha, double radius, int sample_pairs,
                              std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("holder_seminorm: alpha must be in (0,1]");
    return holder_on(f, alpha, nodes_within(f.grid(), radius), sample_pairs, seed);
}

NormReport norm_report(const GridField& f, double p) {
    if (!(p > 2.0)) throw DomainError("norm_report: p must exceed 2");
    NormReport r;
    r.p = p;
    r.lp = lp_norm(f, p);
    r.w1p = sobolev_norm(f, p);
    r.holder_alpha = (p - 2.0) / p;
    r.holder_seminorm = holder_seminorm(f, r.holder_alpha);
    return r;
}

MorreyReport morrey_check(const std::function<GridField(GridPtr)>& make, double p,
                          const std::vector<int>& levels, double tolerance) {
    if (!(p > 2.0)) throw DomainError("morrey_check: p must exceed 2");
    MorreyReport rep;
    const double alpha = (p - 2.0) / p;
    for (int nr : levels) {
        GridField f = make(make_grid(nr));
        const double w = sobolev_norm(f, p);
        const double h = holder_seminorm(f, alpha);
        rep.nr.push_back(nr);
        rep.ratio.push_back(w > 0.0 ? h / w : 0.0);
    }
    const auto [lo, hi] = std::minmax_element(rep.ratio.begin(), rep.ratio.end());
    rep.max_relative_variation = *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
    rep.stable = rep.max_relative_variation <= tolerance;
    return rep;
}

std::vector<Eigen::Index> nodes_within(const DiscGrid& g, double radius) {
    std::vector<Eigen::Index> out;
    for (int i = 0; i <= g.nr(); ++i)
        if (g.radius(i) <= radius + 1e-14)
            for (int k = 0; k < g.nt(); ++k) out.push_back(g.index(i, k));
    return out;
}

double max_norm(const GridField& f, const std::vector<Eigen::Index>& nodes) {
    double m = 0.0;
    for (auto n : nodes) m = std::max(m, f.values().row(n).norm());
    return m;
}

double max_norm(const GridField& f) { return f.values().rowwise().norm().maxCoeff(); }

}  // namespace holodisc
