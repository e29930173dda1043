#pragma once

// Polar tensor discretization of the closed unit disc and complex
// vector-valued fields sampled on it.
//
// Layout: nr cell-centred rings r_i = (i + 1/2)/nr, i = 0..nr-1, plus one
// trace ring at r = 1 carrying zero quadrature weight. Every ring holds nt
// nodes at angles theta_k = k * 2pi/nt, so the angular grid is shared by all
// rings (the Cauchy kernels rely on this) and contains 1, i, -1, -i whenever
// nt is a multiple of 4. Node index = ring * nt + k.

#include <Eigen/Dense>

#include <any>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace holodisc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

class DiscGrid {
public:
    /// nt defaults to 2*nr. nt must be a positive multiple of 4.
    explicit DiscGrid(int nr, int nt = 0);

    int nr() const noexcept { return nr_; }
    int nt() const noexcept { return nt_; }
    int rings() const noexcept { return nr_ + 1; }
    Eigen::Index size() const noexcept { return Eigen::Index(nr_ + 1) * nt_; }

    double dr() const noexcept { return 1.0 / nr_; }
    double dtheta() const noexcept { return dtheta_; }
    /// Mesh parameter max(dr, dtheta).
    double h() const noexcept { return std::max(dr(), dtheta_); }

    Eigen::Index index(int ring, int k) const noexcept {
        return Eigen::Index(ring) * nt_ + k;
    }
    int ring_of(Eigen::Index node) const noexcept { return int(node / nt_); }
    int angle_of(Eigen::Index node) const noexcept { return int(node % nt_); }

    double radius(int ring) const noexcept { return radii_[ring]; }
    double angle(int k) const noexcept { return k * dtheta_; }
    cplx node(Eigen::Index n) const noexcept { return nodes_[n]; }
    const std::vector<cplx>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& radii() const noexcept { return radii_; }

    /// Area weight r_i dr dtheta for cell-centred nodes, 0 on the trace ring.
    double weight(Eigen::Index n) const noexcept { return ring_weight_[ring_of(n)]; }
    double ring_weight(int ring) const noexcept { return ring_weight_[ring]; }

    /// Node indices of the |zeta| = 1 trace ring, in angular order.
    std::vector<Eigen::Index> boundary_index() const;
    bool is_boundary(Eigen::Index n) const noexcept { return ring_of(n) == nr_; }

    /// Lazily built per-grid data (kernels, interpolation tables). The factory
    /// runs at most once per key; results are shared between threads.
    template <class T>
    std::shared_ptr<const T> cached(const std::string& key,
                                    const std::function<std::shared_ptr<const T>()>& make) const {
        std::lock_guard lock(cache_->mutex);
        auto it = cache_->entries.find(key);
        if (it != cache_->entries.end())
            return std::any_cast<std::shared_ptr<const T>>(it->second);
        auto value = make();
        cache_->entries.emplace(key, value);
        return value;
    }

private:
    struct Cache {
        std::mutex mutex;
        std::map<std::string, std::any> entries;
    };

    int nr_;
    int nt_;
    double dtheta_;
    std::vector<double> radii_;
    std::vector<double> ring_weight_;
    std::vector<cplx> nodes_;
    std::shared_ptr<Cache> cache_;
};

using GridPtr = std::shared_ptr<const DiscGrid>;

inline GridPtr make_grid(int nr, int nt = 0) { return std::make_shared<const DiscGrid>(nr, nt); }

/// Samples of a map from the closed disc into C^N. Values are stored as a
/// (nodes x N) matrix; column c holds component c.
class GridField {
public:
    GridField(GridPtr grid, Eigen::Index dim);
    GridField(GridPtr grid, CMatrix values);

    static GridField sample(GridPtr grid, const std::function<cplx(cplx)>& f);
    static GridField sample(GridPtr grid, Eigen::Index dim,
                            const std::function<CVector(cplx)>& f);

    const DiscGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    Eigen::Index dim() const noexcept { return values_.cols(); }
    Eigen::Index size() const noexcept { return values_.rows(); }

    const CMatrix& values() const noexcept { return values_; }
    CMatrix& values() noexcept { return values_; }
    cplx operator()(Eigen::Index node, Eigen::Index comp = 0) const { return values_(node, comp); }
    cplx& operator()(Eigen::Index node, Eigen::Index comp = 0) { return values_(node, comp); }
    CVector at(Eigen::Index node) const { return values_.row(node).transpose(); }

    GridField component(Eigen::Index c) const;
    void set_component(Eigen::Index c, const GridField& scalar);
    GridField conj() const;

    /// Optional Hilbert-scale weights theta_n, one per component.
    const std::optional<std::vector<double>>& scale_weights() const noexcept { return scale_; }
    void set_scale_weights(std::vector<double> theta);

    GridField& operator+=(const GridField& o);
    GridField& operator-=(const GridField& o);
    GridField& operator*=(cplx s);

    friend GridField operator+(GridField a, const GridField& b) { return a += b; }
    friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
    friend GridField operator*(GridField a, cplx s) { return a *= s; }
    friend GridField operator*(cplx s, GridField a) { return a *= s; }

private:
    void check_compatible(const GridField& o) const;

    GridPtr grid_;
    CMatrix values_;
    std::optional<std::vector<double>> scale_;
};

// ---------------------------------------------------------------------------
// Quadrature and differentiation

/// Integral over D of each component, cell-centred product rule.
CVector quadrature(const GridField& f);

enum class AngularDiff { FiniteDifference, Spectral };

/// d/dr and d/dtheta of every component, nodewise.
GridField radial_derivative(const GridField& f);
GridField angular_derivative(const GridField& f, AngularDiff mode = AngularDiff::FiniteDifference);

/// Wirtinger derivatives via the polar chain rule.
GridField dbar(const GridField& f, AngularDiff mode = AngularDiff::FiniteDifference);
GridField d(const GridField& f, AngularDiff mode = AngularDiff::FiniteDifference);
/// Cartesian partials.
GridField dx(const GridField& f, AngularDiff mode = AngularDiff::FiniteDifference);
GridField dy(const GridField& f, AngularDiff mode = AngularDiff::FiniteDifference);

/// Value at an arbitrary point of the closed disc by bilinear interpolation
/// in (r, theta); inside the first ring the ring values are blended with
/// their angular mean.
CVector interpolate(const GridField& f, cplx z);

// ---------------------------------------------------------------------------
// Norms

/// Pointwise Hilbert norm ||f(zeta)|| (with D^s applied when s != 0).
RVector pointwise_norm(const GridField& f, double s = 0.0);

/// Scale norm of a single vector: ||D^s x|| with D = Diag(theta).
double scale_norm(const CVector& x, double s, const std::vector<double>& theta);
/// Default Hilbert-scale weights theta_n = n (1-based).
std::vector<double> default_scale_weights(Eigen::Index n);

double lp_norm(const GridField& f, double p, double s = 0.0);
/// (||f||_p^p + ||f_x||_p^p + ||f_y||_p^p)^{1/p}
double sobolev_norm(const GridField& f, double p);
/// max over sampled node pairs of ||f(z1) - f(z2)|| / |z1 - z2|^alpha.
double holder_seminorm(const GridField& f, double alpha, int sample_pairs = 4000,
                       std::uint64_t seed = 0x5eed);
/// Same, restricted to nodes with |zeta| <= radius.
double holder_seminorm_within(const GridField& f, double alpha, double radius,
                              int sample_pairs = 4000, std::uint64_t seed = 0x5eed);

struct NormReport {
    double p = 2.0;
    double lp = 0.0;
    double w1p = 0.0;
    double holder_alpha = 0.0;
    double holder_seminorm = 0.0;
};

/// All norms at once; holder_alpha = (p-2)/p, requires p > 2.
NormReport norm_report(const GridField& f, double p);

struct MorreyReport {
    std::vector<int> nr;
    std::vector<double> ratio;
    double max_relative_variation = 0.0;
    bool stable = false;
};

/// Hoelder((p-2)/p) / W^{1,p} ratio of the field produced by `make` on each
/// refinement level. Stable when the ratios agree to `tolerance` relative.
MorreyReport morrey_check(const std::function<GridField(GridPtr)>& make, double p,
                          const std::vector<int>& levels, double tolerance = 0.2);

/// Interior mask |zeta| <= radius.
std::vector<Eigen::Index> nodes_within(const DiscGrid& g, double radius);
/// max over the given nodes of ||f(zeta)||.
double max_norm(const GridField& f, const std::vector<Eigen::Index>& nodes);
double max_norm(const GridField& f);

}  // namespace holodisc
