#pragma once

// Singular integral operators on the unit disc: the Cauchy-Green operator T,
// the Beurling operator S = d(T), the weighted operators T_Q / S_Q, the
// boundary-adapted T1, T2, S1, S2, the Cauchy integral K over the circle, and
// empirical norm studies.
//
// Conventions: Tf(z) = (1/2 pi i) int_D f(t) dt ^ dtbar / (t - z)
//                    = -(1/pi) int_D f(t) / (t - z) dA(t),
// so that dbar(Tf) = f. Every operator acts componentwise on C^N-valued fields.

#include "holodisc/grid.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace holodisc {

// ---------------------------------------------------------------------------
// Cauchy-Green transform

/// Tf at every node. The quadrature is the cell-centred product rule with
/// singularity subtraction:
///   int f/(t-z) = sum w (f(t) - f(z))/(t-z) + f(z) * int_D dA/(t-z),
/// where the last integral is the closed form -pi conj(z). The angular sums are
/// circular correlations (every ring shares the same angles) and are evaluated
/// with FFTs; the result equals the direct O(M^2) sum.
GridField cauchy_T(const GridField& f);

/// (Tf)(1 / conj(z)) at every node z, i.e. the Cauchy transform evaluated at
/// the reflected points outside the disc. On the trace ring it coincides
/// bit-for-bit with cauchy_T.
GridField cauchy_T_reflected(const GridField& f);

/// Tf at an arbitrary point of the plane (O(M) direct sum; the subtraction
/// anchor is f interpolated at z, or at 1/conj(z) outside the disc).
CVector cauchy_T_at(const GridField& f, cplx z);

/// Reference O(M^2) evaluation of Tf at every node, used to validate the FFT
/// path. Only practical on small grids.
GridField cauchy_T_direct(const GridField& f);

/// Sf = d/dz (Tf) by grid differentiation.
GridField beurling_S(const GridField& f, AngularDiff mode = AngularDiff::FiniteDifference);

/// Direct principal-value quadrature of -(1/pi) int f(t)/(t-z)^2 dA with
/// singularity subtraction (int_D dA/(t-z)^2 = 0 in the PV sense for |z| < 1).
/// O(M^2); cross-check for beurling_S.
GridField beurling_S_pv(const GridField& f);

// ---------------------------------------------------------------------------
// Weights

/// Q(z) = c * prod_k (1 - z conj(z_k))^{alpha_k}, 0 < alpha_k <= 1, the branch of
/// prod (z - z_k)^{alpha_k} that is continuous off the rays {lambda z_k,
/// lambda > 1}. The unimodular constant c defaults to prod (-z_k)^{alpha_k}
/// with principal powers.
class WeightSpec {
public:
    struct Point {
        cplx z;
        double alpha;
    };

    explicit WeightSpec(std::vector<Point> points);
    WeightSpec(std::vector<Point> points, cplx prefactor);

    const std::vector<Point>& points() const noexcept { return points_; }
    cplx prefactor() const noexcept { return prefactor_; }
    double sum_alpha() const noexcept;

    cplx operator()(cplx z) const;
    /// Q'(z) / Q(z) = sum alpha_k / (z - z_k)
    cplx log_derivative(cplx z) const;

    /// L^p window (p1, p2) on which S_Q is bounded.
    double p_lower() const;
    double p_upper() const;
    bool in_window(double p) const { return p > p_lower() && p < p_upper(); }

private:
    std::vector<Point> points_;
    cplx prefactor_;
};

/// Weight Q = zeta - 1.
WeightSpec boundary_weight();

/// R(zeta) = e^{3 pi i/4} (zeta-1)^{1/4} (zeta+1)^{1/4} (zeta-i)^{1/2} with
/// R(0) = e^{3 pi i/4}.
WeightSpec triangle_weight();

/// sqrt(zeta) continuous off the positive real axis with sqrt(-1) = i.
cplx sqrt_cut_positive(cplx z);

/// X(zeta) = R(zeta) / sqrt(zeta).
cplx triangle_X(cplx z);

/// Index of the arc containing e^{i theta}: 1 for (0, pi/2), 2 for (pi/2, pi),
/// 3 for (pi, 2 pi); 0 at the junction points 1, i, -1.
int triangle_arc(double theta);

/// |Im (1+i) x|, |Im (1-i) x| or |Im x| according to the arc containing the
/// boundary point; 0 at the junctions.
double triangle_bc_residual(cplx z_on_circle, cplx value);

struct WeightReport {
    int excluded_nodes = 0;  ///< nodes where Q vanishes; f/Q set to 0 there
};

GridField weighted_TQ(const GridField& f, const WeightSpec& w, WeightReport* report = nullptr);
GridField weighted_SQ(const GridField& f, const WeightSpec& w, WeightReport* report = nullptr);
CVector weighted_TQ_at(const GridField& f, const WeightSpec& w, cplx z);

// ---------------------------------------------------------------------------
// Boundary-adapted operators

/// T1 f = Tf - conj(Tf(1/conj(zeta))); Re T1 f = 0 on the circle.
GridField op_T1(const GridField& f);
/// T1 through the weighted construction T_Q + 2i Im Tf(1), Q = zeta - 1.
GridField op_T1_weighted(const GridField& f);
GridField op_S1(const GridField& f);
CVector op_T1_at(const GridField& f, cplx z);

/// T2 = T_Q with Q = R (triangle weight); satisfies the triangle line
/// conditions on the three arcs.
GridField op_T2(const GridField& f, WeightReport* report = nullptr);
GridField op_S2(const GridField& f);
CVector op_T2_at(const GridField& f, cplx z);

// ---------------------------------------------------------------------------
// Cauchy integral over the circle

/// Kf(z) = (1/2 pi i) int_{|t|=1} f(t)/(t - z) dt for trace data given at the
/// nt trace nodes (rows of `trace`, one column per component). The trapezoid
/// rule is exact on trigonometric polynomials of degree < nt/2, so Kf is
/// evaluated as the holomorphic projection sum_{m>=0} fhat_m z^m; on the trace
/// ring this is the interior boundary value.
GridField boundary_cauchy_K(const GridPtr& grid, const CMatrix& trace);

/// Schwarz integral of real boundary data g: holomorphic F with Re F = g on
/// the circle and Im F(0) = 0.
GridField schwarz_integral(const GridPtr& grid, const CMatrix& trace);

/// Trace values (nt x N) of a field.
CMatrix boundary_trace(const GridField& f);

// ---------------------------------------------------------------------------
// Norm studies

using FieldOperator = std::function<GridField(const GridField&)>;

/// Deterministic family of scalar test fields: monomial probes zeta^n first,
/// then random polynomials in (zeta, conj zeta) times radial bumps.
GridField opnorm_test_field(const GridPtr& grid, int trial, std::uint64_t seed);

struct OpNormEstimate {
    double estimate = 0.0;           ///< max ratio over trials
    std::vector<double> running;     ///< running maximum after each trial
    std::vector<double> ratios;
};

/// sup over test fields of ||op f||_p / ||f||_p.
OpNormEstimate estimate_opnorm(const FieldOperator& op, const GridPtr& grid, double p, int trials,
                               std::uint64_t seed);

/// int_D |t - z0|^{-alpha} |t - z|^{-beta} dA(t) by nested tanh-sinh
/// quadrature in polar coordinates about z. Requires 0 < alpha, beta < 2,
/// alpha + beta > 2, |z0| = 1, |z| < 1.
double j_alpha_beta(double alpha, double beta, cplx z0, cplx z, double tolerance = 1e-10);

}  // namespace holodisc
