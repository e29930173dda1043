#pragma once

// Quasilinear Cauchy-Riemann system Z_zetabar = A(Z) conj(Z_zeta) on the
// disc: Picard iteration on Z - T(A(Z) conj(Z_zeta)) = W, discs through a
// point, and refinement studies of interior regularity.

#include "holodisc/grid.hpp"
#include "holodisc/symplin.hpp"

#include <optional>
#include <vector>

namespace holodisc {

/// Interior disc used for residual maxima.
inline constexpr double kInteriorRadius = 0.5;

struct DiscSolution {
    GridField Z;
    double residual_pde = 0.0;       ///< interior max ||Z_zbar - A(Z) conj(Z_z)||
    double residual_boundary = 0.0;  ///< problem specific, 0 when not applicable
    double area = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;     ///< successive-difference norms
};

/// Z_zetabar - A(Z) conj(Z_zeta) at every node.
GridField pde_residual(const GridField& Z, const StructureField& A);
/// Max of the residual over |zeta| <= radius.
double pde_residual_max(const GridField& Z, const StructureField& A,
                        double radius = kInteriorRadius);

/// Nodewise A(Z(zeta)) conj(Z_zeta), the right-hand side of the iteration.
GridField beltrami_source(const GridField& Z, const StructureField& A);

struct SolveOptions {
    double tol = 1e-10;         ///< stop when ||Z_{k+1} - Z_k||_p <= tol
    int max_iter = 200;
    double p = 2.0;
    int anderson_depth = 0;     ///< 0 disables Anderson acceleration
    double interior_radius = kInteriorRadius;
};

/// Picard iteration Z_{k+1} = W + T(A(Z_k) conj(d Z_k)) from Z_0 = W (or from
/// `start`). Throws ConvergenceError after max_iter steps.
DiscSolution solve_local(const StructureField& A, const GridField& W, const SolveOptions& opt = {},
                         const std::optional<GridField>& start = std::nullopt);

/// Z(0) and dZ_0(d/dRe zeta) of the fixed point, evaluated from the integral
/// representation Z = W + T g with W(zeta) = q + t zeta v.
struct CentreJet {
    CVector value;
    CVector dx;
};
CentreJet centre_jet(const GridField& Z, const StructureField& A, const CVector& q,
                     const CVector& tv);

struct ThroughPointOptions {
    SolveOptions solve;
    double a_target = 0.5;   ///< the disc is shrunk until the sampled bound is below this
    int max_shrink = 6;
    int newton_steps = 12;   ///< 0 disables the evaluation-map correction
    double newton_tol = 1e-10;
    double fd_step = 1e-6;
};

struct ThroughPointResult {
    DiscSolution disc;
    double t0 = 1.0;              ///< scale actually used
    double a_effective = 0.0;     ///< sampled max ||A|| on the disc image
    CVector value_at_centre;      ///< Z(0)
    CVector direction;            ///< dZ_0(d/dRe zeta)
    double centre_error = 0.0;    ///< ||Z(0) - p||
    double direction_angle = 0.0; ///< angle between dZ_0(d/dRe zeta) and v
    int newton_iterations = 0;
};

/// Disc with Z(0) = p and dZ_0(d/dRe zeta) parallel to v, built from the
/// complex line W = q + t0 zeta w and corrected by Newton on (q, w).
ThroughPointResult disc_through_point(const StructureField& A, const GridPtr& grid, const CVector& p,
                                      const CVector& v, double t0,
                                      const ThroughPointOptions& opt = {});

struct RegularityLevel {
    int nr = 0;
    double holder_Z = 0.0;
    double holder_dZ = 0.0;   ///< max of the seminorms of Z_zeta and Z_zetabar
};

struct RegularityReport {
    double alpha = 0.5;
    double radius = 0.0;
    std::vector<RegularityLevel> levels;
    double variation_Z = 0.0;   ///< (max - min) / max over levels
    double variation_dZ = 0.0;
    double growth_dZ = 1.0;     ///< finest / coarsest derivative seminorm
    bool stable = false;
};

/// Solves on each level and compares Hoelder(alpha) seminorms of Z and of its
/// first derivatives on |zeta| <= 1 - 2 eps.
RegularityReport regularity_smoke(const StructureField& A,
                                  const std::function<GridField(GridPtr)>& make_W,
                                  const std::vector<int>& levels, double alpha = 0.5,
                                  double eps = 0.1, double tolerance = 0.1,
                                  const SolveOptions& opt = {});

}  // namespace holodisc
