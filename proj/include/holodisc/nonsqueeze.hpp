#pragma once

// Symplectic area of discs, explicit Riemann-Hilbert solvers, the flat disc
// family through a point of the unit cylinder and its perturbation under a
// small structure, and the end-to-end non-squeezing experiment.

#include "holodisc/beltrami.hpp"
#include "holodisc/grid.hpp"
#include "holodisc/symplin.hpp"

#include <functional>
#include <string>
#include <vector>

namespace holodisc {

enum class AreaMethod {
    Interior,  ///< quadrature of sum_j |d Z_j|^2 - |dbar Z_j|^2
    Boundary   ///< (1/2) sum_j Im sum_k conj(Z_j(k)) Z_j(k+1) over the trace
};

/// Pullback of omega integrated over the disc.
double symplectic_area(const GridField& Z, AreaMethod method = AreaMethod::Interior);
/// Per-component contributions.
RVector symplectic_area_components(const GridField& Z, AreaMethod method = AreaMethod::Interior);

/// Index-0 problem: dbar w = w', Re w = g + d on the circle. The free
/// imaginary constants are c0 (may be empty, meaning 0). g is nt x M (real
/// parts used), d and c0 have M entries.
GridField rh_solve_w(const GridField& wprime, const CMatrix& g, const RVector& d,
                     const RVector& c0 = RVector());

/// Index-1 problem: dbar z = z', 2 Re(conj(zeta) z) = h on the circle, with
/// the free polynomial c0 + i c1 zeta - conj(c0) zeta^2.
GridField rh_solve_z(const GridField& zprime, const RVector& h, cplx c0 = 0.0, double c1 = 0.0);

/// max |Re w - g - d| over the trace.
double rh_w_boundary_residual(const GridField& w, const CMatrix& g, const RVector& d);
/// max |2 Re(conj(zeta) z) - h| over the trace.
double rh_z_boundary_residual(const GridField& z, const RVector& h);

/// The disc zeta -> (zeta, p').
GridField flat_family(const GridPtr& grid, const CVector& p_rest);

struct PerturbOptions {
    double tol = 1e-10;      ///< max-norm increment tolerance
    int max_iter = 60;
    double divergence = 1e3; ///< increment growth factor treated as divergence
};

struct PerturbedDisc {
    DiscSolution disc;
    cplx tau;                 ///< preimage of the target point (= p_1)
    RVector d;                ///< real parts of w on the circle
    double modulus_residual = 0.0;   ///< max ||z| - 1| on the trace
    double re_w_residual = 0.0;      ///< max spread of Re w on the trace
    double point_residual = 0.0;     ///< ||Z(tau) - p||
};

/// Disc with |z| = 1 and Re w constant on the circle through p (|p_1| < 1),
/// obtained by iterating the index-1 / index-0 solvers from the flat disc.
PerturbedDisc perturb_family(const StructureField& A, const CVector& p, const GridPtr& grid,
                             const PerturbOptions& opt = {});

// ---------------------------------------------------------------------------

/// A symplectomorphism of C^N with explicit inverse and differential.
struct SymplecticMap {
    std::string name;
    Eigen::Index dim = 1;
    std::function<CVector(const CVector&)> forward;
    std::function<CVector(const CVector&)> inverse;
    std::function<RLinearOp(const CVector&)> differential;
};

SymplecticMap identity_map(Eigen::Index n);
/// Diagonal unitary rotation z_j -> e^{i phi_j} z_j.
SymplecticMap rotation_map(const RVector& phases);
/// Time-t flow of the quadratic Hamiltonian (1/2) x^T S x (a linear map).
SymplecticMap quadratic_flow(const RMatrix& S, double t);
/// Reproducible quadratic Hamiltonian on C^n.
RMatrix random_quadratic_hamiltonian(Eigen::Index n, std::uint64_t seed);
/// Nonlinear shear (x, y) -> (x, y + grad H(x)) with H(x) = (c/3) sum x_j^3.
SymplecticMap cubic_shear(Eigen::Index n, double c);

/// Complex representation of the pushed-forward structure at the image
/// point Phi(x): Q conj(P)^{-1} of dPhi_x.
CMatrix pushed_structure(const SymplecticMap& phi, const CVector& x);

struct StructureBound {
    double sup = 0.0;        ///< max ||A||
    double lipschitz = 0.0;  ///< max ||dA|| (finite differences)
    double c1() const { return sup + lipschitz; }
};

/// Sampled C^1 bound of the pushed-forward structure over the ball of radius
/// `radius` about the origin of the source.
StructureBound structure_c1_bound(const SymplecticMap& phi, double radius, int samples,
                                  std::uint64_t seed);

struct SqueezeOptions {
    double epsilon = 0.05;
    double eps0 = 0.05;       ///< admissible C^1 bound of the structure
    double tolerance = 0.02;  ///< slack on measured areas
    int samples = 200;
    std::uint64_t seed = 7;
    PerturbOptions perturb;
};

struct SqueezeReport {
    std::string map;
    double r = 1.0;
    double R = 1.0;
    double epsilon = 0.05;
    StructureBound bound;
    bool bound_certified = false;
    double disc_area = 0.0;              ///< interior quadrature, pi R^2 expected
    double disc_area_boundary = 0.0;     ///< same through the trace
    double lower_bound = 0.0;            ///< pi (r - 2 eps)^2
    double projected_area = 0.0;         ///< area of the pulled-back disc in (r - 2 eps)B
    double cut_area = 0.0;               ///< same inside (r - eps)B
    std::vector<double> chain_epsilon;   ///< eps, eps/2, eps/4, ...
    std::vector<double> chain_area;      ///< projected area inside (r - 2 eps_k)B
    double point_residual = 0.0;
    int iterations = 0;
    bool verdict = false;
    std::string failure;                 ///< stage that failed, empty on success
};

/// Lelong-type area inside the ball of radius s, with fractional inclusion
/// of cells that straddle the sphere.
double area_inside_ball(const GridField& X, double s);

SqueezeReport nonsqueezing_experiment(const SymplecticMap& phi, double r, double R,
                                      const GridPtr& grid, const SqueezeOptions& opt = {});

}  // namespace holodisc
