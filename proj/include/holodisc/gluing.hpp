#pragma once

// Boundary value problems: the conformal map of the disc onto the triangle
// {0 < Im z < 1 - |Re z|}, discs glued to the boundary of the cylinder over
// that triangle, and discs glued to the torus bD x {|w| = r}.

#include "holodisc/beltrami.hpp"
#include "holodisc/grid.hpp"
#include "holodisc/symplin.hpp"

#include <functional>
#include <vector>

namespace holodisc {

/// Nodes and weights of the Gauss-Jacobi rule for (1-x)^a (1+x)^b on [-1,1]
/// (Golub-Welsch). a = b = 0 gives Gauss-Legendre.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_jacobi(int n, double a, double b);

/// Distance from z to the boundary of the triangle with vertices -1, 1, i.
double triangle_boundary_distance(cplx z);
/// True when z lies strictly inside the triangle (margin > 0).
bool inside_triangle(cplx z, double margin = 0.0);

/// Schwarz-Christoffel map of the disc onto the triangle with vertices -1, 1,
/// i (interior angles pi/4, pi/4, pi/2), normalised by Phi(+-1) = +-1 and
/// Phi(i) = i. The prevertices coincide with the vertices.
class TriangleMap {
public:
    TriangleMap();

    cplx operator()(cplx z) const;
    /// Phi'(z); infinite at the prevertices.
    cplx derivative(cplx z) const;
    /// Phi^{-1}(w) by damped Newton from the origin.
    cplx inverse(cplx w, double tol = 1e-13) const;

    cplx constant() const noexcept { return C_; }
    cplx centre() const noexcept { return phi0_; }
    /// max |Phi(v) - v| over the three vertices.
    double vertex_error() const;

    /// Phi and Phi' sampled on a grid; Phi' is set to 0 at the prevertex nodes.
    GridField sample(const GridPtr& grid) const;
    GridField sample_derivative(const GridPtr& grid) const;

    /// Area of the image by the boundary integral (1/2) Im int conj(Phi) dPhi.
    double area_boundary(double tol = 1e-10) const;
    /// Grid quadrature of |Phi'|^2 (singular integrand, slow convergence).
    double area_grid(const GridPtr& grid) const;

private:
    cplx F(cplx z) const;                 // Phi' / C
    cplx integrate(cplx a, cplx b) const; // int_a^b F along the segment
    cplx integrate_smooth(cplx a, cplx b, int depth) const;
    cplx integrate_to_prevertex(cplx a, int k) const;
    cplx integrate_from_offset(cplx u, int k) const;  // from v_k (1 - u) to v_k
    cplx cofactor(cplx z, int k) const;               // F without the factor at v_k

    cplx C_{1.0};
    cplx phi0_{0.0};
    QuadratureRule legendre_;
    std::vector<QuadratureRule> jacobi_;   // one per prevertex
};

// ---------------------------------------------------------------------------

struct ContractionReport {
    GridField u;
    GridField v;
    int iterations = 0;
    double ratio = 0.0;        ///< last measured iterate ratio
    std::vector<double> history;
};

/// Fixed point of (u, v) = A(z, w) (conj(S2 u) + conj(Phi'), conj(S1 v)) by
/// Picard iteration in L^p. zw holds (z, w) with z in component 0.
ContractionReport solve_uv_contraction(const GridField& zw, const StructureField& A,
                                       const GridField& dphi, double p, double tol,
                                       int max_iter = 200,
                                       const ContractionReport* warm = nullptr);

struct CylinderProblem {
    StructureField A;
    cplx z0;
    CVector w0;
};

struct CylinderOptions {
    double p = 2.05;
    double tol = 1e-8;          ///< outer successive-difference tolerance (max norm)
    double inner_tol = 1e-10;
    int max_outer = 100;
    double damping = 1.0;       ///< relaxation factor for the outer update
};

struct CylinderSolution {
    DiscSolution disc;
    cplx tau;
    double area_interior = 0.0;
    double w_trace_drift = 0.0;   ///< max spread of Re w over the trace, per component
    std::vector<double> inner_ratios;
};

/// z = T2 u + Phi, w = T1 v - T1 v(tau) + w0 with z(tau) = z0.
CylinderSolution solve_cylinder(const CylinderProblem& problem, const GridPtr& grid,
                                const CylinderOptions& opt = {});

// ---------------------------------------------------------------------------

/// Coefficients of the structure A = [[a, 0], [b, 0]] acting on (z, w), with
/// scalar w.
struct TorusProblem {
    std::function<cplx(cplx, cplx)> a;
    std::function<cplx(cplx, cplx)> b;
    double a0 = 0.5;   ///< certified bound on |a|
    double b0 = 0.5;   ///< certified bound on |b|
    double r = 1.0;
    int n = 2;
    cplx V{1.0, 0.0};  ///< prescribed w(1), |V| = r
};

struct TorusOptions {
    double tol = 1e-9;
    int max_iter = 300;
    double damping = 1.0;
};

struct TorusSolution {
    DiscSolution disc;          ///< components (z, w)
    GridField u;
    GridField v;
    double modulus_z = 0.0;     ///< max ||z| - 1| on the trace
    double modulus_w = 0.0;     ///< max ||w| - r| on the trace
    double normalisation = 0.0; ///< max(|z(0)|, |z(1) - 1|, |w(1) - V|)
    int winding = 0;
    double decay_constant = 0.0;///< max |w| / (r |zeta|^n)
    bool alternative_regime = false;  ///< n = 0 branch
};

/// Solves with the ansatz z = zeta e^u, w = r zeta^n e^v, where Re u = 0 and
/// Re v = 0 on the circle, u(1) = 0 and v(1) = i arg V.
TorusSolution solve_torus(const TorusProblem& problem, const GridPtr& grid,
                          const TorusOptions& opt = {});

/// The structure field A = [[a, 0], [b, 0]] on C^2.
StructureField torus_structure(const TorusProblem& problem);

/// Winding number of a closed curve sampled at the trace nodes.
int winding_number(const std::vector<cplx>& curve);

}  // namespace holodisc
