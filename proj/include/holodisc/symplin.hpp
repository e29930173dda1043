#pragma once

// R-linear operators on C^N in the {P, Q} form u -> P u + Q conj(u), the
// standard symplectic form omega(u, v) = -Im <u, v>, linear almost complex
// structures and their complex representation.

#include "holodisc/grid.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace holodisc {

/// u -> P u + Q conj(u).
class RLinearOp {
public:
    RLinearOp(CMatrix P, CMatrix Q);

    static RLinearOp identity(Eigen::Index n);
    static RLinearOp zero(Eigen::Index n);
    /// Multiplication by i.
    static RLinearOp standard_complex(Eigen::Index n);
    static RLinearOp conjugation(Eigen::Index n);
    /// Inverse of real_matrix(): rebuilds {P, Q} from a 2N x 2N real matrix
    /// acting on (Re u, Im u).
    static RLinearOp from_real(const RMatrix& m);

    Eigen::Index dim() const noexcept { return P_.rows(); }
    const CMatrix& P() const noexcept { return P_; }
    const CMatrix& Q() const noexcept { return Q_; }

    CVector apply(const CVector& u) const;
    CVector operator()(const CVector& u) const { return apply(u); }

    /// (F G) u = F(G u).
    RLinearOp compose(const RLinearOp& g) const;
    friend RLinearOp operator*(const RLinearOp& f, const RLinearOp& g) { return f.compose(g); }
    friend RLinearOp operator+(const RLinearOp& f, const RLinearOp& g);
    friend RLinearOp operator-(const RLinearOp& f, const RLinearOp& g);
    friend RLinearOp operator*(double s, const RLinearOp& f);

    /// Adjoint with respect to Re <., .>: {P*, Q^t}.
    RLinearOp adjoint() const;
    /// {P^t, Q*}.
    RLinearOp transpose() const;
    /// {conj P, conj Q}.
    RLinearOp conjugate() const;

    /// Action on (Re u, Im u) as a 2N x 2N real matrix.
    RMatrix real_matrix() const;

    /// General inverse through the real view; throws SingularityError.
    RLinearOp inverse() const;

    /// Operator norm (largest singular value of the real view).
    double norm() const;

private:
    CMatrix P_;
    CMatrix Q_;
};

/// omega(u, v) = -Im sum u_j conj(v_j); omega(u, i u) = |u|^2.
double omega(const CVector& u, const CVector& v);

/// Spectral norm of a complex matrix; SVD, power iteration for large sizes.
double spectral_norm(const CMatrix& m);
/// Spectral norm of a real matrix.
double spectral_norm(const RMatrix& m);

struct OmegaReport {
    bool preserves = false;
    double unitary_residual = 0.0;    ///< ||P*P - Q^t conj(Q) - I||
    double symmetric_residual = 0.0;  ///< ||P^t conj(Q) - conj(Q)^t P||
    double max() const { return std::max(unitary_residual, symmetric_residual); }
};

/// First pair of identities characterising omega-preservation.
OmegaReport preserves_omega(const RLinearOp& f, double tol = 1e-8);

/// Second pair: ||P P* - Q Q* - I||, ||P Q^t - Q P^t||.
OmegaReport dual_identities(const RLinearOp& f, double tol = 1e-8);

/// {P*, -Q^t}; throws DomainError unless f preserves omega.
RLinearOp symplectic_inverse(const RLinearOp& f, double tol = 1e-8);

/// ||Q conj(P)^{-1}||; throws SingularityError when P is singular.
double norm_antiholomorphic_ratio(const RLinearOp& f);
/// ||Q|| / sqrt(1 + ||Q||^2).
double antiholomorphic_ratio_closed_form(const RLinearOp& f);

/// exp(t J0 S) for a real symmetric 2N x 2N matrix S, J0 the matrix of omega.
/// The result preserves omega up to the accuracy of the matrix exponential.
RLinearOp hamiltonian_flow(const RMatrix& S, double t);

/// exp of a random Hamiltonian generator with entries of size `scale`.
RLinearOp random_symplectomorphism(Eigen::Index n, double scale, std::mt19937_64& rng);

// ---------------------------------------------------------------------------

/// A linear almost complex structure J (J^2 = -I) together with
/// B = -J_st J, L = (I + B)^{-1}(I - B) and the complex representation A
/// (L h = A conj(h)).
class LinearACS {
public:
    explicit LinearACS(RLinearOp J, double tol = 1e-10);

    /// F J_st F^{-1}.
    static LinearACS direct_image(const RLinearOp& f);
    static LinearACS standard(Eigen::Index n);

    Eigen::Index dim() const noexcept { return J_.dim(); }
    const RLinearOp& J() const noexcept { return J_; }
    RLinearOp B() const;
    /// Throws SingularityError when J_st + J is numerically singular.
    const RLinearOp& L() const;
    /// Condition number of I + B in the real view.
    double condition() const;
    double tolerance() const noexcept { return tol_; }

private:
    RLinearOp J_;
    double tol_;
    std::optional<RLinearOp> L_;
    double condition_ = 0.0;
};

/// A with L h = A conj(h). Throws SingularityError (J_st + J singular) or
/// DomainError (L not antilinear within tolerance).
CMatrix complex_representation(const LinearACS& J);

struct TamingReport {
    bool tamed = false;
    double min_sampled_omega = 0.0;   ///< min omega(u, J u) over unit samples
    double min_symmetric_eig = 0.0;   ///< smallest eigenvalue of sym(real B)
    int trials = 0;
};

TamingReport taming_report(const LinearACS& J, int trials, std::uint64_t seed);
bool is_tamed(const LinearACS& J, int trials = 1000, std::uint64_t seed = 1);

struct CompatibilityReport {
    bool compatible = false;
    double symmetry_residual = 0.0;  ///< ||A^t - A||
    double norm_A = 0.0;
};

CompatibilityReport compatibility_report(const LinearACS& J, double tol = 1e-8);
bool is_compatible(const LinearACS& J, double tol = 1e-8);

/// J = {i I, Q} on C^{2n}, Q = [[0, 2 diag(c)], [0, 0]]: tamed, not
/// compatible, ||A|| = max c.
LinearACS build_unit_norm_example(const std::vector<double>& c);

struct LBoundReport {
    double max_ratio = 0.0;   ///< max ||L x|| over sampled unit x
    bool strict = true;       ///< every sample had ||L x|| < 1
    int trials = 0;
};

LBoundReport taming_bound_L(const LinearACS& J, int trials, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Point-dependent complex representation Z -> A(Z) with a bound a < 1.
class StructureField {
public:
    using Eval = std::function<CMatrix(const CVector&)>;

    StructureField(Eigen::Index dim, Eval eval, double bound,
                   std::optional<double> lipschitz = std::nullopt);

    static StructureField zero(Eigen::Index dim);
    static StructureField constant(const CMatrix& A);

    Eigen::Index dim() const noexcept { return dim_; }
    double bound() const noexcept { return bound_; }
    const std::optional<double>& lipschitz() const noexcept { return lipschitz_; }
    /// True when the field is identically zero by construction.
    bool is_zero() const noexcept { return zero_; }

    CMatrix operator()(const CVector& z) const;

    /// Largest sampled ||A(Z)||; throws DomainError when it exceeds the bound.
    double check_bound(const std::vector<CVector>& samples) const;

    /// Conjugation by the dilation Z -> lambda Z: Z -> A(lambda Z).
    StructureField dilated(double lambda) const;

private:
    Eigen::Index dim_;
    Eval eval_;
    double bound_;
    std::optional<double> lipschitz_;
    bool zero_ = false;
};

}  // namespace holodisc
