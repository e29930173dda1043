#include "holodisc/symplin.hpp"

#include "holodisc/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace holodisc {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr Eigen::Index kSvdLimit = 1024;

void check_finite(const CMatrix& m, const char* what) {
    if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
}

double condition_number(const RMatrix& m) {
    Eigen::BDCSVD<RMatrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double smin = s(s.size() - 1);
    return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

RMatrix omega_matrix(Eigen::Index n) {
    RMatrix J0 = RMatrix::Zero(2 * n, 2 * n);
    J0.topRightCorner(n, n) = RMatrix::Identity(n, n);
    J0.bottomLeftCorner(n, n) = -RMatrix::Identity(n, n);
    return J0;
}

}  // namespace

RLinearOp::RLinearOp(CMatrix P, CMatrix Q) : P_(std::move(P)), Q_(std::move(Q)) {
    if (P_.rows() != P_.cols() || Q_.rows() != Q_.cols() || P_.rows() != Q_.rows() || P_.rows() < 1)
        throw ShapeError("RLinearOp: P and Q must be square of equal size");
    check_finite(P_, "RLinearOp");
    check_finite(Q_, "RLinearOp");
}

RLinearOp RLinearOp::identity(Eigen::Index n) {
    return {CMatrix::Identity(n, n), CMatrix::Zero(n, n)};
}

RLinearOp RLinearOp::zero(Eigen::Index n) { return {CMatrix::Zero(n, n), CMatrix::Zero(n, n)}; }

RLinearOp RLinearOp::standard_complex(Eigen::Index n) {
    return {kI * CMatrix::Identity(n, n), CMatrix::Zero(n, n)};
}

RLinearOp RLinearOp::conjugation(Eigen::Index n) {
    return {CMatrix::Zero(n, n), CMatrix::Identity(n, n)};
}

RLinearOp RLinearOp::from_real(const RMatrix& m) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() < 2)
        throw ShapeError("RLinearOp::from_real: expected a 2N x 2N matrix");
    const Eigen::Index n = m.rows() / 2;
    const RMatrix a = m.topLeftCorner(n, n), b = m.topRightCorner(n, n);
    const RMatrix c = m.bottomLeftCorner(n, n), dd = m.bottomRightCorner(n, n);
    CMatrix P(n, n), Q(n, n);
    P.real() = 0.5 * (a + dd);
    P.imag() = 0.5 * (c - b);
    Q.real() = 0.5 * (a - dd);
    Q.imag() = 0.5 * (b + c);
    return {P, Q};
}

CVector RLinearOp::apply(const CVector& u) const {
    if (u.size() != dim()) throw ShapeError("RLinearOp::apply: dimension mismatch");
    return P_ * u + Q_ * u.conjugate();
}

RLinearOp RLinearOp::compose(const RLinearOp& g) const {
    if (g.dim() != dim()) throw ShapeError("RLinearOp::compose: dimension mismatch");
    return {P_ * g.P_ + Q_ * g.Q_.conjugate(), P_ * g.Q_ + Q_ * g.P_.conjugate()};
}

RLinearOp operator+(const RLinearOp& f, const RLinearOp& g) {
    if (f.dim() != g.dim()) throw ShapeError("RLinearOp: dimension mismatch");
    return {f.P_ + g.P_, f.Q_ + g.Q_};
}

RLinearOp operator-(const RLinearOp& f, const RLinearOp& g) {
    if (f.dim() != g.dim()) throw ShapeError("RLinearOp: dimension mismatch");
    return {f.P_ - g.P_, f.Q_ - g.Q_};
}

RLinearOp operator*(double s, const RLinearOp& f) { return {s * f.P_, s * f.Q_}; }

RLinearOp RLinearOp::adjoint() const { return {P_.adjoint(), Q_.transpose()}; }
RLinearOp RLinearOp::transpose() const { return {P_.transpose(), Q_.adjoint()}; }
RLinearOp RLinearOp::conjugate() const { return {P_.conjugate(), Q_.conjugate()}; }

RMatrix RLinearOp::real_matrix() const {
    const Eigen::Index n = dim();
    RMatrix m(2 * n, 2 * n);
    m.topLeftCorner(n, n) = P_.real() + Q_.real();
    m.topRightCorner(n, n) = -P_.imag() + Q_.imag();
    m.bottomLeftCorner(n, n) = P_.imag() + Q_.imag();
    m.bottomRightCorner(n, n) = P_.real() - Q_.real();
    return m;
}

RLinearOp RLinearOp::inverse() const {
    const RMatrix m = real_matrix();
    const double cond = condition_number(m);
    if (!(cond < 1e13)) throw SingularityError("RLinearOp::inverse: operator is singular", cond);
    return from_real(m.partialPivLu().inverse());
}

double RLinearOp::norm() const { return spectral_norm(real_matrix()); }

double omega(const CVector& u, const CVector& v) {
    if (u.size() != v.size()) throw ShapeError("omega: dimension mismatch");
    return -std::imag(v.dot(u));
}

double spectral_norm(const RMatrix& m) {
    if (m.size() == 0) return 0.0;
    if (std::max(m.rows(), m.cols()) <= kSvdLimit) {
        Eigen::BDCSVD<RMatrix> svd(m);
        return svd.singularValues()(0);
    }
    RVector x = RVector::Ones(m.cols()).normalized();
    double s = 0.0;
    for (int it = 0; it < 500; ++it) {
        RVector y = m.transpose() * (m * x);
        const double ns = std::sqrt(y.norm());
        x = y.normalized();
        if (std::abs(ns - s) <= 1e-13 * ns) return ns;
        s = ns;
    }
    return s;
}

double spectral_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    if (std::max(m.rows(), m.cols()) <= kSvdLimit) {
        Eigen::BDCSVD<CMatrix> svd(m);
        return svd.singularValues()(0);
    }
    CVector x = CVector::Ones(m.cols()).normalized();
    double s = 0.0;
    for (int it = 0; it < 500; ++it) {
        CVector y = m.adjoint() * (m * x);
        const double ns = std::sqrt(y.norm());
        x = y.normalized();
        if (std::abs(ns - s) <= 1e-13 * ns) return ns;
        s = ns;
    }
    return s;
}

OmegaReport preserves_omega(const RLinearOp& f, double tol) {
    const auto& P = f.P();
    const auto& Q = f.Q();
    const Eigen::Index n = f.dim();
    OmegaReport r;
    r.unitary_residual =
        spectral_norm(CMatrix(P.adjoint() * P - Q.transpose() * Q.conjugate() - CMatrix::Identity(n, n)));
    r.symmetric_residual =
        spectral_norm(CMatrix(P.transpose() * Q.conjugate() - Q.conjugate().transpose() * P));
    r.preserves = r.max() <= tol;
    return r;
}

OmegaReport dual_identities(const RLinearOp& f, double tol) {
    const auto& P = f.P();
    const auto& Q = f.Q();
    const Eigen::Index n = f.dim();
    OmegaReport r;
    r.unitary_residual =
        spectral_norm(CMatrix(P * P.adjoint() - Q * Q.adjoint() - CMatrix::Identity(n, n)));
    r.symmetric_residual = spectral_norm(CMatrix(P * Q.transpose() - Q * P.transpose()));
    r.preserves = r.max() <= tol;
    return r;
}

RLinearOp symplectic_inverse(const RLinearOp& f, double tol) {
    const auto rep = preserves_omega(f, tol);
    if (!rep.preserves) throw DomainError("symplectic_inverse: operator does not preserve omega");
    return {f.P().adjoint(), -f.Q().transpose()};
}

double norm_antiholomorphic_ratio(const RLinearOp& f) {
    const CMatrix Pbar = f.P().conjugate();
    Eigen::BDCSVD<CMatrix> svd(Pbar, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    const double cond = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
    if (!(cond < 1e13)) throw SingularityError("norm_antiholomorphic_ratio: P is singular", cond);
    return spectral_norm(CMatrix(f.Q() * svd.solve(CMatrix::Identity(f.dim(), f.dim()))));
}

double antiholomorphic_ratio_closed_form(const RLinearOp& f) {
    const double q = spectral_norm(f.Q());
    return q / std::sqrt(1.0 + q * q);
}

RLinearOp hamiltonian_flow(const RMatrix& S, double t) {
    if (S.rows() != S.cols() || S.rows() % 2 != 0)
        throw ShapeError("hamiltonian_flow: generator must be 2N x 2N");
    const RMatrix sym = 0.5 * (S + S.transpose());
    const RMatrix X = t * omega_matrix(S.rows() / 2) * sym;
    return RLinearOp::from_real(X.exp());
}

RLinearOp random_symplectomorphism(Eigen::Index n, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    RMatrix S(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        for (Eigen::Index j = 0; j < S.cols(); ++j) S(i, j) = normal(rng);
    return hamiltonian_flow(scale * S, 1.0);
}

// ---------------------------------------------------------------------------

LinearACS::LinearACS(RLinearOp J, double tol) : J_(std::move(J)), tol_(tol) {
    const RLinearOp sq = J_ * J_ + RLinearOp::identity(J_.dim());
    const double scale = std::max(1.0, J_.norm() * J_.norm());
    if (sq.norm() > tol_ * scale) throw DomainError("LinearACS: J^2 != -I within tolerance");
    const RMatrix IB = RMatrix::Identity(2 * dim(), 2 * dim()) + B().real_matrix();
    condition_ = condition_number(IB);
    if (condition_ < 1e13) {
        const RMatrix IBm = RMatrix::Identity(2 * dim(), 2 * dim()) - B().real_matrix();
        L_ = RLinearOp::from_real(IB.partialPivLu().solve(IBm));
    }
}

LinearACS LinearACS::direct_image(const RLinearOp& f) {
    return LinearACS(f * RLinearOp::standard_complex(f.dim()) * f.inverse());
}

LinearACS LinearACS::standard(Eigen::Index n) { return LinearACS(RLinearOp::standard_complex(n)); }

RLinearOp LinearACS::B() const { return -1.0 * (RLinearOp::standard_complex(dim()) * J_); }

const RLinearOp& LinearACS::L() const {
    if (!L_) throw SingularityError("LinearACS: J_st + J is singular", condition_);
    return *L_;
}

double LinearACS::condition() const { return condition_; }

CMatrix complex_representation(const LinearACS& J) {
    const RLinearOp& L = J.L();
    const double scale = std::max(1.0, L.norm());
    if (spectral_norm(L.P()) > J.tolerance() * scale * 1e2)
        throw DomainError("complex_representation: L is not antilinear");
    return L.Q();
}

TamingReport taming_report(const LinearACS& J, int trials, std::uint64_t seed) {
    TamingReport r;
    r.trials = trials;
    const RMatrix b = J.B().real_matrix();
    const RMatrix sym = 0.5 * (b + b.transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
    r.min_symmetric_eig = es.eigenvalues()(0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    r.min_sampled_omega = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        CVector u(J.dim());
        for (auto& x : u) x = cplx(normal(rng), normal(rng));
        u.normalize();
        r.min_sampled_omega = std::min(r.min_sampled_omega, omega(u, J.J().apply(u)));
    }
    r.tamed = r.min_sampled_omega > 0.0 && r.min_symmetric_eig > 0.0;
    return r;
}

bool is_tamed(const LinearACS& J, int trials, std::uint64_t seed) {
    return taming_report(J, trials, seed).tamed;
}

CompatibilityReport compatibility_report(const LinearACS& J, double tol) {
    CompatibilityReport r;
    const CMatrix A = complex_representation(J);
    r.symmetry_residual = spectral_norm(CMatrix(A.transpose() - A));
    r.norm_A = spectral_norm(A);
    r.compatible = r.symmetry_residual <= tol;
    if (r.compatible && !(r.norm_A < 1.0))
        throw DomainError("compatible structure with ||A|| >= 1");
    return r;
}

bool is_compatible(const LinearACS& J, double tol) { return compatibility_report(J, tol).compatible; }

LinearACS build_unit_norm_example(const std::vector<double>& c) {
    const auto n = Eigen::Index(c.size());
    if (n < 1) throw DomainError("build_unit_norm_example: empty sequence");
    for (double ck : c)
        if (!(ck > 0.0 && ck < 1.0)) throw DomainError("build_unit_norm_example: c_k must lie in (0,1)");
    CMatrix Q = CMatrix::Zero(2 * n, 2 * n);
    for (Eigen::Index k = 0; k < n; ++k) Q(k, n + k) = 2.0 * c[k];
    return LinearACS(RLinearOp(kI * CMatrix::Identity(2 * n, 2 * n), Q));
}

LBoundReport taming_bound_L(const LinearACS& J, int trials, std::uint64_t seed) {
    LBoundReport r;
    r.trials = trials;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const RLinearOp& L = J.L();
    for (int t = 0; t < trials; ++t) {
        CVector x(J.dim());
        for (auto& v : x) v = cplx(normal(rng), normal(rng));
        x.normalize();
        const double ratio = L.apply(x).norm();
        r.max_ratio = std::max(r.max_ratio, ratio);
        if (!(ratio < 1.0)) r.strict = false;
    }
    return r;
}

// ---------------------------------------------------------------------------

StructureField::StructureField(Eigen::Index dim, Eval eval, double bound,
                               std::optional<double> lipschitz)
    : dim_(dim), eval_(std::move(eval)), bound_(bound), lipschitz_(lipschitz) {
    if (dim_ < 1) throw ShapeError("StructureField: dim must be positive");
    if (!(bound_ >= 0.0 && bound_ < 1.0)) throw DomainError("StructureField: bound must lie in [0,1)");
    if (!eval_) throw DomainError("StructureField: empty evaluator");
}

StructureField StructureField::zero(Eigen::Index dim) {
    StructureField f(dim, [dim](const CVector&) { return CMatrix::Zero(dim, dim).eval(); }, 0.0, 0.0);
    f.zero_ = true;
    return f;
}

StructureField StructureField::constant(const CMatrix& A) {
    if (A.rows() != A.cols()) throw ShapeError("StructureField::constant: A must be square");
    const double a = spectral_norm(A);
    if (!(a < 1.0)) throw DomainError("StructureField::constant: ||A|| must be < 1");
    StructureField f(A.rows(), [A](const CVector&) { return A; }, a, 0.0);
    f.zero_ = A.isZero(0.0);
    return f;
}

CMatrix StructureField::operator()(const CVector& z) const {
    if (z.size() != dim_) throw ShapeError("StructureField: point dimension mismatch");
    CMatrix A = eval_(z);
    if (A.rows() != dim_ || A.cols() != dim_) throw ShapeError("StructureField: evaluator returned wrong shape");
    return A;
}

double StructureField::check_bound(const std::vector<CVector>& samples) const {
    double worst = 0.0;
    for (const auto& z : samples) worst = std::max(worst, spectral_norm((*this)(z)));
    if (worst > bound_ * (1.0 + 1e-12) + 1e-15)
        throw DomainError("StructureField: sampled ||A(Z)|| exceeds the certified bound");
    return worst;
}

StructureField StructureField::dilated(double lambda) const {
    auto inner = eval_;
    StructureField f(dim_, [inner, lambda](const CVector& z) { return inner(lambda * z); }, bound_,
                     lipschitz_ ? std::optional<double>(*lipschitz_ * std::abs(lambda)) : std::nullopt);
    f.zero_ = zero_;
    return f;
}

}  // namespace holodisc
