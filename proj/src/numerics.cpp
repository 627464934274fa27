#include "mpq/numerics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace mpq {

HilbertSpace::HilbertSpace(std::vector<int> d) : dims(std::move(d)) {
    if (dims.empty()) throw InvalidArgument("HilbertSpace: empty dimension list");
    for (int x : dims)
        if (x < 1) throw InvalidArgument("HilbertSpace: dimensions must be >= 1");
}

int HilbertSpace::dim() const {
    return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

std::string HilbertSpace::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
    return os.str();
}

Operator::Operator(Mat m, HilbertSpace s) : m_(std::move(m)), space_(std::move(s)) {
    if (m_.rows() != m_.cols()) throw InvalidArgument("Operator: matrix not square");
    if (m_.rows() != space_.dim())
        throw DimensionMismatch("Operator: matrix side " + std::to_string(m_.rows()) +
                                " does not match space " + space_.str());
}

Operator::Operator(Mat m) : Operator(m, HilbertSpace::single(static_cast<int>(m.rows()))) {}

bool Operator::is_hermitian(double tol) const {
    double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool Operator::is_unitary(double tol) const {
    return (m_.adjoint() * m_ - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff() <= tol;
}

void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* where) {
    if (a != b) throw DimensionMismatch(std::string(where) + ": space " + a.str() + " vs " + b.str());
}

Operator& Operator::operator+=(const Operator& o) {
    require_same_space(space_, o.space_, "operator+");
    m_ += o.m_;
    return *this;
}

Operator& Operator::operator-=(const Operator& o) {
    require_same_space(space_, o.space_, "operator-");
    m_ -= o.m_;
    return *this;
}

Operator& Operator::operator*=(cplx s) {
    m_ *= s;
    return *this;
}

Operator operator+(Operator a, const Operator& b) { return a += b; }
Operator operator-(Operator a, const Operator& b) { return a -= b; }
Operator operator-(const Operator& a) { return {-a.matrix(), a.space()}; }
Operator operator*(cplx s, Operator a) { return a *= s; }
Operator operator*(Operator a, cplx s) { return a *= s; }

Operator operator*(const Operator& a, const Operator& b) {
    require_same_space(a.space(), b.space(), "operator*");
    return {a.matrix() * b.matrix(), a.space()};
}

Vec operator*(const Operator& a, const Vec& v) {
    if (v.size() != a.dim()) throw DimensionMismatch("operator*vector: size mismatch");
    return a.matrix() * v;
}

// ---------------------------------------------------------------- states

QuantumState QuantumState::pure(Vec psi, HilbertSpace s) {
    if (psi.size() != s.dim()) throw DimensionMismatch("QuantumState: vector size vs space " + s.str());
    if (!psi.allFinite()) throw InvalidArgument("QuantumState: non-finite amplitudes");
    if (std::abs(psi.norm() - 1.0) > 1e-10)
        throw InvalidArgument("QuantumState: pure vector norm " + std::to_string(psi.norm()));
    QuantumState q;
    q.pure_ = true;
    q.psi_ = std::move(psi);
    q.space_ = std::move(s);
    return q;
}

QuantumState QuantumState::normalized(Vec psi, HilbertSpace s) {
    double n = psi.norm();
    if (!(n > 0.0)) throw InvalidArgument("QuantumState: zero vector");
    psi /= n;
    return pure(std::move(psi), std::move(s));
}

QuantumState QuantumState::mixed(Mat rho, HilbertSpace s) {
    if (rho.rows() != s.dim() || rho.cols() != s.dim())
        throw DimensionMismatch("QuantumState: density size vs space " + s.str());
    if (!rho.allFinite()) throw InvalidArgument("QuantumState: non-finite density matrix");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("QuantumState: density matrix not Hermitian");
    if (std::abs(rho.trace() - 1.0) > 1e-10)
        throw InvalidArgument("QuantumState: density trace " + std::to_string(rho.trace().real()));
    Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw InvalidArgument("QuantumState: negative eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()));
    QuantumState q;
    q.pure_ = false;
    q.rho_ = std::move(rho);
    q.space_ = std::move(s);
    return q;
}

const Vec& QuantumState::vector() const {
    if (!pure_) throw InvalidArgument("QuantumState: vector() on a mixed state");
    return psi_;
}

Mat QuantumState::density() const {
    if (pure_) return psi_ * psi_.adjoint();
    return rho_;
}

double QuantumState::purity() const {
    if (pure_) return 1.0;
    return (rho_ * rho_).trace().real();
}

// ---------------------------------------------------------------- bosons

Operator fock_annihilation(int cutoff) {
    if (cutoff < 2) throw InvalidArgument("fock_annihilation: cutoff must be >= 2");
    Mat a = Mat::Zero(cutoff, cutoff);
    for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(a);
}

Operator fock_creation(int cutoff) { return fock_annihilation(cutoff).adjoint(); }

Operator number_operator(int cutoff) {
    if (cutoff < 2) throw InvalidArgument("number_operator: cutoff must be >= 2");
    Mat n = Mat::Zero(cutoff, cutoff);
    for (int k = 0; k < cutoff; ++k) n(k, k) = k;
    return Operator(n);
}

Operator parity_operator(int cutoff) {
    Mat p = Mat::Zero(cutoff, cutoff);
    for (int k = 0; k < cutoff; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return Operator(p);
}

Operator position_operator(int cutoff) {
    const Mat a = fock_annihilation(cutoff).matrix();
    return Operator(Mat((a.adjoint() + a) / std::sqrt(2.0)));
}

Operator momentum_operator(int cutoff) {
    const Mat a = fock_annihilation(cutoff).matrix();
    return Operator(Mat(I * (a.adjoint() - a) / std::sqrt(2.0)));
}

Vec fock_ket(int cutoff, int k) {
    if (k < 0 || k >= cutoff) throw InvalidArgument("fock_ket: index outside truncation");
    Vec v = Vec::Zero(cutoff);
    v(k) = 1.0;
    return v;
}

Operator identity(const HilbertSpace& s) { return {Mat::Identity(s.dim(), s.dim()), s}; }
Operator identity(int d) { return identity(HilbertSpace::single(d)); }

// ---------------------------------------------------------------- qubit

Vec ket_g() { return Vec::Unit(2, 0); }
Vec ket_e() { return Vec::Unit(2, 1); }

QubitOperators qubit_operators() {
    Mat sp(2, 2), sz(2, 2), sx(2, 2), sy(2, 2), h(2, 2);
    sp << 0, 0, 1, 0;
    sz << -1, 0, 0, 1;
    sx << 0, 1, 1, 0;
    sy = -I * (sp - Mat(sp.adjoint()));
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    return {Operator(sx), Operator(sy), Operator(sz),         Operator(sp),
            Operator(Mat(sp.adjoint())), Operator(h), identity(2)};
}

double mixing_angle(double Omega, double Delta) {
    if (Omega == 0.0 && Delta == 0.0) return kTwoPi / 4.0;
    return std::atan2(Omega, Delta);
}

DressedBasis dressed_basis(double theta) {
    DressedBasis d;
    d.theta = theta;
    const double s = std::sin(theta / 2.0), c = std::cos(theta / 2.0);
    d.plus = s * ket_g() + c * ket_e();
    d.minus = c * ket_g() - s * ket_e();
    d.P_plus = Operator(Mat(d.plus * d.plus.adjoint()));
    d.P_minus = Operator(Mat(d.minus * d.minus.adjoint()));
    d.plus_minus = Operator(Mat(d.plus * d.minus.adjoint()));
    d.minus_plus = Operator(Mat(d.minus * d.plus.adjoint()));
    return d;
}

// ---------------------------------------------------------------- algebra

Operator tensor(const Operator& a, const Operator& b) {
    const Mat& A = a.matrix();
    const Mat& B = b.matrix();
    Mat k(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            k.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    std::vector<int> dims = a.space().dims;
    dims.insert(dims.end(), b.space().dims.begin(), b.space().dims.end());
    return {k, HilbertSpace(dims)};
}

Vec tensor(const Vec& a, const Vec& b) {
    Vec k(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) k.segment(i * b.size(), b.size()) = a(i) * b;
    return k;
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }
Operator anticommutator(const Operator& a, const Operator& b) { return a * b + b * a; }

Operator matrix_power(const Operator& a, int k) {
    if (k < 0) throw InvalidArgument("matrix_power: negative exponent");
    Operator r = identity(a.space());
    for (int i = 0; i < k; ++i) r = r * a;
    return r;
}

// ---------------------------------------------------------------- exponentials

Mat expm_hermitian(const Mat& h, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec ph = (-I * t * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Mat expm(const Mat& m) {
    if (!m.allFinite()) throw InvalidArgument("matrix_exponential: non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m + m.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * scale) {
        // m = -i h with h Hermitian
        Mat h = I * m;
        h = 0.5 * (h + h.adjoint()).eval();
        return expm_hermitian(h, 1.0);
    }
    return m.exp();
}

Operator matrix_exponential(const Operator& m) { return {expm(m.matrix()), m.space()}; }

Vec expmv(const Mat& a, const Vec& v, double tol) { return expmv_block(a, Mat(v), tol).col(0); }

Mat expmv_block(const Mat& a, const Mat& v, double tol) {
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    const int s = std::max(1, static_cast<int>(std::ceil(norm1)));
    Mat out = v;
    for (int step = 0; step < s; ++step) {
        Mat term = out;
        Mat sum = out;
        for (int k = 1; k < 200; ++k) {
            term = a * term / (static_cast<double>(k) * s);
            sum += term;
            if (term.cwiseAbs().maxCoeff() <= tol * sum.cwiseAbs().maxCoeff()) break;
        }
        out = std::move(sum);
    }
    return out;
}

Operator generalized_squeeze(int n, cplx lambda, int cutoff) {
    if (n < 1) throw InvalidArgument("generalized_squeeze: order n must be >= 1");
    if (cutoff < 2) throw InvalidArgument("generalized_squeeze: cutoff must be >= 2");
    const Mat an = matrix_power(fock_annihilation(cutoff), n).matrix();
    double nfact = std::tgamma(n + 1.0);
    Mat gen = (std::conj(lambda) * an - lambda * an.adjoint()) / nfact;
    return Operator(expm(gen));
}

Operator displacement(cplx alpha, int cutoff) { return generalized_squeeze(1, -alpha, cutoff); }

bool squeeze_is_truncation_defined(int n) { return n > 2; }

// ---------------------------------------------------------------- truncation helpers

double block_max_diff(const Mat& a, const Mat& b, int keep) {
    return (a.topLeftCorner(keep, keep) - b.topLeftCorner(keep, keep)).cwiseAbs().maxCoeff();
}

Mat interior_block(const Mat& m, int cutoff, int keep) {
    if (m.rows() != 2 * cutoff) throw DimensionMismatch("interior_block: expected 2 x cutoff operator");
    Mat out(2 * keep, 2 * keep);
    for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 2; ++r)
            out.block(q * keep, r * keep, keep, keep) = m.block(q * cutoff, r * cutoff, keep, keep);
    return out;
}

Vec embed_state(const Vec& v, int from_cutoff, int to_cutoff) {
    if (v.size() != 2 * from_cutoff || to_cutoff < from_cutoff)
        throw DimensionMismatch("embed_state: bad sizes");
    Vec out = Vec::Zero(2 * to_cutoff);
    out.segment(0, from_cutoff) = v.segment(0, from_cutoff);
    out.segment(to_cutoff, from_cutoff) = v.segment(from_cutoff, from_cutoff);
    return out;
}

}  // namespace mpq
