#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpq/errors.hpp"

namespace mpq {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Ordered subsystem dimensions. The artifact always uses qubit first, resonator second.
struct HilbertSpace {
    std::vector<int> dims;

    HilbertSpace() = default;
    explicit HilbertSpace(std::vector<int> d);

    static HilbertSpace single(int d) { return HilbertSpace({d}); }
    static HilbertSpace qubit_resonator(int cutoff) { return HilbertSpace({2, cutoff}); }

    int dim() const;
    int subsystems() const { return static_cast<int>(dims.size()); }
    bool operator==(const HilbertSpace& o) const { return dims == o.dims; }
    bool operator!=(const HilbertSpace& o) const { return dims != o.dims; }
    std::string str() const;
};

class Operator {
public:
    Operator() = default;
    Operator(Mat m, HilbertSpace s);
    // Single-subsystem shorthand.
    explicit Operator(Mat m);

    const Mat& matrix() const { return m_; }
    const HilbertSpace& space() const { return space_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    Operator adjoint() const { return {m_.adjoint(), space_}; }
    bool is_hermitian(double tol = 1e-12) const;
    bool is_unitary(double tol = 1e-10) const;
    cplx element(int row, int col) const { return m_(row, col); }

    Operator& operator+=(const Operator& o);
    Operator& operator-=(const Operator& o);
    Operator& operator*=(cplx s);

private:
    Mat m_;
    HilbertSpace space_;
};

Operator operator+(Operator a, const Operator& b);
Operator operator-(Operator a, const Operator& b);
Operator operator-(const Operator& a);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(cplx s, Operator a);
Operator operator*(Operator a, cplx s);
Vec operator*(const Operator& a, const Vec& v);

void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* where);

class QuantumState {
public:
    // Validating constructors: pure norm 1 +- 1e-10; density Hermitian, unit trace,
    // eigenvalues >= -1e-9.
    static QuantumState pure(Vec psi, HilbertSpace s);
    static QuantumState mixed(Mat rho, HilbertSpace s);
    // Normalizes instead of rejecting; throws only on a zero vector.
    static QuantumState normalized(Vec psi, HilbertSpace s);

    bool is_pure() const { return pure_; }
    const HilbertSpace& space() const { return space_; }
    int dim() const { return space_.dim(); }
    const Vec& vector() const;
    Mat density() const;
    double purity() const;

private:
    QuantumState() = default;
    bool pure_ = true;
    Vec psi_;
    Mat rho_;
    HilbertSpace space_;
};

// Bosonic operators on a truncated Fock space of dimension `cutoff`.
Operator fock_annihilation(int cutoff);
Operator fock_creation(int cutoff);
Operator number_operator(int cutoff);
Operator parity_operator(int cutoff);
// x = (a^dag + a)/sqrt2, p = i(a^dag - a)/sqrt2
Operator position_operator(int cutoff);
Operator momentum_operator(int cutoff);
Vec fock_ket(int cutoff, int k);

Operator identity(const HilbertSpace& s);
Operator identity(int d);

// Basis order (g, e).
struct QubitOperators {
    Operator sx, sy, sz, sp, sm, hadamard, id;
};
QubitOperators qubit_operators();
Vec ket_g();
Vec ket_e();

// theta = atan2(Omega, Delta): pi/2 at Delta = 0, 0 for Omega = 0 with Delta > 0,
// pi for Omega = 0 with Delta < 0.
double mixing_angle(double Omega, double Delta);

struct DressedBasis {
    double theta = 0.0;
    Vec plus;   // sin(theta/2)|g> + cos(theta/2)|e>
    Vec minus;  // cos(theta/2)|g> - sin(theta/2)|e>
    Operator P_plus, P_minus;
    Operator plus_minus;  // |+><-|
    Operator minus_plus;  // |-><+|
};
DressedBasis dressed_basis(double theta);

Operator tensor(const Operator& a, const Operator& b);
Vec tensor(const Vec& a, const Vec& b);
Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);
Operator matrix_power(const Operator& a, int k);

// exp(m). Skew-Hermitian input goes through a Hermitian eigendecomposition of i*m;
// anything else through scaling and squaring with a Pade kernel.
Operator matrix_exponential(const Operator& m);
Mat expm(const Mat& m);
// exp(-i h t) for Hermitian h via eigendecomposition.
Mat expm_hermitian(const Mat& h, double t);
// exp(a) v by Taylor series on scaled substeps, never forming exp(a).
Vec expmv(const Mat& a, const Vec& v, double tol = 1e-15);
Mat expmv_block(const Mat& a, const Mat& v, double tol = 1e-15);

// exp((conj(lambda) a^n - lambda a^dag^n)/n!) at the given truncation. n = 1 equals a
// displacement by -lambda, n = 2 the usual squeeze S(zeta).
Operator generalized_squeeze(int n, cplx lambda, int cutoff);
// D(alpha) = exp(alpha a^dag - conj(alpha) a)
Operator displacement(cplx alpha, int cutoff);
// n > 2 squeezing is defined only through the truncated matrix exponential.
bool squeeze_is_truncation_defined(int n);

// Largest |element| difference over the leading block rows/cols < keep.
double block_max_diff(const Mat& a, const Mat& b, int keep);
// Restricts a qubit-resonator operator to Fock components < keep in both indices.
Mat interior_block(const Mat& m, int cutoff, int keep);
// Embeds a qubit-resonator matrix of cutoff n into cutoff m >= n by Fock index.
Vec embed_state(const Vec& v, int from_cutoff, int to_cutoff);

}  // namespace mpq
