#include "mpq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mpq {

namespace {

Mat resonator_density(const QuantumState& s) {
    const QuantumState r = resonator_state(s);
    return r.density();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

QuantumState resonator_state(const QuantumState& s) {
    const auto& d = s.space().dims;
    if (d.size() == 1) return s;
    if (d.size() != 2 || d[0] != 2) throw DimensionMismatch("resonator_state: unsupported space " + s.space().str());
    const int N = d[1];
    const Mat rho = s.density();
    Mat r = rho.block(0, 0, N, N) + rho.block(N, N, N, N);
    r = 0.5 * (r + r.adjoint()).eval();
    return QuantumState::mixed(r, HilbertSpace::single(N));
}

GridSpec GridSpec::square(double half_width, int points) {
    if (!(half_width > 0.0) || points < 2) throw InvalidArgument("GridSpec: need half width > 0 and >= 2 points");
    return {-half_width, half_width, -half_width, half_width, points, points};
}

GridSpec GridSpec::for_state(const QuantumState& s, int points) {
    const QuantumState r = resonator_state(s);
    const int N = r.space().dims[0];
    const double n = expectation(number_operator(N), r).real();
    return square(4.0 + 4.0 * std::asinh(std::sqrt(std::max(n, 0.0))), points);
}

double WignerGrid::dx() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
double WignerGrid::dp() const { return p.size() > 1 ? p[1] - p[0] : 0.0; }
double WignerGrid::integral() const { return W.sum() * dx() * dp(); }

std::string WignerGrid::to_csv() const {
    std::ostringstream os;
    if (!metadata.is_null()) {
        std::istringstream meta(metadata.dump(2));
        for (std::string line; std::getline(meta, line);) os << "# " << line << "\n";
    }
    os << "x,p,W\n";
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = 0; j < p.size(); ++j) os << fmt(x[i]) << "," << fmt(p[j]) << "," << fmt(W(i, j)) << "\n";
    return os.str();
}

std::string WignerGrid::to_ppm() const {
    const double scale = std::max(W.cwiseAbs().maxCoeff(), 1e-300);
    std::ostringstream os;
    os << "P6\n";
    if (!metadata.is_null()) os << "# " << metadata.dump() << "\n";
    os << "# colormap: blue (-" << scale << ") white (0) red (+" << scale << ")\n";
    os << x.size() << " " << p.size() << "\n255\n";
    for (int j = static_cast<int>(p.size()) - 1; j >= 0; --j)
        for (size_t i = 0; i < x.size(); ++i) {
            const double v = std::clamp(W(i, j) / scale, -1.0, 1.0);
            const double a = 1.0 - std::abs(v);
            unsigned char rgb[3];
            if (v >= 0) {
                rgb[0] = 255;
                rgb[1] = rgb[2] = static_cast<unsigned char>(std::lround(255 * a));
            } else {
                rgb[2] = 255;
                rgb[0] = rgb[1] = static_cast<unsigned char>(std::lround(255 * a));
            }
            os.write(reinterpret_cast<const char*>(rgb), 3);
        }
    return os.str();
}

WignerGrid wigner(const QuantumState& s, const GridSpec& grid) {
    if (grid.nx < 2 || grid.np < 2 || !(grid.x_max > grid.x_min) || !(grid.p_max > grid.p_min))
        throw InvalidArgument("wigner: invalid grid");
    const Mat rho = resonator_density(s);
    const int N = static_cast<int>(rho.rows());

    WignerGrid out;
    Eigen::VectorXd pops = rho.diagonal().real();
    const int top = std::max(1, N / 10);
    const double tail = pops.tail(top).sum();
    if (tail > 1e-6)
        out.warnings.push_back("state has " + std::to_string(tail) + " population in the top " +
                               std::to_string(top) + " Fock levels; the Wigner function may be truncated");
    // highest populated level bounds the Hermite expansion
    int M = N;
    while (M > 1 && pops(M - 1) < 1e-30) --M;

    out.x.resize(grid.nx);
    out.p.resize(grid.np);
    for (int i = 0; i < grid.nx; ++i) out.x[i] = grid.x_min + (grid.x_max - grid.x_min) * i / (grid.nx - 1);
    for (int j = 0; j < grid.np; ++j) out.p[j] = grid.p_min + (grid.p_max - grid.p_min) * j / (grid.np - 1);
    out.W = Eigen::MatrixXd::Zero(grid.nx, grid.np);

    // rho = sum_k w_k |v_k><v_k| restricted to the populated levels
    Eigen::SelfAdjointEigenSolver<Mat> es(rho.topLeftCorner(M, M));
    const double wmax = es.eigenvalues().cwiseAbs().maxCoeff();

    // W(x,p) = (1/pi) int dy <x+y|rho|x-y> e^{2ipy}, trapezoid rule in y on a lattice that
    // contains every x +- y. Hermite functions vanish beyond |u| ~ sqrt(2M+1) + 8.
    const double U = std::sqrt(2.0 * M + 1.0) + 8.0;
    const double pmax = std::max(std::abs(grid.p_min), std::abs(grid.p_max));
    const double dx = out.x[1] - out.x[0];
    const double h_target = M_PI / (4.0 * (pmax + std::sqrt(2.0 * M + 1.0)) + 8.0);
    const int L = std::max(1, static_cast<int>(std::ceil(dx / h_target)));
    const double h = dx / L;
    const int J = static_cast<int>(std::ceil(U / h));
    const int ny = 2 * J + 1;
    const int nu = (grid.nx - 1) * L + 2 * J + 1;  // lattice u_k = x_min + (k - J) h
    Eigen::MatrixXd phi(nu, M);                     // Hermite functions phi_n(u_k)
    const double c0 = std::pow(M_PI, -0.25);
    for (int k = 0; k < nu; ++k) {
        const double u = grid.x_min + (k - J) * h;
        phi(k, 0) = c0 * std::exp(-0.5 * u * u);
        if (M > 1) phi(k, 1) = std::sqrt(2.0) * u * phi(k, 0);
        for (int n = 1; n + 1 < M; ++n)
            phi(k, n + 1) = std::sqrt(2.0 / (n + 1)) * u * phi(k, n) - std::sqrt(static_cast<double>(n) / (n + 1)) * phi(k, n - 1);
    }
    // E(p_j, y_m) = e^{2 i p_j y_m}
    Mat E(grid.np, ny);
    for (int j = 0; j < grid.np; ++j)
        for (int m = 0; m < ny; ++m) E(j, m) = std::exp(I * (2.0 * out.p[j] * (m - J) * h));

    Mat F(ny, grid.nx);
    for (int k = 0; k < M; ++k) {
        const double w = es.eigenvalues()(k);
        if (std::abs(w) <= 1e-15 * wmax) continue;
        const Vec psi = phi * es.eigenvectors().col(k);
        for (int i = 0; i < grid.nx; ++i) {
            const int c = i * L + J;  // lattice index of x_i
            for (int m = 0; m < ny; ++m) {
                const int a = c + (m - J), b = c - (m - J);
                F(m, i) = (a >= 0 && a < nu && b >= 0 && b < nu) ? std::conj(psi(a)) * psi(b) : cplx(0.0);
            }
        }
        out.W += (w * h / M_PI) * (E * F).real().transpose();
    }
    out.metadata["cutoff"] = N;
    out.metadata["grid"] = {{"x", {grid.x_min, grid.x_max, grid.nx}}, {"p", {grid.p_min, grid.p_max, grid.np}}};
    out.metadata["normalization"] = "W(x,p) = (1/pi) Tr[rho D Pi D^dag], alpha = (x + i p)/sqrt2";
    return out;
}

TimeSeries photon_trajectory(const std::vector<QuantumState>& states, const std::vector<double>& times,
                             const std::optional<SqueezingTrajectory>& traj) {
    if (states.size() != times.size()) throw DimensionMismatch("photon_trajectory: states vs times");
    std::vector<double> n;
    n.reserve(states.size());
    for (const auto& s : states) {
        const QuantumState r = resonator_state(s);
        n.push_back(expectation(number_operator(r.dim()), r).real());
    }
    TimeSeries ts(times);
    ts.add_channel("n", std::move(n));
    if (traj && traj->delta == 0.0 && traj->n == 2) {
        std::vector<double> a;
        for (double t : times) a.push_back(std::pow(std::sinh(std::abs(traj->lambda(t))), 2));
        ts.add_channel("n_analytic", std::move(a));
    }
    return ts;
}

SqueezingEstimate squeezing_from_state(const QuantumState& s) {
    const QuantumState r = resonator_state(s);
    // padded by two levels so that products up to fourth order are exact on the support
    const int N = r.dim() + 2;
    Mat rho = Mat::Zero(N, N);
    rho.topLeftCorner(N - 2, N - 2) = r.density();
    const Mat x = position_operator(N).matrix(), p = momentum_operator(N).matrix();
    auto ev = [&](const Mat& o) { return (o * rho).trace().real(); };
    SqueezingEstimate e;
    e.mean_x = ev(x);
    e.mean_p = ev(p);
    const Mat xs = x - e.mean_x * Mat::Identity(N, N), ps = p - e.mean_p * Mat::Identity(N, N);
    Eigen::Matrix2d V;
    V(0, 0) = ev(xs * xs);
    V(1, 1) = ev(ps * ps);
    V(0, 1) = V(1, 0) = 0.5 * ev(xs * ps + ps * xs);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(V);
    e.min_variance = es.eigenvalues()(0);
    e.r = -0.5 * std::log(2.0 * e.min_variance);
    const Eigen::Vector2d dir = es.eigenvectors().col(0);
    double th = std::atan2(dir(1), dir(0));
    // quadrature angle is defined mod pi; phi = 2 theta
    e.phi = std::remainder(2.0 * th, 2.0 * M_PI);
    if (e.phi <= -M_PI) e.phi += 2.0 * M_PI;

    const Mat q = dir(0) * xs + dir(1) * ps;
    const Mat q2 = q * q;
    const double m2 = ev(q2);
    e.excess_kurtosis = ev(q2 * q2) / (m2 * m2) - 3.0;
    e.non_gaussian = std::abs(e.excess_kurtosis) > 0.1;
    return e;
}

std::string support_name(SupportClass c) {
    switch (c) {
        case SupportClass::EvenMultiples: return "even-multiples";
        case SupportClass::OddMultiples: return "odd-multiples";
        case SupportClass::Mixed: return "mixed";
    }
    return "?";
}

FockSupport fock_support(const QuantumState& s, int n, double dominance) {
    if (n < 1) throw InvalidArgument("fock_support: order must be >= 1");
    const Eigen::VectorXd pops = resonator_density(s).diagonal().real();
    FockSupport f;
    for (int k = 0; k < pops.size(); ++k) {
        if (k % (2 * n) == 0)
            f.even_mass += pops(k);
        else if (k % (2 * n) == n)
            f.odd_mass += pops(k);
        else
            f.leakage += pops(k);
    }
    if (f.even_mass >= dominance)
        f.classification = SupportClass::EvenMultiples;
    else if (f.odd_mass >= dominance)
        f.classification = SupportClass::OddMultiples;
    return f;
}

Negativity wigner_negativity(const WignerGrid& g) {
    Negativity n;
    n.min_value = g.min();
    n.negative_volume = (g.W.cwiseAbs().sum() - g.W.sum()) * g.dx() * g.dp();
    return n;
}

}  // namespace mpq
