#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpq/dynamics.hpp"
#include "mpq/protocols.hpp"

namespace mpq {

// Reduced resonator state; single-mode input is returned unchanged.
QuantumState resonator_state(const QuantumState& s);

struct GridSpec {
    double x_min = -4.0, x_max = 4.0;
    double p_min = -4.0, p_max = 4.0;
    int nx = 201, np = 201;

    static GridSpec square(double half_width, int points = 201);
    // +-(4 + 4 r) with r = asinh(sqrt(<n>)).
    static GridSpec for_state(const QuantumState& s, int points = 201);
};

struct WignerGrid {
    std::vector<double> x, p;
    Eigen::MatrixXd W;  // W(ix, ip)
    std::vector<std::string> warnings;
    nlohmann::json metadata;

    double dx() const;
    double dp() const;
    double integral() const;
    double min() const { return W.minCoeff(); }
    double max() const { return W.maxCoeff(); }

    // Rows "x,p,W" after '#' metadata lines.
    std::string to_csv() const;
    // Binary PPM (P6), diverging blue-white-red map symmetric about zero, p increasing upward.
    std::string to_ppm() const;
};

// W(x,p) = (1/pi) Tr[rho D(alpha) Pi D(alpha)^dag], alpha = (x + i p)/sqrt2, so that
// the vacuum peaks at 1/pi and the grid integrates to 1 in (x,p). Evaluated as the Weyl
// transform of the position representation built from Hermite functions, which is exact
// for the truncated state and stays stable at large cutoff and large |alpha|.
WignerGrid wigner(const QuantumState& s, const GridSpec& grid);

// <a^dag a> per snapshot. With a trajectory at delta = 0 and n = 2, adds "n_analytic" =
// sinh^2(|zeta(t)|).
TimeSeries photon_trajectory(const std::vector<QuantumState>& states, const std::vector<double>& times,
                             const std::optional<SqueezingTrajectory>& traj = std::nullopt);

struct SqueezingEstimate {
    double r = 0.0;
    double phi = 0.0;  // squeezing phase of zeta = r e^{i phi}, in (-pi, pi]
    double min_variance = 0.5;
    double excess_kurtosis = 0.0;  // of the minimal-variance quadrature
    bool non_gaussian = false;      // |excess kurtosis| > 0.1
    double mean_x = 0.0, mean_p = 0.0;
};

SqueezingEstimate squeezing_from_state(const QuantumState& s);

enum class SupportClass { EvenMultiples, OddMultiples, Mixed };
std::string support_name(SupportClass c);

struct FockSupport {
    SupportClass classification = SupportClass::Mixed;
    double even_mass = 0.0;  // on {2kn}
    double odd_mass = 0.0;   // on {(2k+1)n}
    double leakage = 0.0;    // elsewhere
};

// Classified by the dominant class when it holds at least `dominance` of the mass.
FockSupport fock_support(const QuantumState& s, int n, double dominance = 0.99);

struct Negativity {
    double min_value = 0.0;
    // integral |W| minus the grid integral of W, i.e. the normalized integral |W| - 1
    // with the grid's own quadrature as reference.
    double negative_volume = 0.0;
};

Negativity wigner_negativity(const WignerGrid& g);

}  // namespace mpq
