#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "mpq/hamiltonians.hpp"

namespace mpq {

inline constexpr double kElectronCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;           // J s
inline constexpr double kHbar = kPlanck / kTwoPi;
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElectronCharge);  // Wb

// Transmon coupled to an LC resonator through an asymmetric SQUID.
// Josephson energies in rad/s (hbar = 1), capacitances in F, inductance in H, flux in Wb.
struct CircuitSpec {
    double E_Jt = 0.0, E_J1 = 0.0, E_J2 = 0.0;
    double C_t = 0.0, C_Jt = 0.0, C_r = 0.0, C_J1 = 0.0, C_J2 = 0.0;
    double L_r = 0.0;
    double Phi_ext = 0.0;

    void validate() const;
    nlohmann::json to_json() const;
};

struct DerivedParams {
    double Cbar_t = 0.0, Cbar_r = 0.0, Cbar_c = 0.0;  // inverses of the C^-1 entries
    double E_Ct = 0.0;                                // e^2 / (2 hbar Cbar_t), rad/s
    double E_c = 0.0, E_s = 0.0;
    double omega_q = 0.0, omega_r = 0.0;
    double eta_t = 0.0, eta_r = 0.0;
    double g_2 = 0.0, g_e1 = 0.0, g_e2 = 0.0, g_e3 = 0.0, g_e4 = 0.0, g_e5 = 0.0, g_c = 0.0;

    nlohmann::json to_json() const;
};

Eigen::Matrix2d capacitance_matrix(const CircuitSpec& spec);
DerivedParams derive_params(const CircuitSpec& spec);

// Phi_0 arccos(-E_J2/E_J1) / 2 pi, where E_c vanishes.
double sweet_spot_flux(double E_J1, double E_J2);

// Lumped values of the reference design: E_Jt = 2pi x 86.5 GHz, E_Ct = 2pi x 150 MHz,
// omega_r = 2pi x 5 GHz, C_r = 330 fF, flux at the sweet spot.
CircuitSpec table1_circuit(double E_J1, double E_J2);

// Coupling constants at the centre of each design range with omega_q = 2 omega_r = 2pi x 10 GHz.
DerivedParams table1_midrange();

struct TlaOptions {
    bool linear_offsets = false;  // keep -(g_e1 - g_e3) sx - (2 g_e5 - g_e2)(a^dag + a)
};

HamiltonianModel build_tla_hamiltonian(const DerivedParams& dp, int cutoff, const TlaOptions& opt = {});
HamiltonianModel two_photon_jc(const DerivedParams& dp, int cutoff);

struct RegimeReport {
    DiagnosticReport ratios;
    // g_2 / max(kappa, gamma_1, gamma_phi), present when rates are supplied.
    std::optional<double> strong_coupling_margin;

    nlohmann::json to_json() const;
};

struct Rates {
    double kappa = 0.0, gamma1 = 0.0, gamma_phi = 0.0;
};

RegimeReport regime_report(const DerivedParams& dp, const std::optional<Rates>& rates = std::nullopt,
                           double threshold = kRwaWarnThreshold);

}  // namespace mpq
