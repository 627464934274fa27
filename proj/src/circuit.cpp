#include "mpq/circuit.hpp"

#include <algorithm>
#include <cmath>

namespace mpq {

namespace {

double safe_ratio(double a, double b) { return b == 0.0 ? (a == 0.0 ? 0.0 : INFINITY) : a / b; }

}  // namespace

void CircuitSpec::validate() const {
    for (double c : {C_t, C_Jt, C_r, C_J1, C_J2})
        if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("CircuitSpec: capacitances must be positive");
    if (!(L_r > 0.0) || !std::isfinite(L_r)) throw InvalidArgument("CircuitSpec: L_r must be positive");
    if (!(E_Jt > 0.0)) throw InvalidArgument("CircuitSpec: E_Jt must be positive");
    if (!(E_J2 > 0.0)) throw InvalidArgument("CircuitSpec: E_J2 must be positive");
    if (E_J2 > E_J1) throw InvalidArgument("CircuitSpec: E_J2 > E_J1, no sweet spot exists");
    if (!std::isfinite(Phi_ext)) throw InvalidArgument("CircuitSpec: Phi_ext must be finite");
}

nlohmann::json CircuitSpec::to_json() const {
    return {{"E_Jt", E_Jt}, {"E_J1", E_J1}, {"E_J2", E_J2}, {"C_t", C_t},   {"C_Jt", C_Jt},
            {"C_r", C_r},   {"C_J1", C_J1}, {"C_J2", C_J2}, {"L_r", L_r}, {"Phi_ext", Phi_ext}};
}

nlohmann::json DerivedParams::to_json() const {
    return {{"Cbar_t", Cbar_t}, {"Cbar_r", Cbar_r}, {"Cbar_c", Cbar_c}, {"E_Ct", E_Ct},   {"E_c", E_c},
            {"E_s", E_s},       {"omega_q", omega_q}, {"omega_r", omega_r}, {"eta_t", eta_t}, {"eta_r", eta_r},
            {"g_2", g_2},       {"g_e1", g_e1},     {"g_e2", g_e2},     {"g_e3", g_e3},   {"g_e4", g_e4},
            {"g_e5", g_e5},     {"g_c", g_c}};
}

Eigen::Matrix2d capacitance_matrix(const CircuitSpec& s) {
    const double cj = s.C_J1 + s.C_J2;
    Eigen::Matrix2d C;
    C << s.C_t + s.C_Jt + cj, -cj, -cj, s.C_r + cj;
    return C;
}

DerivedParams derive_params(const CircuitSpec& spec) {
    spec.validate();
    const Eigen::Matrix2d C = capacitance_matrix(spec);
    const double det = C.determinant();
    if (!(det > 1e-12 * C(0, 0) * C(1, 1))) throw InvalidArgument("derive_params: singular capacitance matrix");
    const Eigen::Matrix2d Ci = C.inverse();

    DerivedParams d;
    d.Cbar_t = 1.0 / Ci(0, 0);
    d.Cbar_r = 1.0 / Ci(1, 1);
    d.Cbar_c = 1.0 / (0.5 * (Ci(0, 1) + Ci(1, 0)));

    const double phase = kTwoPi * spec.Phi_ext / kFluxQuantum;
    d.E_c = spec.E_J1 * std::cos(phase) + spec.E_J2;
    d.E_s = spec.E_J1 * std::sin(phase);

    const double e2 = kElectronCharge * kElectronCharge;
    d.E_Ct = e2 / (2.0 * kHbar * d.Cbar_t);
    d.omega_q = std::sqrt(8.0 * d.E_Ct * spec.E_Jt) - d.E_Ct;
    d.omega_r = 1.0 / std::sqrt(spec.L_r * d.Cbar_r);

    d.eta_t = std::pow(2.0 * d.E_Ct / spec.E_Jt, 0.25);
    const double Z_r = std::sqrt(spec.L_r / d.Cbar_r);
    d.eta_r = kTwoPi / kFluxQuantum * std::sqrt(kHbar * Z_r / 2.0);
    const double phi_t = kFluxQuantum / kTwoPi * d.eta_t, phi_r = kFluxQuantum / kTwoPi * d.eta_r;
    const double q_t = kHbar / (2.0 * phi_t), q_r = kHbar / (2.0 * phi_r);

    const double Es = d.E_s, et = d.eta_t, er = d.eta_r;
    d.g_e1 = Es * et;
    d.g_e2 = Es * er;
    d.g_e3 = 3.0 * Es * et * et * et / 6.0;
    d.g_e4 = Es * er * er * er / 6.0;
    d.g_e5 = 3.0 * Es * et * et * er / 6.0;
    d.g_2 = 3.0 * Es * et * er * er / 6.0;
    d.g_c = q_t * q_r / (kHbar * d.Cbar_c);
    return d;
}

double sweet_spot_flux(double E_J1, double E_J2) {
    if (!(E_J1 > 0.0) || E_J2 < 0.0) throw InvalidArgument("sweet_spot_flux: need E_J1 > 0, E_J2 >= 0");
    if (E_J2 > E_J1) throw InvalidArgument("sweet_spot_flux: E_J2 > E_J1 has no real solution");
    return kFluxQuantum * std::acos(-E_J2 / E_J1) / kTwoPi;
}

CircuitSpec table1_circuit(double E_J1, double E_J2) {
    CircuitSpec s;
    s.E_Jt = kTwoPi * 86.5e9;
    s.E_J1 = E_J1;
    s.E_J2 = E_J2;
    s.C_r = 330e-15;
    // Junction capacitances set g_c near 2pi x 40 MHz.
    s.C_J1 = 1.22e-15;
    s.C_J2 = 1.18e-15;
    s.C_Jt = 5e-15;
    // Solved so that Cbar_t = e^2/(2 hbar E_Ct) = 129.135 fF for E_Ct = 2pi x 150 MHz.
    s.C_t = 121.75219068e-15;
    // Solved so that 1/sqrt(L_r Cbar_r) = 2pi x 5 GHz with Cbar_r = 332.355 fF.
    s.L_r = 3.0485794183e-9;
    s.Phi_ext = sweet_spot_flux(E_J1, E_J2);
    return s;
}

DerivedParams table1_midrange() {
    const double MHz = kTwoPi * 1e6;
    DerivedParams d;
    d.omega_q = kTwoPi * 10e9;
    d.omega_r = kTwoPi * 5e9;
    d.g_2 = 37.5 * MHz;
    d.g_e1 = 1.62e3 * MHz;
    d.g_e2 = 2.01e3 * MHz;
    d.g_e3 = 7.5 * MHz;
    d.g_e4 = 25.0 * MHz;
    d.g_e5 = 50.0 * MHz;
    d.g_c = 40.0 * MHz;
    return d;
}

HamiltonianModel build_tla_hamiltonian(const DerivedParams& dp, int cutoff, const TlaOptions& opt) {
    if (cutoff < 4) throw InvalidArgument("build_tla_hamiltonian: cutoff must be >= 4");
    const auto o = joint_operators(cutoff, 2);
    const Operator X = o.ad + o.a;
    const Operator X2 = X * X;
    Operator h = (0.5 * dp.omega_q) * o.sz + dp.omega_r * o.num;
    h += (-dp.g_e4) * (X2 * X);
    h += (-dp.g_e5) * (o.sz * X);
    h += dp.g_2 * (o.sx * X2);
    // (s+ - s-)(a^dag - a) is Hermitian: both factors are anti-Hermitian and commute.
    h += (-dp.g_c) * ((o.sp - o.sm) * (o.ad - o.a));
    if (opt.linear_offsets) {
        h += (-(dp.g_e1 - dp.g_e3)) * o.sx;
        h += (-(2.0 * dp.g_e5 - dp.g_e2)) * X;
    }
    return HamiltonianModel("tla", h);
}

HamiltonianModel two_photon_jc(const DerivedParams& dp, int cutoff) {
    if (cutoff < 3) throw InvalidArgument("two_photon_jc: cutoff must be >= 3");
    const auto o = joint_operators(cutoff, 2);
    Operator h = (0.5 * dp.omega_q) * o.sz + dp.omega_r * o.num;
    h += dp.g_2 * (o.sp * o.an + o.sm * o.adn);
    HamiltonianModel m("two_photon_jc", h);
    if (dp.omega_r > 0.0 && std::abs(2.0 * dp.omega_r - dp.omega_q) > std::abs(dp.g_2))
        m.warn("two-photon detuning |2 omega_r - omega_q| exceeds g_2");
    if (dp.omega_r > 0.0 && std::abs(dp.g_2) / dp.omega_r > kRwaWarnThreshold) m.warn("g_2/omega_r exceeds RWA threshold");
    return m;
}

nlohmann::json RegimeReport::to_json() const {
    nlohmann::json j = ratios.to_json();
    j["strong_coupling_margin"] = strong_coupling_margin ? nlohmann::json(*strong_coupling_margin) : nlohmann::json();
    return j;
}

RegimeReport regime_report(const DerivedParams& dp, const std::optional<Rates>& rates, double threshold) {
    RegimeReport r;
    auto add = [&](const char* name, double v) { r.ratios.checks.push_back({name, std::abs(v), threshold}); };
    add("g_e4/omega_r", safe_ratio(dp.g_e4, dp.omega_r));
    add("g_e5/omega_r", safe_ratio(dp.g_e5, dp.omega_r));
    add("g_c/|omega_q-omega_r|", safe_ratio(dp.g_c, std::abs(dp.omega_q - dp.omega_r)));
    add("g_c/(omega_q+omega_r)", safe_ratio(dp.g_c, dp.omega_q + dp.omega_r));
    add("g_2/(omega_q+2omega_r)", safe_ratio(dp.g_2, dp.omega_q + 2.0 * dp.omega_r));
    add("g_2/omega_r", safe_ratio(dp.g_2, dp.omega_r));
    if (std::abs(2.0 * dp.omega_r - dp.omega_q) > std::abs(dp.g_2))
        r.ratios.notes.push_back("two-photon detuning |2 omega_r - omega_q| exceeds g_2");
    if (rates) {
        const double m = std::max({rates->kappa, rates->gamma1, rates->gamma_phi});
        r.strong_coupling_margin = safe_ratio(std::abs(dp.g_2), m);
    }
    return r;
}

}  // namespace mpq
