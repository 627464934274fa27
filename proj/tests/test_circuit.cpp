#include <doctest.h>

#include <cmath>

#include "mpq/circuit.hpp"
#include "mpq/dynamics.hpp"

using namespace mpq;

namespace {

const double GHz = kTwoPi * 1e9;
const double MHz = kTwoPi * 1e6;

}  // namespace

TEST_CASE("symmetric SQUID at zero flux has no odd couplings") {
    CircuitSpec s = table1_circuit(14 * GHz, 14 * GHz);
    s.Phi_ext = 0.0;
    const auto d = derive_params(s);
    CHECK(d.E_s == 0.0);
    CHECK(d.g_2 == 0.0);
    CHECK(d.g_e1 == 0.0);
    CHECK(d.g_e3 == 0.0);
    CHECK(d.g_e5 == 0.0);
    CHECK(d.E_c == doctest::Approx(28 * GHz));
}

TEST_CASE("transmon and resonator frequencies from reference design elements") {
    const auto d = derive_params(table1_circuit(18 * GHz, 17.5 * GHz));
    // e^2 / (2 hbar Cbar_t) against the listed charging energy
    CHECK(d.E_Ct / MHz == doctest::Approx(150.0).epsilon(1e-9));
    CHECK(d.omega_q / GHz == doctest::Approx(std::sqrt(8 * 86.5 * 0.15) - 0.15).epsilon(1e-9));
    CHECK(d.omega_q / GHz == doctest::Approx(10.04).epsilon(1e-3));
    CHECK(d.omega_r / GHz == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(d.eta_t == doctest::Approx(std::pow(2 * 0.15 / 86.5, 0.25)).epsilon(1e-9));
    // sqrt(hbar Z / 2) 2pi / Phi0 with Z = 1/(omega_r Cbar_r)
    const double Z = 1.0 / (d.omega_r * d.Cbar_r);
    CHECK(d.eta_r == doctest::Approx(kTwoPi / kFluxQuantum * std::sqrt(kHbar * Z / 2)).epsilon(1e-12));
    CHECK(d.g_c / MHz > 30.0);
    CHECK(d.g_c / MHz < 50.0);
    CHECK(d.g_2 == doctest::Approx(0.5 * d.E_s * d.eta_t * d.eta_r * d.eta_r).epsilon(1e-14));
    CHECK(d.g_2 / MHz == doctest::Approx(23.835).epsilon(1e-3));
}

TEST_CASE("inverse capacitance matrix") {
    const auto s = table1_circuit(18 * GHz, 17.5 * GHz);
    const Eigen::Matrix2d C = capacitance_matrix(s);
    const Eigen::Matrix2d Ci = C.inverse();
    CHECK(Ci(0, 1) == Ci(1, 0));
    const double det = C(0, 0) * C(1, 1) - C(0, 1) * C(1, 0);
    const auto d = derive_params(s);
    CHECK(d.Cbar_t == doctest::Approx(det / C(1, 1)).epsilon(1e-12));
    CHECK(d.Cbar_r == doctest::Approx(det / C(0, 0)).epsilon(1e-12));
    CHECK(d.Cbar_c == doctest::Approx(det / (s.C_J1 + s.C_J2)).epsilon(1e-12));

    CircuitSpec bad = s;
    bad.C_t = -1e-15;
    CHECK_THROWS_AS(derive_params(bad), InvalidArgument);
    bad = s;
    bad.E_J2 = 2 * s.E_J1;
    CHECK_THROWS_AS(derive_params(bad), InvalidArgument);
}

TEST_CASE("doubling every capacitance halves the charging energy") {
    auto s = table1_circuit(18 * GHz, 17.5 * GHz);
    const auto d1 = derive_params(s);
    for (double* c : {&s.C_t, &s.C_Jt, &s.C_r, &s.C_J1, &s.C_J2}) *c *= 2;
    const auto d2 = derive_params(s);
    CHECK(d2.E_Ct == doctest::Approx(d1.E_Ct / 2).epsilon(1e-12));
    CHECK(d2.omega_q == doctest::Approx(std::sqrt(8 * d2.E_Ct * s.E_Jt) - d2.E_Ct).epsilon(1e-12));
    CHECK(d2.omega_r == doctest::Approx(d1.omega_r / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("sweet-spot flux") {
    CHECK(sweet_spot_flux(1.0, 1.0) == doctest::Approx(kFluxQuantum / 2).epsilon(1e-14));
    CHECK(sweet_spot_flux(1.0, 0.0) == doctest::Approx(kFluxQuantum / 4).epsilon(1e-14));
    CHECK(sweet_spot_flux(18 * GHz, 17.5 * GHz) / kFluxQuantum ==
          doctest::Approx(std::acos(-17.5 / 18.0) / kTwoPi).epsilon(1e-14));
    CHECK(sweet_spot_flux(18 * GHz, 17.5 * GHz) / kFluxQuantum == doctest::Approx(0.4625).epsilon(1e-3));
    CHECK_THROWS_AS(sweet_spot_flux(1.0, 1.5), InvalidArgument);

    for (auto [j1, j2] : {std::pair{18.0, 17.5}, {14.0, 13.72}, {10.0, 9.94}}) {
        auto s = table1_circuit(j1 * GHz, j2 * GHz);
        const auto d = derive_params(s);
        CHECK(std::abs(d.E_c) <= 1e-12 * s.E_J1);
        // E_s at the sweet spot is sqrt(E_J1^2 - E_J2^2)
        CHECK(d.E_s == doctest::Approx(std::sqrt(j1 * j1 - j2 * j2) * GHz).epsilon(1e-10));

        // +-1% flux: E_c changes linearly with slope -E_J1 (2pi/Phi0) sin
        const double phi0 = s.Phi_ext, h = 1e-2 * phi0;
        s.Phi_ext = phi0 + h;
        const double up = derive_params(s).E_c;
        s.Phi_ext = phi0 - h;
        const double down = derive_params(s).E_c;
        const double slope = (up - down) / (2 * h);
        const double analytic = -s.E_J1 * kTwoPi / kFluxQuantum * std::sin(kTwoPi * phi0 / kFluxQuantum);
        CHECK(std::abs(slope - analytic) / std::abs(analytic) < 1e-3);
        // central differences are second order: the +-1% slope error shrinks 100x at 0.1%
        const double h2 = 1e-3 * phi0;
        s.Phi_ext = phi0 + h2;
        const double up2 = derive_params(s).E_c;
        s.Phi_ext = phi0 - h2;
        const double slope2 = (up2 - derive_params(s).E_c) / (2 * h2);
        CHECK(std::abs(slope2 - analytic) / std::abs(analytic) < 1e-5);
    }
}

TEST_CASE("two-photon JC dynamics") {
    DerivedParams d = table1_midrange();
    const int N = 20;
    const auto jc = two_photon_jc(d, N);
    const auto o = joint_operators(N, 2);
    const Operator conserved = 2.0 * (o.sp * o.sm) + o.num;
    // ladder operators break the top Fock rung, so compare below it
    const Mat c = commutator(jc.static_part(), conserved).matrix();
    double worst = 0.0;
    for (int q = 0; q < 2; ++q)
        for (int k = 0; k < N - 2; ++k) worst = std::max(worst, c.col(q * N + k).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-6 * d.omega_q);

    const auto psi0 = QuantumState::pure(tensor(ket_g(), fock_ket(N, 2)), HilbertSpace::qubit_resonator(N));
    const double T = M_PI / (std::sqrt(2.0) * d.g_2);
    auto times = linspace(0.0, T, 41);
    auto ev = evolve_unitary(jc, psi0, times, {}, {standard_observable("P_e", N)});
    const auto& pe = ev.series.channel("P_e");
    double err = 0.0;
    for (size_t i = 0; i < times.size(); ++i)
        err = std::max(err, std::abs(pe[i] - std::pow(std::sin(std::sqrt(2.0) * d.g_2 * times[i]), 2)));
    CHECK(err < 1e-9);

    // detuned: P_e = (Omega^2 / W^2) sin^2(W t / 2), Omega = 2 sqrt2 g2, W^2 = Omega^2 + delta^2
    d.omega_r += 0.5 * d.g_2;
    const double delta = 2 * d.omega_r - d.omega_q;
    const double Om = 2 * std::sqrt(2.0) * d.g_2, W = std::hypot(Om, delta);
    auto ev2 = evolve_unitary(two_photon_jc(d, N), psi0, times, {}, {standard_observable("P_e", N)});
    const auto& pe2 = ev2.series.channel("P_e");
    double err2 = 0.0, peak = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
        err2 = std::max(err2, std::abs(pe2[i] - Om * Om / (W * W) * std::pow(std::sin(W * times[i] / 2), 2)));
        peak = std::max(peak, pe2[i]);
    }
    CHECK(err2 < 1e-9);
    CHECK(peak < 1.0 - 1e-3);
    CHECK(Om * Om / (W * W) < 1.0);
}

TEST_CASE("TLA Hamiltonian structure") {
    DerivedParams d = table1_midrange();
    const int N = 12;
    const auto h = build_tla_hamiltonian(d, N);
    CHECK(h.is_static());
    const Mat m = h.static_part().matrix();
    CHECK((m - m.adjoint()).norm() < 1e-9 * m.norm());

    // no spurious couplings: qubit-conditional two-photon Rabi skeleton
    DerivedParams bare = d;
    bare.g_e4 = bare.g_e5 = bare.g_c = 0.0;
    const auto o = joint_operators(N, 2);
    const Operator X = o.ad + o.a;
    const Operator skel = (0.5 * d.omega_q) * o.sz + d.omega_r * o.num + d.g_2 * (o.sx * X * X);
    CHECK((build_tla_hamiltonian(bare, N).static_part().matrix() - skel.matrix()).norm() < 1e-12 * m.norm());

    // linear offsets are opt-in
    const auto with = build_tla_hamiltonian(d, N, {true});
    const Operator offs = (-(d.g_e1 - d.g_e3)) * o.sx + (-(2 * d.g_e5 - d.g_e2)) * X;
    CHECK((with.static_part().matrix() - m - offs.matrix()).norm() < 1e-12 * m.norm());
}

TEST_CASE("circuit regime report") {
    const auto d = table1_midrange();
    auto r = regime_report(d);
    CHECK(r.ratios.get("g_e5/omega_r").value == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r.ratios.get("g_e5/omega_r").pass());
    CHECK(r.ratios.all_pass());
    CHECK_FALSE(r.strong_coupling_margin.has_value());

    DerivedParams bad = d;
    bad.g_c = std::abs(d.omega_q - d.omega_r);
    auto rb = regime_report(bad);
    CHECK(rb.ratios.get("g_c/|omega_q-omega_r|").value == doctest::Approx(1.0));
    CHECK_FALSE(rb.ratios.get("g_c/|omega_q-omega_r|").pass());

    DerivedParams q = d;
    q.g_2 = 25 * MHz;
    const double k = kTwoPi * 5e3;
    auto rq = regime_report(q, Rates{k, k, k});
    REQUIRE(rq.strong_coupling_margin.has_value());
    CHECK(*rq.strong_coupling_margin == doctest::Approx(5000.0).epsilon(1e-12));
    CHECK(rq.to_json()["strong_coupling_margin"].get<double>() == doctest::Approx(5000.0));
}
