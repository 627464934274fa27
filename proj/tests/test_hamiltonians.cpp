#include <doctest.h>

#include <cmath>
#include <random>

#include "mpq/hamiltonians.hpp"

using namespace mpq;

namespace {

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// Dimensionless frequencies keep the frame oracles well inside double precision.
SystemParams small_sys(int n = 2, int cutoff = 8) {
    SystemParams s;
    s.omega_q = 5.0;
    s.omega_r = 2.4;
    s.g_n = 0.11;
    s.n = n;
    s.cutoff = cutoff;
    return s;
}

DriveParams small_drive() { return {0.35, 4.6}; }

TwoDriveParams small_two_drive() { return {0.9, 4.7, 0.08, 3.8}; }

bool hermitian_at_random_times(const HamiltonianModel& h, int samples = 1000) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int k = 0; k < samples; ++k)
        if (!h.at(u(rng)).is_hermitian(1e-12)) return false;
    return true;
}

}  // namespace

TEST_CASE("coefficients are closed-form phasor sums") {
    auto c = Coefficient::cosine(2.0, 3.0);
    CHECK(std::abs(c(0.4) - 2.0 * std::cos(1.2)) < 1e-15);
    CHECK(c.max_frequency() == 3.0);
    auto p = Coefficient::phasor(cplx(0, 1), 2.0);
    CHECK(std::abs(p.conj()(0.7) - std::conj(p(0.7))) < 1e-15);
    CHECK(std::abs(std::abs(p(123.4)) - 1.0) < 1e-14);
}

TEST_CASE("every builder is Hermitian at random times") {
    auto s = small_sys();
    auto d = small_drive();
    auto td = small_two_drive();
    CHECK(hermitian_at_random_times(lab_frame(s, d)));
    CHECK(hermitian_at_random_times(rotating_frame_full(s, d)));
    CHECK(hermitian_at_random_times(rotating_frame_rwa(s, d)));
    CHECK(hermitian_at_random_times(interaction_picture(s, d)));
    CHECK(hermitian_at_random_times(effective_conditional(s, d)));
    CHECK(hermitian_at_random_times(two_drive_rotating(s, td)));
    CHECK(hermitian_at_random_times(two_drive_interaction(s, td)));
    CHECK(hermitian_at_random_times(two_drive_effective(s, td)));
    auto s3 = small_sys(3, 9);
    CHECK(hermitian_at_random_times(interaction_picture(s3, d), 200));
}

TEST_CASE("lab frame") {
    SystemParams s = small_sys(2, 6);
    s.g_n = 0.0;
    auto h = lab_frame(s, {0.0, 4.6});
    Eigen::SelfAdjointEigenSolver<Mat> es(h.at(0.3).matrix());
    std::vector<double> expect;
    for (int q : {-1, 1})
        for (int k = 0; k < 6; ++k) expect.push_back(q * s.omega_q / 2.0 + k * s.omega_r);
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < 12; ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(expect[i]));

    auto h2 = lab_frame(small_sys(), small_drive());
    // |g,0> is index 0
    CHECK(std::abs(h2.at(0.0).element(0, 0) + small_sys().omega_q / 2.0) < 1e-15);
}

TEST_CASE("rotating frame with RWA") {
    SystemParams s = small_sys(2, 8);
    s.omega_q = 4.6;
    s.omega_r = 2.3;
    auto h = rotating_frame_rwa(s, {0.0, 4.6});  // Delta = delta_n = Omega = 0
    auto j = joint_operators(8, 2);
    Operator charge = 2.0 * (j.sp * j.sm) + j.num;
    CHECK(max_abs(commutator(h.static_part(), charge).matrix()) < 1e-14);
    // <e,0|H|g,2> = sqrt2 g
    CHECK(std::abs(h.static_part().element(8, 2) - std::sqrt(2.0) * s.g_n) < 1e-15);

    // Omega = 0 but detuned: still block diagonal in the conserved charge
    auto hd = rotating_frame_rwa(small_sys(2, 8), {0.0, 4.6});
    const Mat& m = hd.static_part().matrix();
    Vec c = charge.matrix().diagonal();
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b)
            if (std::abs(c(a) - c(b)) > 0.5) CHECK(std::abs(m(a, b)) == 0.0);
}

TEST_CASE("frame consistency: lab frame to rotating frame and RWA") {
    auto s = small_sys(2, 7);
    auto d = small_drive();
    auto j = joint_operators(7, 2);
    Operator K = d.omega_d * (0.5 * j.sz + (1.0 / s.n) * j.num);
    auto rot = rotating_frame_full(s, d);
    auto lab = lab_frame(s, d);
    for (double t : {0.0, 0.37, 2.9, 11.3}) {
        Mat expect = rot.at(t).matrix();
        CHECK(max_abs(frame_transform(lab, K, t).matrix() - expect) < 1e-12);
    }
    auto secular = rot.without_frequency(2.0 * d.omega_d);
    CHECK(secular.is_static());
    CHECK(max_abs(secular.static_part().matrix() - rotating_frame_rwa(s, d).static_part().matrix()) < 1e-15);

    // same check for n = 3
    auto s3 = small_sys(3, 9);
    auto j3 = joint_operators(9, 3);
    Operator K3 = d.omega_d * (0.5 * j3.sz + (1.0 / 3.0) * j3.num);
    CHECK(max_abs(frame_transform(lab_frame(s3, d), K3, 1.7).matrix() - rotating_frame_full(s3, d).at(1.7).matrix()) <
          1e-12);
}

TEST_CASE("interaction picture equals the dressed-frame transform of the RWA model") {
    for (double omega_q : {5.0, 4.6, 4.3}) {  // Delta > 0, = 0, < 0
        auto s = small_sys(2, 8);
        s.omega_q = omega_q;
        auto d = small_drive();
        auto f = frame_params(s, d);
        auto j = joint_operators(8, 2);
        Operator H0 = (f.delta / 2.0) * j.sz + (d.omega / 2.0) * j.sx + f.delta_n * j.num;
        auto rwa = rotating_frame_rwa(s, d);
        auto ip = interaction_picture(s, d);
        for (double t : {0.0, 0.8, 5.1}) {
            Mat lhs = frame_transform(rwa, H0, t).matrix();
            CHECK(max_abs(lhs - ip.at(t).matrix()) < 1e-12);
        }
        // coefficient moduli are time independent
        for (const auto& term : ip.terms())
            CHECK(std::abs(std::abs(term.coeff(0.0)) - std::abs(term.coeff(17.0))) < 1e-14);
    }
}

TEST_CASE("effective conditional Hamiltonian") {
    auto s = small_sys(2, 8);
    s.omega_q = 4.6;  // Delta = 0
    auto d = small_drive();
    auto h = effective_conditional(s, d);
    auto j = joint_operators(8, 2);
    auto f = frame_params(s, d);
    CHECK(f.gbar_n == doctest::Approx(s.g_n / 2.0));
    const double nd = 2 * f.delta_n;
    for (double t : {0.0, 1.3}) {
        Mat expect = (f.gbar_n * (j.sx * (std::exp(I * (nd * t)) * j.adn + std::exp(-I * (nd * t)) * j.an))).matrix();
        CHECK(max_abs(h.at(t).matrix() - expect) < 1e-14);
    }
    // effective = interaction picture without the epsilon-rotating pieces
    auto ip = interaction_picture(s, d);
    auto sec = ip.without_frequency(f.epsilon - nd).without_frequency(f.epsilon + nd);
    CHECK(max_abs(sec.at(0.9).matrix() - h.at(0.9).matrix()) < 1e-14);

    // large detuning: conditioned on sz
    auto sd = small_sys(2, 8);
    sd.omega_q = 4.6 + 50.0;
    auto hz = effective_conditional(sd, {0.35, 4.6});
    auto fz = frame_params(sd, {0.35, 4.6});
    // P+ - P- = cos(theta) sz + sin(theta) sx, so the residual is O(theta)
    Mat expect = (fz.gbar_n * (j.sz * (j.adn + j.an))).matrix();
    const double scale = fz.gbar_n * max_abs((j.adn + j.an).matrix());
    CHECK(fz.theta < 0.01);
    CHECK(max_abs(hz.at(0.0).matrix() - expect) < 1.01 * fz.theta * scale);
    CHECK(max_abs(hz.at(0.0).matrix() - expect) > 0.5 * fz.theta * scale);

    // cross-resonance: static
    auto sr = small_sys(2, 8);
    sr.omega_r = 2.3;
    CHECK(effective_conditional(sr, d).is_static());
}

TEST_CASE("two-drive models") {
    auto s = small_sys(2, 8);
    auto td = small_two_drive();
    auto j = joint_operators(8, 2);

    auto td0 = td;
    td0.omega_2 = 0.0;
    CHECK(max_abs(two_drive_rotating(s, td0).at(1.1).matrix() -
                  rotating_frame_rwa(s, {td.omega_1, td.omega_d1}).static_part().matrix()) < 1e-15);

    auto tm = td;
    tm.omega_d2 = tm.omega_d1;
    auto merged = two_drive_rotating(s, tm);
    CHECK(merged.is_static());
    Mat diff = merged.static_part().matrix() - rotating_frame_rwa(s, {0.0, td.omega_d1}).static_part().matrix();
    CHECK(max_abs(diff - ((td.omega_1 + td.omega_2) / 2.0) * j.sx.matrix()) < 1e-15);

    // interaction picture of the two-drive model is the sigma_x frame of drive 1
    Operator K = (td.omega_1 / 2.0) * j.sx;
    auto rot = two_drive_rotating(s, td);
    auto ip = two_drive_interaction(s, td);
    for (double t : {0.0, 0.61, 4.4})
        CHECK(max_abs(frame_transform(rot, K, t).matrix() - ip.at(t).matrix()) < 1e-12);
    CHECK(max_abs(frame_transform(two_drive_rotating(s, td0), K, 2.0).matrix() -
                  two_drive_interaction(s, td0).at(2.0).matrix()) < 1e-12);
}

TEST_CASE("effective two-drive model") {
    SystemParams s;
    s.omega_q = kTwoPi * 10e9;
    s.omega_r = kTwoPi * 4.99e9;
    s.g_n = kTwoPi * 20e6;
    s.n = 2;
    s.cutoff = 10;
    TwoDriveParams td{kTwoPi * 1.4e9, s.omega_q, kTwoPi * 20e6, s.omega_q - kTwoPi * 1.4e9};
    CHECK(td.omega_q_eff() == doctest::Approx(kTwoPi * 10e6));
    CHECK(g_n_eff(s) == doctest::Approx(kTwoPi * 10e6));

    auto eff = two_drive_effective(s, td);
    CHECK(eff.diagnostics().empty());
    // secular part of the two-drive interaction picture equals the effective model when delta_d = Omega_1
    HamiltonianModel full = two_drive_interaction(s, td);
    HamiltonianModel sec = full;
    // delta_d - Omega_1 is zero only up to rounding, so keep components slower than 1 rad/s
    for (const auto& term : full.terms())
        for (const auto& p : term.coeff.phasors())
            if (std::abs(p.freq) > 1.0) sec = sec.without_frequency(p.freq, 1e-3);
    CHECK(sec.max_frequency() < 1.0);
    CHECK(max_abs(sec.at(0.0).matrix() - eff.static_part().matrix()) < 1e-9 * s.g_n);

    auto bad = td;
    bad.omega_d2 += kTwoPi * 1e6;
    CHECK_FALSE(two_drive_effective(s, bad).diagnostics().empty());

    // Omega_2 = 0, delta_n = 0, n = 2: pure conditional two-photon generator
    auto s0 = s;
    s0.omega_r = s.omega_q / 2.0;
    auto td0 = td;
    td0.omega_2 = 0.0;
    auto j = joint_operators(10, 2);
    CHECK(max_abs(two_drive_effective(s0, td0).static_part().matrix() -
                  (g_n_eff(s0) * (j.sx * (j.adn + j.an))).matrix()) < 1e-6);
}

TEST_CASE("effective two-drive model matches the strong-drive form after the resonator rotation") {
    auto s = small_sys(2, 8);
    s.omega_q = 4.7;
    auto td = small_two_drive();
    td.omega_2 = 0.0;
    td.omega_d2 = td.omega_d1 - td.omega_1;
    auto eff = two_drive_effective(s, td);
    auto j = joint_operators(8, 2);
    const double dn = omega_r_eff(s, td);
    auto strong = effective_conditional(s, {td.omega_1, td.omega_d1});  // Delta = 0
    for (double t : {0.0, 0.5, 3.3})
        CHECK(max_abs(frame_transform(eff, dn * j.num, t).matrix() - strong.at(t).matrix()) < 1e-12);
}

TEST_CASE("RWA report") {
    SystemParams s;
    s.omega_q = kTwoPi * 10e9;
    s.omega_r = kTwoPi * 5.01e9;
    s.g_n = kTwoPi * 20e6;
    TwoDriveParams td{kTwoPi * 1.4e9, kTwoPi * 9.98e9, 0.0, kTwoPi * 8.58e9};
    auto r = rwa_report(s, td);
    CHECK(r.get("g_n_eff/epsilon").value == doctest::Approx(10e6 / std::hypot(1.4e9, 20e6)));
    CHECK(r.get("g_n/epsilon").pass());
    CHECK(r.get("n*delta_n/epsilon").pass());
    // Omega_1/omega_d1 = 0.14 at a 10 GHz carrier: reported as a warning, not rejected
    CHECK_FALSE(r.get("Omega/omega_d").pass());
    CHECK(r.get("Omega/omega_d").value == doctest::Approx(1.4 / 9.98));

    SystemParams s2 = s;
    DriveParams d{kTwoPi * 0.5e9, s.omega_q};
    CHECK(rwa_report(s2, d).get("g_n/epsilon").value == doctest::Approx(20e6 / 0.5e9));

    DriveParams strong{kTwoPi * 2e9, s.omega_q};
    CHECK_FALSE(rwa_report(s2, strong).get("Omega/omega_d").pass());
    CHECK(rwa_report(s2, strong).to_json()["all_pass"] == false);
}
