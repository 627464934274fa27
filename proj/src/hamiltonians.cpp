#include "mpq/hamiltonians.hpp"

#include <algorithm>
#include <cmath>

namespace mpq {

// ---------------------------------------------------------------- coefficients

Coefficient Coefficient::cosine(double amp, double freq) {
    return Coefficient({{amp / 2.0, freq}, {amp / 2.0, -freq}});
}

cplx Coefficient::operator()(double t) const {
    cplx s = 0.0;
    for (const auto& p : ph_) s += p.freq == 0.0 ? p.amp : p.amp * std::exp(I * (p.freq * t));
    return s;
}

double Coefficient::max_frequency() const {
    double m = 0.0;
    for (const auto& p : ph_) m = std::max(m, std::abs(p.freq));
    return m;
}

Coefficient Coefficient::conj() const {
    std::vector<Phasor> out;
    out.reserve(ph_.size());
    for (const auto& p : ph_) out.push_back({std::conj(p.amp), -p.freq});
    return Coefficient(out);
}

Coefficient Coefficient::operator+(const Coefficient& o) const {
    std::vector<Phasor> out = ph_;
    out.insert(out.end(), o.ph_.begin(), o.ph_.end());
    return Coefficient(out);
}

Coefficient Coefficient::scaled(cplx s) const {
    std::vector<Phasor> out = ph_;
    for (auto& p : out) p.amp *= s;
    return Coefficient(out);
}

Coefficient Coefficient::without_frequency(double f, double tol) const {
    std::vector<Phasor> out;
    for (const auto& p : ph_)
        if (std::abs(std::abs(p.freq) - std::abs(f)) > tol) out.push_back(p);
    return Coefficient(out);
}

// ---------------------------------------------------------------- model

HamiltonianModel::HamiltonianModel(std::string name, Operator static_part)
    : name_(std::move(name)), static_(std::move(static_part)) {}

HamiltonianModel& HamiltonianModel::add(const Operator& op, Coefficient c) {
    require_same_space(static_.space(), op.space(), "HamiltonianModel::add");
    if (c.empty()) return *this;
    terms_.push_back({op, std::move(c)});
    return *this;
}

HamiltonianModel& HamiltonianModel::add_with_conjugate(const Operator& op, const Coefficient& c) {
    add(op, c);
    add(op.adjoint(), c.conj());
    return *this;
}

HamiltonianModel& HamiltonianModel::add_static(const Operator& op) {
    static_ += op;
    return *this;
}

HamiltonianModel& HamiltonianModel::warn(std::string message) {
    diagnostics_.push_back(std::move(message));
    return *this;
}

void HamiltonianModel::matrix_at(double t, Mat& out) const {
    out = static_.matrix();
    for (const auto& term : terms_) out.noalias() += term.coeff(t) * term.op.matrix();
}

Operator HamiltonianModel::at(double t) const {
    Mat m;
    matrix_at(t, m);
    return {m, space()};
}

double HamiltonianModel::max_frequency() const {
    double m = 0.0;
    for (const auto& term : terms_) m = std::max(m, term.coeff.max_frequency());
    return m;
}

HamiltonianModel HamiltonianModel::without_frequency(double f, double tol) const {
    HamiltonianModel out(name_, static_);
    out.diagnostics_ = diagnostics_;
    for (const auto& term : terms_) out.terms_.push_back({term.op, term.coeff.without_frequency(f, tol)});
    return out.folded();
}

HamiltonianModel HamiltonianModel::folded() const {
    HamiltonianModel out(name_, static_);
    out.diagnostics_ = diagnostics_;
    for (const auto& term : terms_) {
        const Coefficient& kept = term.coeff;
        std::vector<Phasor> moving;
        cplx constant = 0.0;
        for (const auto& p : kept.phasors()) {
            if (p.freq == 0.0)
                constant += p.amp;
            else
                moving.push_back(p);
        }
        if (constant != 0.0) out.static_ += constant * term.op;
        if (!moving.empty()) out.terms_.push_back({term.op, Coefficient(moving)});
    }
    return out;
}

// ---------------------------------------------------------------- params

void SystemParams::validate() const {
    if (!std::isfinite(omega_q) || !std::isfinite(omega_r) || !std::isfinite(g_n))
        throw InvalidArgument("SystemParams: non-finite frequency");
    if (n < 1) throw InvalidArgument("SystemParams: interaction order must be >= 1");
    if (cutoff < 2) throw InvalidArgument("SystemParams: cutoff must be >= 2");
}

void DriveParams::validate() const {
    if (!std::isfinite(omega) || !std::isfinite(omega_d))
        throw InvalidArgument("DriveParams: non-finite value");
    if (omega < 0) throw InvalidArgument("DriveParams: drive amplitude must be >= 0");
}

void TwoDriveParams::validate() const {
    for (double v : {omega_1, omega_d1, omega_2, omega_d2})
        if (!std::isfinite(v)) throw InvalidArgument("TwoDriveParams: non-finite value");
    if (omega_1 < 0 || omega_2 < 0) throw InvalidArgument("TwoDriveParams: amplitudes must be >= 0");
}

FrameParams frame_params(const SystemParams& sys, const DriveParams& drive) {
    FrameParams f;
    f.delta = sys.omega_q - drive.omega_d;
    f.delta_n = sys.omega_r - drive.omega_d / sys.n;
    f.epsilon = std::hypot(drive.omega, f.delta);
    f.theta = mixing_angle(drive.omega, f.delta);
    f.gbar_n = sys.g_n * std::sin(f.theta) / 2.0;
    return f;
}

double omega_r_eff(const SystemParams& sys, const TwoDriveParams& td) {
    return sys.omega_r - td.omega_d1 / sys.n;
}

double g_n_eff(const SystemParams& sys) { return sys.g_n / 2.0; }

JointOperators joint_operators(int cutoff, int n) {
    const auto q = qubit_operators();
    const Operator a = fock_annihilation(cutoff);
    const Operator an = matrix_power(a, n);
    const Operator iq = identity(2), ir = identity(cutoff);
    return {cutoff,
            tensor(iq, a),
            tensor(iq, a.adjoint()),
            tensor(iq, an),
            tensor(iq, an.adjoint()),
            tensor(iq, number_operator(cutoff)),
            tensor(iq, ir),
            tensor(q.sx, ir),
            tensor(q.sy, ir),
            tensor(q.sz, ir),
            tensor(q.sp, ir),
            tensor(q.sm, ir)};
}

namespace {

Operator qubit_resonator(const Operator& q, const Operator& r) { return tensor(q, r); }

}  // namespace

// ---------------------------------------------------------------- builders

HamiltonianModel lab_frame(const SystemParams& sys, const DriveParams& drive) {
    sys.validate();
    drive.validate();
    const auto j = joint_operators(sys.cutoff, sys.n);
    Operator h0 = (sys.omega_q / 2.0) * j.sz + sys.omega_r * j.num + sys.g_n * (j.sx * (j.adn + j.an));
    HamiltonianModel h("lab_frame", h0);
    h.add(j.sx, Coefficient::cosine(drive.omega, drive.omega_d));
    return h;
}

HamiltonianModel rotating_frame_full(const SystemParams& sys, const DriveParams& drive) {
    sys.validate();
    drive.validate();
    const auto f = frame_params(sys, drive);
    const auto j = joint_operators(sys.cutoff, sys.n);
    Operator h0 = (f.delta / 2.0) * j.sz + (drive.omega / 2.0) * j.sx + f.delta_n * j.num +
                  sys.g_n * (j.sp * j.an + j.sm * j.adn);
    HamiltonianModel h("rotating_frame_full", h0);
    const double w2 = 2.0 * drive.omega_d;
    h.add_with_conjugate(j.sp * j.adn, Coefficient::phasor(sys.g_n, w2));
    h.add_with_conjugate(j.sp, Coefficient::phasor(drive.omega / 2.0, w2));
    return h;
}

HamiltonianModel rotating_frame_rwa(const SystemParams& sys, const DriveParams& drive) {
    sys.validate();
    drive.validate();
    const auto f = frame_params(sys, drive);
    const auto j = joint_operators(sys.cutoff, sys.n);
    Operator h0 = (f.delta / 2.0) * j.sz + (drive.omega / 2.0) * j.sx + f.delta_n * j.num +
                  sys.g_n * (j.sp * j.an + j.sm * j.adn);
    return HamiltonianModel("rotating_frame_rwa", h0);
}

HamiltonianModel interaction_picture(const SystemParams& sys, const DriveParams& drive) {
    sys.validate();
    drive.validate();
    const auto f = frame_params(sys, drive);
    const int N = sys.cutoff;
    const auto d = dressed_basis(f.theta);
    const Operator an = matrix_power(fock_annihilation(N), sys.n);
    const double nd = sys.n * f.delta_n;
    const double c2 = std::pow(std::cos(f.theta / 2.0), 2), s2 = std::pow(std::sin(f.theta / 2.0), 2);

    HamiltonianModel h("interaction_picture", Operator(Mat::Zero(2 * N, 2 * N), HilbertSpace::qubit_resonator(N)));
    h.add_with_conjugate(qubit_resonator(d.P_plus - d.P_minus, an),
                         Coefficient::phasor(sys.g_n * std::sin(f.theta) / 2.0, -nd));
    h.add_with_conjugate(qubit_resonator(d.plus_minus, an), Coefficient::phasor(sys.g_n * c2, f.epsilon - nd));
    h.add_with_conjugate(qubit_resonator(d.minus_plus, an), Coefficient::phasor(-sys.g_n * s2, -f.epsilon - nd));
    return h;
}

HamiltonianModel effective_conditional(const SystemParams& sys, const DriveParams& drive) {
    sys.validate();
    drive.validate();
    const auto f = frame_params(sys, drive);
    const int N = sys.cutoff;
    const auto d = dressed_basis(f.theta);
    const Operator adn = matrix_power(fock_creation(N), sys.n);
    const Operator cond = qubit_resonator(d.P_plus - d.P_minus, adn);
    const double nd = sys.n * f.delta_n;

    HamiltonianModel h("effective_conditional", Operator(Mat::Zero(2 * N, 2 * N), HilbertSpace::qubit_resonator(N)));
    if (nd == 0.0)
        h.add_static(f.gbar_n * (cond + cond.adjoint()));
    else
        h.add_with_conjugate(cond, Coefficient::phasor(f.gbar_n, nd));

    const double ratio = std::max(std::abs(nd), std::abs(sys.g_n)) / std::max(f.epsilon, 1e-300);
    if (ratio > kRwaWarnThreshold)
        h.warn("driving-detuning condition weak: max(|n delta_n|, g_n)/epsilon = " + std::to_string(ratio));
    return h;
}

HamiltonianModel two_drive_rotating(const SystemParams& sys, const TwoDriveParams& td) {
    sys.validate();
    td.validate();
    HamiltonianModel h = rotating_frame_rwa(sys, {td.omega_1, td.omega_d1});
    HamiltonianModel out("two_drive_rotating", h.static_part());
    const auto j = joint_operators(sys.cutoff, sys.n);
    const double dd = td.delta_d();
    if (dd == 0.0)
        out.add_static((td.omega_2 / 2.0) * j.sx);
    else
        out.add_with_conjugate(j.sp, Coefficient::phasor(td.omega_2 / 2.0, dd));
    return out;
}

HamiltonianModel two_drive_interaction(const SystemParams& sys, const TwoDriveParams& td) {
    sys.validate();
    td.validate();
    const int N = sys.cutoff;
    const double Delta = sys.omega_q - td.omega_d1;
    const double dn = omega_r_eff(sys, td);
    const double W1 = td.omega_1, dd = td.delta_d();
    const double g = sys.g_n, q = td.omega_2 / 4.0;
    const auto d = dressed_basis(kTwoPi / 4.0);
    const Operator ir = identity(N);
    const Operator an = matrix_power(fock_annihilation(N), sys.n);
    const Operator Z = d.P_plus - d.P_minus;

    HamiltonianModel h("two_drive_interaction", dn * tensor(identity(2), number_operator(N)));
    // detuning term -(Delta/2)(e^{i W1 t}|+><-| + h.c.)
    h.add_with_conjugate(tensor(d.plus_minus, ir), Coefficient::phasor(-Delta / 2.0, W1));
    // (1/2)(Z + e^{i W1 t}|+><-| - e^{-i W1 t}|-><+|) g a^n + h.c.
    h.add_with_conjugate(tensor(Z, an), Coefficient::constant(g / 2.0));
    h.add_with_conjugate(tensor(d.plus_minus, an), Coefficient::phasor(g / 2.0, W1));
    h.add_with_conjugate(tensor(d.minus_plus, an), Coefficient::phasor(-g / 2.0, -W1));
    // same bracket times (Omega_2/2) e^{i dd t}
    if (td.omega_2 != 0.0) {
        h.add_with_conjugate(tensor(Z, ir), Coefficient::phasor(q, dd));
        h.add_with_conjugate(tensor(d.plus_minus, ir), Coefficient::phasor(q, W1 + dd));
        h.add_with_conjugate(tensor(d.minus_plus, ir), Coefficient::phasor(-q, dd - W1));
    }
    return h.folded();
}

HamiltonianModel two_drive_effective(const SystemParams& sys, const TwoDriveParams& td) {
    sys.validate();
    td.validate();
    const auto j = joint_operators(sys.cutoff, sys.n);
    const double wq = td.omega_q_eff(), wr = omega_r_eff(sys, td), ge = g_n_eff(sys);
    Operator h0 = (wq / 2.0) * j.sz + wr * j.num + ge * (j.sx * (j.adn + j.an));
    HamiltonianModel h("two_drive_effective", h0);
    const double mismatch = std::abs(td.delta_d() - td.omega_1);
    if (mismatch > 1e-9 * std::max(1.0, td.omega_1))
        h.warn("delta_d != Omega_1: the two-drive cancellation does not hold (mismatch " +
               std::to_string(mismatch / kTwoPi) + " Hz)");
    return h;
}

Operator frame_transform(const HamiltonianModel& h, const Operator& K, double t) {
    require_same_space(h.space(), K.space(), "frame_transform");
    Mat U = expm_hermitian(K.matrix(), t);
    Mat Ht;
    h.matrix_at(t, Ht);
    return {Mat(U.adjoint() * Ht * U - K.matrix()), h.space()};
}

// ---------------------------------------------------------------- diagnostics

bool DiagnosticReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const RatioCheck& c) { return c.pass(); });
}

const RatioCheck& DiagnosticReport::get(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw InvalidArgument("DiagnosticReport: no check named " + name);
}

nlohmann::json DiagnosticReport::to_json() const {
    nlohmann::json j;
    j["all_pass"] = all_pass();
    for (const auto& c : checks)
        j["checks"].push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold},
                               {"status", c.pass() ? "pass" : "warn"}});
    j["notes"] = notes;
    return j;
}

namespace {

double safe_ratio(double a, double b) { return b == 0.0 ? (a == 0.0 ? 0.0 : INFINITY) : a / b; }

}  // namespace

DiagnosticReport rwa_report(const SystemParams& sys, const DriveParams& drive) {
    const auto f = frame_params(sys, drive);
    const double wd = std::abs(drive.omega_d);
    DiagnosticReport r;
    auto add = [&](const char* name, double v) { r.checks.push_back({name, std::abs(v), kRwaWarnThreshold}); };
    add("g_n/omega_d", safe_ratio(sys.g_n, wd));
    add("Omega/omega_d", safe_ratio(drive.omega, wd));
    add("Delta/omega_d", safe_ratio(f.delta, wd));
    add("delta_n/omega_d", safe_ratio(f.delta_n, wd));
    add("n*delta_n/epsilon", safe_ratio(sys.n * f.delta_n, f.epsilon));
    add("g_n/epsilon", safe_ratio(sys.g_n, f.epsilon));
    return r;
}

DiagnosticReport rwa_report(const SystemParams& sys, const TwoDriveParams& td) {
    const double wd = std::abs(td.omega_d1);
    const double Delta = sys.omega_q - td.omega_d1;
    const double eps = std::hypot(td.omega_1, Delta);
    const double dn = omega_r_eff(sys, td);
    DiagnosticReport r;
    auto add = [&](const char* name, double v) { r.checks.push_back({name, std::abs(v), kRwaWarnThreshold}); };
    add("g_n/omega_d", safe_ratio(sys.g_n, wd));
    add("Omega/omega_d", safe_ratio(td.omega_1, wd));
    add("Omega_2/omega_d", safe_ratio(td.omega_2, wd));
    add("Delta/omega_d", safe_ratio(Delta, wd));
    add("delta_n/omega_d", safe_ratio(dn, wd));
    add("n*delta_n/epsilon", safe_ratio(sys.n * dn, eps));
    add("g_n/epsilon", safe_ratio(sys.g_n, eps));
    add("g_n_eff/epsilon", safe_ratio(g_n_eff(sys), eps));
    if (std::abs(td.delta_d() - td.omega_1) > 1e-9 * std::max(1.0, td.omega_1))
        r.notes.push_back("delta_d differs from Omega_1");
    return r;
}

}  // namespace mpq
