#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpq/numerics.hpp"

namespace mpq {

// c(t) = sum_k amp_k exp(i freq_k t); closed form so propagators can pick any step.
struct Phasor {
    cplx amp;
    double freq = 0.0;
};

class Coefficient {
public:
    Coefficient() = default;
    static Coefficient constant(cplx c) { return Coefficient({{c, 0.0}}); }
    static Coefficient phasor(cplx amp, double freq) { return Coefficient({{amp, freq}}); }
    static Coefficient cosine(double amp, double freq);  // amp cos(freq t)
    explicit Coefficient(std::vector<Phasor> p) : ph_(std::move(p)) {}

    cplx operator()(double t) const;
    double max_frequency() const;
    Coefficient conj() const;
    Coefficient operator+(const Coefficient& o) const;
    Coefficient scaled(cplx s) const;
    const std::vector<Phasor>& phasors() const { return ph_; }
    // Removes components oscillating at |freq| within tol of f.
    Coefficient without_frequency(double f, double tol) const;
    bool empty() const { return ph_.empty(); }

private:
    std::vector<Phasor> ph_;
};

struct Term {
    Operator op;
    Coefficient coeff;
};

class HamiltonianModel {
public:
    HamiltonianModel(std::string name, Operator static_part);

    HamiltonianModel& add(const Operator& op, Coefficient c);
    // Adds c(t) op + conj(c(t)) op^dag.
    HamiltonianModel& add_with_conjugate(const Operator& op, const Coefficient& c);
    HamiltonianModel& add_static(const Operator& op);
    HamiltonianModel& warn(std::string message);

    const std::string& name() const { return name_; }
    const Operator& static_part() const { return static_; }
    const std::vector<Term>& terms() const { return terms_; }
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }
    const HilbertSpace& space() const { return static_.space(); }
    int dim() const { return static_.dim(); }

    bool is_static() const { return terms_.empty(); }
    Operator at(double t) const;
    void matrix_at(double t, Mat& out) const;
    double max_frequency() const;
    // Drops every phasor component at |freq| ~ f; constant components fold into the static part.
    HamiltonianModel without_frequency(double f, double tol = 1e-6) const;
    // Moves zero-frequency components into the static part.
    HamiltonianModel folded() const;

private:
    std::string name_;
    Operator static_;
    std::vector<Term> terms_;
    std::vector<std::string> diagnostics_;
};

struct SystemParams {
    double omega_q = 0.0;
    double omega_r = 0.0;
    double g_n = 0.0;
    int n = 2;
    int cutoff = 20;
    void validate() const;
};

struct DriveParams {
    double omega = 0.0;    // amplitude
    double omega_d = 0.0;  // carrier
    void validate() const;
};

struct FrameParams {
    double delta = 0.0;    // omega_q - omega_d
    double delta_n = 0.0;  // omega_r - omega_d/n
    double epsilon = 0.0;
    double theta = 0.0;
    double gbar_n = 0.0;   // g_n sin(theta)/2
};
FrameParams frame_params(const SystemParams& sys, const DriveParams& drive);

struct TwoDriveParams {
    double omega_1 = 0.0, omega_d1 = 0.0;
    double omega_2 = 0.0, omega_d2 = 0.0;
    double delta_d() const { return omega_d1 - omega_d2; }
    double omega_q_eff() const { return omega_2 / 2.0; }
    void validate() const;
};
double omega_r_eff(const SystemParams& sys, const TwoDriveParams& td);
double g_n_eff(const SystemParams& sys);

// Composite-space operator shorthands (qubit (x) resonator).
struct JointOperators {
    int cutoff;
    Operator a, ad, an, adn, num, id, sx, sy, sz, sp, sm;
};
JointOperators joint_operators(int cutoff, int n);

HamiltonianModel lab_frame(const SystemParams& sys, const DriveParams& drive);
// Frame rotating at omega_d with all counter-rotating terms kept.
HamiltonianModel rotating_frame_full(const SystemParams& sys, const DriveParams& drive);
HamiltonianModel rotating_frame_rwa(const SystemParams& sys, const DriveParams& drive);
HamiltonianModel interaction_picture(const SystemParams& sys, const DriveParams& drive);
HamiltonianModel effective_conditional(const SystemParams& sys, const DriveParams& drive);
HamiltonianModel two_drive_rotating(const SystemParams& sys, const TwoDriveParams& td);
HamiltonianModel two_drive_interaction(const SystemParams& sys, const TwoDriveParams& td);
HamiltonianModel two_drive_effective(const SystemParams& sys, const TwoDriveParams& td);

// U^dag H(t) U - K with U = exp(-i K t); the generic frame change used as a test oracle.
Operator frame_transform(const HamiltonianModel& h, const Operator& K, double t);

struct RatioCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.1;
    bool pass() const { return std::abs(value) <= threshold; }
};

struct DiagnosticReport {
    std::vector<RatioCheck> checks;
    std::vector<std::string> notes;
    bool all_pass() const;
    const RatioCheck& get(const std::string& name) const;
    nlohmann::json to_json() const;
};

inline constexpr double kRwaWarnThreshold = 0.1;

DiagnosticReport rwa_report(const SystemParams& sys, const DriveParams& drive);
DiagnosticReport rwa_report(const SystemParams& sys, const TwoDriveParams& td);

}  // namespace mpq
