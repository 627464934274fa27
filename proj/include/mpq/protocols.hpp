#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpq/dynamics.hpp"

namespace mpq {

// Generalized squeezing parameter accumulated by the effective conditional Hamiltonian
// gbar (P+ - P-) (e^{i n delta t} a^dag^n + h.c.) on the |+bar> branch:
//   lambda(t) = n! gbar (e^{i n delta t} - 1) / (n delta),  -> i n! gbar t at delta = 0.
// For n = 2 at delta = 0 this is zeta = 2 i gbar t = i g_2 t (gbar = g_2 sin(theta)/2).
struct SqueezingTrajectory {
    double gbar = 0.0;   // rad/s
    double delta = 0.0;  // rad/s, resonator detuning delta_n
    int n = 2;

    cplx lambda(double t) const;
    // Bound on |lambda| for delta != 0: 2 n! gbar / (n |delta|).
    double bound() const;
};

enum class Basis { Bare, Dressed };

struct MeasurementOutcome {
    Basis basis = Basis::Bare;
    std::string label;  // "g"/"e" or "+"/"-"
    double probability = 0.0;
    std::optional<QuantumState> state;  // resonator state, empty when omitted
    bool omitted = false;                // probability below 1e-14
};

// |+bar><+bar| (x) S_n(lambda) + |-bar><-bar| (x) S_n(-lambda).
Operator qcs_unitary(cplx zeta, double theta, int cutoff, int n = 2);

// Projective qubit measurement of a qubit (x) resonator state. The dressed basis uses the
// mixing angle theta.
std::vector<MeasurementOutcome> measure_qubit(const QuantumState& joint, Basis basis,
                                              double theta = kTwoPi / 4.0);

// N_pm = [2 (1 +- 1/sqrt(cosh 2r))]^{1/2}
double cat_norm(double r, int sign);

// (S_n(lambda)|0> + sign S_n(-lambda)|0>) / norm on a single-mode space.
QuantumState cat_squeezed_state(cplx zeta, int sign, int cutoff, int n = 2);

struct LogicalEncoding {
    std::vector<MeasurementOutcome> outcomes;
    Vec plus_L, minus_L;        // (Psi+ +- Psi-)/sqrt2
    double overlap_plus = 0.0;  // |<+_L|zeta>|^2
    // Fidelity of each outcome state with c+|+_L> +- c-|-_L> (same order as outcomes).
    std::vector<double> logical_fidelity;
};

LogicalEncoding logical_encode(cplx c_plus, cplx c_minus, cplx zeta, int cutoff);

Operator controlled_squeeze(cplx zeta, int cutoff);
Operator controlled_displacement(cplx alpha, int cutoff);
// |+><+| (x) D(alpha) + |-><-| (x) D(-alpha)
Operator qcd_unitary(cplx alpha, int cutoff);

struct PhaseRound {
    double p_g = 0.0, p_e = 0.0;
    double mean = 0.0;      // <+-1> with +1 for g
    double variance = 0.0;  // 1 - mean^2
    std::string followed;   // outcome kept for the next round
};

using QubitRotation = std::function<Operator(int round)>;

// H, controlled-U, optional rotation, H, then a bare-basis measurement. The qubit starts in |g>.
std::vector<MeasurementOutcome> phase_estimation_round(const Operator& controlled_u, const QuantumState& input,
                                                       const QubitRotation& rotation = {}, int round = 0);

// Repeats rounds, keeping the resonator state conditioned on `path[k]` after round k.
// Raw outcome statistics only.
std::vector<PhaseRound> phase_estimation_rounds(const Operator& controlled_u, const QuantumState& input,
                                                const std::vector<std::string>& path,
                                                const QubitRotation& rotation = {});

// e^{-i H1 tau} e^{-i H2 tau} e^{i H1 tau} e^{i H2 tau}, which approximates exp(-[H1,H2] tau^2).
Operator group_commutator_step(const Operator& h1, const Operator& h2, double tau);
// e^{i H1 tau/2} e^{i H2 tau} e^{i H1 tau/2}, which approximates exp(i (H1 + H2) tau).
Operator symmetric_sum_step(const Operator& h1, const Operator& h2, double tau);

struct LabeledOperator {
    std::string label;
    Operator op;
};

struct GeneratorSet {
    std::string name;
    std::vector<LabeledOperator> members;
    bool contains(const std::string& label) const;
    const Operator& get(const std::string& label) const;
};

// G1 = {sz x, sz p, sx, sy, sz}; G2 adds sz(x^2 - p^2) and sz{x,p}. Labels:
// "sz*x", "sz*p", "sx", "sy", "sz", "sz*(x2-p2)", "sz*{x,p}".
GeneratorSet generator_set(const std::string& name, int cutoff);

// Synthesis targets: "sx*x", "sy*x", "sz*x", "sx*p", "sy*p", "sz*p", "sz*x2", "sz*p2",
// "sz*(x2-p2)", "sz*{x,p}", "sx", "sy", "sz".
Operator synthesis_target(const std::string& label, int cutoff);

// One primitive exponential exp(-i sign H tau) of a synthesized sequence.
struct SynthesisStep {
    std::string label;
    int sign = 1;
};

struct SynthesisNode {
    enum class Kind { Primitive, Commutator, Symmetric };
    Kind kind = Kind::Primitive;
    std::string label;
    int cost = 1;
    int order = 1;     // the node approximates exp(-i E tau^order)
    Operator effective;  // E
    std::vector<SynthesisNode> children;
    nlohmann::json to_json() const;
};

struct Synthesis {
    std::string target;
    std::string set;
    int cost = 0;
    double scale = 0.0;  // E = scale * target operator
    SynthesisNode tree;
    std::vector<SynthesisStep> sequence;  // application order, first factor acts first

    // Product of the sequence at step tau.
    Mat unitary(double tau, const GeneratorSet& gens) const;
    // exp(-i E tau^order)
    Mat target_exponential(double tau) const;
    nlohmann::json to_json() const;
};

Synthesis synthesis_cost(const std::string& target, const GeneratorSet& set);

}  // namespace mpq
