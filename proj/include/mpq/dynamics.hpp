#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpq/hamiltonians.hpp"

namespace mpq {

enum class Method {
    MidpointExponential,  // exp(-i H(t+dt/2) dt), second order
    Magnus4,              // two-exponential commutator-free Magnus, fourth order
    Rk4,
};

std::string method_name(Method m);
Method parse_method(const std::string& s);

struct PropagatorConfig {
    Method method = Method::MidpointExponential;
    double dt = 0.0;  // 0 selects default_dt
    bool halving_check = false;
    double halving_tol = 1e-6;
    int max_halvings = 6;
    // Allowed |<psi|psi> - 1| at the end of the run.
    double max_norm_drift = 1e-8;
};

// (1/400) of 2 pi / max(fastest coefficient frequency, ||H(0)||_inf).
double default_dt(const HamiltonianModel& h);

struct Observable {
    std::string name;
    Operator op;
};

class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> times);

    const std::vector<double>& times() const { return times_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& channel(const std::string& name) const;
    bool has(const std::string& name) const;
    void add_channel(const std::string& name, std::vector<double> values);
    void set_convergence(const std::string& name, double estimate) { convergence_[name] = estimate; }
    std::optional<double> convergence(const std::string& name) const;
    // Appends all channels of another series on the same grid, with a name prefix.
    void merge(const TimeSeries& other, const std::string& prefix);

    nlohmann::json metadata;

    std::string to_csv() const;
    nlohmann::json to_json() const;
    // Probability channels (prefix "P_") must lie in [-1e-9, 1 + 1e-9].
    void validate() const;

private:
    std::vector<double> times_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> values_;
    std::map<std::string, double> convergence_;
};

struct Evolution {
    TimeSeries series;
    std::vector<QuantumState> snapshots;
    double dt_used = 0.0;
    long steps = 0;
    double norm_drift = 0.0;    // unitary runs
    double trace_drift = 0.0;   // Lindblad runs
    double min_eigenvalue = 0.0;  // Lindblad runs, over sampled snapshots
};

Evolution evolve_unitary(const HamiltonianModel& h, const QuantumState& psi0, const std::vector<double>& times,
                         const PropagatorConfig& cfg, const std::vector<Observable>& observables,
                         bool keep_snapshots = true);

// Propagates the columns of `block` from t0 to t1 with fixed steps (static models use the
// exact exponential). Returns the propagated block.
Mat propagate_block(const HamiltonianModel& h, Mat block, double t0, double t1, Method method, double dt);

struct CollapseChannel {
    std::string name;
    Operator op;
    double rate = 0.0;
};

struct LindbladModel {
    HamiltonianModel hamiltonian;
    std::vector<CollapseChannel> channels;
    void validate() const;
};

// sigma_- at gamma_1, sigma_z at gamma_phi/2, a at kappa.
LindbladModel standard_lindblad(const HamiltonianModel& h, double gamma1, double gamma_phi, double kappa);

struct LindbladConfig {
    double dt = 0.0;  // 0 selects default_dt, well inside the RK4 stability region
    double max_trace_drift = 1e-8;
    double positivity_floor = -1e-6;
    bool check_positivity = true;
};

Evolution evolve_lindblad(const LindbladModel& m, const QuantumState& rho0, const std::vector<double>& times,
                          const LindbladConfig& cfg, const std::vector<Observable>& observables,
                          bool keep_snapshots = true);

double fidelity(const QuantumState& a, const QuantumState& b);
cplx expectation(const Operator& op, const QuantumState& s);

// Standard qubit-resonator observables: P_g, P_e, n, sx, sy, sz, x, p, parity.
Observable standard_observable(const std::string& name, int cutoff);

std::vector<double> linspace(double a, double b, int count);

}  // namespace mpq
