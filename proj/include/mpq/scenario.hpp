#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpq/analysis.hpp"
#include "mpq/circuit.hpp"
#include "mpq/io.hpp"

namespace mpq {

std::string version();

// Qubit labels: g, e, +, - (sigma_x eigenstates) and dressed+, dressed- (mixing angle of the drive).
struct InitialState {
    std::string qubit = "g";
    int fock = 0;
    bool operator==(const InitialState&) const = default;
};

struct DecoherenceSpec {
    Quantity kappa{0.0, "1/s"}, gamma1{0.0, "1/s"}, gamma_phi{0.0, "1/s"};
    bool angular = false;  // multiply rates by 2 pi
    bool operator==(const DecoherenceSpec&) const = default;
};

struct SweepAxis {
    std::string param;
    std::vector<Quantity> values;
    bool operator==(const SweepAxis&) const = default;
};

using ParamList = std::vector<std::pair<std::string, Quantity>>;

struct Scenario {
    std::string name = "scenario";
    std::string description;
    std::vector<std::string> notes;
    std::string model;
    std::string reference;  // optional second model on the same grid, channels prefixed "ref_"
    ParamList params;
    InitialState initial;
    Quantity t_end{0.0, "ns"};
    int points = 101;
    std::vector<std::string> observables;
    std::optional<DecoherenceSpec> decoherence;
    int cutoff = 20;
    std::string method = "midpoint";
    std::optional<Quantity> dt;
    bool convergence_check = false;
    std::vector<std::string> wigner;  // branches: dressed+, dressed-, bare_g, bare_e, resonator
    int wigner_points = 201;
    std::vector<SweepAxis> sweep;

    bool operator==(const Scenario&) const = default;

    const Quantity* find(const std::string& key) const;
    void set(const std::string& key, Quantity q);
    // Throws ValidationError.
    void validate() const;
    // Parameters in SI / angular units.
    nlohmann::json resolved() const;
};

std::vector<std::string> known_models();
std::vector<std::string> known_observables();

Scenario parse_scenario(const std::string& yaml_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string emit_scenario(const Scenario& s);

std::vector<std::string> preset_names();
// Throws ValidationError for an unknown name.
Scenario figure_preset(const std::string& name);

// Resolved model inputs.
struct ResolvedDrive {
    SystemParams sys;
    DriveParams drive;
    TwoDriveParams two;
};
ResolvedDrive resolve_drive(const Scenario& s);
DerivedParams resolve_circuit(const Scenario& s);
HamiltonianModel build_model(const Scenario& s, const std::string& model);
QuantumState initial_state(const Scenario& s);
// Regime diagnostics of the primary model.
nlohmann::json regime_diagnostics(const Scenario& s);

// Circuit config: keys E_Jt, E_J1, E_J2, C_t, C_Jt, C_r, C_J1, C_J2, L_r and optional
// Phi_ext (defaults to the sweet spot), plus an optional `rates` block.
struct CircuitConfig {
    CircuitSpec spec;
    std::optional<Rates> rates;
};
CircuitConfig parse_circuit_config(const std::string& yaml_text);
std::string emit_table1_circuit_config(double E_J1, double E_J2);
nlohmann::json circuit_report(const CircuitConfig& cfg);

struct RunResult {
    TimeSeries series;
    nlohmann::json metadata;
    nlohmann::json summary;
    std::vector<std::pair<std::string, WignerGrid>> wigner;
    std::vector<std::string> warnings;
    std::optional<QuantumState> final_state;
    Evolution evolution;
};

RunResult run_scenario(const Scenario& s);

// Writes <name>.csv or <name>.json, <name>.summary.json and Wigner grids; returns the paths.
std::vector<std::filesystem::path> write_outputs(const RunResult& r, const Scenario& s,
                                                 const std::filesystem::path& dir, const std::string& format);

struct SweepResult {
    std::vector<std::string> axes;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<RunResult> runs;  // in row order
    nlohmann::json metadata;
    std::string to_csv() const;
};

// Cartesian product over at most two axes. Axis names are parameter keys or
// kappa / gamma1 / gamma_phi. Jobs run on `threads` workers; row order is fixed.
SweepResult run_sweep(const Scenario& base, const std::vector<SweepAxis>& axes, int threads = 1);
// "kappa=0,0.5,1 MHz" or "omega_q=10 GHz,10.1 GHz"
SweepAxis parse_axis(const std::string& text);

}  // namespace mpq
