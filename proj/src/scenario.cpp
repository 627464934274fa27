#include "mpq/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#ifndef MPQ_VERSION
#define MPQ_VERSION "0.0.0"
#endif

namespace mpq {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version() { return MPQ_VERSION; }

namespace {

// ---------------------------------------------------------------- vocabulary

const std::map<std::string, Dim>& param_dims() {
    static const std::map<std::string, Dim> m{
        {"omega_q", Dim::Frequency},  {"omega_r", Dim::Frequency},     {"g", Dim::Frequency},
        {"g_eff", Dim::Frequency},    {"n", Dim::None},                {"Omega", Dim::Frequency},
        {"omega_d", Dim::Frequency},  {"Delta", Dim::Frequency},       {"delta_n", Dim::Frequency},
        {"Omega_1", Dim::Frequency},  {"omega_d1", Dim::Frequency},    {"Omega_2", Dim::Frequency},
        {"omega_d2", Dim::Frequency}, {"delta_d", Dim::Frequency},     {"omega_r_eff", Dim::Frequency},
        {"omega_q_eff", Dim::Frequency}, {"g_2", Dim::Frequency},      {"g_e1", Dim::Frequency},
        {"g_e2", Dim::Frequency},     {"g_e3", Dim::Frequency},        {"g_e4", Dim::Frequency},
        {"g_e5", Dim::Frequency},     {"g_c", Dim::Frequency},         {"linear_offsets", Dim::None},
        {"E_Jt", Dim::Frequency},     {"E_J1", Dim::Frequency},        {"E_J2", Dim::Frequency},
        {"C_t", Dim::Capacitance},    {"C_Jt", Dim::Capacitance},      {"C_r", Dim::Capacitance},
        {"C_J1", Dim::Capacitance},   {"C_J2", Dim::Capacitance},      {"L_r", Dim::Inductance},
        {"Phi_ext", Dim::Flux},
    };
    return m;
}

const std::vector<std::string> kSingleDrive{"lab_frame", "rotating_frame_full", "rotating_frame_rwa",
                                            "interaction_picture", "effective_conditional"};
const std::vector<std::string> kTwoDrive{"two_drive_rotating", "two_drive_interaction", "two_drive_effective"};
const std::vector<std::string> kCircuit{"tla", "two_photon_jc"};
const std::vector<std::string> kRateKeys{"kappa", "gamma1", "gamma_phi"};
const std::vector<std::string> kBranches{"dressed+", "dressed-", "bare_g", "bare_e", "resonator"};
const std::vector<std::string> kQubitLabels{"g", "e", "+", "-", "dressed+", "dressed-"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

double si(const Scenario& s, const std::string& key) { return to_si(*s.find(key), param_dims().at(key)); }

std::optional<double> opt(const Scenario& s, const std::string& key) {
    if (!s.find(key)) return std::nullopt;
    return si(s, key);
}

double req(const Scenario& s, const std::string& key, const std::string& model) {
    if (!s.find(key)) throw ValidationError("model " + model + " needs parameter '" + key + "'");
    return si(s, key);
}

double rate_si(const DecoherenceSpec& d, const std::string& key) {
    const Quantity& q = key == "kappa" ? d.kappa : key == "gamma1" ? d.gamma1 : d.gamma_phi;
    return to_si(q, Dim::Rate, d.angular);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string branch_file_tag(const std::string& b) {
    std::string out;
    for (char c : b) out += c == '+' ? std::string("plus") : c == '-' ? std::string("minus") : std::string(1, c);
    return out;
}

ResolvedDrive resolve_for(const Scenario& s, const std::string& model) {
    ResolvedDrive r;
    auto& sys = r.sys;
    sys.cutoff = s.cutoff;
    sys.n = s.find("n") ? static_cast<int>(std::lround(si(s, "n"))) : 2;
    if (s.find("n") && std::abs(si(s, "n") - sys.n) > 0) throw ValidationError("parameter n must be an integer");
    sys.omega_q = req(s, "omega_q", model);
    if (contains(kSingleDrive, model)) {
        if (s.find("g"))
            sys.g_n = si(s, "g");
        else
            throw ValidationError("model " + model + " needs parameter 'g'");
        r.drive.omega = req(s, "Omega", model);
        if (auto wd = opt(s, "omega_d"))
            r.drive.omega_d = *wd;
        else
            r.drive.omega_d = sys.omega_q - req(s, "Delta", model);
        if (auto wr = opt(s, "omega_r"))
            sys.omega_r = *wr;
        else
            sys.omega_r = r.drive.omega_d / sys.n + req(s, "delta_n", model);
    } else if (contains(kTwoDrive, model)) {
        if (auto g = opt(s, "g"))
            sys.g_n = *g;
        else
            sys.g_n = 2.0 * req(s, "g_eff", model);
        auto& td = r.two;
        td.omega_1 = req(s, "Omega_1", model);
        if (auto w = opt(s, "omega_d1"))
            td.omega_d1 = *w;
        else
            td.omega_d1 = sys.omega_q - req(s, "Delta", model);
        if (auto w = opt(s, "omega_d2"))
            td.omega_d2 = *w;
        else
            td.omega_d2 = td.omega_d1 - req(s, "delta_d", model);
        if (auto w = opt(s, "Omega_2"))
            td.omega_2 = *w;
        else
            td.omega_2 = 2.0 * opt(s, "omega_q_eff").value_or(0.0);
        if (auto wr = opt(s, "omega_r"))
            sys.omega_r = *wr;
        else
            sys.omega_r = td.omega_d1 / sys.n + req(s, "omega_r_eff", model);
        r.drive = {td.omega_1, td.omega_d1};
    } else {
        throw ValidationError("model " + model + " is not drive-based");
    }
    sys.validate();
    return r;
}

double theta_of(const Scenario& s) {
    if (contains(kSingleDrive, s.model) || contains(kTwoDrive, s.model)) {
        const auto r = resolve_for(s, s.model);
        return frame_params(r.sys, r.drive).theta;
    }
    return kTwoPi / 4.0;
}

// ---------------------------------------------------------------- YAML

Quantity yq(const YAML::Node& n, const std::string& where) {
    if (!n.IsScalar()) throw ValidationError(where + ": expected a scalar quantity");
    return parse_quantity(n.as<std::string>());
}

void check_keys(const YAML::Node& n, const std::vector<std::string>& allowed, const std::string& where) {
    if (!n.IsMap()) throw ValidationError(where + ": expected a mapping");
    for (const auto& kv : n) {
        const auto k = kv.first.as<std::string>();
        if (!contains(allowed, k)) throw ValidationError(where + ": unknown key '" + k + "'");
    }
}

std::vector<std::string> string_list(const YAML::Node& n, const std::string& where) {
    if (!n.IsSequence()) throw ValidationError(where + ": expected a list");
    std::vector<std::string> out;
    for (const auto& x : n) out.push_back(x.as<std::string>());
    return out;
}

void emit_quantity(YAML::Emitter& e, const Quantity& q) { e << format_quantity(q); }

// ---------------------------------------------------------------- presets

Scenario base_preset(const std::string& name, const std::string& model) {
    Scenario s;
    s.name = name;
    s.model = model;
    return s;
}

Quantity q(double v, const char* unit) { return {v, unit}; }

Scenario fig1(const std::string& name, double wq_eff_mhz, const std::string& obs) {
    Scenario s = base_preset(name, "two_drive_effective");
    s.description = "two-photon Rabi model from two drives: effective model vs interaction picture";
    s.reference = "two_drive_interaction";
    s.params = {{"omega_q", q(10, "GHz")},       {"Delta", q(20, "MHz")},        {"Omega_1", q(1.4, "GHz")},
                {"delta_d", q(1.4, "GHz")},      {"g_eff", q(10, "MHz")},        {"omega_r_eff", q(10, "MHz")},
                {"omega_q_eff", q(wq_eff_mhz, "MHz")}, {"n", q(2, "")}};
    s.notes = {"omega_q is the carrier; Delta, delta_d and omega_r_eff fix the drive frequencies and omega_r",
               "g_eff t / 2pi spans [0, 1]"};
    s.t_end = q(100, "ns");
    s.points = 201;
    s.observables = {obs};
    s.cutoff = 30;
    return s;
}

Scenario qcs_preset(const std::string& name, const std::string& model) {
    Scenario s = base_preset(name, model);
    s.params = {{"omega_q", q(10, "GHz")}, {"Delta", q(0, "MHz")}, {"delta_n", q(0, "MHz")},
                {"Omega", q(0.5, "GHz")},  {"g", q(20, "MHz")},    {"n", q(2, "")}};
    return s;
}

}  // namespace

// ---------------------------------------------------------------- Scenario

const Quantity* Scenario::find(const std::string& key) const {
    for (const auto& [k, v] : params)
        if (k == key) return &v;
    return nullptr;
}

void Scenario::set(const std::string& key, Quantity qv) {
    for (auto& [k, v] : params)
        if (k == key) {
            v = std::move(qv);
            return;
        }
    params.emplace_back(key, std::move(qv));
}

std::vector<std::string> known_models() {
    std::vector<std::string> out = kSingleDrive;
    out.insert(out.end(), kTwoDrive.begin(), kTwoDrive.end());
    out.insert(out.end(), kCircuit.begin(), kCircuit.end());
    return out;
}

std::vector<std::string> known_observables() {
    return {"P_g", "P_e", "n", "sx", "sy", "sz", "x", "p", "parity", "squeeze_r"};
}

void Scenario::validate() const {
    auto fail = [](const std::string& m) { throw ValidationError(m); };
    if (name.empty() || name.find_first_of("/\\") != std::string::npos) fail("name must be a plain file stem");
    const auto models = known_models();
    if (!contains(models, model)) fail("unknown model '" + model + "' (known: " + join(models) + ")");
    if (!reference.empty() && !contains(models, reference)) fail("unknown reference model '" + reference + "'");
    std::set<std::string> seen;
    for (const auto& [k, v] : params) {
        auto it = param_dims().find(k);
        if (it == param_dims().end()) fail("unknown parameter '" + k + "'");
        if (!seen.insert(k).second) fail("duplicate parameter '" + k + "'");
        to_si(v, it->second);
    }
    if (cutoff < 4 || cutoff > 4000) fail("cutoff must lie in [4, 4000]");
    if (points < 2) fail("time.points must be >= 2");
    if (!(to_si(t_end, Dim::Time) > 0.0)) fail("time.t_end must be positive");
    try {
        parse_method(method);
    } catch (const std::exception& e) {
        fail(e.what());
    }
    if (dt && !(to_si(*dt, Dim::Time) > 0.0)) fail("numerics.dt must be positive");
    if (!contains(kQubitLabels, initial.qubit)) fail("unknown initial qubit state '" + initial.qubit + "'");
    if (initial.fock < 0 || initial.fock >= cutoff) fail("initial Fock level outside the cutoff");
    for (const auto& o : observables)
        if (!contains(known_observables(), o)) fail("unknown observable '" + o + "'");
    for (const auto& b : wigner)
        if (!contains(kBranches, b)) fail("unknown Wigner branch '" + b + "' (known: " + join(kBranches) + ")");
    if (wigner_points < 2) fail("wigner.points must be >= 2");
    if (decoherence)
        for (const auto& k : kRateKeys)
            if (rate_si(*decoherence, k) < 0.0) fail("decoherence rate " + k + " must be >= 0");
    if (sweep.size() > 2) fail("at most two sweep axes");
    for (const auto& a : sweep) {
        if (!param_dims().count(a.param) && !contains(kRateKeys, a.param))
            fail("sweep axis over unknown parameter '" + a.param + "'");
        if (a.values.empty()) fail("sweep axis '" + a.param + "' has no values");
        for (const auto& v : a.values) {
            if (contains(kRateKeys, a.param))
                to_si(v, Dim::Rate);
            else
                to_si(v, param_dims().at(a.param));
        }
    }
    // model inputs resolve
    for (const auto& m : {model, reference}) {
        if (m.empty()) continue;
        if (contains(kCircuit, m)) {
            Scenario t = *this;
            t.model = m;
            resolve_circuit(t);
        } else {
            resolve_for(*this, m);
        }
    }
}

json Scenario::resolved() const {
    json j;
    for (const auto& [k, v] : params) {
        j["params"][k] = {{"value", to_si(v, param_dims().at(k))}, {"as_written", format_quantity(v)}};
    }
    j["t_end_s"] = to_si(t_end, Dim::Time);
    j["points"] = points;
    j["cutoff"] = cutoff;
    j["method"] = method;
    if (dt) j["dt_s"] = to_si(*dt, Dim::Time);
    if (decoherence) {
        for (const auto& k : kRateKeys) j["decoherence"][k] = rate_si(*decoherence, k);
        j["decoherence"]["angular"] = decoherence->angular;
    }
    j["units"] = "frequencies in rad/s (config Hz-like values x 2pi), rates in 1/s, times in s";
    return j;
}

// ---------------------------------------------------------------- parse / emit

Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ValidationError("scenario must be a mapping");
    check_keys(root,
               {"name", "description", "notes", "model", "reference", "params", "initial", "time", "observables",
                "numerics", "decoherence", "wigner", "sweep"},
               "scenario");
    Scenario s;
    try {
        if (root["name"]) s.name = root["name"].as<std::string>();
        if (root["description"]) s.description = root["description"].as<std::string>();
        if (root["notes"]) s.notes = string_list(root["notes"], "notes");
        if (!root["model"]) throw ValidationError("scenario needs a model");
        s.model = root["model"].as<std::string>();
        if (root["reference"]) s.reference = root["reference"].as<std::string>();
        if (auto p = root["params"]) {
            if (!p.IsMap()) throw ValidationError("params: expected a mapping");
            for (const auto& kv : p) {
                const auto k = kv.first.as<std::string>();
                s.params.emplace_back(k, yq(kv.second, "params." + k));
            }
        }
        if (auto n = root["initial"]) {
            check_keys(n, {"qubit", "fock"}, "initial");
            if (n["qubit"]) s.initial.qubit = n["qubit"].as<std::string>();
            if (n["fock"]) s.initial.fock = n["fock"].as<int>();
        }
        if (auto n = root["time"]) {
            check_keys(n, {"t_end", "points"}, "time");
            if (n["t_end"]) s.t_end = yq(n["t_end"], "time.t_end");
            if (n["points"]) s.points = n["points"].as<int>();
        } else {
            throw ValidationError("scenario needs a time block");
        }
        if (root["observables"]) {
            if (root["observables"].IsNull())
                s.observables.clear();
            else
                s.observables = string_list(root["observables"], "observables");
        }
        if (auto n = root["numerics"]) {
            check_keys(n, {"cutoff", "method", "dt", "convergence_check"}, "numerics");
            if (n["cutoff"]) s.cutoff = n["cutoff"].as<int>();
            if (n["method"]) s.method = n["method"].as<std::string>();
            if (n["dt"]) s.dt = yq(n["dt"], "numerics.dt");
            if (n["convergence_check"]) s.convergence_check = n["convergence_check"].as<bool>();
        }
        if (auto n = root["decoherence"]) {
            check_keys(n, {"kappa", "gamma1", "gamma_phi", "angular"}, "decoherence");
            DecoherenceSpec d;
            if (n["kappa"]) d.kappa = yq(n["kappa"], "decoherence.kappa");
            if (n["gamma1"]) d.gamma1 = yq(n["gamma1"], "decoherence.gamma1");
            if (n["gamma_phi"]) d.gamma_phi = yq(n["gamma_phi"], "decoherence.gamma_phi");
            if (n["angular"]) d.angular = n["angular"].as<bool>();
            s.decoherence = d;
        }
        if (auto n = root["wigner"]) {
            check_keys(n, {"branches", "points"}, "wigner");
            if (n["branches"]) s.wigner = string_list(n["branches"], "wigner.branches");
            if (n["points"]) s.wigner_points = n["points"].as<int>();
        }
        if (auto n = root["sweep"]) {
            if (!n.IsSequence()) throw ValidationError("sweep: expected a list of axes");
            for (const auto& ax : n) {
                check_keys(ax, {"param", "values"}, "sweep axis");
                SweepAxis a;
                a.param = ax["param"].as<std::string>();
                if (!ax["values"].IsSequence()) throw ValidationError("sweep axis values: expected a list");
                for (const auto& v : ax["values"]) a.values.push_back(yq(v, "sweep." + a.param));
                s.sweep.push_back(std::move(a));
            }
        }
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("YAML: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario load_scenario(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string emit_scenario(const Scenario& s) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << s.name;
    if (!s.description.empty()) e << YAML::Key << "description" << YAML::Value << s.description;
    if (!s.notes.empty()) e << YAML::Key << "notes" << YAML::Value << s.notes;
    e << YAML::Key << "model" << YAML::Value << s.model;
    if (!s.reference.empty()) e << YAML::Key << "reference" << YAML::Value << s.reference;
    e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : s.params) {
        e << YAML::Key << k << YAML::Value;
        emit_quantity(e, v);
    }
    e << YAML::EndMap;
    e << YAML::Key << "initial" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "qubit"
      << YAML::Value << s.initial.qubit << YAML::Key << "fock" << YAML::Value << s.initial.fock << YAML::EndMap;
    e << YAML::Key << "time" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "t_end" << YAML::Value;
    emit_quantity(e, s.t_end);
    e << YAML::Key << "points" << YAML::Value << s.points << YAML::EndMap;
    e << YAML::Key << "observables" << YAML::Value << YAML::Flow << s.observables;
    e << YAML::Key << "numerics" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "cutoff" << YAML::Value << s.cutoff;
    e << YAML::Key << "method" << YAML::Value << s.method;
    if (s.dt) {
        e << YAML::Key << "dt" << YAML::Value;
        emit_quantity(e, *s.dt);
    }
    e << YAML::Key << "convergence_check" << YAML::Value << s.convergence_check;
    e << YAML::EndMap;
    if (s.decoherence) {
        e << YAML::Key << "decoherence" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "kappa" << YAML::Value;
        emit_quantity(e, s.decoherence->kappa);
        e << YAML::Key << "gamma1" << YAML::Value;
        emit_quantity(e, s.decoherence->gamma1);
        e << YAML::Key << "gamma_phi" << YAML::Value;
        emit_quantity(e, s.decoherence->gamma_phi);
        e << YAML::Key << "angular" << YAML::Value << s.decoherence->angular;
        e << YAML::EndMap;
    }
    if (!s.wigner.empty()) {
        e << YAML::Key << "wigner" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "branches" << YAML::Value << YAML::Flow << s.wigner;
        e << YAML::Key << "points" << YAML::Value << s.wigner_points;
        e << YAML::EndMap;
    }
    if (!s.sweep.empty()) {
        e << YAML::Key << "sweep" << YAML::Value << YAML::BeginSeq;
        for (const auto& a : s.sweep) {
            e << YAML::BeginMap << YAML::Key << "param" << YAML::Value << a.param;
            e << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (const auto& v : a.values) emit_quantity(e, v);
            e << YAML::EndSeq << YAML::EndMap;
        }
        e << YAML::EndSeq;
    }
    e << YAML::EndMap;
    std::string header =
        "# mpq scenario " + version() +
        "\n# Frequencies in Hz, kHz, MHz or GHz are multiplied by 2 pi on load (hbar = 1, angular units).\n"
        "# Decoherence rates are plain 1/s (Hz-like suffixes scale by powers of ten) unless\n"
        "# decoherence.angular is true. Times take s, ms, us, ns or ps.\n";
    return header + e.c_str() + "\n";
}

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names() { return {"fig1a", "fig1b", "fig1c", "fig1d", "fig2", "fig3", "fig5", "fig6"}; }

Scenario figure_preset(const std::string& name) {
    if (name == "fig1a") return fig1(name, 0.0, "P_g");
    if (name == "fig1b") return fig1(name, 0.0, "n");
    if (name == "fig1c") return fig1(name, 10.0, "P_g");
    if (name == "fig1d") return fig1(name, 10.0, "n");
    if (name == "fig2") {
        Scenario s = qcs_preset(name, "effective_conditional");
        s.description = "conditional squeezing at g_2 t / 2pi = 0.15, resonator after dressed and bare qubit measurement";
        s.notes = {"at Delta = 0 the mixing angle is pi/2 for any Omega"};
        s.t_end = q(7.5, "ns");
        s.points = 31;
        s.observables = {"n", "P_g"};
        s.cutoff = 100;
        s.wigner = {"dressed+", "bare_e"};
        return s;
    }
    if (name == "fig3") {
        Scenario s = qcs_preset(name, "effective_conditional");
        s.description = "squeezing and photon number for delta_2 / g_2 in {2, 1, 0.5, 0.1, 0}";
        s.t_end = q(12.5, "ns");
        s.points = 51;
        s.observables = {"n", "squeeze_r"};
        s.cutoff = 300;
        s.method = "magnus4";
        s.dt = q(0.1, "ns");
        s.sweep = {{"delta_n", {q(40, "MHz"), q(20, "MHz"), q(10, "MHz"), q(2, "MHz"), q(0, "MHz")}}};
        return s;
    }
    if (name == "fig5") {
        Scenario s = base_preset(name, "tla");
        s.description = "two-photon Rabi oscillations from |g,2>: two-level circuit model vs two-photon JC";
        s.reference = "two_photon_jc";
        s.notes = {"couplings at the centre of each design range", "t_end is one Rabi period pi / (sqrt2 g_2)"};
        s.params = {{"omega_q", q(10, "GHz")},  {"omega_r", q(5, "GHz")},   {"g_2", q(37.5, "MHz")},
                    {"g_e1", q(1.62, "GHz")},   {"g_e2", q(2.01, "GHz")},   {"g_e3", q(7.5, "MHz")},
                    {"g_e4", q(25, "MHz")},     {"g_e5", q(50, "MHz")},     {"g_c", q(40, "MHz")},
                    {"linear_offsets", q(0, "")}};
        s.initial = {"g", 2};
        s.t_end = q(1e3 / (2.0 * std::sqrt(2.0) * 37.5), "ns");
        s.points = 201;
        s.observables = {"P_e", "n"};
        s.cutoff = 30;
        return s;
    }
    if (name == "fig6") {
        Scenario s = qcs_preset(name, "rotating_frame_rwa");
        s.description = "fidelity of the open-system state against closed evolution at g_2 t / 2pi = 0.3";
        s.notes = {"rates are plain 1/s; set decoherence.angular for 2pi x rates",
                   "the sweep covers kappa x gamma_1 up to 1 MHz; gamma_phi is varied by editing the block"};
        s.t_end = q(15, "ns");
        s.points = 31;
        s.observables = {"n", "P_e"};
        s.cutoff = 150;
        s.method = "rk4";
        s.dt = q(5, "ps");
        s.decoherence = DecoherenceSpec{q(1, "MHz"), q(0, "MHz"), q(0, "MHz"), false};
        s.sweep = {{"kappa", {q(0, "MHz"), q(0.5, "MHz"), q(1, "MHz")}},
                   {"gamma1", {q(0, "MHz"), q(0.5, "MHz"), q(1, "MHz")}}};
        return s;
    }
    throw ValidationError("unknown preset '" + name + "' (known: " + join(preset_names()) + ")");
}

// ---------------------------------------------------------------- models

ResolvedDrive resolve_drive(const Scenario& s) { return resolve_for(s, s.model); }

DerivedParams resolve_circuit(const Scenario& s) {
    if (s.find("E_Jt")) {
        CircuitSpec c;
        c.E_Jt = req(s, "E_Jt", s.model);
        c.E_J1 = req(s, "E_J1", s.model);
        c.E_J2 = req(s, "E_J2", s.model);
        c.C_t = req(s, "C_t", s.model);
        c.C_Jt = req(s, "C_Jt", s.model);
        c.C_r = req(s, "C_r", s.model);
        c.C_J1 = req(s, "C_J1", s.model);
        c.C_J2 = req(s, "C_J2", s.model);
        c.L_r = req(s, "L_r", s.model);
        c.validate();
        c.Phi_ext = opt(s, "Phi_ext").value_or(sweet_spot_flux(c.E_J1, c.E_J2));
        return derive_params(c);
    }
    DerivedParams d;
    d.omega_q = req(s, "omega_q", s.model);
    d.omega_r = req(s, "omega_r", s.model);
    d.g_2 = req(s, "g_2", s.model);
    d.g_e1 = opt(s, "g_e1").value_or(0.0);
    d.g_e2 = opt(s, "g_e2").value_or(0.0);
    d.g_e3 = opt(s, "g_e3").value_or(0.0);
    d.g_e4 = opt(s, "g_e4").value_or(0.0);
    d.g_e5 = opt(s, "g_e5").value_or(0.0);
    d.g_c = opt(s, "g_c").value_or(0.0);
    return d;
}

HamiltonianModel build_model(const Scenario& s, const std::string& model) {
    if (contains(kCircuit, model)) {
        Scenario t = s;
        t.model = model;
        const DerivedParams d = resolve_circuit(t);
        if (model == "tla") {
            TlaOptions o;
            o.linear_offsets = opt(s, "linear_offsets").value_or(0.0) != 0.0;
            return build_tla_hamiltonian(d, s.cutoff, o);
        }
        return two_photon_jc(d, s.cutoff);
    }
    const auto r = resolve_for(s, model);
    if (model == "lab_frame") return lab_frame(r.sys, r.drive);
    if (model == "rotating_frame_full") return rotating_frame_full(r.sys, r.drive);
    if (model == "rotating_frame_rwa") return rotating_frame_rwa(r.sys, r.drive);
    if (model == "interaction_picture") return interaction_picture(r.sys, r.drive);
    if (model == "effective_conditional") return effective_conditional(r.sys, r.drive);
    if (model == "two_drive_rotating") return two_drive_rotating(r.sys, r.two);
    if (model == "two_drive_interaction") return two_drive_interaction(r.sys, r.two);
    if (model == "two_drive_effective") return two_drive_effective(r.sys, r.two);
    throw ValidationError("unknown model '" + model + "'");
}

QuantumState initial_state(const Scenario& s) {
    Vec q;
    const std::string& l = s.initial.qubit;
    if (l == "g")
        q = ket_g();
    else if (l == "e")
        q = ket_e();
    else if (l == "+" || l == "-")
        q = (ket_g() + (l == "+" ? 1.0 : -1.0) * ket_e()) / std::sqrt(2.0);
    else {
        const auto d = dressed_basis(theta_of(s));
        q = l == "dressed+" ? d.plus : d.minus;
    }
    return QuantumState::pure(tensor(q, fock_ket(s.cutoff, s.initial.fock)), HilbertSpace::qubit_resonator(s.cutoff));
}

json regime_diagnostics(const Scenario& s) {
    if (contains(kCircuit, s.model)) {
        const DerivedParams d = resolve_circuit(s);
        std::optional<Rates> rates;
        if (s.decoherence)
            rates = Rates{rate_si(*s.decoherence, "kappa"), rate_si(*s.decoherence, "gamma1"),
                          rate_si(*s.decoherence, "gamma_phi")};
        json j = regime_report(d, rates).to_json();
        j["derived"] = d.to_json();
        return j;
    }
    const auto r = resolve_drive(s);
    if (contains(kTwoDrive, s.model)) return rwa_report(r.sys, r.two).to_json();
    return rwa_report(r.sys, r.drive).to_json();
}

// ---------------------------------------------------------------- circuit config

CircuitConfig parse_circuit_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ValidationError("circuit config must be a mapping");
    check_keys(root, {"circuit", "rates"}, "circuit config");
    const YAML::Node c = root["circuit"];
    if (!c) throw ValidationError("circuit config needs a circuit block");
    const std::vector<std::string> keys{"E_Jt", "E_J1", "E_J2", "C_t", "C_Jt", "C_r", "C_J1", "C_J2", "L_r", "Phi_ext"};
    check_keys(c, keys, "circuit");
    CircuitConfig cfg;
    auto get = [&](const std::string& k) {
        if (!c[k]) throw ValidationError("circuit: missing " + k);
        return to_si(yq(c[k], "circuit." + k), param_dims().at(k));
    };
    auto& sp = cfg.spec;
    sp.E_Jt = get("E_Jt");
    sp.E_J1 = get("E_J1");
    sp.E_J2 = get("E_J2");
    sp.C_t = get("C_t");
    sp.C_Jt = get("C_Jt");
    sp.C_r = get("C_r");
    sp.C_J1 = get("C_J1");
    sp.C_J2 = get("C_J2");
    sp.L_r = get("L_r");
    try {
        sp.validate();
    } catch (const InvalidArgument& e) {
        throw ValidationError(e.what());
    }
    if (!c["Phi_ext"] || c["Phi_ext"].as<std::string>() == "sweet_spot")
        sp.Phi_ext = sweet_spot_flux(sp.E_J1, sp.E_J2);
    else
        sp.Phi_ext = get("Phi_ext");
    if (const YAML::Node r = root["rates"]) {
        check_keys(r, {"kappa", "gamma1", "gamma_phi", "angular"}, "rates");
        const bool ang = r["angular"] && r["angular"].as<bool>();
        Rates rt;
        if (r["kappa"]) rt.kappa = to_si(yq(r["kappa"], "rates.kappa"), Dim::Rate, ang);
        if (r["gamma1"]) rt.gamma1 = to_si(yq(r["gamma1"], "rates.gamma1"), Dim::Rate, ang);
        if (r["gamma_phi"]) rt.gamma_phi = to_si(yq(r["gamma_phi"], "rates.gamma_phi"), Dim::Rate, ang);
        cfg.rates = rt;
    }
    return cfg;
}

std::string emit_table1_circuit_config(double E_J1, double E_J2) {
    const CircuitSpec s = table1_circuit(E_J1, E_J2);
    auto ghz = [](double w) { return format_quantity({w / kTwoPi / 1e9, "GHz"}); };
    auto ff = [](double c) { return format_quantity({c / 1e-15, "fF"}); };
    std::ostringstream os;
    os << "# mpq circuit " << version() << "\n"
       << "# Josephson energies as E_J/h in Hz-like units (x 2pi on load).\n"
       << "# C_J1, C_J2 set g_c near 2pi x 40 MHz; C_t is solved for E_Ct = 2pi x 150 MHz given C_Jt;\n"
       << "# L_r is solved for omega_r = 2pi x 5 GHz. These five are design choices.\n"
       << "circuit:\n"
       << "  E_Jt: " << ghz(s.E_Jt) << "\n"
       << "  E_J1: " << ghz(s.E_J1) << "\n"
       << "  E_J2: " << ghz(s.E_J2) << "\n"
       << "  C_t: " << ff(s.C_t) << "\n"
       << "  C_Jt: " << ff(s.C_Jt) << "\n"
       << "  C_r: " << ff(s.C_r) << "\n"
       << "  C_J1: " << ff(s.C_J1) << "\n"
       << "  C_J2: " << ff(s.C_J2) << "\n"
       << "  L_r: " << format_quantity({s.L_r / 1e-9, "nH"}) << "\n"
       << "  Phi_ext: sweet_spot\n";
    return os.str();
}

json circuit_report(const CircuitConfig& cfg) {
    const DerivedParams d = derive_params(cfg.spec);
    json j;
    j["version"] = version();
    j["spec"] = cfg.spec.to_json();
    j["derived"] = d.to_json();
    j["regime"] = regime_report(d, cfg.rates).to_json();
    j["sweet_spot_flux"] = sweet_spot_flux(cfg.spec.E_J1, cfg.spec.E_J2);
    j["Phi_ext_over_Phi0"] = cfg.spec.Phi_ext / kFluxQuantum;
    json hz;
    for (const auto& k : {"E_Ct", "E_c", "E_s", "omega_q", "omega_r", "g_2", "g_e1", "g_e2", "g_e3", "g_e4", "g_e5", "g_c"})
        hz[k] = j["derived"][k].get<double>() / kTwoPi;
    j["derived_over_2pi_hz"] = hz;
    j["units"] = "energies and couplings in rad/s, capacitances in F, inductance in H, flux in Wb";
    return j;
}

// ---------------------------------------------------------------- run

namespace {

std::vector<Observable> operators_for(const Scenario& s) {
    std::vector<Observable> out;
    for (const auto& o : s.observables)
        if (o != "squeeze_r") out.push_back(standard_observable(o, s.cutoff));
    return out;
}

std::vector<double> squeeze_channel(const std::vector<QuantumState>& snaps, double theta) {
    std::vector<double> r;
    r.reserve(snaps.size());
    for (const auto& st : snaps) {
        const auto out = measure_qubit(st, Basis::Dressed, theta);
        const auto& plus = out[0];
        r.push_back(plus.state ? squeezing_from_state(*plus.state).r : std::nan(""));
    }
    return r;
}

PropagatorConfig propagator_config(const Scenario& s) {
    PropagatorConfig c;
    c.method = parse_method(s.method);
    if (s.dt) c.dt = to_si(*s.dt, Dim::Time);
    c.halving_check = s.convergence_check;
    return c;
}

std::optional<QuantumState> branch_state(const QuantumState& joint, const std::string& branch, double theta,
                                         double& probability) {
    if (branch == "resonator") {
        probability = 1.0;
        return resonator_state(joint);
    }
    const bool dressed = branch.rfind("dressed", 0) == 0;
    const auto outs = measure_qubit(joint, dressed ? Basis::Dressed : Basis::Bare, theta);
    const std::string label = dressed ? branch.substr(7) : branch.substr(5);
    for (const auto& o : outs)
        if (o.label == label) {
            probability = o.probability;
            return o.state;
        }
    probability = 0.0;
    return std::nullopt;
}

}  // namespace

RunResult run_scenario(const Scenario& s) {
    s.validate();
    RunResult r;
    const auto times = linspace(0.0, to_si(s.t_end, Dim::Time), s.points);
    const HamiltonianModel h = build_model(s, s.model);
    const QuantumState psi0 = initial_state(s);
    const double theta = theta_of(s);

    r.metadata["version"] = version();
    r.metadata["scenario"] = s.name;
    r.metadata["model"] = s.model;
    if (!s.reference.empty()) r.metadata["reference"] = s.reference;
    r.metadata["resolved"] = s.resolved();
    r.metadata["initial"] = {{"qubit", s.initial.qubit}, {"fock", s.initial.fock}};
    r.metadata["regime"] = regime_diagnostics(s);
    for (const auto& d : h.diagnostics()) r.warnings.push_back(s.model + ": " + d);
    for (const auto& c : r.metadata["regime"]["checks"])
        if (c["status"] == "warn")
            r.warnings.push_back("regime check " + c["name"].get<std::string>() + " = " +
                                 fmt17(c["value"].get<double>()) + " exceeds " + fmt17(c["threshold"].get<double>()));

    if (s.observables.empty() && s.wigner.empty()) {
        r.metadata["dry_run"] = true;
        r.metadata["warnings"] = r.warnings;
        r.series = TimeSeries(times);
        r.series.metadata = r.metadata;
        r.summary = json::object();
        return r;
    }

    const auto obs = operators_for(s);
    const bool want_r = contains(s.observables, "squeeze_r");
    if (s.decoherence) {
        const auto& d = *s.decoherence;
        const LindbladModel lm =
            standard_lindblad(h, rate_si(d, "gamma1"), rate_si(d, "gamma_phi"), rate_si(d, "kappa"));
        LindbladConfig lc;
        if (s.dt) lc.dt = to_si(*s.dt, Dim::Time);
        const QuantumState rho0 = QuantumState::mixed(psi0.density(), psi0.space());
        r.evolution = evolve_lindblad(lm, rho0, times, lc, obs, true);
        if (s.convergence_check) {
            LindbladConfig half = lc;
            half.dt = 0.5 * (lc.dt > 0.0 ? lc.dt : r.evolution.dt_used);
            const Evolution e2 = evolve_lindblad(lm, rho0, times, half, obs, false);
            for (const auto& name : r.evolution.series.names()) {
                const auto& a = r.evolution.series.channel(name);
                const auto& b = e2.series.channel(name);
                double m = 0.0;
                for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
                r.evolution.series.set_convergence(name, m);
            }
        }
        // closed-system reference on the same grid
        PropagatorConfig pc = propagator_config(s);
        pc.halving_check = false;
        if (pc.method == Method::Rk4) pc.method = Method::MidpointExponential;
        const Evolution closed = evolve_unitary(h, psi0, times, pc, {}, true);
        std::vector<double> F;
        for (size_t i = 0; i < times.size(); ++i) F.push_back(fidelity(closed.snapshots[i], r.evolution.snapshots[i]));
        r.evolution.series.add_channel("F_closed", F);
        r.summary["fidelity"] = F.back();
        r.summary["trace_drift"] = r.evolution.trace_drift;
        r.summary["min_eigenvalue"] = r.evolution.min_eigenvalue;
    } else {
        r.evolution = evolve_unitary(h, psi0, times, propagator_config(s), obs, true);
        r.summary["norm_drift"] = r.evolution.norm_drift;
    }
    r.series = r.evolution.series;
    if (want_r) r.series.add_channel("squeeze_r", squeeze_channel(r.evolution.snapshots, theta));
    r.final_state = r.evolution.snapshots.back();
    r.summary["dt"] = r.evolution.dt_used;
    r.summary["steps"] = r.evolution.steps;

    if (!s.reference.empty()) {
        const HamiltonianModel ref = build_model(s, s.reference);
        for (const auto& d : ref.diagnostics()) r.warnings.push_back(s.reference + ": " + d);
        PropagatorConfig pc = propagator_config(s);
        const Evolution e = evolve_unitary(ref, psi0, times, pc, obs, want_r);
        TimeSeries rs = e.series;
        if (want_r) rs.add_channel("squeeze_r", squeeze_channel(e.snapshots, theta));
        for (const auto& o : s.observables) {
            const auto& a = r.series.channel(o);
            const auto& b = rs.channel(o);
            double m = 0.0;
            for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
            r.summary["max_abs_diff_" + o] = m;
        }
        r.series.merge(rs, "ref_");
    }
    r.series.validate();
    for (const auto& name : r.series.names()) r.summary["final_" + name] = r.series.channel(name).back();

    for (const auto& b : s.wigner) {
        double p = 0.0;
        const auto st = branch_state(*r.final_state, b, theta, p);
        r.summary["probability_" + b] = p;
        if (!st) {
            r.warnings.push_back("Wigner branch " + b + " has negligible probability; skipped");
            continue;
        }
        WignerGrid g = wigner(*st, GridSpec::for_state(*st, s.wigner_points));
        for (const auto& w : g.warnings) r.warnings.push_back("Wigner " + b + ": " + w);
        g.metadata["branch"] = b;
        g.metadata["probability"] = p;
        g.metadata["scenario"] = s.name;
        g.metadata["version"] = version();
        g.metadata["resolved"] = s.resolved();
        const auto neg = wigner_negativity(g);
        r.summary["wigner_min_" + b] = neg.min_value;
        r.summary["negative_volume_" + b] = neg.negative_volume;
        r.wigner.emplace_back(b, std::move(g));
    }

    r.metadata["numerics"] = {{"method", s.decoherence ? std::string("rk4 (lindblad)") : s.method},
                              {"dt", r.evolution.dt_used},
                              {"steps", r.evolution.steps},
                              {"cutoff", s.cutoff}};
    r.metadata["warnings"] = r.warnings;
    r.series.metadata = r.metadata;
    return r;
}

std::vector<fs::path> write_outputs(const RunResult& r, const Scenario& s, const fs::path& dir,
                                    const std::string& format) {
    if (format != "csv" && format != "json") throw ValidationError("format must be csv or json");
    std::vector<fs::path> out;
    const json summary = {{"metadata", r.metadata}, {"summary", r.summary}};
    const fs::path sp = dir / (s.name + ".summary.json");
    write_atomic(sp, summary.dump(2) + "\n");
    out.push_back(sp);
    if (r.metadata.value("dry_run", false)) return out;
    if (format == "csv") {
        const fs::path p = dir / (s.name + ".csv");
        write_atomic(p, r.series.to_csv());
        out.push_back(p);
    } else {
        const fs::path p = dir / (s.name + ".json");
        json j = r.series.to_json();
        j["summary"] = r.summary;
        write_atomic(p, j.dump(2) + "\n");
        out.push_back(p);
    }
    for (const auto& [b, g] : r.wigner) {
        const std::string stem = s.name + ".wigner_" + branch_file_tag(b);
        write_atomic(dir / (stem + ".csv"), g.to_csv());
        write_atomic(dir / (stem + ".ppm"), g.to_ppm());
        out.push_back(dir / (stem + ".csv"));
        out.push_back(dir / (stem + ".ppm"));
    }
    return out;
}

// ---------------------------------------------------------------- sweep

SweepAxis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("axis must look like param=v1,v2,... unit");
    SweepAxis a;
    a.param = text.substr(0, eq);
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(eq + 1));
    for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
    if (parts.empty()) throw ValidationError("axis " + a.param + " has no values");
    for (const auto& p : parts) a.values.push_back(parse_quantity(p));
    // a trailing unit applies to bare numbers
    const std::string unit = a.values.back().unit;
    for (auto& v : a.values)
        if (v.unit.empty()) v.unit = unit;
    return a;
}

std::string SweepResult::to_csv() const {
    std::ostringstream os;
    std::istringstream meta(metadata.dump(2));
    for (std::string line; std::getline(meta, line);) os << "# " << line << "\n";
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt17(row[i]);
        os << "\n";
    }
    return os.str();
}

SweepResult run_sweep(const Scenario& base, const std::vector<SweepAxis>& axes, int threads) {
    if (axes.empty() || axes.size() > 2) throw ValidationError("sweep needs one or two axes");
    Scenario b = base;
    b.sweep = axes;
    b.validate();
    b.sweep.clear();

    std::vector<std::vector<std::pair<std::string, Quantity>>> points{{}};
    for (const auto& ax : axes) {
        std::vector<std::vector<std::pair<std::string, Quantity>>> next;
        for (const auto& p : points)
            for (const auto& v : ax.values) {
                auto q2 = p;
                q2.emplace_back(ax.param, v);
                next.push_back(std::move(q2));
            }
        points = std::move(next);
    }

    std::vector<Scenario> jobs;
    for (size_t i = 0; i < points.size(); ++i) {
        Scenario s = b;
        s.name = base.name + "_" + std::to_string(i);
        for (const auto& [k, v] : points[i]) {
            if (contains(kRateKeys, k)) {
                if (!s.decoherence) s.decoherence = DecoherenceSpec{};
                (k == "kappa" ? s.decoherence->kappa : k == "gamma1" ? s.decoherence->gamma1 : s.decoherence->gamma_phi) = v;
            } else {
                s.set(k, v);
            }
        }
        jobs.push_back(std::move(s));
    }

    SweepResult out;
    out.runs.resize(jobs.size());
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto worker = [&] {
        for (size_t i; (i = next++) < jobs.size();) {
            try {
                out.runs[i] = run_scenario(jobs[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                next = jobs.size();
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    for (const auto& ax : axes) out.axes.push_back(ax.param);
    out.columns = out.axes;
    std::vector<std::string> keys;
    for (const auto& [k, v] : out.runs.front().summary.items())
        if (v.is_number()) keys.push_back(k);
    out.columns.insert(out.columns.end(), keys.begin(), keys.end());
    for (size_t i = 0; i < jobs.size(); ++i) {
        std::vector<double> row;
        for (const auto& [k, v] : points[i])
            row.push_back(contains(kRateKeys, k) ? to_si(v, Dim::Rate, base.decoherence && base.decoherence->angular)
                                                 : to_si(v, param_dims().at(k)));
        for (const auto& k : keys) {
            const auto& sm = out.runs[i].summary;
            row.push_back(sm.contains(k) && sm[k].is_number() ? sm[k].get<double>() : std::nan(""));
        }
        out.rows.push_back(std::move(row));
    }
    out.metadata = {{"version", version()},
                    {"scenario", base.name},
                    {"base", b.resolved()},
                    {"axes", out.axes},
                    {"units", "axis values in SI (frequencies rad/s, rates 1/s)"}};
    return out;
}

}  // namespace mpq
