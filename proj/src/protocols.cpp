#include "mpq/protocols.hpp"

#include <algorithm>
#include <cmath>

namespace mpq {

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

Operator projector(const Vec& v) { return Operator(Mat(v * v.adjoint())); }

// Resonator part <q| psi for a qubit (x) resonator vector.
Vec qubit_component(const Vec& psi, const Vec& q, int N) {
    Vec out = Vec::Zero(N);
    for (int k = 0; k < 2; ++k) out += std::conj(q(k)) * psi.segment(k * N, N);
    return out;
}

Mat qubit_block(const Mat& rho, const Vec& q, int N) {
    Mat out = Mat::Zero(N, N);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out += std::conj(q(a)) * q(b) * rho.block(a * N, b * N, N, N);
    return out;
}

void require_joint(const HilbertSpace& s, const char* where) {
    if (s.subsystems() != 2 || s.dims[0] != 2)
        throw DimensionMismatch(std::string(where) + ": expected a qubit (x) resonator space, got " + s.str());
}

}  // namespace

cplx SqueezingTrajectory::lambda(double t) const {
    const double pre = factorial(n) * gbar;
    const double x = n * delta * t;
    if (std::abs(x) < 1e-8) return I * pre * t * (1.0 + I * x / 2.0);
    return pre * (std::exp(I * x) - 1.0) / (n * delta);
}

double SqueezingTrajectory::bound() const {
    if (delta == 0.0) return INFINITY;
    return 2.0 * factorial(n) * std::abs(gbar) / (n * std::abs(delta));
}

Operator qcs_unitary(cplx zeta, double theta, int cutoff, int n) {
    const auto d = dressed_basis(theta);
    return tensor(d.P_plus, generalized_squeeze(n, zeta, cutoff)) +
           tensor(d.P_minus, generalized_squeeze(n, -zeta, cutoff));
}

std::vector<MeasurementOutcome> measure_qubit(const QuantumState& joint, Basis basis, double theta) {
    require_joint(joint.space(), "measure_qubit");
    const int N = joint.space().dims[1];
    std::vector<std::pair<std::string, Vec>> proj;
    if (basis == Basis::Bare) {
        proj = {{"g", ket_g()}, {"e", ket_e()}};
    } else {
        const auto d = dressed_basis(theta);
        proj = {{"+", d.plus}, {"-", d.minus}};
    }
    std::vector<MeasurementOutcome> out;
    const HilbertSpace rs = HilbertSpace::single(N);
    for (const auto& [label, q] : proj) {
        MeasurementOutcome m;
        m.basis = basis;
        m.label = label;
        if (joint.is_pure()) {
            Vec r = qubit_component(joint.vector(), q, N);
            m.probability = r.squaredNorm();
            if (m.probability > 1e-14) m.state = QuantumState::pure(r / r.norm(), rs);
        } else {
            Mat r = qubit_block(joint.density(), q, N);
            m.probability = r.trace().real();
            if (m.probability > 1e-14) {
                r /= m.probability;
                m.state = QuantumState::mixed(Mat(0.5 * (r + r.adjoint())), rs);
            }
        }
        m.omitted = !m.state.has_value();
        out.push_back(std::move(m));
    }
    return out;
}

double cat_norm(double r, int sign) {
    return std::sqrt(2.0 * (1.0 + (sign >= 0 ? 1.0 : -1.0) / std::sqrt(std::cosh(2.0 * r))));
}

QuantumState cat_squeezed_state(cplx zeta, int sign, int cutoff, int n) {
    if (sign != 1 && sign != -1) throw InvalidArgument("cat_squeezed_state: sign must be +1 or -1");
    const Vec s1 = generalized_squeeze(n, zeta, cutoff).matrix().col(0);
    const Vec s2 = generalized_squeeze(n, -zeta, cutoff).matrix().col(0);
    if (n != 2) {
        // no closed-form norm; weight in the top quarter of the Fock space signals truncation
        const int top = cutoff / 4;
        const double leak = std::max(s1.tail(top).squaredNorm(), s2.tail(top).squaredNorm());
        if (leak > 1e-6)
            throw TruncationError("cat_squeezed_state: " + std::to_string(leak) +
                                  " of the squeezed-vacuum weight sits in the top quarter of the cutoff");
    }
    Vec v = s1 + static_cast<double>(sign) * s2;
    const double norm = v.norm();
    if (norm < 1e-12) throw InvalidArgument("cat_squeezed_state: the odd superposition vanishes at zeta = 0");
    if (n == 2 && std::abs(norm - cat_norm(std::abs(zeta), sign)) > 1e-6)
        throw TruncationError("cat_squeezed_state: norm " + std::to_string(norm) + " differs from N = " +
                              std::to_string(cat_norm(std::abs(zeta), sign)));
    return QuantumState::pure(v / norm, HilbertSpace::single(cutoff));
}

LogicalEncoding logical_encode(cplx c_plus, cplx c_minus, cplx zeta, int cutoff) {
    if (std::abs(std::norm(c_plus) + std::norm(c_minus) - 1.0) > 1e-10)
        throw InvalidArgument("logical_encode: |c+|^2 + |c-|^2 must be 1");
    const double theta = kTwoPi / 4.0;
    const auto d = dressed_basis(theta);
    const Vec q = c_plus * d.plus + c_minus * d.minus;
    const Vec psi0 = tensor(q, fock_ket(cutoff, 0));
    const Operator U = qcs_unitary(zeta, theta, cutoff);
    const auto joint = QuantumState::pure(U * psi0, HilbertSpace::qubit_resonator(cutoff));

    LogicalEncoding le;
    le.outcomes = measure_qubit(joint, Basis::Bare);
    const Vec pp = cat_squeezed_state(zeta, 1, cutoff).vector();
    const Vec pm = cat_squeezed_state(zeta, -1, cutoff).vector();
    le.plus_L = (pp + pm) / std::sqrt(2.0);
    le.minus_L = (pp - pm) / std::sqrt(2.0);
    const Vec sq = generalized_squeeze(2, zeta, cutoff).matrix().col(0);
    le.overlap_plus = std::norm(le.plus_L.dot(sq));
    for (const auto& o : le.outcomes) {
        if (o.omitted) {
            le.logical_fidelity.push_back(NAN);
            continue;
        }
        const double s = o.label == "g" ? 1.0 : -1.0;
        Vec ideal = c_plus * le.plus_L + s * c_minus * le.minus_L;
        ideal.normalize();
        le.logical_fidelity.push_back(std::norm(ideal.dot(o.state->vector())));
    }
    return le;
}

Operator controlled_squeeze(cplx zeta, int cutoff) {
    return tensor(projector(ket_g()), identity(cutoff)) +
           tensor(projector(ket_e()), generalized_squeeze(2, zeta, cutoff));
}

Operator controlled_displacement(cplx alpha, int cutoff) {
    return tensor(projector(ket_g()), identity(cutoff)) + tensor(projector(ket_e()), displacement(alpha, cutoff));
}

Operator qcd_unitary(cplx alpha, int cutoff) {
    const auto d = dressed_basis(kTwoPi / 4.0);
    return tensor(d.P_plus, displacement(alpha, cutoff)) + tensor(d.P_minus, displacement(-alpha, cutoff));
}

std::vector<MeasurementOutcome> phase_estimation_round(const Operator& controlled_u, const QuantumState& input,
                                                       const QubitRotation& rotation, int round) {
    require_joint(controlled_u.space(), "phase_estimation_round");
    const int N = controlled_u.space().dims[1];
    if (input.space() != HilbertSpace::single(N))
        throw DimensionMismatch("phase_estimation_round: input must live on the resonator space");
    const Mat& cu = controlled_u.matrix();
    if (cu.block(0, N, N, N).cwiseAbs().maxCoeff() > 1e-12 || cu.block(N, 0, N, N).cwiseAbs().maxCoeff() > 1e-12)
        throw InvalidArgument("phase_estimation_round: controlled-U must be block diagonal in the qubit basis");
    const Operator H = tensor(qubit_operators().hadamard, identity(N));
    Operator U = H * controlled_u * H;
    if (rotation) U = H * tensor(rotation(round), identity(N)) * controlled_u * H;
    const HilbertSpace js = HilbertSpace::qubit_resonator(N);
    if (input.is_pure()) return measure_qubit(QuantumState::pure(U * tensor(ket_g(), input.vector()), js), Basis::Bare);
    Mat rho = Mat::Zero(2 * N, 2 * N);
    rho.topLeftCorner(N, N) = input.density();
    rho = U.matrix() * rho * U.matrix().adjoint();
    return measure_qubit(QuantumState::mixed(Mat(0.5 * (rho + rho.adjoint())), js), Basis::Bare);
}

std::vector<PhaseRound> phase_estimation_rounds(const Operator& controlled_u, const QuantumState& input,
                                                const std::vector<std::string>& path,
                                                const QubitRotation& rotation) {
    std::vector<PhaseRound> out;
    QuantumState state = input;
    for (size_t k = 0; k < path.size(); ++k) {
        auto res = phase_estimation_round(controlled_u, state, rotation, static_cast<int>(k));
        PhaseRound pr;
        pr.p_g = res[0].probability;
        pr.p_e = res[1].probability;
        pr.mean = pr.p_g - pr.p_e;
        pr.variance = 1.0 - pr.mean * pr.mean;
        pr.followed = path[k];
        out.push_back(pr);
        auto it = std::find_if(res.begin(), res.end(), [&](const MeasurementOutcome& m) { return m.label == path[k]; });
        if (it == res.end()) throw InvalidArgument("phase_estimation_rounds: unknown outcome '" + path[k] + "'");
        if (it->omitted) break;
        state = *it->state;
    }
    return out;
}

Operator group_commutator_step(const Operator& h1, const Operator& h2, double tau) {
    require_same_space(h1.space(), h2.space(), "group_commutator_step");
    const Mat a = expm_hermitian(h1.matrix(), tau), b = expm_hermitian(h2.matrix(), tau);
    return {Mat(a * b * a.adjoint() * b.adjoint()), h1.space()};
}

Operator symmetric_sum_step(const Operator& h1, const Operator& h2, double tau) {
    require_same_space(h1.space(), h2.space(), "symmetric_sum_step");
    const Mat a = expm_hermitian(h1.matrix(), -tau / 2.0), b = expm_hermitian(h2.matrix(), -tau / 2.0);
    return {Mat(a * b * b * a), h1.space()};
}

// ---------------------------------------------------------------- synthesis

bool GeneratorSet::contains(const std::string& label) const {
    return std::any_of(members.begin(), members.end(), [&](const LabeledOperator& m) { return m.label == label; });
}

const Operator& GeneratorSet::get(const std::string& label) const {
    for (const auto& m : members)
        if (m.label == label) return m.op;
    throw UnsupportedTarget("generator set " + name + " has no member '" + label + "'");
}

Operator synthesis_target(const std::string& label, int cutoff) {
    const auto q = qubit_operators();
    const Operator x = position_operator(cutoff), p = momentum_operator(cutoff);
    const Operator x2 = x * x, p2 = p * p;
    const Operator id = identity(cutoff);
    if (label == "sx") return tensor(q.sx, id);
    if (label == "sy") return tensor(q.sy, id);
    if (label == "sz") return tensor(q.sz, id);
    if (label == "sx*x") return tensor(q.sx, x);
    if (label == "sy*x") return tensor(q.sy, x);
    if (label == "sz*x") return tensor(q.sz, x);
    if (label == "sx*p") return tensor(q.sx, p);
    if (label == "sy*p") return tensor(q.sy, p);
    if (label == "sz*p") return tensor(q.sz, p);
    if (label == "sz*x2") return tensor(q.sz, x2);
    if (label == "sz*p2") return tensor(q.sz, p2);
    if (label == "sz*(x2-p2)") return tensor(q.sz, x2 - p2);
    if (label == "sz*{x,p}") return tensor(q.sz, x * p + p * x);
    throw UnsupportedTarget("no synthesis rule for target '" + label + "'");
}

GeneratorSet generator_set(const std::string& name, int cutoff) {
    std::vector<std::string> labels{"sz*x", "sz*p", "sx", "sy", "sz"};
    if (name == "G2") {
        labels.push_back("sz*(x2-p2)");
        labels.push_back("sz*{x,p}");
    } else if (name != "G1") {
        throw InvalidArgument("unknown generator set '" + name + "' (expected G1 or G2)");
    }
    GeneratorSet g{name, {}};
    for (const auto& l : labels) g.members.push_back({l, synthesis_target(l, cutoff)});
    return g;
}

namespace {

using Kind = SynthesisNode::Kind;

SynthesisNode primitive(const std::string& label, const GeneratorSet& gens) {
    SynthesisNode n;
    n.kind = Kind::Primitive;
    n.label = label;
    n.effective = gens.get(label);
    return n;
}

// A B A^-1 B^-1: E = -i [E_A, E_B], order a + b.
SynthesisNode comm(const std::string& label, SynthesisNode a, SynthesisNode b) {
    SynthesisNode n;
    n.kind = Kind::Commutator;
    n.label = label;
    n.cost = 2 * (a.cost + b.cost);
    n.order = a.order + b.order;
    n.effective = cplx(0.0, -1.0) * commutator(a.effective, b.effective);
    n.children = {std::move(a), std::move(b)};
    return n;
}

// A B B A: E = 2 E_A + 2 E_B.
SynthesisNode sym(const std::string& label, SynthesisNode a, SynthesisNode b) {
    if (a.order != b.order) throw InvalidArgument("symmetric sum of nodes with different orders");
    SynthesisNode n;
    n.kind = Kind::Symmetric;
    n.label = label;
    n.cost = 2 * a.cost + 2 * b.cost;
    n.order = a.order;
    n.effective = 2.0 * a.effective + 2.0 * b.effective;
    n.children = {std::move(a), std::move(b)};
    return n;
}

SynthesisNode build(const std::string& t, const GeneratorSet& g) {
    if (g.contains(t)) return primitive(t, g);
    if (t == "sx*x") return comm(t, primitive("sy", g), primitive("sz*x", g));
    if (t == "sy*x") return comm(t, primitive("sz*x", g), primitive("sx", g));
    if (t == "sx*p") return comm(t, primitive("sy", g), primitive("sz*p", g));
    if (t == "sy*p") return comm(t, primitive("sz*p", g), primitive("sx", g));
    if (t == "sz*x2") return comm(t, build("sx*x", g), build("sy*x", g));
    if (t == "sz*p2") return comm("-sz*p2", build("sy*p", g), build("sx*p", g));
    if (t == "sz*(x2-p2)") return sym(t, build("sz*x2", g), build("sz*p2", g));
    if (t == "sz*{x,p}") return comm(t, build("sx*x", g), build("sy*p", g));
    throw UnsupportedTarget("no synthesis rule for target '" + t + "' from " + g.name);
}

std::vector<SynthesisStep> inverse(std::vector<SynthesisStep> s) {
    std::reverse(s.begin(), s.end());
    for (auto& st : s) st.sign = -st.sign;
    return s;
}

void append(std::vector<SynthesisStep>& out, const std::vector<SynthesisStep>& s) {
    out.insert(out.end(), s.begin(), s.end());
}

std::vector<SynthesisStep> flatten(const SynthesisNode& n) {
    if (n.kind == Kind::Primitive) return {{n.label, 1}};
    const auto a = flatten(n.children[0]), b = flatten(n.children[1]);
    std::vector<SynthesisStep> out;
    if (n.kind == Kind::Commutator) {
        // operator product A B A^-1 B^-1: B^-1 acts first
        append(out, inverse(b));
        append(out, inverse(a));
        append(out, b);
        append(out, a);
    } else {
        append(out, a);
        append(out, b);
        append(out, b);
        append(out, a);
    }
    return out;
}

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Primitive: return "primitive";
        case Kind::Commutator: return "commutator";
        case Kind::Symmetric: return "symmetric";
    }
    return "?";
}

}  // namespace

nlohmann::json SynthesisNode::to_json() const {
    nlohmann::json j{{"kind", kind_name(kind)}, {"label", label}, {"cost", cost}, {"order", order}};
    for (const auto& c : children) j["children"].push_back(c.to_json());
    return j;
}

Synthesis synthesis_cost(const std::string& target, const GeneratorSet& set) {
    const int N = set.members.at(0).op.space().dims.at(1);
    const Operator t = synthesis_target(target, N);
    Synthesis s;
    s.target = target;
    s.set = set.name;
    s.tree = build(target, set);
    s.cost = s.tree.cost;
    s.sequence = flatten(s.tree);
    // E is a real multiple of the target by construction
    const Mat& e = s.tree.effective.matrix();
    Eigen::Index r, c;
    t.matrix().cwiseAbs().maxCoeff(&r, &c);
    s.scale = (e(r, c) / t.matrix()(r, c)).real();
    if ((e - s.scale * t.matrix()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, e.cwiseAbs().maxCoeff()))
        throw Error("synthesis_cost: construction for '" + target + "' is not proportional to the target");
    return s;
}

Mat Synthesis::unitary(double tau, const GeneratorSet& gens) const {
    const int d = tree.effective.dim();
    Mat u = Mat::Identity(d, d);
    for (const auto& st : sequence) u = expm_hermitian(gens.get(st.label).matrix(), st.sign * tau) * u;
    return u;
}

Mat Synthesis::target_exponential(double tau) const {
    return expm_hermitian(tree.effective.matrix(), std::pow(tau, tree.order));
}

nlohmann::json Synthesis::to_json() const {
    nlohmann::json j{{"target", target}, {"set", set}, {"cost", cost}, {"scale", scale},
                     {"order", tree.order}, {"tree", tree.to_json()}};
    for (const auto& st : sequence) j["sequence"].push_back({{"label", st.label}, {"sign", st.sign}});
    return j;
}

}  // namespace mpq
