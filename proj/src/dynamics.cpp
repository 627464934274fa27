#include "mpq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Sparse>

namespace mpq {

using SpMat = Eigen::SparseMatrix<cplx>;

std::string method_name(Method m) {
    switch (m) {
        case Method::MidpointExponential: return "midpoint-exponential";
        case Method::Magnus4: return "magnus4";
        case Method::Rk4: return "rk4";
    }
    return "unknown";
}

Method parse_method(const std::string& s) {
    if (s == "midpoint-exponential" || s == "midpoint") return Method::MidpointExponential;
    if (s == "magnus4") return Method::Magnus4;
    if (s == "rk4") return Method::Rk4;
    throw InvalidArgument("unknown propagation method '" + s + "'");
}

namespace {

double inf_norm(const Mat& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

void check_times(const std::vector<double>& times) {
    if (times.empty()) throw InvalidArgument("time grid is empty");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw InvalidArgument("time grid must be strictly increasing");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Number of equal substeps covering `span` with steps no longer than dt.
long substeps(double span, double dt) {
    return std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
}

class Stepper {
public:
    Stepper(const HamiltonianModel& h, Method m) : h_(h), m_(m) {}

    void step(double t, double dt, Mat& psi) {
        switch (m_) {
            case Method::MidpointExponential:
                h_.matrix_at(t + dt / 2.0, H1_);
                psi = expmv_block(-I * dt * H1_, psi);
                break;
            case Method::Magnus4: {
                static const double r3 = std::sqrt(3.0);
                const double c1 = 0.5 - r3 / 6.0, c2 = 0.5 + r3 / 6.0;
                const double a1 = 0.25 - r3 / 6.0, a2 = 0.25 + r3 / 6.0;
                h_.matrix_at(t + c1 * dt, H1_);
                h_.matrix_at(t + c2 * dt, H2_);
                A_ = a2 * H1_ + a1 * H2_;
                psi = expmv_block(-I * dt * A_, psi);
                A_ = a1 * H1_ + a2 * H2_;
                psi = expmv_block(-I * dt * A_, psi);
                break;
            }
            case Method::Rk4: {
                h_.matrix_at(t, H1_);
                Mat k1 = -I * (H1_ * psi);
                h_.matrix_at(t + dt / 2.0, H2_);
                Mat k2 = -I * (H2_ * (psi + 0.5 * dt * k1));
                Mat k3 = -I * (H2_ * (psi + 0.5 * dt * k2));
                h_.matrix_at(t + dt, H1_);
                Mat k4 = -I * (H1_ * (psi + dt * k3));
                psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                break;
            }
        }
    }

private:
    const HamiltonianModel& h_;
    Method m_;
    Mat H1_, H2_, A_;
};

struct Recorder {
    std::vector<Observable> obs;
    std::vector<std::string> names;
    std::vector<bool> hermitian;
    std::vector<std::vector<double>> values;

    explicit Recorder(const std::vector<Observable>& o) : obs(o) {
        for (const auto& ob : obs) {
            bool herm = ob.op.is_hermitian(1e-12);
            hermitian.push_back(herm);
            if (herm) {
                names.push_back(ob.name);
            } else {
                names.push_back(ob.name + ".re");
                names.push_back(ob.name + ".im");
            }
        }
        values.resize(names.size());
    }

    void record(const QuantumState& s) {
        if (s.is_pure()) {
            size_t k = 0;
            for (size_t i = 0; i < obs.size(); ++i) {
                cplx v = expectation(obs[i].op, s);
                values[k++].push_back(v.real());
                if (!hermitian[i]) values[k++].push_back(v.imag());
            }
        } else {
            record_density(s.density());
        }
    }

    void record_density(const Mat& rho) {
        size_t k = 0;
        for (size_t i = 0; i < obs.size(); ++i) {
            cplx v = (obs[i].op.matrix().cwiseProduct(rho.transpose())).sum();
            values[k++].push_back(v.real());
            if (!hermitian[i]) values[k++].push_back(v.imag());
        }
    }

    TimeSeries series(const std::vector<double>& times) const {
        TimeSeries ts(times);
        for (size_t i = 0; i < names.size(); ++i) ts.add_channel(names[i], values[i]);
        return ts;
    }
};

Evolution run_unitary_once(const HamiltonianModel& h, const QuantumState& psi0, const std::vector<double>& times,
                           Method method, double dt, const std::vector<Observable>& observables, bool keep) {
    Evolution ev;
    Recorder rec(observables);
    const HilbertSpace& sp = psi0.space();
    double drift = 0.0;
    auto emit = [&](const Vec& v) {
        drift = std::max(drift, std::abs(v.squaredNorm() - 1.0));
        Vec u = v / v.norm();
        auto s = QuantumState::pure(u, sp);
        rec.record(s);
        if (keep) ev.snapshots.push_back(std::move(s));
    };

    if (h.is_static() && method != Method::Rk4) {
        Eigen::SelfAdjointEigenSolver<Mat> es(h.static_part().matrix());
        const Mat& V = es.eigenvectors();
        Vec c0 = V.adjoint() * psi0.vector();
        for (double t : times) {
            Vec ph = (-I * (t - times.front()) * es.eigenvalues().cast<cplx>()).array().exp();
            emit(V * (ph.cwiseProduct(c0)));
        }
        ev.dt_used = 0.0;
    } else {
        Stepper st(h, method);
        Mat psi = psi0.vector();
        emit(psi.col(0));
        for (size_t i = 1; i < times.size(); ++i) {
            const double span = times[i] - times[i - 1];
            const long n = substeps(span, dt);
            const double step = span / n;
            for (long k = 0; k < n; ++k) st.step(times[i - 1] + k * step, step, psi);
            ev.steps += n;
            emit(psi.col(0));
        }
        ev.dt_used = dt;
    }
    ev.norm_drift = drift;
    ev.series = rec.series(times);
    return ev;
}

double channel_diff(const TimeSeries& a, const TimeSeries& b, const std::string& name) {
    const auto& x = a.channel(name);
    const auto& y = b.channel(name);
    double d = 0.0;
    for (size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
}

}  // namespace

double default_dt(const HamiltonianModel& h) {
    Mat m;
    h.matrix_at(0.0, m);
    const double scale = std::max(h.max_frequency(), inf_norm(m));
    if (scale == 0.0) return 1.0;
    return (kTwoPi / scale) / 400.0;
}

// ---------------------------------------------------------------- time series

TimeSeries::TimeSeries(std::vector<double> times) : times_(std::move(times)) { check_times(times_); }

const std::vector<double>& TimeSeries::channel(const std::string& name) const {
    for (size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return values_[i];
    throw InvalidArgument("TimeSeries: no channel '" + name + "'");
}

bool TimeSeries::has(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

void TimeSeries::add_channel(const std::string& name, std::vector<double> values) {
    if (values.size() != times_.size()) throw DimensionMismatch("TimeSeries: channel length vs grid");
    if (has(name)) throw InvalidArgument("TimeSeries: duplicate channel '" + name + "'");
    names_.push_back(name);
    values_.push_back(std::move(values));
}

std::optional<double> TimeSeries::convergence(const std::string& name) const {
    auto it = convergence_.find(name);
    if (it == convergence_.end()) return std::nullopt;
    return it->second;
}

void TimeSeries::merge(const TimeSeries& other, const std::string& prefix) {
    if (other.times_ != times_) throw DimensionMismatch("TimeSeries::merge: grids differ");
    for (size_t i = 0; i < other.names_.size(); ++i) {
        add_channel(prefix + other.names_[i], other.values_[i]);
        if (auto c = other.convergence(other.names_[i])) set_convergence(prefix + other.names_[i], *c);
    }
}

std::string TimeSeries::to_csv() const {
    std::ostringstream os;
    if (!metadata.is_null()) {
        std::istringstream meta(metadata.dump(2));
        for (std::string line; std::getline(meta, line);) os << "# " << line << "\n";
    }
    os << "t";
    for (const auto& n : names_) os << "," << n;
    std::vector<std::string> err;
    for (const auto& n : names_)
        if (convergence_.count(n)) err.push_back(n);
    for (const auto& n : err) os << ",err_" << n;
    os << "\n";
    for (size_t r = 0; r < times_.size(); ++r) {
        os << fmt(times_[r]);
        for (const auto& v : values_) os << "," << fmt(v[r]);
        for (const auto& n : err) os << "," << fmt(convergence_.at(n));
        os << "\n";
    }
    return os.str();
}

nlohmann::json TimeSeries::to_json() const {
    nlohmann::json j;
    j["metadata"] = metadata;
    j["times"] = times_;
    for (size_t i = 0; i < names_.size(); ++i) j["channels"][names_[i]] = values_[i];
    for (const auto& [k, v] : convergence_) j["convergence"][k] = v;
    return j;
}

void TimeSeries::validate() const {
    check_times(times_);
    for (size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].rfind("P_", 0) != 0) continue;
        for (double v : values_[i])
            if (v < -1e-9 || v > 1.0 + 1e-9)
                throw ValidationError("TimeSeries: probability channel '" + names_[i] + "' out of range");
    }
}

// ---------------------------------------------------------------- unitary

Evolution evolve_unitary(const HamiltonianModel& h, const QuantumState& psi0, const std::vector<double>& times,
                         const PropagatorConfig& cfg, const std::vector<Observable>& observables,
                         bool keep_snapshots) {
    check_times(times);
    if (!psi0.is_pure()) throw InvalidArgument("evolve_unitary: initial state must be pure");
    require_same_space(h.space(), psi0.space(), "evolve_unitary");
    for (const auto& o : observables) require_same_space(h.space(), o.op.space(), "evolve_unitary observable");
    double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(h);

    Evolution ev = run_unitary_once(h, psi0, times, cfg.method, dt, observables, keep_snapshots);
    const bool exact = h.is_static() && cfg.method != Method::Rk4;
    if (cfg.halving_check && !exact) {
        for (int k = 0; k < cfg.max_halvings; ++k) {
            dt /= 2.0;
            Evolution fine = run_unitary_once(h, psi0, times, cfg.method, dt, observables, keep_snapshots);
            double worst = 0.0;
            for (const auto& n : fine.series.names()) {
                double d = channel_diff(ev.series, fine.series, n);
                fine.series.set_convergence(n, d);
                worst = std::max(worst, d);
            }
            ev = std::move(fine);
            if (worst < cfg.halving_tol) break;
            if (k == cfg.max_halvings - 1) {
                std::ostringstream os;
                os << "observables still change by " << worst << " after " << cfg.max_halvings
                   << " halvings (dt = " << dt << " s)";
                throw ConvergenceFailure("evolve_unitary: step halving did not converge", os.str());
            }
        }
    } else if (exact) {
        for (const auto& n : ev.series.names()) ev.series.set_convergence(n, 0.0);
    }
    if (ev.norm_drift > cfg.max_norm_drift) {
        std::ostringstream os;
        os << "norm drift " << ev.norm_drift << " > " << cfg.max_norm_drift << " with method "
           << method_name(cfg.method) << ", dt = " << ev.dt_used << " s, steps = " << ev.steps;
        throw ConvergenceFailure("evolve_unitary: norm drift exceeded", os.str());
    }
    ev.series.metadata["method"] = exact ? "exact-static" : method_name(cfg.method);
    ev.series.metadata["dt"] = ev.dt_used;
    ev.series.metadata["norm_drift"] = ev.norm_drift;
    return ev;
}

Mat propagate_block(const HamiltonianModel& h, Mat block, double t0, double t1, Method method, double dt) {
    if (block.rows() != h.dim()) throw DimensionMismatch("propagate_block: rows vs model dimension");
    if (h.is_static() && method != Method::Rk4) return expm_hermitian(h.static_part().matrix(), t1 - t0) * block;
    if (dt <= 0.0) dt = default_dt(h);
    Stepper st(h, method);
    const long n = substeps(t1 - t0, dt);
    const double step = (t1 - t0) / n;
    for (long k = 0; k < n; ++k) st.step(t0 + k * step, step, block);
    return block;
}

// ---------------------------------------------------------------- Lindblad

void LindbladModel::validate() const {
    for (const auto& c : channels) {
        if (!(c.rate >= 0.0) || !std::isfinite(c.rate))
            throw InvalidArgument("LindbladModel: rate for '" + c.name + "' must be finite and >= 0");
        require_same_space(hamiltonian.space(), c.op.space(), "LindbladModel channel");
    }
}

LindbladModel standard_lindblad(const HamiltonianModel& h, double gamma1, double gamma_phi, double kappa) {
    const int N = h.space().dims.at(1);
    auto j = joint_operators(N, 1);
    LindbladModel m{h, {}};
    m.channels.push_back({"gamma1", j.sm, gamma1});
    m.channels.push_back({"gamma_phi", j.sz, gamma_phi / 2.0});
    m.channels.push_back({"kappa", j.a, kappa});
    m.validate();
    return m;
}

namespace {

class LindbladRhs {
public:
    explicit LindbladRhs(const LindbladModel& m) {
        Mat heff = m.hamiltonian.static_part().matrix();
        for (const auto& c : m.channels) {
            if (c.rate == 0.0) continue;
            const Mat& L = c.op.matrix();
            heff -= (0.5 * I * c.rate) * (L.adjoint() * L);
            Ls_.push_back(L.sparseView());
            Lds_.push_back(Mat(L.adjoint()).sparseView());
            rates_.push_back(c.rate);
        }
        heff_ = heff.sparseView();
        for (const auto& t : m.hamiltonian.terms()) {
            terms_.push_back(t.op.matrix().sparseView());
            coeffs_.push_back(&t.coeff);
        }
    }

    void operator()(double t, const Mat& rho, Mat& out) {
        X_.noalias() = heff_ * rho;
        for (size_t k = 0; k < terms_.size(); ++k) X_.noalias() += (*coeffs_[k])(t) * (terms_[k] * rho);
        out.noalias() = -I * X_;
        out += out.adjoint().eval();
        for (size_t k = 0; k < Ls_.size(); ++k) {
            Y_.noalias() = Ls_[k] * rho;
            out.noalias() += rates_[k] * (Y_ * Lds_[k]);
        }
    }

private:
    SpMat heff_;
    std::vector<SpMat> terms_, Ls_, Lds_;
    std::vector<const Coefficient*> coeffs_;
    std::vector<double> rates_;
    Mat X_, Y_;
};

double min_eigenvalue(const Mat& rho) {
    Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Trace-one copy with eigenvalues below zero clipped, so integrator noise does not fail
// state validation.
QuantumState clipped_state(const Mat& rho, const HilbertSpace& sp) {
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    ev /= ev.sum();
    Mat r = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    r = 0.5 * (r + r.adjoint()).eval();
    return QuantumState::mixed(r, sp);
}

}  // namespace

Evolution evolve_lindblad(const LindbladModel& m, const QuantumState& rho0, const std::vector<double>& times,
                          const LindbladConfig& cfg, const std::vector<Observable>& observables,
                          bool keep_snapshots) {
    check_times(times);
    m.validate();
    require_same_space(m.hamiltonian.space(), rho0.space(), "evolve_lindblad");
    const HilbertSpace& sp = rho0.space();
    const double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(m.hamiltonian);

    LindbladRhs rhs(m);
    Evolution ev;
    Recorder rec(observables);
    Mat rho = rho0.density();
    const cplx tr0 = rho.trace();
    Mat k1, k2, k3, k4;
    double min_eig = 1.0;

    auto emit = [&](double t) {
        double drift = std::abs(rho.trace() - tr0);
        ev.trace_drift = std::max(ev.trace_drift, drift);
        if (drift > cfg.max_trace_drift) {
            std::ostringstream os;
            os << "trace drift " << drift << " at t = " << t << " s, dt = " << dt;
            throw ConvergenceFailure("evolve_lindblad: trace drift exceeded", os.str());
        }
        if (cfg.check_positivity) {
            double e = min_eigenvalue(rho);
            min_eig = std::min(min_eig, e);
            if (e < cfg.positivity_floor) {
                std::ostringstream os;
                os << "eigenvalue " << e << " at t = " << t << " s, dt = " << dt;
                throw ConvergenceFailure("evolve_lindblad: density matrix lost positivity", os.str());
            }
        }
        rec.record_density(rho / rho.trace());
        if (keep_snapshots) ev.snapshots.push_back(clipped_state(rho, sp));
    };

    emit(times.front());
    for (size_t i = 1; i < times.size(); ++i) {
        const double span = times[i] - times[i - 1];
        const long n = substeps(span, dt);
        const double h = span / n;
        for (long k = 0; k < n; ++k) {
            const double t = times[i - 1] + k * h;
            rhs(t, rho, k1);
            rhs(t + h / 2, rho + (h / 2) * k1, k2);
            rhs(t + h / 2, rho + (h / 2) * k2, k3);
            rhs(t + h, rho + h * k3, k4);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            rho = 0.5 * (rho + rho.adjoint()).eval();
        }
        ev.steps += n;
        emit(times[i]);
    }
    ev.dt_used = dt;
    ev.min_eigenvalue = cfg.check_positivity ? min_eig : NAN;
    ev.series = rec.series(times);
    ev.series.metadata["method"] = "lindblad-rk4";
    ev.series.metadata["dt"] = dt;
    ev.series.metadata["trace_drift"] = ev.trace_drift;
    return ev;
}

// ---------------------------------------------------------------- state functions

double fidelity(const QuantumState& a, const QuantumState& b) {
    require_same_space(a.space(), b.space(), "fidelity");
    double f;
    if (a.is_pure() && b.is_pure()) {
        f = std::norm(a.vector().dot(b.vector()));
    } else if (a.is_pure() || b.is_pure()) {
        const Vec& psi = a.is_pure() ? a.vector() : b.vector();
        Mat rho = a.is_pure() ? b.density() : a.density();
        f = psi.dot(rho * psi).real();
    } else {
        Eigen::SelfAdjointEigenSolver<Mat> es(a.density());
        Vec sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cplx>();
        Mat sr = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint();
        Mat m = sr * b.density() * sr;
        m = 0.5 * (m + m.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Mat> em(m, Eigen::EigenvaluesOnly);
        double s = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
        f = s * s;
    }
    return std::clamp(f, 0.0, 1.0);
}

cplx expectation(const Operator& op, const QuantumState& s) {
    require_same_space(op.space(), s.space(), "expectation");
    if (s.is_pure()) return s.vector().dot(op.matrix() * s.vector());
    return (op.matrix() * s.density()).trace();
}

Observable standard_observable(const std::string& name, int cutoff) {
    auto j = joint_operators(cutoff, 1);
    const auto q = qubit_operators();
    const Operator ir = identity(cutoff);
    if (name == "P_g") return {name, tensor(Operator(Mat(ket_g() * ket_g().adjoint())), ir)};
    if (name == "P_e") return {name, tensor(Operator(Mat(ket_e() * ket_e().adjoint())), ir)};
    if (name == "n") return {name, j.num};
    if (name == "sx") return {name, j.sx};
    if (name == "sy") return {name, j.sy};
    if (name == "sz") return {name, j.sz};
    if (name == "x") return {name, tensor(q.id, position_operator(cutoff))};
    if (name == "p") return {name, tensor(q.id, momentum_operator(cutoff))};
    if (name == "parity") return {name, tensor(q.id, parity_operator(cutoff))};
    throw InvalidArgument("unknown observable '" + name + "'");
}

std::vector<double> linspace(double a, double b, int count) {
    if (count < 1) throw InvalidArgument("linspace: count must be >= 1");
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = count == 1 ? a : a + (b - a) * i / (count - 1);
    return v;
}

}  // namespace mpq
