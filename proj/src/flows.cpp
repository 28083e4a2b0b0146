#include "dirac/flows.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "dirac/error.hpp"

namespace dirac {

double Trajectory::max_energy_drift() const {
    double m = 0;
    for (double h : h_values) m = std::max(m, std::abs(h - h_values.front()));
    return m;
}

double Trajectory::max_constraint_norm() const {
    double m = 0;
    for (double c : constraint_norms) m = std::max(m, c);
    return m;
}

HamiltonianFlow::HamiltonianFlow(const ConstraintSystem& cs, const ScalarExpr& h)
    : cs_(cs), h_(h), det_(ScalarExpr::constant(cs.variables(), Rational(1))) {
    if (!(h.variables() == cs.variables())) throw VariableSetMismatch("hamiltonian uses a different variable set");
    if (cs.count() > 0) {
        det_ = constraint_matrix(cs).det;
        if (det_.is_zero()) throw SecondClassViolated("constraint matrix is singular on the generic locus");
    }
    for (std::size_t i = 0; i < cs.ambient_dim(); ++i)
        field_.push_back(dirac_bracket(cs, ScalarExpr::variable(cs.variables(), i), h));
}

bool HamiltonianFlow::tangent() const {
    for (std::size_t i = 0; i < cs_.count(); ++i) {
        ScalarExpr s(cs_.variables());
        for (std::size_t j = 0; j < field_.size(); ++j) s = s + cs_.psi(i).differentiate(j) * field_[j];
        if (!s.is_zero()) return false;
    }
    return true;
}

std::vector<double> HamiltonianFlow::operator()(const std::vector<double>& x, double singular_threshold) const {
    if (x.size() != field_.size()) throw DimensionMismatch("state has the wrong length");
    if (cs_.count() > 0) {
        const double d = det_.evaluate(std::span<const double>(x));
        if (!(std::abs(d) >= singular_threshold))
            throw NearSingularConstraintMatrix("|det c| = " + std::to_string(std::abs(d)) + " below threshold");
    }
    std::vector<double> out;
    out.reserve(field_.size());
    for (const auto& f : field_) out.push_back(f.evaluate(std::span<const double>(x)));
    return out;
}

double HamiltonianFlow::energy(const std::vector<double>& x) const { return h_.evaluate(std::span<const double>(x)); }

double HamiltonianFlow::constraint_norm(const std::vector<double>& x) const {
    double m = 0;
    for (const auto& p : cs_.psis()) m = std::max(m, std::abs(p.evaluate(std::span<const double>(x))));
    return m;
}

std::vector<double> vector_field_numeric(const ConstraintSystem& cs, const ScalarExpr& h, const std::vector<double>& x,
                                         double singular_threshold) {
    return HamiltonianFlow(cs, h)(x, singular_threshold);
}

namespace {

std::vector<double> axpy(const std::vector<double>& x, double a, const std::vector<double>& k) {
    std::vector<double> r(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += a * k[i];
    return r;
}

}  // namespace

Trajectory integrate(const HamiltonianFlow& flow, const std::vector<double>& x0, const FlowConfig& cfg) {
    if (!(cfg.step_size > 0) || !(cfg.duration > 0)) throw PreconditionError("step size and duration must be positive");
    if (cfg.report_every == 0) throw PreconditionError("report_every must be at least 1");
    if (x0.size() != flow.generator().size()) throw DimensionMismatch("initial state has the wrong length");
    if (!(flow.constraint_norm(x0) < cfg.constraint_tolerance))
        throw NotOnConstraint("initial state violates the constraints by " + std::to_string(flow.constraint_norm(x0)));
    if (!flow.tangent()) throw ConsistencyFailure("Dirac hamiltonian field is not tangent to the constraint set");

    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.duration / cfg.step_size - 1e-9)));
    const double h = cfg.duration / static_cast<double>(steps);
    auto f = [&](const std::vector<double>& x) { return flow(x, cfg.singular_threshold); };

    Trajectory tr;
    auto record = [&](double t, const std::vector<double>& x) {
        tr.times.push_back(t);
        tr.states.push_back(x);
        tr.h_values.push_back(flow.energy(x));
        tr.constraint_norms.push_back(flow.constraint_norm(x));
    };
    std::vector<double> x = x0;
    record(0.0, x);
    for (std::size_t s = 1; s <= steps; ++s) {
        if (cfg.method == Method::RK4) {
            const auto k1 = f(x);
            const auto k2 = f(axpy(x, h / 2, k1));
            const auto k3 = f(axpy(x, h / 2, k2));
            const auto k4 = f(axpy(x, h, k3));
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        } else {
            x = axpy(x, h, f(axpy(x, h / 2, f(x))));
        }
        for (double v : x)
            if (!std::isfinite(v)) throw StepRejected("nonfinite state at step " + std::to_string(s));
        if (s % cfg.report_every == 0 || s == steps) record(static_cast<double>(s) * h, x);
    }
    return tr;
}

Trajectory integrate(const ConstraintSystem& cs, const ScalarExpr& h, const std::vector<double>& x0,
                     const FlowConfig& cfg) {
    return integrate(HamiltonianFlow(cs, h), x0, cfg);
}

void write_csv(std::ostream& os, const Trajectory& t) {
    const std::size_t m = t.states.empty() ? 0 : t.states.front().size();
    os << 't';
    for (std::size_t i = 1; i <= m; ++i) os << ",x" << i;
    os << ",H,constraint_norm\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (std::size_t r = 0; r < t.times.size(); ++r) {
        put(t.times[r]);
        for (double v : t.states[r]) {
            os << ',';
            put(v);
        }
        os << ',';
        put(t.h_values[r]);
        os << ',';
        put(t.constraint_norms[r]);
        os << '\n';
    }
}

}  // namespace dirac
