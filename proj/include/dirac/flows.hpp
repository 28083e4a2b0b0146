#pragma once

// Fixed-step integration of ẋⁱ = {xⁱ, H}_C, the Dirac-bracket hamiltonian
// field of a constraint system. All symbolic work happens once, up front;
// doubles only appear when the generator is evaluated.

#include <iosfwd>
#include <vector>

#include "dirac/constraints.hpp"

namespace dirac {

enum class Method { RK4, Midpoint };

struct FlowConfig {
    double step_size = 1e-3;
    double duration = 1.0;
    Method method = Method::RK4;
    std::size_t report_every = 1;
    double singular_threshold = 1e-9;    // minimum |det c(x)|
    double constraint_tolerance = 1e-9;  // on max |ψⁱ(x0)|
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<double> h_values;
    std::vector<double> constraint_norms;  // max |ψⁱ(x_t)|

    double max_energy_drift() const;
    double max_constraint_norm() const;
};

class HamiltonianFlow {
public:
    /// Builds the exact generator. Throws SecondClassViolated.
    HamiltonianFlow(const ConstraintSystem& cs, const ScalarExpr& h);

    const std::vector<ScalarExpr>& generator() const noexcept { return field_; }
    /// dψⁱ(X_H) ≡ 0 for every i.
    bool tangent() const;

    /// Throws NearSingularConstraintMatrix, DenominatorVanishes.
    std::vector<double> operator()(const std::vector<double>& x, double singular_threshold = 1e-9) const;
    double energy(const std::vector<double>& x) const;
    double constraint_norm(const std::vector<double>& x) const;

private:
    ConstraintSystem cs_;
    ScalarExpr h_;
    ScalarExpr det_;
    std::vector<ScalarExpr> field_;
};

std::vector<double> vector_field_numeric(const ConstraintSystem& cs, const ScalarExpr& h, const std::vector<double>& x,
                                         double singular_threshold = 1e-9);

/// The step is shrunk so that a whole number of steps covers the duration.
/// Throws NotOnConstraint, ConsistencyFailure (tangency), StepRejected and
/// whatever the generator throws.
Trajectory integrate(const ConstraintSystem& cs, const ScalarExpr& h, const std::vector<double>& x0,
                     const FlowConfig& cfg);
Trajectory integrate(const HamiltonianFlow& flow, const std::vector<double>& x0, const FlowConfig& cfg);

/// Header `t,x1,...,xm,H,constraint_norm`; values printed with %.17g.
void write_csv(std::ostream& os, const Trajectory& t);

}  // namespace dirac
