#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "dirac/error.hpp"
#include "dirac/flows.hpp"

using namespace dirac;

namespace {

using Q = Rational;
const Variables r4{"q1", "p1", "q2", "p2"};
const double two_pi = 6.283185307179586;

ExprMatrix canonical(const Variables& v) {
    ExprMatrix pi(v.size(), v.size(), ScalarExpr(v));
    for (std::size_t i = 0; i + 1 < v.size(); i += 2) {
        pi(i, i + 1) = ScalarExpr::constant(v, Q(1));
        pi(i + 1, i) = ScalarExpr::constant(v, Q(-1));
    }
    return pi;
}

ConstraintSystem linear_system() {
    return ConstraintSystem(canonical(r4), {parse_expr("q2", r4).num(), parse_expr("p2", r4).num()}, {});
}

ConstraintSystem curved_system() {
    return ConstraintSystem(canonical(r4), {parse_expr("q2 - q1^2", r4).num(), parse_expr("p2 - p1", r4).num()}, {});
}

const ScalarExpr energy = parse_expr("(q1^2 + p1^2 + q2^2 + p2^2)/2", r4);

double drift_ratio(const HamiltonianFlow& fl, const std::vector<double>& x0, double dt, Method m) {
    FlowConfig a;
    a.step_size = dt;
    a.duration = two_pi;
    a.method = m;
    FlowConfig b = a;
    b.step_size = dt / 2;
    return integrate(fl, x0, a).max_energy_drift() / integrate(fl, x0, b).max_energy_drift();
}

}  // namespace

TEST_CASE("vector field examples") {
    const Variables r2{"q", "p"};
    const ConstraintSystem free(canonical(r2), {}, {});
    const auto v = vector_field_numeric(free, parse_expr("(q^2 + p^2)/2", r2), {0.3, -1.5});
    CHECK(v[0] == doctest::Approx(-1.5));
    CHECK(v[1] == doctest::Approx(-0.3));

    const auto w = vector_field_numeric(linear_system(), energy, {1, 0, 0, 0});
    CHECK(w == std::vector<double>{0, -1, 0, 0});

    CHECK_THROWS_AS(vector_field_numeric(curved_system(), energy, {-0.5, 0, 0.25, 0}), NearSingularConstraintMatrix);
    CHECK_NOTHROW(vector_field_numeric(curved_system(), energy, {0.2, 0, 0.04, 0}));

    const ConstraintSystem first(canonical(r4), {parse_expr("q2", r4).num()}, {});
    CHECK_THROWS_AS(HamiltonianFlow(first, energy), SecondClassViolated);
}

TEST_CASE("tangency of the Dirac hamiltonian field") {
    CHECK(HamiltonianFlow(linear_system(), energy).tangent());
    CHECK(HamiltonianFlow(curved_system(), energy).tangent());
    CHECK(HamiltonianFlow(curved_system(), parse_expr("q1^3*p2 + q2", r4)).tangent());
}

TEST_CASE("constrained oscillator follows the circular solution") {
    const HamiltonianFlow fl(linear_system(), energy);
    FlowConfig cfg;
    cfg.step_size = 1e-3;
    cfg.duration = two_pi;
    cfg.report_every = 100;
    const auto tr = integrate(fl, {1, 0, 0, 0}, cfg);
    for (std::size_t r = 0; r < tr.times.size(); ++r) {
        const double t = tr.times[r];
        CHECK(std::abs(tr.states[r][0] - std::cos(t)) < 1e-6);
        CHECK(std::abs(tr.states[r][1] + std::sin(t)) < 1e-6);
    }
    CHECK(tr.times.back() == doctest::Approx(two_pi));
    CHECK(std::abs(tr.states.back()[0] - 1) < 1e-6);
    CHECK(std::abs(tr.states.back()[1]) < 1e-6);
    CHECK(tr.max_constraint_norm() < 1e-12);
    for (std::size_t r = 1; r < tr.times.size(); ++r) CHECK(tr.times[r] > tr.times[r - 1]);
}

TEST_CASE("energy drift order") {
    // nonlinear constrained oscillator on q2 = q1^2, p2 = p1
    const HamiltonianFlow fl(curved_system(), energy);
    const std::vector<double> x0{0.2, 0, 0.04, 0};
    const double rk4 = drift_ratio(fl, x0, 0.01, Method::RK4);
    CHECK(rk4 >= 12);
    CHECK(rk4 <= 20);
    const double mid = drift_ratio(fl, x0, 0.01, Method::Midpoint);
    CHECK(mid >= 3);
    CHECK(mid <= 5);
    // on the linear oscillator the RK4 energy error is O(h^5)
    const double lin = drift_ratio(HamiltonianFlow(linear_system(), energy), {1, 0, 0, 0}, 0.05, Method::RK4);
    CHECK(lin == doctest::Approx(32).epsilon(0.05));
}

TEST_CASE("Casimirs are conserved") {
    const Variables xyz{"x", "y", "z"};
    ExprMatrix so3(3, 3, ScalarExpr(xyz));
    const char* upper[] = {"z", "-y", "x"};
    std::size_t k = 0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) {
            so3(i, j) = parse_expr(upper[k++], xyz);
            so3(j, i) = -so3(i, j);
        }
    const ConstraintSystem free(so3, {}, {});
    const ScalarExpr h = parse_expr("x^2/2 + y^2/3 + z^2/5", xyz);
    const ScalarExpr cas = parse_expr("x^2 + y^2 + z^2", xyz);
    const HamiltonianFlow fl(free, h);
    ScalarExpr along(xyz);
    for (std::size_t i = 0; i < 3; ++i) along = along + cas.differentiate(i) * fl.generator()[i];
    CHECK(along.is_zero());
    FlowConfig cfg;
    cfg.step_size = 1e-2;
    cfg.duration = 5;
    const auto tr = integrate(fl, {1, 0.5, -0.25}, cfg);
    for (const auto& s : tr.states) CHECK(std::abs(s[0] * s[0] + s[1] * s[1] + s[2] * s[2] - 1.3125) < 1e-8);
}

TEST_CASE("integration preconditions and failures") {
    const HamiltonianFlow fl(linear_system(), energy);
    FlowConfig cfg;
    CHECK_THROWS_AS(integrate(fl, {1, 0, 0.1, 0}, cfg), NotOnConstraint);
    cfg.step_size = 0;
    CHECK_THROWS_AS(integrate(fl, {1, 0, 0, 0}, cfg), PreconditionError);

    const Variables r2{"q", "p"};
    const ConstraintSystem free(canonical(r2), {}, {});
    FlowConfig blow;
    blow.step_size = 0.1;
    blow.duration = 20;
    CHECK_THROWS_AS(integrate(free, parse_expr("q^2*p", r2), {1, 1}, blow), StepRejected);

    FlowConfig sing;
    sing.step_size = 0.01;
    sing.duration = 1;
    sing.singular_threshold = 0.05;  // det c = (1 + 2 q1)^2 = 0.04 at the start
    CHECK_THROWS_AS(integrate(curved_system(), energy, {-0.4, 0, 0.16, 0}, sing), NearSingularConstraintMatrix);
}

TEST_CASE("CSV export") {
    const HamiltonianFlow fl(linear_system(), energy);
    FlowConfig cfg;
    cfg.step_size = 0.1;
    cfg.duration = 1;
    cfg.report_every = 3;
    const auto tr = integrate(fl, {1, 0, 0, 0}, cfg);
    CHECK(tr.times.size() == 5);  // 0, 3, 6, 9, 10
    std::ostringstream os;
    write_csv(os, tr);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x1,x2,x3,x4,H,constraint_norm");
    std::size_t r = 0;
    while (std::getline(in, line)) {
        std::vector<double> vals;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
        REQUIRE(vals.size() == 7);
        CHECK(vals[0] == tr.times[r]);
        for (std::size_t i = 0; i < 4; ++i) CHECK(vals[1 + i] == tr.states[r][i]);
        CHECK(vals[5] == tr.h_values[r]);
        ++r;
    }
    CHECK(r == tr.times.size());
}
