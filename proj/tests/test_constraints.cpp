#include "doctest.h"

#include "dirac/constraints.hpp"
#include "dirac/error.hpp"
#include "support.hpp"

using namespace dirac;

namespace {

using Q = Rational;
const Variables r4{"q1", "p1", "q2", "p2"};
const Variables r2{"q1", "p1"};
const Variables xyz{"x", "y", "z"};

ScalarExpr E(const char* s, const Variables& v = r4) { return parse_expr(s, v); }
Poly P(const char* s, const Variables& v = r4) { return parse_expr(s, v).num(); }

ExprMatrix canonical4() {
    ExprMatrix pi(4, 4, ScalarExpr(r4));
    pi(0, 1) = E("1");
    pi(1, 0) = E("-1");
    pi(2, 3) = E("1");
    pi(3, 2) = E("-1");
    return pi;
}

ExprMatrix dxdy(const Variables& v) {
    ExprMatrix pi(v.size(), v.size(), ScalarExpr(v));
    pi(0, 1) = ScalarExpr::constant(v, Q(1));
    pi(1, 0) = ScalarExpr::constant(v, Q(-1));
    return pi;
}

// (a, b, a², b) on ψ = (q2 - q1², p2 - p1), skipping a = -1/2
std::vector<Point> curved_probes(testgen::Gen& g, std::size_t count) {
    std::vector<Point> out;
    while (out.size() < count) {
        const Q a = g.small_rational(), b = g.small_rational();
        if (a == Q(-1, 2)) continue;
        out.push_back({a, b, a * a, b});
    }
    return out;
}

ConstraintSystem flat_system(testgen::Gen& g) {
    std::vector<Point> probes;
    for (int i = 0; i < 12; ++i) probes.push_back({g.small_rational(), g.small_rational(), Q(0), Q(0)});
    return ConstraintSystem(canonical4(), {P("q2"), P("p2")}, probes);
}

ConstraintSystem curved_system(testgen::Gen& g) {
    return ConstraintSystem(canonical4(), {P("q2 - q1^2"), P("p2 - p1")}, curved_probes(g, 12));
}

// Oracle for the induced bracket {q1, p1}_C: pull the symplectic form
// ω = π⁻¹ back along σ and invert the 2x2 result.
ScalarExpr pullback_oracle(const PolyMap& sigma) {
    // ω for the canonical π on R^4: ω = -π (π² = -1)
    ExprMatrix omega = canonical4();
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) omega(i, j) = -omega(i, j);
    const ExprMatrix j = sigma.jacobian();
    ScalarExpr w12(r2);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) w12 = w12 + j(a, 0) * sigma.pull(omega(a, b)) * j(b, 1);
    // inverse of [[0, w], [-w, 0]] is [[0, -1/w], [1/w, 0]]
    return -(ScalarExpr::constant(r2, Q(1)) / w12);
}

}  // namespace

TEST_CASE("constraint system validation") {
    CHECK_NOTHROW(ConstraintSystem(canonical4(), {P("q2")}, {{Q(1), Q(2), Q(0), Q(5)}}));
    CHECK_THROWS_AS(ConstraintSystem(canonical4(), {P("q2")}, {{Q(1), Q(2), Q(1), Q(5)}}), NotOnConstraint);
    CHECK_THROWS_AS(ConstraintSystem(canonical4(), {P("q2^2")}, {{Q(1), Q(2), Q(0), Q(5)}}), RankDropInPsi);
    CHECK_THROWS_AS(ConstraintSystem(canonical4(), {P("q2"), P("2*q2")}, {{Q(0), Q(0), Q(0), Q(0)}}), RankDropInPsi);
    ExprMatrix bad(3, 3, ScalarExpr(xyz));
    bad(0, 1) = parse_expr("x^3", xyz);
    bad(1, 0) = -bad(0, 1);
    bad(0, 2) = parse_expr("x^2", xyz);
    bad(2, 0) = -bad(0, 2);
    CHECK_THROWS_AS(ConstraintSystem(bad, {}, {}), NotPoisson);
    ExprMatrix sym = canonical4();
    sym(1, 0) = E("1");
    CHECK_THROWS_AS(ConstraintSystem(sym, {}, {}), NotSkewSymmetric);
}

TEST_CASE("classification examples") {
    const ConstraintSystem cos(canonical4(), {P("q2"), P("p2")}, {{Q(0), Q(0), Q(0), Q(0)}});
    const auto c = classify_point(cos, {Q(1), Q(3), Q(0), Q(0)});
    CHECK(c.kind == SubmanifoldKind::Cosymplectic);
    CHECK(c.image_dim == 2);
    CHECK(c.null_dim == 0);

    const ConstraintSystem coi(canonical4(), {P("q2")}, {});
    const auto ci = classify_point(coi, {Q(1), Q(3), Q(0), Q(7)});
    CHECK(ci.kind == SubmanifoldKind::Coisotropic);
    CHECK(ci.null_dim == 1);

    const ConstraintSystem ps(dxdy(xyz), {parse_expr("z", xyz).num()}, {});
    const auto pp = classify_point(ps, {Q(1), Q(2), Q(0)});
    CHECK(pp.kind == SubmanifoldKind::PoissonSubmanifold);
    CHECK(pp.image_dim == 0);

    const Variables w{"x", "y", "z", "w"};
    const ConstraintSystem pd(dxdy(w), {parse_expr("x", w).num(), parse_expr("y", w).num(), parse_expr("z", w).num()}, {});
    const auto pdc = classify_point(pd, {Q(0), Q(0), Q(0), Q(4)});
    CHECK(pdc.kind == SubmanifoldKind::PoissonDirac);
    CHECK(pdc.null_dim == 0);
    CHECK(pdc.image_dim == 2);

    const ConstraintSystem mixed(canonical4(), {P("q1"), P("q2"), P("p2")}, {});
    const auto mc = classify_point(mixed, {Q(0), Q(5), Q(0), Q(0)});
    CHECK(mc.kind == SubmanifoldKind::Mixed);
    CHECK(mc.null_dim == 1);
    CHECK(mc.image_dim == 3);

    // the curved system degenerates to coisotropic where 1 + 2 q1 = 0
    const ConstraintSystem cur(canonical4(), {P("q2 - q1^2"), P("p2 - p1")}, {});
    CHECK(classify_point(cur, {Q(-1, 2), Q(1), Q(1, 4), Q(1)}).kind == SubmanifoldKind::Coisotropic);
    CHECK(classify_point(cur, {Q(1), Q(1), Q(1), Q(1)}).kind == SubmanifoldKind::Cosymplectic);
    CHECK_THROWS_AS(classify_point(cur, {Q(1), Q(1), Q(2), Q(1)}), NotOnConstraint);
}

TEST_CASE("constraint matrix") {
    testgen::Gen g(61);
    const auto c1 = constraint_matrix(flat_system(g));
    CHECK(c1.c == Matrix<ScalarExpr>::from_rows({{E("0"), E("1")}, {E("-1"), E("0")}}, 2, ScalarExpr(r4)));
    CHECK(c1.invertible());

    const ConstraintSystem one(canonical4(), {P("q2")}, {{Q(0), Q(0), Q(0), Q(0)}});
    const auto c2 = constraint_matrix(one);
    CHECK(c2.c.rows() == 1);
    CHECK(c2.c(0, 0).is_zero());
    CHECK(!c2.invertible());

    const auto c3 = constraint_matrix(curved_system(g));
    CHECK(c3.c(0, 1) == E("1 + 2*q1"));
    CHECK(c3.det == E("(1 + 2*q1)^2"));
    CHECK(c3.invertible());

    // a probe on the degenerate line keeps classification and determinant in agreement
    const ConstraintSystem deg(canonical4(), {P("q2 - q1^2"), P("p2 - p1")}, {{Q(-1, 2), Q(0), Q(1, 4), Q(0)}});
    CHECK_NOTHROW(constraint_matrix(deg));
}

TEST_CASE("Dirac bracket annihilates constraints") {
    testgen::Gen g(62);
    const ConstraintSystem systems[] = {flat_system(g), curved_system(g)};
    for (const auto& cs : systems)
        for (int t = 0; t < 10; ++t) {
            const ScalarExpr f = g.poly_expr(r4, 2, 3);
            for (std::size_t j = 0; j < cs.count(); ++j) {
                CHECK(dirac_bracket(cs, f, cs.psi(j)).is_zero());
                CHECK(dirac_bracket(cs, cs.psi(j), f).is_zero());
            }
        }
    const ConstraintSystem first(canonical4(), {P("q2")}, {});
    CHECK_THROWS_AS(dirac_bracket(first, E("q1"), E("p1")), SecondClassViolated);
}

TEST_CASE("Dirac bracket examples against the pullback oracle") {
    testgen::Gen g(63);
    const ConstraintSystem flat = flat_system(g);
    CHECK(dirac_bracket(flat, E("q1"), E("p1")) == E("1"));
    const PolyMap s_flat(r2, r4, {P("q1", r2), P("p1", r2), Poly(r2), Poly(r2)});
    CHECK(pullback_oracle(s_flat) == parse_expr("1", r2));

    const ConstraintSystem cur = curved_system(g);
    const ScalarExpr db = dirac_bracket(cur, E("q1"), E("p1"));
    CHECK(db == E("1/(1 + 2*q1)"));
    const PolyMap s_cur(r2, r4, {P("q1", r2), P("p1", r2), P("q1^2", r2), P("p1", r2)});
    const ScalarExpr oracle = pullback_oracle(s_cur);
    CHECK(oracle == parse_expr("1/(1 + 2*q1)", r2));
    REQUIRE(cur.probes().size() >= 10);
    for (const auto& p : cur.probes()) CHECK(db.evaluate(p) == oracle.evaluate(Point{p[0], p[1]}));
    CHECK_THROWS_AS(db.evaluate(Point{Q(-1, 2), Q(0), Q(1, 4), Q(0)}), DenominatorVanishes);
}

TEST_CASE("Dirac bracket algebra") {
    testgen::Gen g(64);
    const ConstraintSystem cur = curved_system(g);
    for (int t = 0; t < 8; ++t) {
        const ScalarExpr f = g.poly_expr(r4, 2, 3), h = g.poly_expr(r4, 2, 3), k = g.poly_expr(r4, 2, 3);
        const Q a = g.small_rational();
        CHECK(dirac_bracket(cur, f, h) == -dirac_bracket(cur, h, f));
        CHECK(dirac_bracket(cur, f * a + k, h) == dirac_bracket(cur, f, h) * a + dirac_bracket(cur, k, h));
        CHECK(dirac_bracket(cur, f, h * k) == dirac_bracket(cur, f, h) * k + dirac_bracket(cur, f, k) * h);
        CHECK(dirac_bracket(cur, f * k, h) == dirac_bracket(cur, f, h) * k + dirac_bracket(cur, k, h) * f);
        const ScalarExpr jac = dirac_bracket(cur, f, dirac_bracket(cur, h, k)) +
                               dirac_bracket(cur, h, dirac_bracket(cur, k, f)) +
                               dirac_bracket(cur, k, dirac_bracket(cur, f, h));
        for (const auto& p : cur.probes()) CHECK(jac.evaluate(p).is_zero());
    }
}

TEST_CASE("Dirac bracket reduces to the Poisson bracket for first-class extensions") {
    testgen::Gen g(65);
    const ConstraintSystem flat = flat_system(g);
    for (int t = 0; t < 10; ++t) {
        const ScalarExpr f = ScalarExpr(g.poly(r2, 2, 3).substitute(std::vector<Poly>{P("q1"), P("p1")}));
        const ScalarExpr h = g.poly_expr(r4, 2, 3);
        CHECK(dirac_bracket(flat, f, h) == poisson_bracket(flat.pi(), f, h));
    }
}

TEST_CASE("projection onto TC along the conormal image") {
    testgen::Gen g(66);
    const ConstraintSystem cur = curved_system(g);
    const ExprMatrix pi = cur.pi();
    for (const auto& p : cur.probes()) {
        Vec<Q> y{g.small_rational(), g.small_rational(), g.small_rational(), g.small_rational()};
        const auto s = project_to_tangent(cur, p, y);
        for (std::size_t i = 0; i < 4; ++i) CHECK(s.tangential[i] + s.conormal[i] == y[i]);
        const auto again = project_to_tangent(cur, p, s.conormal);
        CHECK(again.conormal == s.conormal);
        const auto tan = project_to_tangent(cur, p, s.tangential);
        for (const auto& c : tan.conormal) CHECK(c.is_zero());
        for (std::size_t l = 0; l < 2; ++l) {
            Vec<Q> x;
            for (const auto& e : pi_sharp(pi, gradient(cur.psi(l)))) x.push_back(e.evaluate(p));
            CHECK(project_to_tangent(cur, p, x).conormal == x);
        }
    }
    const ConstraintSystem coi(canonical4(), {P("q2")}, {});
    CHECK_THROWS_AS(project_to_tangent(coi, {Q(0), Q(0), Q(0), Q(0)}, {Q(1), Q(0), Q(0), Q(0)}), NotCosymplecticAtPoint);
}

TEST_CASE("hamiltonian vector fields on C are projections of extensions") {
    testgen::Gen g(67);
    const ConstraintSystem cur = curved_system(g);
    const PolyMap sigma(r2, r4, {P("q1", r2), P("p1", r2), P("q1^2", r2), P("p1", r2)});
    const auto pb = pullback_via_parametrization(cur, Parametrization(cur, sigma), {{}, 4, 2});
    REQUIRE(pb.field.kind() == DiracKind::BivectorGraph);
    const ExprMatrix& pic = std::get<DiracField::Bivector>(pb.field.data()).pi;
    const ExprMatrix js = sigma.jacobian();
    for (int t = 0; t < 4; ++t) {
        const ScalarExpr big_f = g.poly_expr(r4, 2, 3);
        const ExprVec xc = pi_sharp(pic, gradient(sigma.pull(big_f)));
        const ExprVec xf = pi_sharp(cur.pi(), gradient(big_f));
        for (const auto& p : cur.probes()) {
            const Point u{p[0], p[1]};
            Vec<Q> xfp;
            for (const auto& e : xf) xfp.push_back(e.evaluate(p));
            const Vec<Q> pushed = evaluate(js, u).apply(evaluate(Matrix<ScalarExpr>::from_rows({xc}, 2, ScalarExpr(r2)), u).row(0));
            CHECK(project_to_tangent(cur, p, xfp).tangential == pushed);
        }
    }
}

TEST_CASE("parametrization validation") {
    const ConstraintSystem cur(canonical4(), {P("q2 - q1^2"), P("p2 - p1")}, {});
    CHECK_NOTHROW(Parametrization(cur, PolyMap(r2, r4, {P("q1", r2), P("p1", r2), P("q1^2", r2), P("p1", r2)})));
    CHECK_THROWS_AS(Parametrization(cur, PolyMap(r2, r4, {P("q1", r2), P("p1", r2), P("q1", r2), P("p1", r2)})),
                    InvalidParametrization);
    const Variables one{"t"};
    CHECK_THROWS_AS(Parametrization(cur, PolyMap(one, r4, {P("t", one), Poly(one), P("t^2", one), Poly(one)})),
                    InvalidParametrization);
    // (t^3, s) parametrizes q2 = 0 but dσ drops rank at t = 0
    const ConstraintSystem q2(canonical4(), {P("q2")}, {});
    const Variables ts{"t", "s", "u"};
    const PolyMap cusp(ts, r4, {parse_expr("t^3", ts).num(), parse_expr("s", ts).num(), Poly(ts), parse_expr("u", ts).num()});
    CHECK_NOTHROW(Parametrization(q2, cusp, {{Q(1), Q(0), Q(0)}}));
    CHECK_THROWS_AS(Parametrization(q2, cusp, {{Q(0), Q(0), Q(0)}}), InvalidParametrization);
}

TEST_CASE("pullback via parametrizations") {
    testgen::Gen g(68);
    const ConstraintSystem flat = flat_system(g);
    const PolyMap s_flat(r2, r4, {P("q1", r2), P("p1", r2), Poly(r2), Poly(r2)});
    const auto pf = pullback_via_parametrization(flat, Parametrization(flat, s_flat), {{}, 6, 1});
    REQUIRE(pf.field.kind() == DiracKind::BivectorGraph);
    CHECK(std::get<DiracField::Bivector>(pf.field.data()).pi == dxdy(r2));
    CHECK(pf.report.clean_at_probes());

    // cosymplectic: admissible bracket of pullbacks equals the Dirac bracket along σ
    const ConstraintSystem cur = curved_system(g);
    const PolyMap s_cur(r2, r4, {P("q1", r2), P("p1", r2), P("q1^2", r2), P("p1", r2)});
    std::vector<Point> src;
    for (const auto& p : cur.probes()) src.push_back({p[0], p[1]});
    const auto pc = pullback_via_parametrization(cur, Parametrization(cur, s_cur, src), {{}, 0, 1});
    REQUIRE(pc.field.kind() == DiracKind::BivectorGraph);
    for (int t = 0; t < 5; ++t) {
        const ScalarExpr f = g.poly_expr(r4, 2, 2), h = g.poly_expr(r4, 2, 2);
        const ScalarExpr induced = admissible_bracket(pc.field, s_cur.pull(f), s_cur.pull(h));
        const ScalarExpr db = dirac_bracket(cur, f, h);
        for (const auto& p : cur.probes()) CHECK(induced.evaluate(Point{p[0], p[1]}) == db.evaluate(p));
    }
    // null distribution agrees in dimension with the classification
    for (const auto& pr : pc.report.probes) {
        REQUIRE(pr.fiber);
        CHECK(decompose(*pr.fiber).null.dim() == classify_point(cur, pr.image).null_dim);
    }

    // coisotropic: null directions survive
    const ConstraintSystem coi(canonical4(), {P("q2")}, {});
    const Variables three{"a", "b", "c"};
    const PolyMap s_coi(three, r4, {parse_expr("a", three).num(), parse_expr("b", three).num(), Poly(three),
                                    parse_expr("c", three).num()});
    const auto pco = pullback_via_parametrization(coi, Parametrization(coi, s_coi), {{}, 6, 4});
    for (const auto& pr : pco.report.probes) {
        REQUIRE(pr.fiber);
        CHECK(decompose(*pr.fiber).null.dim() == classify_point(coi, pr.image).null_dim);
        CHECK(decompose(*pr.fiber).null.dim() == 1);
    }

    // Poisson submanifold z = 0 of (R^3, ∂x∧∂y): ι is a Poisson map
    const Variables uv{"u", "v"};
    const ConstraintSystem ps(dxdy(xyz), {parse_expr("z", xyz).num()}, {});
    const PolyMap iota(uv, xyz, {parse_expr("u", uv).num(), parse_expr("v", uv).num(), Poly(uv)});
    const auto pp = pullback_via_parametrization(ps, Parametrization(ps, iota), {{}, 6, 1});
    REQUIRE(pp.field.kind() == DiracKind::BivectorGraph);
    CHECK(std::get<DiracField::Bivector>(pp.field.data()).pi == dxdy(uv));
    CHECK(check_dirac_map(pp.field, DiracField::bivector_graph(dxdy(xyz)), iota, MapMode::Forward, {{}, 6, 1}).holds);
}

TEST_CASE("momentum level sets") {
    const ConstraintSystem ls = level_set(canonical4(), {P("q1^2 + p1^2")}, {Q(1)}, {{Q(1), Q(0), Q(3), Q(2)}, {Q(0), Q(-1), Q(0), Q(0)}});
    for (const auto& p : ls.probes()) CHECK(classify_point(ls, p).kind == SubmanifoldKind::Coisotropic);
    CHECK_THROWS_AS(level_set(canonical4(), {P("q1")}, {Q(1)}, {{Q(0), Q(0), Q(0), Q(0)}}), NotOnConstraint);
}
