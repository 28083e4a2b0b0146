#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dirac/cli.hpp"
#include "dirac/error.hpp"
#include "support.hpp"

using namespace dirac;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string spec(const char* name) { return std::string(SPECS_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("dirac_cli_" + name);
    std::ofstream(p) << text;
    return p.string();
}

bool same_object(const cli::SpecObject& a, const cli::SpecObject& b) {
    if (a.index() != b.index()) return false;
    if (const auto* x = std::get_if<DiracField>(&a)) {
        const auto& y = std::get<DiracField>(b);
        return x->kind() == y.kind() && x->frame() == y.frame() && x->generic() == y.generic();
    }
    if (const auto* x = std::get_if<LinearDirac<Rational>>(&a)) return *x == std::get<LinearDirac<Rational>>(b);
    if (const auto* x = std::get_if<LagrangianRelation<Rational>>(&a)) return *x == std::get<LagrangianRelation<Rational>>(b);
    if (const auto* x = std::get_if<ConstraintSystem>(&a)) {
        const auto& y = std::get<ConstraintSystem>(b);
        return x->pi() == y.pi() && x->psis() == y.psis() && x->probes() == y.probes();
    }
    if (const auto* x = std::get_if<PolyMap>(&a)) {
        const auto& y = std::get<PolyMap>(b);
        return x->source() == y.source() && x->target() == y.target() && x->components() == y.components();
    }
    const auto& x = std::get<cli::Points>(a);
    const auto& y = std::get<cli::Points>(b);
    return x.points == y.points && x.pairs == y.pairs;
}

void check_roundtrip(const Variables& vars, const cli::SpecObject& obj) {
    const cli::Document d = cli::parse_document(cli::emit_document(vars, obj));
    CHECK(d.variables == vars);
    CHECK(same_object(d.object, obj));
}

}  // namespace

TEST_CASE("documented command examples") {
    const Run ci = run({"check-integrable", spec("r3-example.json")});
    CHECK(ci.code == 0);
    CHECK(ci.out.find("\"integrable\": true") != std::string::npos);

    const Run br = run({"bracket", spec("r3-example.json"), "-f", "x", "-g", "y"});
    CHECK(br.code == 0);
    CHECK(br.out == "1/z\n");
    CHECK(run({"bracket", spec("r3-example.json"), "-f", "x", "-g", "z"}).out == "0\n");

    const Run pb = run({"pullback", spec("pi-x.json"), "--map", spec("axis-inclusion.json")});
    CHECK(pb.code == 0);
    const auto j = nlohmann::json::parse(pb.out);
    CHECK(j["report"]["clean"] == false);
    CHECK(j["report"]["flagged"] == nlohmann::json::array({nlohmann::json::array({"0"})}));
    CHECK(j["report"]["probes"].size() >= 10);
}

TEST_CASE("every example spec round-trips") {
    for (const auto& entry : fs::directory_iterator(SPECS_DIR)) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        const cli::Document d = cli::read_document(entry.path().string());
        check_roundtrip(d.variables, d.object);
    }
}

TEST_CASE("random objects round-trip") {
    testgen::Gen g(71);
    const Variables v{"x", "y", "z"};
    for (int t = 0; t < 10; ++t) {
        ExprMatrix m(3, 3, ScalarExpr(v));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = i + 1; k < 3; ++k) {
                m(i, k) = g.coin() ? g.rational_function(v) : g.poly_expr(v, 2, 3);
                m(k, i) = -m(i, k);
            }
        check_roundtrip(v, DiracField::bivector_graph(m));
        check_roundtrip(v, DiracField::twoform_graph(m));
        std::vector<ExprVec> gens{{g.poly_expr(v, 1, 2), ScalarExpr::constant(v, Rational(1)), g.poly_expr(v, 1, 2)}};
        check_roundtrip(v, DiracField::distribution(v, 3, gens, t % 2 ? std::optional<ExprMatrix>(m) : std::nullopt));
        check_roundtrip(v, PolyMap(v, Variables{"u", "w"}, {g.poly(v, 2, 3), g.poly(v, 2, 3)}));
    }
    for (int t = 0; t < 10; ++t) {
        const Matrix<Rational> a = g.matrix(2, 3);
        check_roundtrip(Variables{}, graph_relation(LinearMap<Rational>{a}));
        check_roundtrip(Variables{}, graph_of_bivector(g.skew(3)));
    }
    check_roundtrip(v, cli::Points{{{Rational(1, 2), Rational(0), Rational(-3)}}, {{{Rational(1), Rational(2), Rational(3)}, {Rational(1), Rational(2), Rational(4)}}}});
}

TEST_CASE("emitted results re-parse") {
    const Run pb = run({"pullback", spec("pi-x.json"), "--map", spec("axis-inclusion.json")});
    const cli::Document d = cli::parse_document(pb.out);
    CHECK(std::get<DiracField>(d.object).kind() == DiracKind::TwoFormGraph);

    const Run co = run({"compose", spec("symplectic-r2.json"), spec("symplectic-r2.json")});
    CHECK(co.code == 0);
    const cli::Document r = cli::parse_document(co.out);
    const cli::Document id = cli::read_document(spec("symplectic-r2.json"));
    CHECK(same_object(r.object, id.object));

    const Run pf = run({"pushforward", spec("omega-x.json"), "--map", spec("projection-x.json"), "--probes",
                        spec("omega-x-probes.json"), "--probe-count", "0"});
    CHECK(pf.code == 0);
    const auto j = nlohmann::json::parse(pf.out);
    CHECK(!j.contains("object"));
    CHECK(j["invariance_pairs_checked"] == 1);
    CHECK(j["report"]["flagged"] == nlohmann::json::array({nlohmann::json::array({"0", "0"})}));
}

TEST_CASE("pushforward with a section") {
    const std::string sec = write_temp("section.json", R"({"version": "dirac-spec/1", "variables": ["u"],
        "object": {"kind": "map", "target": ["x", "y"], "components": ["u", "0"]}})");
    const std::string pre = write_temp("presym.json", R"({"version": "dirac-spec/1", "variables": ["x", "y", "z"],
        "object": {"kind": "twoform", "matrix": [["0", "1+x^2", "0"], ["-1-x^2", "0", "0"], ["0", "0", "0"]]}})");
    const std::string map = write_temp("drop-z.json", R"({"version": "dirac-spec/1", "variables": ["x", "y", "z"],
        "object": {"kind": "map", "target": ["x", "y"], "components": ["x", "y"]}})");
    const std::string pts = write_temp("pts.json", R"({"version": "dirac-spec/1", "variables": ["x", "y", "z"],
        "object": {"kind": "points", "points": [["1", "2", "3"]], "pairs": [[["1", "2", "0"], ["1", "2", "7"]]]}})");
    const std::string sec2 = write_temp("section2.json", R"({"version": "dirac-spec/1", "variables": ["x", "y"],
        "object": {"kind": "map", "target": ["x", "y", "z"], "components": ["x", "y", "0"]}})");
    const Run r = run({"pushforward", pre, "--map", map, "--probes", pts, "--section", sec2, "--probe-count", "4"});
    CHECK(r.code == 0);
    const cli::Document d = cli::parse_document(r.out);
    const auto& f = std::get<DiracField>(d.object);
    CHECK(f.kind() == DiracKind::TwoFormGraph);
    CHECK(admissible_bracket(f, parse_expr("x", d.variables), parse_expr("y", d.variables)) ==
          parse_expr("-1/(x^2 + 1)", d.variables));
    // the section must be a right inverse of the map
    const Run bad = run({"pushforward", pre, "--map", map, "--probes", pts, "--section", sec});
    CHECK(bad.code == 3);
}

TEST_CASE("constraint commands") {
    const Run cl = run({"classify", spec("cosymplectic.json"), "--point", "1,0,0,0"});
    CHECK(cl.code == 0);
    CHECK(nlohmann::json::parse(cl.out)["kind"] == "Cosymplectic");
    CHECK(run({"classify", spec("cosymplectic.json"), "--point", "1/2,0,0,0"}).code == 0);
    CHECK(run({"classify", spec("cosymplectic.json"), "--point", "1,0,1,0"}).code == 3);
    CHECK(run({"dirac-bracket", spec("cosymplectic.json"), "-f", "q1", "-g", "p1"}).out == "1\n");
    CHECK(run({"dirac-bracket", spec("curved-constraints.json"), "-f", "q1", "-g", "p1"}).out == "1/(2*q1 + 1)\n");

    const std::string first = write_temp("first.json", R"({"version": "dirac-spec/1", "variables": ["q", "p"],
        "object": {"kind": "constraint_system", "pi": [["0", "1"], ["-1", "0"]], "constraints": ["q"]}})");
    const Run sc = run({"dirac-bracket", first, "-f", "q", "-g", "p"});
    CHECK(sc.code == 3);
    CHECK(sc.err.find("singular") != std::string::npos);
}

TEST_CASE("flow command writes a CSV trajectory") {
    const fs::path csv = fs::temp_directory_path() / "dirac_cli_traj.csv";
    const Run r = run({"flow", spec("cosymplectic.json"), "--hamiltonian", "(q1^2+p1^2+q2^2+p2^2)/2", "--x0", "1,0,0,0",
                       "--t", "6.283185307179586", "--dt", "1e-3", "-o", csv.string(), "--report-every", "100"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["tangent"] == true);
    std::ifstream in(csv);
    std::string header, line, last;
    std::getline(in, header);
    CHECK(header == "t,x1,x2,x3,x4,H,constraint_norm");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        last = line;
        ++rows;
    }
    CHECK(rows == j["rows"].get<std::size_t>());
    std::stringstream ls(last);
    std::string t, x1;
    std::getline(ls, t, ',');
    std::getline(ls, x1, ',');
    CHECK(std::abs(std::stod(x1) - 1) < 1e-6);

    CHECK(run({"flow", spec("cosymplectic.json"), "--hamiltonian", "q1", "--x0", "1,0,1,0", "--t", "1", "--dt", "0.1", "-o",
               csv.string()})
              .code == 3);
    const Run bad = run({"flow", spec("cosymplectic.json"), "--hamiltonian", "q1", "--x0", "1,zero,0,0", "--t", "1", "--dt",
                         "0.1", "-o", csv.string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("position 3") != std::string::npos);
}

TEST_CASE("exit codes") {
    const std::string bad_expr = write_temp("bad-expr.json", R"({"version": "dirac-spec/1", "variables": ["x", "y"],
        "object": {"kind": "bivector", "matrix": [["0", "x+*y"], ["-x", "0"]]}})");
    const Run pe = run({"check-integrable", bad_expr});
    CHECK(pe.code == 2);
    CHECK(pe.err.find("object.matrix[0][1]") != std::string::npos);
    CHECK(pe.err.find("position 3") != std::string::npos);
    try {
        cli::read_document(bad_expr);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.position() == 3);
    }

    CHECK(run({"check-integrable", write_temp("bad-json.json", "{\"version\": ")}).code == 2);
    CHECK(run({"check-integrable", write_temp("bad-kind.json",
                                              R"({"version": "dirac-spec/1", "variables": [], "object": {"kind": "torus"}})")})
              .code == 2);
    CHECK(run({"check-integrable", write_temp("bad-version.json",
                                              R"({"version": "dirac-spec/0", "variables": [], "object": {"kind": "points"}})")})
              .code == 2);
    CHECK(run({"bracket", spec("r3-example.json"), "-f", "x+*y", "-g", "y"}).code == 2);
    CHECK(run({"no-such-command"}).code == 2);
    CHECK(run({"bracket", spec("r3-example.json")}).code == 2);
    CHECK(run({"check-integrable", "/nonexistent/file.json"}).code == 3);

    const std::string skew = write_temp("not-skew.json", R"({"version": "dirac-spec/1", "variables": ["x", "y"],
        "object": {"kind": "bivector", "matrix": [["0", "x"], ["x", "0"]]}})");
    CHECK(run({"check-integrable", skew}).code == 3);

    CHECK(run({"check-integrable", spec("foliation.json")}).code == 1);
    const std::string zero = write_temp("zero-form.json", R"({"version": "dirac-spec/1", "variables": ["x", "y"],
        "object": {"kind": "twoform", "matrix": [["0", "0"], ["0", "0"]]}})");
    const Run na = run({"bracket", zero, "-f", "x", "-g", "y"});
    CHECK(na.code == 1);
    CHECK(na.err.find("not admissible") != std::string::npos);
}

TEST_CASE("check-lagrangian") {
    CHECK(run({"check-lagrangian", spec("r3-example.json")}).code == 0);
    const std::string sub = write_temp("sub.json", R"({"version": "dirac-spec/1", "variables": [],
        "object": {"kind": "subspace", "n": 2, "generators": [["1", "0", "0", "1"], ["0", "1", "-1", "0"]]}})");
    CHECK(run({"check-lagrangian", sub}).code == 0);
    const std::string nsub = write_temp("nsub.json", R"({"version": "dirac-spec/1", "variables": [],
        "object": {"kind": "subspace", "n": 2, "generators": [["1", "0", "1", "0"], ["0", "1", "0", "0"]]}})");
    const Run r = run({"check-lagrangian", nsub});
    CHECK(r.code == 1);
    CHECK(nlohmann::json::parse(r.out)["lagrangian"] == false);
    const std::string thin = write_temp("thin.json", R"({"version": "dirac-spec/1", "variables": ["x"],
        "object": {"kind": "frame", "sections": [{"vector": ["x"], "form": ["0"]}, {"vector": ["1"], "form": ["0"]}]}})");
    CHECK(run({"check-lagrangian", thin}).code == 3);
}

TEST_CASE("seed controls the probe generator") {
    const auto a = run({"pullback", spec("pi-x.json"), "--map", spec("axis-inclusion.json"), "--seed", "7"});
    const auto b = run({"--seed", "7", "pullback", spec("pi-x.json"), "--map", spec("axis-inclusion.json")});
    const auto c = run({"pullback", spec("pi-x.json"), "--map", spec("axis-inclusion.json"), "--seed", "8"});
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
}
