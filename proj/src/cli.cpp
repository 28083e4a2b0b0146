#include "dirac/cli.hpp"

#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "dirac/error.hpp"
#include "dirac/flows.hpp"

namespace dirac::cli {

using json = nlohmann::ordered_json;

namespace {

// ------------------------------------------------------------ reading

[[noreturn]] void layout_error(const std::string& path, const std::string& msg) { throw ParseError(path + ": " + msg); }

// Re-raise an expression error with the document path in front, keeping the position.
[[noreturn]] void rethrow_at(const std::string& path, const ParseError& e) {
    std::string msg = e.what();
    const std::string suffix = " at position " + std::to_string(e.position());
    if (e.position() && msg.size() >= suffix.size() && msg.compare(msg.size() - suffix.size(), suffix.size(), suffix) == 0)
        msg.resize(msg.size() - suffix.size());
    throw ParseError(path + ": " + msg, e.position());
}

const json& field(const json& o, const char* key, const std::string& path) {
    if (!o.is_object()) layout_error(path, "expected an object");
    const auto it = o.find(key);
    if (it == o.end()) layout_error(path, std::string("missing \"") + key + "\"");
    return *it;
}

const json& array_of(const json& j, const std::string& path, std::optional<std::size_t> size = std::nullopt) {
    if (!j.is_array()) layout_error(path, "expected an array");
    if (size && j.size() != *size)
        layout_error(path, "expected " + std::to_string(*size) + " entries, found " + std::to_string(j.size()));
    return j;
}

std::string text_of(const json& j, const std::string& path) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    layout_error(path, "expected an expression string");
}

std::size_t count_of(const json& j, const std::string& path) {
    if (!j.is_number_unsigned()) layout_error(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

ScalarExpr expr_at(const json& j, const Variables& vars, const std::string& path) {
    const std::string text = text_of(j, path);
    try {
        return parse_expr(text, vars);
    } catch (const ParseError& e) {
        rethrow_at(path, e);
    }
}

Rational rational_at(const json& j, const std::string& path) {
    const ScalarExpr e = expr_at(j, Variables{}, path);
    return e.constant_value();
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

ExprVec expr_vec(const json& j, const Variables& vars, const std::string& path, std::size_t n) {
    array_of(j, path, n);
    ExprVec out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(expr_at(j[i], vars, at(path, i)));
    return out;
}

ExprMatrix expr_matrix(const json& j, const Variables& vars, const std::string& path) {
    const std::size_t n = vars.size();
    array_of(j, path, n);
    ExprMatrix m(n, n, ScalarExpr(vars));
    for (std::size_t i = 0; i < n; ++i) {
        const ExprVec row = expr_vec(j[i], vars, at(path, i), n);
        for (std::size_t k = 0; k < n; ++k) m(i, k) = row[k];
    }
    return m;
}

Point point_at(const json& j, const std::string& path, std::optional<std::size_t> n) {
    array_of(j, path, n);
    Point p;
    for (std::size_t i = 0; i < j.size(); ++i) p.push_back(rational_at(j[i], at(path, i)));
    return p;
}

std::vector<Point> points_at(const json& j, const std::string& path, std::optional<std::size_t> n) {
    array_of(j, path);
    std::vector<Point> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point_at(j[i], at(path, i), n));
    return out;
}

Poly poly_at(const json& j, const Variables& vars, const std::string& path) {
    const ScalarExpr e = expr_at(j, vars, path);
    if (!e.is_polynomial()) throw PreconditionError(path + ": expected a polynomial, got " + e.str());
    return e.num() * (Rational(1) / e.den().constant_value());
}

std::vector<Vec<Rational>> rational_rows(const json& j, const std::string& path, std::size_t width) {
    array_of(j, path);
    std::vector<Vec<Rational>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(point_at(j[i], at(path, i), width));
    return rows;
}

Variables variables_at(const json& j, const std::string& path) {
    array_of(j, path);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) layout_error(at(path, i), "expected a variable name");
        names.push_back(j[i].get<std::string>());
    }
    try {
        return Variables(names);
    } catch (const Error& e) {
        layout_error(path, e.what());
    }
}

SpecObject parse_object(const json& o, const Variables& vars) {
    const std::string p = "object";
    const json& kind_j = field(o, "kind", p);
    if (!kind_j.is_string()) layout_error(p + ".kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();
    const std::size_t n = vars.size();

    if (kind == "bivector") return DiracField::bivector_graph(expr_matrix(field(o, "matrix", p), vars, p + ".matrix"));
    if (kind == "twoform") return DiracField::twoform_graph(expr_matrix(field(o, "matrix", p), vars, p + ".matrix"));
    if (kind == "distribution") {
        const json& g = array_of(field(o, "generators", p), p + ".generators");
        std::vector<ExprVec> gens;
        for (std::size_t i = 0; i < g.size(); ++i) gens.push_back(expr_vec(g[i], vars, at(p + ".generators", i), n));
        std::optional<ExprMatrix> gauge;
        if (o.contains("gauge")) gauge = expr_matrix(o["gauge"], vars, p + ".gauge");
        return DiracField::distribution(vars, n, gens, gauge);
    }
    if (kind == "frame") {
        const json& s = array_of(field(o, "sections", p), p + ".sections");
        std::vector<Section> frame;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string sp = at(p + ".sections", i);
            frame.push_back({expr_vec(field(s[i], "vector", sp), vars, sp + ".vector", n),
                             expr_vec(field(s[i], "form", sp), vars, sp + ".form", n)});
        }
        return DiracField::from_frame(vars, frame);
    }
    if (kind == "subspace") {
        const std::size_t dim = count_of(field(o, "n", p), p + ".n");
        const auto rows = rational_rows(field(o, "generators", p), p + ".generators", 2 * dim);
        return LinearDirac<Rational>::from_subspace(Subspace<Rational>::span(rows, 2 * dim, Rational(0)));
    }
    if (kind == "relation") {
        const std::size_t l = count_of(field(o, "left_dim", p), p + ".left_dim");
        const std::size_t r = count_of(field(o, "right_dim", p), p + ".right_dim");
        const auto rows = rational_rows(field(o, "generators", p), p + ".generators", 2 * (l + r));
        return LagrangianRelation<Rational>::from_subspace(l, r, Subspace<Rational>::span(rows, 2 * (l + r), Rational(0)));
    }
    if (kind == "constraint_system") {
        const ExprMatrix pi = expr_matrix(field(o, "pi", p), vars, p + ".pi");
        const json& c = array_of(field(o, "constraints", p), p + ".constraints");
        std::vector<Poly> psis;
        for (std::size_t i = 0; i < c.size(); ++i) psis.push_back(poly_at(c[i], vars, at(p + ".constraints", i)));
        std::vector<Point> probes;
        if (o.contains("probes")) probes = points_at(o["probes"], p + ".probes", n);
        return ConstraintSystem(pi, psis, probes);
    }
    if (kind == "map") {
        const Variables target = variables_at(field(o, "target", p), p + ".target");
        const json& c = array_of(field(o, "components", p), p + ".components", target.size());
        std::vector<Poly> comps;
        for (std::size_t i = 0; i < c.size(); ++i) comps.push_back(poly_at(c[i], vars, at(p + ".components", i)));
        return PolyMap(vars, target, comps);
    }
    if (kind == "points") {
        Points pts;
        if (o.contains("points")) pts.points = points_at(o["points"], p + ".points", n);
        if (o.contains("pairs")) {
            const json& pr = array_of(o["pairs"], p + ".pairs");
            for (std::size_t i = 0; i < pr.size(); ++i) {
                const std::string pp = at(p + ".pairs", i);
                array_of(pr[i], pp, 2);
                pts.pairs.emplace_back(point_at(pr[i][0], pp + "[0]", n), point_at(pr[i][1], pp + "[1]", n));
            }
        }
        return pts;
    }
    layout_error(p + ".kind", "unknown kind \"" + kind + "\"");
}

// ------------------------------------------------------------ writing

json expr_json(const ExprVec& v) {
    json a = json::array();
    for (const auto& e : v) a.push_back(e.str());
    return a;
}

json matrix_json(const ExprMatrix& m) {
    json a = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).str());
        a.push_back(row);
    }
    return a;
}

json point_json(const Point& p) {
    json a = json::array();
    for (const auto& x : p) a.push_back(x.str());
    return a;
}

json rows_json(const Subspace<Rational>& s) {
    json a = json::array();
    for (const auto& r : s.basis().row_list()) a.push_back(point_json(r));
    return a;
}

json field_json(const DiracField& d) {
    json o;
    if (const auto* b = std::get_if<DiracField::Bivector>(&d.data())) {
        o["kind"] = "bivector";
        o["matrix"] = matrix_json(b->pi);
    } else if (const auto* w = std::get_if<DiracField::TwoForm>(&d.data())) {
        o["kind"] = "twoform";
        o["matrix"] = matrix_json(w->omega);
    } else if (const auto* g = std::get_if<DiracField::Distribution>(&d.data())) {
        o["kind"] = "distribution";
        o["generators"] = json::array();
        for (const auto& v : g->generators) o["generators"].push_back(expr_json(v));
        if (g->gauge) o["gauge"] = matrix_json(*g->gauge);
    } else {
        o["kind"] = "frame";
        o["sections"] = json::array();
        for (const auto& s : d.frame()) o["sections"].push_back({{"vector", expr_json(s.vf)}, {"form", expr_json(s.form)}});
    }
    return o;
}

struct ObjectJson {
    json operator()(const DiracField& d) const { return field_json(d); }
    json operator()(const LinearDirac<Rational>& l) const {
        return {{"kind", "subspace"}, {"n", l.n()}, {"generators", rows_json(l.space())}};
    }
    json operator()(const LagrangianRelation<Rational>& r) const {
        return {{"kind", "relation"},
                {"left_dim", r.left_dim()},
                {"right_dim", r.right_dim()},
                {"generators", rows_json(r.space())}};
    }
    json operator()(const ConstraintSystem& cs) const {
        json c = json::array(), pr = json::array();
        for (const auto& p : cs.psis()) c.push_back(ScalarExpr(p).str());
        for (const auto& p : cs.probes()) pr.push_back(point_json(p));
        return {{"kind", "constraint_system"}, {"pi", matrix_json(cs.pi())}, {"constraints", c}, {"probes", pr}};
    }
    json operator()(const PolyMap& m) const {
        json c = json::array();
        for (const auto& p : m.components()) c.push_back(ScalarExpr(p).str());
        return {{"kind", "map"}, {"target", m.target().names()}, {"components", c}};
    }
    json operator()(const Points& p) const {
        json pts = json::array(), pairs = json::array();
        for (const auto& x : p.points) pts.push_back(point_json(x));
        for (const auto& [a, b] : p.pairs) pairs.push_back(json::array({point_json(a), point_json(b)}));
        json o = {{"kind", "points"}, {"points", pts}};
        if (!p.pairs.empty()) o["pairs"] = pairs;
        return o;
    }
};

json header(const Variables& vars) { return {{"version", kVersion}, {"variables", vars.names()}}; }

json report_json(const CleanReport& r) {
    json probes = json::array(), flagged = json::array();
    for (const auto& p : r.probes)
        probes.push_back({{"point", point_json(p.point)},
                          {"image", point_json(p.image)},
                          {"singular", p.singular},
                          {"rank", p.rank},
                          {"jump", p.jump}});
    for (const auto& p : r.flagged()) flagged.push_back(point_json(p));
    return {{"generic_rank", r.generic_rank}, {"clean", r.clean_at_probes()}, {"flagged", flagged}, {"probes", probes}};
}

}  // namespace

Document parse_document(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
    }
    const json& version = field(doc, "version", "document");
    if (!version.is_string() || version.get<std::string>() != kVersion)
        layout_error("version", std::string("expected \"") + kVersion + "\"");
    const Variables vars = variables_at(field(doc, "variables", "document"), "variables");
    return {vars, parse_object(field(doc, "object", "document"), vars)};
}

Document read_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_document(ss.str());
    } catch (const ParseError& e) {
        rethrow_at(path, e);
    }
}

json to_json(const Variables& vars, const SpecObject& obj) {
    json doc = header(vars);
    doc["object"] = std::visit(ObjectJson{}, obj);
    return doc;
}

std::string emit_document(const Variables& vars, const SpecObject& obj) { return to_json(vars, obj).dump(2); }

// ------------------------------------------------------------ commands

namespace {

template <class T>
T expect(const Document& d, const std::string& path, const char* what) {
    if (const auto* p = std::get_if<T>(&d.object)) return *p;
    throw PreconditionError(path + ": expected " + what);
}

ScalarExpr cli_expr(const std::string& text, const Variables& vars, const char* flag) {
    try {
        return parse_expr(text, vars);
    } catch (const ParseError& e) {
        rethrow_at(flag, e);
    }
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

Point parse_point_arg(const std::string& s, const char* flag) {
    Point p;
    for (const auto& item : split_commas(s)) p.push_back(cli_expr(item, Variables{}, flag).constant_value());
    return p;
}

std::vector<double> parse_doubles(const std::string& s, const char* flag) {
    std::vector<double> out;
    std::size_t col = 1;
    for (const auto& item : split_commas(s)) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw ParseError(std::string(flag) + ": not a number: \"" + item + "\"", col);
        out.push_back(v);
        col += item.size() + 1;
    }
    return out;
}

json witness_json(const IntegrabilityVerdict::Witness& w) {
    return {{"i", w.i}, {"j", w.j}, {"k", w.k}, {"entry", w.entry.str()}, {"point", point_json(w.point)}, {"value", w.value.str()}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact computations with Dirac structures", "dirac"};
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 1;
    std::size_t probe_count = 32;
    app.add_option("--seed", seed, "Seed of the probe generator");
    app.add_option("--probe-count", probe_count, "Number of generated probes");

    std::string file, file2, probes_file, map_file, section_file, f_text, g_text, point_text, h_text, x0_text, out_file;
    std::string method = "rk4";
    double t_end = 0, dt = 0;
    std::size_t report_every = 1;

    auto* c_lag = app.add_subcommand("check-lagrangian", "Is the document a lagrangian subspace or frame");
    c_lag->add_option("FILE", file)->required();
    auto* c_int = app.add_subcommand("check-integrable", "Courant-tensor integrability verdict");
    c_int->add_option("FILE", file)->required();
    c_int->add_option("--probes", probes_file, "Points document used when searching for a witness");
    auto* c_br = app.add_subcommand("bracket", "Bracket of admissible functions");
    c_br->add_option("FILE", file)->required();
    c_br->add_option("-f", f_text)->required();
    c_br->add_option("-g", g_text)->required();
    auto* c_pb = app.add_subcommand("pullback", "Backward image along a polynomial map");
    c_pb->add_option("FILE", file)->required();
    c_pb->add_option("--map", map_file)->required();
    c_pb->add_option("--probes", probes_file);
    auto* c_pf = app.add_subcommand("pushforward", "Forward image along a polynomial submersion");
    c_pf->add_option("FILE", file)->required();
    c_pf->add_option("--map", map_file)->required();
    c_pf->add_option("--probes", probes_file)->required();
    c_pf->add_option("--section", section_file, "Right inverse of the map, for a symbolic result");
    auto* c_co = app.add_subcommand("compose", "Composition of lagrangian relations");
    c_co->add_option("REL1", file)->required();
    c_co->add_option("REL2", file2)->required();
    auto* c_cl = app.add_subcommand("classify", "Classify a constraint submanifold at a point");
    c_cl->add_option("FILE", file)->required();
    c_cl->add_option("--point", point_text)->required();
    auto* c_db = app.add_subcommand("dirac-bracket", "Dirac bracket of a second-class constraint system");
    c_db->add_option("FILE", file)->required();
    c_db->add_option("-f", f_text)->required();
    c_db->add_option("-g", g_text)->required();
    auto* c_fl = app.add_subcommand("flow", "Integrate the Dirac-bracket hamiltonian flow");
    c_fl->add_option("FILE", file)->required();
    c_fl->add_option("--hamiltonian", h_text)->required();
    c_fl->add_option("--x0", x0_text)->required();
    c_fl->add_option("--t", t_end)->required();
    c_fl->add_option("--dt", dt)->required();
    c_fl->add_option("-o", out_file)->required();
    c_fl->add_option("--method", method)->check(CLI::IsMember({"rk4", "midpoint"}));
    c_fl->add_option("--report-every", report_every);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "dirac: " << e.what() << '\n';
        return 2;
    }

    auto probe_opts = [&](const Variables& vars) {
        ProbeOptions o;
        o.seed = seed;
        o.count = probe_count;
        if (!probes_file.empty()) {
            const Document d = read_document(probes_file);
            if (!(d.variables == vars)) throw VariableSetMismatch(probes_file + ": variables differ");
            o.points = expect<Points>(d, probes_file, "a points document").points;
        }
        return o;
    };
    auto print = [&](const json& j) { out << j.dump(2) << '\n'; };

    try {
        if (*c_lag) {
            try {
                const Document d = read_document(file);
                if (!std::holds_alternative<DiracField>(d.object) && !std::holds_alternative<LinearDirac<Rational>>(d.object))
                    throw PreconditionError(file + ": expected a subspace or a Dirac structure");
            } catch (const NotLagrangian& e) {
                print({{"lagrangian", false}, {"reason", e.what()}});
                return 1;
            } catch (const DegenerateFrame& e) {
                print({{"lagrangian", false}, {"reason", e.what()}});
                return 1;
            }
            print({{"lagrangian", true}});
            return 0;
        }
        if (*c_int) {
            const Document d = read_document(file);
            const auto field = expect<DiracField>(d, file, "a Dirac structure");
            const auto v = is_integrable(field, probe_opts(d.variables));
            json r = {{"integrable", v.integrable}, {"kind", kind_name(field.kind())}};
            if (v.witness) r["witness"] = witness_json(*v.witness);
            print(r);
            return v.integrable ? 0 : 1;
        }
        if (*c_br) {
            const Document d = read_document(file);
            const auto field = expect<DiracField>(d, file, "a Dirac structure");
            out << admissible_bracket(field, cli_expr(f_text, d.variables, "-f"), cli_expr(g_text, d.variables, "-g")).str()
                << '\n';
            return 0;
        }
        if (*c_pb) {
            const Document d = read_document(file);
            const Document m = read_document(map_file);
            const auto field = expect<DiracField>(d, file, "a Dirac structure");
            const auto phi = expect<PolyMap>(m, map_file, "a map");
            const auto b = backward_image(field, phi, probe_opts(phi.source()));
            json r = to_json(phi.source(), b.field);
            r["report"] = report_json(b.report);
            print(r);
            return 0;
        }
        if (*c_pf) {
            const Document d = read_document(file);
            const auto field = expect<DiracField>(d, file, "a Dirac structure");
            const auto phi = expect<PolyMap>(read_document(map_file), map_file, "a map");
            const Document pd = read_document(probes_file);
            const auto pts = expect<Points>(pd, probes_file, "a points document");
            ProbeOptions o;
            o.seed = seed;
            o.count = probe_count;
            o.points = pts.points;
            std::optional<PolyMap> sec;
            if (!section_file.empty()) sec = expect<PolyMap>(read_document(section_file), section_file, "a map");
            const auto f = forward_image(field, phi, pts.pairs, sec, o);
            json r = header(phi.target());
            if (f.field) r["object"] = field_json(*f.field);
            r["report"] = report_json(f.report);
            r["invariance_pairs_checked"] = f.invariance_pairs_checked;
            print(r);
            return 0;
        }
        if (*c_co) {
            const auto r1 = expect<LagrangianRelation<Rational>>(read_document(file), file, "a relation");
            const auto r2 = expect<LagrangianRelation<Rational>>(read_document(file2), file2, "a relation");
            print(to_json(Variables{}, compose(r1, r2)));
            return 0;
        }
        if (*c_cl) {
            const Document d = read_document(file);
            const auto cs = expect<ConstraintSystem>(d, file, "a constraint system");
            const auto pc = classify_point(cs, parse_point_arg(point_text, "--point"));
            print({{"kind", kind_name(pc.kind)}, {"null_dim", pc.null_dim}, {"image_dim", pc.image_dim}});
            return 0;
        }
        if (*c_db) {
            const Document d = read_document(file);
            const auto cs = expect<ConstraintSystem>(d, file, "a constraint system");
            out << dirac_bracket(cs, cli_expr(f_text, d.variables, "-f"), cli_expr(g_text, d.variables, "-g")).str() << '\n';
            return 0;
        }
        if (*c_fl) {
            const Document d = read_document(file);
            const auto cs = expect<ConstraintSystem>(d, file, "a constraint system");
            const HamiltonianFlow flow(cs, cli_expr(h_text, d.variables, "--hamiltonian"));
            FlowConfig cfg;
            cfg.step_size = dt;
            cfg.duration = t_end;
            cfg.method = method == "midpoint" ? Method::Midpoint : Method::RK4;
            cfg.report_every = report_every;
            const auto tr = integrate(flow, parse_doubles(x0_text, "--x0"), cfg);
            if (out_file == "-") {
                write_csv(out, tr);
                return 0;
            }
            std::ofstream f(out_file);
            if (!f) throw PreconditionError("cannot write " + out_file);
            write_csv(f, tr);
            print({{"rows", tr.times.size()},
                   {"tangent", flow.tangent()},
                   {"max_energy_drift", tr.max_energy_drift()},
                   {"max_constraint_norm", tr.max_constraint_norm()}});
            return 0;
        }
    } catch (const ParseError& e) {
        err << "dirac: parse error: " << e.what() << '\n';
        return 2;
    } catch (const NotAdmissible& e) {
        err << "dirac: not admissible: " << e.what() << '\n';
        return 1;
    } catch (const PreconditionError& e) {
        err << "dirac: precondition violated: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        err << "dirac: check failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace dirac::cli
