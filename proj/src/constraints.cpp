#include "dirac/constraints.hpp"

#include <sstream>

#include "dirac/error.hpp"

namespace dirac {

namespace {

std::string point_str(const Point& p) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ')';
    return os.str();
}

// Rows dψⁱ at p.
Matrix<Rational> dpsi_at(const ConstraintSystem& cs, const Point& p) {
    const std::size_t m = cs.ambient_dim(), k = cs.count();
    Matrix<Rational> d(k, m, Rational(0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < m; ++j) d(i, j) = cs.psis()[i].derivative(j).evaluate(p);
    return d;
}

Subspace<Rational> row_space(const Matrix<Rational>& rows, std::size_t m) {
    if (rows.rows() == 0) return Subspace<Rational>::zero_space(m, Rational(0));
    return Subspace<Rational>::span(rows);
}

ExprMatrix bracket_matrix(const ConstraintSystem& cs) {
    const std::size_t k = cs.count();
    ExprMatrix c(k, k, ScalarExpr(cs.variables()));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            c(i, j) = poisson_bracket(cs.pi(), cs.psi(i), cs.psi(j));
            c(j, i) = -c(i, j);
        }
    return c;
}

ExprMatrix inverse_or_throw(const ConstraintSystem& cs) {
    auto inv = inverse(bracket_matrix(cs));
    if (!inv) throw SecondClassViolated("constraint matrix {psi^i, psi^j} is singular on the generic locus");
    return *inv;
}

}  // namespace

ConstraintSystem::ConstraintSystem(ExprMatrix pi, std::vector<Poly> psis, std::vector<Point> probes)
    : pi_(std::move(pi)), psis_(std::move(psis)), probes_(std::move(probes)) {
    const std::size_t m = pi_.rows();
    if (pi_.cols() != m) throw DimensionMismatch("bivector matrix is not square");
    if (!pi_.is_skew()) throw NotSkewSymmetric("bivector matrix is not skew-symmetric");
    const Variables& vars = variables();
    if (vars.size() != m) throw DimensionMismatch("bivector size differs from the number of variables");
    for (const auto& psi : psis_)
        if (!(psi.variables() == vars)) throw VariableSetMismatch("constraint uses a different variable set");
    if (psis_.size() > m) throw RankDropInPsi("more constraints than ambient dimensions");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t l = j + 1; l < m; ++l) {
                const ScalarExpr jac = jacobiator(pi_, ScalarExpr::variable(vars, i), ScalarExpr::variable(vars, j),
                                                  ScalarExpr::variable(vars, l));
                if (!jac.is_zero())
                    throw NotPoisson("Jacobiator of (" + vars.name(i) + ", " + vars.name(j) + ", " + vars.name(l) +
                                     ") is " + jac.str());
            }
    for (const auto& p : probes_) check_point(p);
}

void ConstraintSystem::check_point(const Point& p) const {
    if (p.size() != ambient_dim()) throw DimensionMismatch("point has the wrong number of coordinates");
    for (std::size_t i = 0; i < count(); ++i)
        if (!psis_[i].evaluate(p).is_zero())
            throw NotOnConstraint("psi" + std::to_string(i + 1) + " = " + psis_[i].evaluate(p).str() + " at " + point_str(p));
    if (rank(dpsi_at(*this, p)) != count()) throw RankDropInPsi("d(psi) has rank < " + std::to_string(count()) + " at " + point_str(p));
}

ConstraintSystem level_set(const ExprMatrix& pi, const std::vector<Poly>& j, const Point& mu, std::vector<Point> probes) {
    if (j.size() != mu.size()) throw DimensionMismatch("momentum value has the wrong length");
    std::vector<Poly> psis;
    for (std::size_t i = 0; i < j.size(); ++i) psis.push_back(j[i] - Poly::constant(j[i].variables(), mu[i]));
    return ConstraintSystem(pi, std::move(psis), std::move(probes));
}

const char* kind_name(SubmanifoldKind k) {
    switch (k) {
        case SubmanifoldKind::PoissonSubmanifold: return "PoissonSubmanifold";
        case SubmanifoldKind::Cosymplectic: return "Cosymplectic";
        case SubmanifoldKind::Coisotropic: return "Coisotropic";
        case SubmanifoldKind::PoissonDirac: return "PoissonDirac";
        case SubmanifoldKind::Mixed: return "Mixed";
    }
    return "?";
}

PointClass classify_point(const ConstraintSystem& cs, const Point& p) {
    cs.check_point(p);
    const std::size_t m = cs.ambient_dim();
    const Matrix<Rational> d = dpsi_at(cs, p);
    const Matrix<Rational> pi = evaluate(cs.pi(), p);
    const auto tc = kernel(d);
    const auto img = row_space(d * pi, m);  // rows π♯(dψⁱ)
    const auto null = intersect(tc, img);
    PointClass out{SubmanifoldKind::Mixed, null.dim(), img.dim()};
    if (img.dim() == 0) out.kind = SubmanifoldKind::PoissonSubmanifold;
    else if (tc.contains(img)) out.kind = SubmanifoldKind::Coisotropic;
    else if (null.dim() == 0)
        out.kind = sum(tc, img).dim() == m ? SubmanifoldKind::Cosymplectic : SubmanifoldKind::PoissonDirac;
    return out;
}

ConstraintMatrix constraint_matrix(const ConstraintSystem& cs) {
    ConstraintMatrix out{bracket_matrix(cs), ScalarExpr(cs.variables()), std::nullopt};
    out.det = determinant(out.c);
    if (!out.det.is_zero()) out.inverse = inverse(out.c);
    for (const auto& p : cs.probes()) {
        const PointClass pc = classify_point(cs, p);
        const bool splits = pc.null_dim == 0 && pc.image_dim == cs.count();
        const bool nonsingular = rank(evaluate(out.c, p)) == cs.count();
        if (splits != nonsingular)
            throw ConsistencyFailure("constraint matrix and classification disagree at " + point_str(p));
    }
    return out;
}

ScalarExpr dirac_bracket(const ConstraintSystem& cs, const ScalarExpr& f, const ScalarExpr& g) {
    const ExprMatrix& pi = cs.pi();
    ScalarExpr r = poisson_bracket(pi, f, g);
    const std::size_t k = cs.count();
    if (k == 0) return r;
    const ExprMatrix inv = inverse_or_throw(cs);
    std::vector<ScalarExpr> fpsi, psig;
    for (std::size_t i = 0; i < k; ++i) {
        fpsi.push_back(poisson_bracket(pi, f, cs.psi(i)));
        psig.push_back(poisson_bracket(pi, cs.psi(i), g));
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (fpsi[i].is_zero()) continue;
        for (std::size_t j = 0; j < k; ++j)
            if (!inv(i, j).is_zero() && !psig[j].is_zero()) r = r - fpsi[i] * inv(i, j) * psig[j];
    }
    return r;
}

TangentSplit project_to_tangent(const ConstraintSystem& cs, const Point& p, const Vec<Rational>& y) {
    const std::size_t m = cs.ambient_dim(), k = cs.count();
    if (y.size() != m) throw DimensionMismatch("tangent vector has the wrong length");
    const PointClass pc = classify_point(cs, p);
    if (!(pc.null_dim == 0 && pc.image_dim == k))
        throw NotCosymplecticAtPoint(std::string("submanifold is ") + kind_name(pc.kind) + " at " + point_str(p));
    const Matrix<Rational> d = dpsi_at(cs, p);
    const Matrix<Rational> xpsi = d * evaluate(cs.pi(), p);  // rows X_{ψʲ}(p)
    TangentSplit out{y, Vec<Rational>(m, Rational(0))};
    if (k > 0) {
        const auto inv = inverse(evaluate(bracket_matrix(cs), p));
        if (!inv) throw ConsistencyFailure("constraint matrix singular at a cosymplectic point " + point_str(p));
        const Vec<Rational> dy = d.apply(y);
        const Vec<Rational> coeff = inv->left_apply(dy);
        out.conormal = xpsi.left_apply(coeff);
    }
    for (std::size_t i = 0; i < m; ++i) out.tangential[i] = y[i] - out.conormal[i];
    for (const auto& v : d.apply(out.tangential))
        if (!v.is_zero()) throw ConsistencyFailure("tangential part leaves TC at " + point_str(p));
    return out;
}

Parametrization::Parametrization(const ConstraintSystem& cs, PolyMap sigma, std::vector<Point> source_points)
    : sigma_(std::move(sigma)), points_(std::move(source_points)) {
    const std::size_t d = cs.ambient_dim() - cs.count();
    if (!(sigma_.target() == cs.variables())) throw InvalidParametrization("map target is not the ambient space");
    if (sigma_.source().size() != d)
        throw InvalidParametrization("source dimension " + std::to_string(sigma_.source().size()) + " differs from dim C = " +
                                     std::to_string(d));
    for (std::size_t i = 0; i < cs.count(); ++i)
        if (!cs.psis()[i].substitute(sigma_.components()).is_zero())
            throw InvalidParametrization("psi" + std::to_string(i + 1) + " does not vanish on the image");
    const ExprMatrix j = sigma_.jacobian();
    if (rank(j) != d) throw InvalidParametrization("d(sigma) is generically degenerate");
    for (const auto& p : points_)
        if (rank(evaluate(j, p)) != d) throw InvalidParametrization("d(sigma) is degenerate at " + point_str(p));
}

BackwardImage pullback_via_parametrization(const ConstraintSystem& cs, const Parametrization& sigma,
                                           const ProbeOptions& probes) {
    ProbeOptions o = probes;
    o.points.insert(o.points.begin(), sigma.source_points().begin(), sigma.source_points().end());
    return backward_image(DiracField::bivector_graph(cs.pi()), sigma.sigma(), o);
}

}  // namespace dirac
