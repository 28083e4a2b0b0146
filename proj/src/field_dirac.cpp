#include "dirac/field_dirac.hpp"

#include <algorithm>
#include <random>

#include "dirac/error.hpp"

namespace dirac {

namespace {

const Variables& vars_of(const ExprVec& v) {
    if (v.empty()) throw DimensionMismatch("empty vector has no variable set");
    return v.front().variables();
}

void require_len(const ExprVec& v, std::size_t n, const char* what) {
    if (v.size() != n) throw DimensionMismatch(std::string(what) + " has the wrong number of components");
}

ScalarExpr half(const ScalarExpr& f) { return f * Rational(1, 2); }

std::string point_str(const Point& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + p[i].str();
    return s + ")";
}

}  // namespace

// ------------------------------------------------------------ calculus

ExprVec zero_vec(const Variables& vars, std::size_t n) { return ExprVec(n, ScalarExpr(vars)); }

ExprVec gradient(const ScalarExpr& f) {
    ExprVec g;
    for (std::size_t i = 0; i < f.variables().size(); ++i) g.push_back(f.differentiate(i));
    return g;
}

ScalarExpr contract(const ExprVec& alpha, const ExprVec& x) {
    require_len(x, alpha.size(), "vector");
    ScalarExpr s(vars_of(alpha));
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (!alpha[i].is_zero() && !x[i].is_zero()) s += alpha[i] * x[i];
    return s;
}

namespace {

// X(f) = X^j ∂_j f.
ScalarExpr apply_vf(const ExprVec& x, const ScalarExpr& f) {
    ScalarExpr s(f.variables());
    if (f.is_constant()) return s;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (!x[j].is_zero()) s += x[j] * f.differentiate(j);
    return s;
}

}  // namespace

ExprVec lie_bracket(const ExprVec& x, const ExprVec& y) {
    require_len(y, x.size(), "vector field");
    ExprVec out;
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(apply_vf(x, y[i]) - apply_vf(y, x[i]));
    return out;
}

ExprVec lie_derivative_form(const ExprVec& x, const ExprVec& beta) {
    require_len(beta, x.size(), "1-form");
    const std::size_t n = x.size();
    ExprVec out;
    for (std::size_t i = 0; i < n; ++i) {
        ScalarExpr s = apply_vf(x, beta[i]);
        for (std::size_t j = 0; j < n; ++j)
            if (!beta[j].is_zero() && !x[j].is_constant()) s += beta[j] * x[j].differentiate(i);
        out.push_back(s);
    }
    return out;
}

ExprMatrix exterior_derivative(const ExprVec& alpha) {
    const std::size_t n = alpha.size();
    const Variables& vars = vars_of(alpha);
    ExprMatrix d(n, n, ScalarExpr(vars));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            d(i, j) = alpha[j].differentiate(i) - alpha[i].differentiate(j);
            d(j, i) = -d(i, j);
        }
    return d;
}

namespace {

ScalarExpr d_twoform_component(const ExprMatrix& w, std::size_t i, std::size_t j, std::size_t k) {
    return w(j, k).differentiate(i) + w(k, i).differentiate(j) + w(i, j).differentiate(k);
}

}  // namespace

ScalarExpr d_twoform(const ExprMatrix& omega, const ExprVec& x, const ExprVec& y, const ExprVec& z) {
    const std::size_t n = omega.rows();
    ScalarExpr s = zero_like(omega.zero());
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i].is_zero()) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (y[j].is_zero() || j == i) continue;
            for (std::size_t k = 0; k < n; ++k) {
                if (z[k].is_zero() || k == i || k == j) continue;
                s += d_twoform_component(omega, i, j, k) * x[i] * y[j] * z[k];
            }
        }
    }
    return s;
}

bool is_closed(const ExprMatrix& omega) {
    const std::size_t n = omega.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                if (!d_twoform_component(omega, i, j, k).is_zero()) return false;
    return true;
}

ExprVec pi_sharp(const ExprMatrix& pi, const ExprVec& alpha) { return pi.left_apply(alpha); }

ScalarExpr poisson_bracket(const ExprMatrix& pi, const ScalarExpr& f, const ScalarExpr& g) {
    return contract(gradient(g), pi_sharp(pi, gradient(f)));
}

ScalarExpr jacobiator(const ExprMatrix& pi, const ScalarExpr& f, const ScalarExpr& g, const ScalarExpr& h) {
    return poisson_bracket(pi, f, poisson_bracket(pi, g, h)) + poisson_bracket(pi, h, poisson_bracket(pi, f, g)) +
           poisson_bracket(pi, g, poisson_bracket(pi, h, f));
}

ExprVec clear_denominators(const ExprVec& v) {
    if (v.empty()) return v;
    const Variables& vars = vars_of(v);
    Poly l = Poly::constant(vars, Rational(1));
    Poly g(vars);
    for (const auto& e : v) {
        if (e.is_zero()) continue;
        l = lcm(l, e.den());
        g = gcd(g, e.num());
    }
    if (g.is_zero()) return v;
    const ScalarExpr scale(l, g);
    ExprVec out;
    for (const auto& e : v) out.push_back(e * scale);
    for (const auto& e : out)
        if (!e.is_zero()) {
            if (e.num().leading_coeff().sign() < 0)
                for (auto& x : out) x = -x;
            break;
        }
    return out;
}

// ------------------------------------------------------------ sections

ExprVec Section::flat() const {
    ExprVec out = vf;
    out.insert(out.end(), form.begin(), form.end());
    return out;
}

Section Section::from_flat(const ExprVec& v) {
    if (v.size() % 2) throw DimensionMismatch("odd-length section vector");
    const auto n = static_cast<std::ptrdiff_t>(v.size() / 2);
    return {ExprVec(v.begin(), v.begin() + n), ExprVec(v.begin() + n, v.end())};
}

Section Section::operator+(const Section& o) const {
    Section s = *this;
    for (std::size_t i = 0; i < vf.size(); ++i) {
        s.vf[i] += o.vf[i];
        s.form[i] += o.form[i];
    }
    return s;
}

Section Section::operator-(const Section& o) const {
    Section s = *this;
    for (std::size_t i = 0; i < vf.size(); ++i) {
        s.vf[i] -= o.vf[i];
        s.form[i] -= o.form[i];
    }
    return s;
}

Section Section::operator*(const ScalarExpr& f) const {
    Section s = *this;
    for (std::size_t i = 0; i < vf.size(); ++i) {
        s.vf[i] *= f;
        s.form[i] *= f;
    }
    return s;
}

ScalarExpr pairing(const Section& a, const Section& b) { return contract(b.form, a.vf) + contract(a.form, b.vf); }

Section courant_bracket(const Section& a, const Section& b) {
    require_len(b.vf, a.vf.size(), "section");
    Section out;
    out.vf = lie_bracket(a.vf, b.vf);
    const ExprVec lxb = lie_derivative_form(a.vf, b.form);
    const ExprVec lya = lie_derivative_form(b.vf, a.form);
    const ExprVec dd = gradient(half(contract(a.form, b.vf) - contract(b.form, a.vf)));
    for (std::size_t i = 0; i < lxb.size(); ++i) out.form.push_back(lxb[i] - lya[i] + dd[i]);
    return out;
}

Section dorfman_bracket(const Section& a, const Section& b) {
    require_len(b.vf, a.vf.size(), "section");
    Section out;
    out.vf = lie_bracket(a.vf, b.vf);
    const ExprVec lxb = lie_derivative_form(a.vf, b.form);
    const ExprVec iyda = exterior_derivative(a.form).left_apply(b.vf);
    for (std::size_t i = 0; i < lxb.size(); ++i) out.form.push_back(lxb[i] - iyda[i]);
    return out;
}

ThreeForm ThreeForm::zero(const Variables& vars, std::size_t n) {
    return ThreeForm(n, std::vector<ScalarExpr>(n * n * n, ScalarExpr(vars)));
}

ThreeForm ThreeForm::from_entries(const Variables& vars, std::size_t n, const std::vector<Entry>& entries) {
    ThreeForm h = zero(vars, n);
    auto at = [&](std::size_t i, std::size_t j, std::size_t k) -> ScalarExpr& { return h.c_[(i * n + j) * n + k]; };
    for (const auto& e : entries) {
        if (e.i >= n || e.j >= n || e.k >= n) throw DimensionMismatch("3-form index out of range");
        if (e.i == e.j || e.j == e.k || e.i == e.k) {
            if (!e.value.is_zero()) throw NotSkewSymmetric("3-form entry with a repeated index");
            continue;
        }
        const ScalarExpr v = e.value, m = -e.value;
        at(e.i, e.j, e.k) = v;
        at(e.j, e.k, e.i) = v;
        at(e.k, e.i, e.j) = v;
        at(e.j, e.i, e.k) = m;
        at(e.i, e.k, e.j) = m;
        at(e.k, e.j, e.i) = m;
    }
    // (dH)_ijkl = ∂_i H_jkl - ∂_j H_ikl + ∂_k H_ijl - ∂_l H_ijk
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                for (std::size_t l = k + 1; l < n; ++l) {
                    const ScalarExpr dh = h(j, k, l).differentiate(i) - h(i, k, l).differentiate(j) +
                                          h(i, j, l).differentiate(k) - h(i, j, k).differentiate(l);
                    if (!dh.is_zero())
                        throw NotClosed("3-form is not closed: (dH)_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                        std::to_string(k + 1) + std::to_string(l + 1) + " = " + dh.str());
                }
    return h;
}

ExprVec ThreeForm::contract(const ExprVec& x, const ExprVec& y) const {
    ExprVec out = zero_vec(vars_of(x), n_);
    for (std::size_t i = 0; i < n_; ++i) {
        if (x[i].is_zero()) continue;
        for (std::size_t j = 0; j < n_; ++j) {
            if (y[j].is_zero()) continue;
            const ScalarExpr xy = x[i] * y[j];
            for (std::size_t k = 0; k < n_; ++k)
                if (!(*this)(i, j, k).is_zero()) out[k] += xy * (*this)(i, j, k);
        }
    }
    return out;
}

ScalarExpr ThreeForm::evaluate_on(const ExprVec& x, const ExprVec& y, const ExprVec& z) const {
    return dirac::contract(contract(x, y), z);
}

Section twisted_courant_bracket(const Section& a, const Section& b, const ThreeForm& h) {
    Section out = courant_bracket(a, b);
    const ExprVec extra = h.contract(a.vf, b.vf);
    for (std::size_t k = 0; k < extra.size(); ++k) out.form[k] += extra[k];
    return out;
}

// ------------------------------------------------------------ polynomial maps

PolyMap::PolyMap(Variables source, Variables target, std::vector<Poly> components)
    : source_(std::move(source)), target_(std::move(target)), comps_(std::move(components)) {
    if (comps_.size() != target_.size()) throw DimensionMismatch("map needs one component per target variable");
    for (const auto& c : comps_)
        if (!(c.variables() == source_)) throw VariableSetMismatch("map component not over the source variables");
}

PolyMap PolyMap::identity(const Variables& vars) {
    std::vector<Poly> c;
    for (std::size_t i = 0; i < vars.size(); ++i) c.push_back(Poly::variable(vars, i));
    return PolyMap(vars, vars, std::move(c));
}

ExprMatrix PolyMap::jacobian() const {
    ExprMatrix j(target_.size(), source_.size(), ScalarExpr(source_));
    for (std::size_t a = 0; a < comps_.size(); ++a)
        for (std::size_t b = 0; b < source_.size(); ++b) j(a, b) = ScalarExpr(comps_[a].derivative(b));
    return j;
}

Point PolyMap::apply(const Point& p) const {
    if (p.size() != source_.size()) throw DimensionMismatch("point does not match the map source");
    Point out;
    for (const auto& c : comps_) out.push_back(c.evaluate(p));
    return out;
}

PolyMap PolyMap::after(const PolyMap& inner) const {
    if (!(inner.target_ == source_)) throw VariableSetMismatch("composition of maps with mismatched spaces");
    std::vector<Poly> c;
    for (const auto& p : comps_) c.push_back(p.substitute(inner.comps_));
    return PolyMap(inner.source_, target_, std::move(c));
}

bool PolyMap::is_identity() const {
    if (!(source_ == target_)) return false;
    for (std::size_t i = 0; i < comps_.size(); ++i)
        if (!(comps_[i] == Poly::variable(source_, i))) return false;
    return true;
}

ScalarExpr PolyMap::pull(const ScalarExpr& f) const {
    if (!(f.variables() == target_)) throw VariableSetMismatch("function is not over the map target");
    return f.substitute(comps_);
}

// ------------------------------------------------------------ probes

std::vector<Point> generate_probes(const Variables& vars, const ProbeOptions& opts,
                                   const std::function<bool(const Point&)>& accept) {
    std::vector<Point> out;
    for (const auto& p : opts.points) {
        if (p.size() != vars.size()) throw DimensionMismatch("probe point has the wrong dimension");
        out.push_back(p);
    }
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<long> num(-4, 4), den(1, 3);
    std::size_t made = 0, attempts = 0;
    const std::size_t limit = 200 * opts.count + 10;
    while (made < opts.count && attempts++ < limit) {
        Point p;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (attempts == 1) {
                p.emplace_back(0);
            } else {
                const long n = num(rng), d = den(rng);
                p.emplace_back(n, d);
            }
        }
        if (std::find(out.begin(), out.end(), p) != out.end()) continue;
        bool ok = false;
        try {
            ok = accept(p);
        } catch (const Error&) {
            ok = false;
        }
        if (!ok) continue;
        out.push_back(std::move(p));
        ++made;
    }
    return out;
}

// ------------------------------------------------------------ Dirac fields

const char* kind_name(DiracKind k) {
    switch (k) {
        case DiracKind::BivectorGraph: return "bivector";
        case DiracKind::TwoFormGraph: return "twoform";
        case DiracKind::DistributionPlusGauge: return "distribution";
        case DiracKind::Frame: return "frame";
        case DiracKind::GaugeShifted: return "gauge-shifted";
    }
    return "?";
}

namespace {

ExprMatrix rows_to_matrix(const std::vector<Section>& frame, const Variables& vars) {
    const std::size_t n = vars.size();
    ExprMatrix m(frame.size(), 2 * n, ScalarExpr(vars));
    for (std::size_t r = 0; r < frame.size(); ++r)
        for (std::size_t j = 0; j < n; ++j) {
            m(r, j) = frame[r].vf[j];
            m(r, n + j) = frame[r].form[j];
        }
    return m;
}

// Smallest-degree nonvanishing n×n minor of an n × 2n frame matrix.
std::optional<ScalarExpr> best_minor(const ExprMatrix& m) {
    const std::size_t n = m.rows(), c = m.cols();
    std::vector<std::size_t> cols(n);
    for (std::size_t i = 0; i < n; ++i) cols[i] = i;
    std::optional<ScalarExpr> best;
    std::size_t visited = 0;
    while (true) {
        ExprMatrix sub(n, n, m.zero());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) sub(i, j) = m(i, cols[j]);
        const ScalarExpr det = determinant(sub);
        if (!det.is_zero() && (!best || det.num().total_degree() < best->num().total_degree())) {
            best = det;
            if (det.num().is_constant()) return best;
        }
        if (++visited >= 256) return best;
        // next combination
        std::size_t i = n;
        while (i > 0 && cols[i - 1] == c - n + i - 1) --i;
        if (i == 0) return best;
        ++cols[i - 1];
        for (std::size_t j = i; j < n; ++j) cols[j] = cols[j - 1] + 1;
    }
}

}  // namespace

DiracField::DiracField(Variables vars, Data data, std::vector<Section> frame)
    : vars_(std::move(vars)), data_(std::move(data)), frame_(std::move(frame)), hint_(vars_) {
    const std::size_t n = vars_.size();
    if (frame_.size() != n) throw DimensionMismatch("a frame needs exactly n sections");
    for (const auto& s : frame_) {
        require_len(s.vf, n, "frame vector field");
        require_len(s.form, n, "frame 1-form");
        for (const auto& e : s.flat())
            if (!(e.variables() == vars_)) throw VariableSetMismatch("frame entry over a different variable set");
    }
    const ExprMatrix m = rows_to_matrix(frame_, vars_);
    const auto space = Subspace<ScalarExpr>::span(m);
    if (space.dim() < n)
        throw DegenerateFrame("frame has generic rank " + std::to_string(space.dim()) + " < " + std::to_string(n) +
                              ": every " + std::to_string(n) + "x" + std::to_string(n) + " minor vanishes identically");
    if (!is_lagrangian(space))
        throw NotLagrangian("frame is not isotropic for the pairing");
    generic_ = std::make_shared<const LinearDirac<ScalarExpr>>(LinearDirac<ScalarExpr>::from_subspace(space));

    Poly h = Poly::constant(vars_, Rational(1));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!m(i, j).is_polynomial()) h = lcm(h, m(i, j).den());
    const auto minor = best_minor(m);
    if (!minor) throw DegenerateFrame("no nonvanishing maximal minor found");
    if (!minor->num().is_constant()) h = lcm(h, minor->num());
    hint_ = h.monic();
}

DiracField DiracField::bivector_graph(const ExprMatrix& pi) {
    if (!pi.is_skew()) throw NotSkewSymmetric("bivector is not skew-symmetric");
    const Variables vars = pi.zero().variables();
    const std::size_t n = pi.rows();
    if (n != vars.size()) throw DimensionMismatch("bivector size differs from the number of variables");
    std::vector<Section> frame;
    for (std::size_t i = 0; i < n; ++i) {
        Section s{pi.row(i), zero_vec(vars, n)};
        s.form[i] = ScalarExpr::constant(vars, Rational(1));
        frame.push_back(std::move(s));
    }
    return DiracField(vars, Bivector{pi}, std::move(frame));
}

DiracField DiracField::twoform_graph(const ExprMatrix& omega) {
    if (!omega.is_skew()) throw NotSkewSymmetric("2-form is not skew-symmetric");
    const Variables vars = omega.zero().variables();
    const std::size_t n = omega.rows();
    if (n != vars.size()) throw DimensionMismatch("2-form size differs from the number of variables");
    std::vector<Section> frame;
    for (std::size_t i = 0; i < n; ++i) {
        Section s{zero_vec(vars, n), omega.row(i)};
        s.vf[i] = ScalarExpr::constant(vars, Rational(1));
        frame.push_back(std::move(s));
    }
    return DiracField(vars, TwoForm{omega}, std::move(frame));
}

DiracField DiracField::distribution(const Variables& vars, std::size_t n, const std::vector<ExprVec>& generators,
                                    const std::optional<ExprMatrix>& gauge) {
    if (n != vars.size()) throw DimensionMismatch("distribution dimension differs from the number of variables");
    for (const auto& g : generators) require_len(g, n, "distribution generator");
    if (gauge && (!gauge->is_skew() || gauge->rows() != n)) throw NotSkewSymmetric("gauge form is not a skew n×n matrix");
    const ScalarExpr zero(vars);
    const auto f = Subspace<ScalarExpr>::span(generators, n, zero);
    std::vector<ExprVec> basis;
    if (f.dim() == generators.size()) {
        basis = generators;
    } else {
        for (const auto& r : f.basis().row_list()) basis.push_back(clear_denominators(r));
    }
    std::vector<Section> frame;
    for (const auto& x : basis) {
        Section s{x, zero_vec(vars, n)};
        if (gauge) s.form = gauge->left_apply(x);
        frame.push_back(std::move(s));
    }
    for (const auto& g : annihilator(f).basis().row_list()) frame.push_back({zero_vec(vars, n), clear_denominators(g)});
    return DiracField(vars, Distribution{generators, gauge}, std::move(frame));
}

DiracField DiracField::from_frame(const Variables& vars, const std::vector<Section>& frame) {
    return DiracField(vars, RawFrame{}, frame);
}

DiracField DiracField::recognize(const LinearDirac<ScalarExpr>& generic, std::optional<DiracKind> prefer) {
    const Variables vars = generic.zero().variables();
    const bool twoform_first = prefer && *prefer == DiracKind::TwoFormGraph;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const bool try_twoform = (attempt == 0) == twoform_first;
        try {
            return try_twoform ? twoform_graph(as_twoform(generic)) : bivector_graph(as_bivector(generic));
        } catch (const TransversalityFailed&) {
        }
    }
    std::vector<Section> frame;
    for (const auto& r : generic.space().basis().row_list()) frame.push_back(Section::from_flat(clear_denominators(r)));
    return from_frame(vars, frame);
}

DiracField DiracField::gauge(const ExprMatrix& b) const {
    if (!b.is_skew() || b.rows() != dim()) throw NotSkewSymmetric("gauge form is not a skew n×n matrix");
    std::vector<Section> frame = frame_;
    for (auto& s : frame) {
        const ExprVec ixb = b.left_apply(s.vf);
        for (std::size_t j = 0; j < s.form.size(); ++j) s.form[j] += ixb[j];
    }
    return DiracField(vars_, Gauged{std::make_shared<const DiracField>(*this), b}, std::move(frame));
}

DiracKind DiracField::kind() const noexcept {
    switch (data_.index()) {
        case 0: return DiracKind::BivectorGraph;
        case 1: return DiracKind::TwoFormGraph;
        case 2: return DiracKind::DistributionPlusGauge;
        case 3: return DiracKind::Frame;
        default: return DiracKind::GaugeShifted;
    }
}

ExprMatrix DiracField::frame_matrix() const { return rows_to_matrix(frame_, vars_); }

bool DiracField::contains(const Section& s) const {
    require_len(s.vf, dim(), "section vector field");
    require_len(s.form, dim(), "section 1-form");
    const ExprVec v = s.flat();
    return generic_->space().contains(std::span<const ScalarExpr>(v));
}

LinearDirac<Rational> DiracField::pointwise(const Point& p) const {
    if (p.size() != dim()) throw DimensionMismatch("point has the wrong dimension");
    std::optional<Matrix<Rational>> m;
    try {
        m = evaluate(frame_matrix(), p);
    } catch (const DenominatorVanishes& e) {
        throw SingularPoint("frame undefined at " + point_str(p) + ": " + e.what());
    }
    const auto s = Subspace<Rational>::span(*m);
    if (s.dim() < dim()) throw SingularPoint("frame degenerates at " + point_str(p));
    return LinearDirac<Rational>::from_subspace(s);
}

// ------------------------------------------------------------ integrability

bool CourantTensor::is_zero() const {
    return std::all_of(entries.begin(), entries.end(), [](const ScalarExpr& e) { return e.is_zero(); });
}

CourantTensor courant_tensor(const DiracField& d) {
    const std::size_t n = d.dim();
    CourantTensor t{n, std::vector<ScalarExpr>(n * n * n, ScalarExpr(d.variables()))};
    const auto& a = d.frame();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Section br = courant_bracket(a[i], a[j]);
            for (std::size_t k = 0; k < n; ++k) {
                const ScalarExpr v = pairing(br, a[k]);
                t.entries[(i * n + j) * n + k] = v;
                t.entries[(j * n + i) * n + k] = -v;
            }
        }
    return t;
}

IntegrabilityVerdict is_integrable(const DiracField& d, const ProbeOptions& probes) {
    const CourantTensor t = courant_tensor(d);
    const std::size_t n = d.dim();
    const Variables& vars = d.variables();

    // Cross-validate against the kind-specific formulas.
    if (const auto* b = std::get_if<DiracField::Bivector>(&d.data())) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) {
                    const ScalarExpr jac = jacobiator(b->pi, ScalarExpr::variable(vars, i), ScalarExpr::variable(vars, j),
                                                      ScalarExpr::variable(vars, k));
                    if (!(jac == t(i, j, k))) throw ConsistencyFailure("Courant tensor differs from the Jacobiator");
                }
    } else if (const auto* w = std::get_if<DiracField::TwoForm>(&d.data())) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    if (!(d_twoform(w->omega, d.frame()[i].vf, d.frame()[j].vf, d.frame()[k].vf) == t(i, j, k)))
                        throw ConsistencyFailure("Courant tensor differs from d(omega)");
    }

    IntegrabilityVerdict v;
    for (std::size_t i = 0; i < n && v.integrable; ++i)
        for (std::size_t j = i + 1; j < n && v.integrable; ++j)
            for (std::size_t k = 0; k < n && v.integrable; ++k) {
                const ScalarExpr& e = t(i, j, k);
                if (e.is_zero()) continue;
                v.integrable = false;
                IntegrabilityVerdict::Witness w{i, j, k, e, {}, Rational(0)};
                for (std::size_t count : {probes.count, std::size_t{256}}) {
                    ProbeOptions opts = probes;
                    opts.count = count;
                    const auto pts = generate_probes(vars, opts, [&](const Point& p) {
                        return !d.singular_locus_hint().evaluate(p).is_zero() && !e.evaluate(p).is_zero();
                    });
                    for (const auto& p : pts) {
                        try {
                            const Rational val = e.evaluate(p);
                            if (!val.is_zero() && !d.singular_locus_hint().evaluate(p).is_zero()) {
                                w.point = p;
                                w.value = val;
                                break;
                            }
                        } catch (const DenominatorVanishes&) {
                        }
                    }
                    if (!w.point.empty()) break;
                }
                v.witness = std::move(w);
            }
    return v;
}

// ------------------------------------------------------------ hamiltonian calculus

namespace {

std::pair<ExprMatrix, ExprMatrix> frame_blocks(const DiracField& d) {
    const std::size_t n = d.dim();
    ExprMatrix xs(n, n, ScalarExpr(d.variables())), as(n, n, ScalarExpr(d.variables()));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < n; ++j) {
            xs(r, j) = d.frame()[r].vf[j];
            as(r, j) = d.frame()[r].form[j];
        }
    return {xs, as};
}

}  // namespace

HamiltonianField hamiltonian_vf(const DiracField& d, const ScalarExpr& f) {
    if (!(f.variables() == d.variables())) throw VariableSetMismatch("function over a different variable set");
    const auto [xs, as] = frame_blocks(d);
    const ExprMatrix ast = as.transpose();
    const ExprVec df = gradient(f);
    const auto c = solve(ast, std::span<const ScalarExpr>(df));
    if (!c) throw NotAdmissible("d(" + f.str() + ") is not in the covector projection of L");
    HamiltonianField h{xs.left_apply(*c), {}};
    const auto k = kernel(ast);
    std::vector<ExprVec> kv;
    for (const auto& row : k.basis().row_list()) kv.push_back(xs.left_apply(row));
    for (const auto& row : Subspace<ScalarExpr>::span(kv, d.dim(), ScalarExpr(d.variables())).basis().row_list())
        h.kernel_basis.push_back(clear_denominators(row));
    return h;
}

ScalarExpr admissible_bracket(const DiracField& d, const ScalarExpr& f, const ScalarExpr& g) {
    const HamiltonianField hf = hamiltonian_vf(d, f);
    (void)hamiltonian_vf(d, g);
    const ExprVec dg = gradient(g);
    const ScalarExpr value = contract(dg, hf.particular);
    ExprVec shifted = hf.particular;
    for (const auto& k : hf.kernel_basis)
        for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += k[i];
    if (!(contract(dg, shifted) == value))
        throw ConsistencyFailure("bracket depends on the choice of hamiltonian vector field");
    return value;
}

// ------------------------------------------------------------ images along maps

bool CleanReport::clean_at_probes() const {
    return std::none_of(probes.begin(), probes.end(), [](const ProbeRank& p) { return p.jump; });
}

std::vector<Point> CleanReport::flagged() const {
    std::vector<Point> out;
    for (const auto& p : probes)
        if (p.jump) out.push_back(p.point);
    return out;
}

namespace {

// dim of {(0, β) ∈ L | Jᵀβ = 0}, L ⊂ F^{2n}, J: n × m.
template <class F>
std::size_t conormal_clean_dim(const Subspace<F>& l, const Matrix<F>& j) {
    const std::size_t n = l.ambient_dim() / 2;
    std::vector<Vec<F>> gens;
    for (const auto& b : kernel(j.transpose()).basis().row_list()) {
        Vec<F> x(n, l.zero());
        x.insert(x.end(), b.begin(), b.end());
        gens.push_back(std::move(x));
    }
    return intersect(l, Subspace<F>::span(gens, 2 * n, l.zero())).dim();
}

// dim of {(v, 0) ∈ L | J v = 0}, L ⊂ F^{2m}.
template <class F>
std::size_t tangent_clean_dim(const Subspace<F>& l, const Matrix<F>& j) {
    const std::size_t m = l.ambient_dim() / 2;
    std::vector<Vec<F>> gens;
    for (const auto& k : kernel(j).basis().row_list()) {
        Vec<F> x = k;
        x.resize(2 * m, l.zero());
        gens.push_back(std::move(x));
    }
    return intersect(l, Subspace<F>::span(gens, 2 * m, l.zero())).dim();
}

// Frame of `d` composed with a polynomial map into d's space, as a generic structure.
LinearDirac<ScalarExpr> pull_frame(const DiracField& d, const PolyMap& along) {
    const std::size_t n = d.dim();
    const ScalarExpr zero(along.source());
    std::vector<ExprVec> rows;
    try {
        for (const auto& s : d.frame()) {
            ExprVec r;
            for (const auto& e : s.flat()) r.push_back(e.substitute(along.components()));
            rows.push_back(std::move(r));
        }
    } catch (const DenominatorVanishes& e) {
        throw DegenerateFrame(std::string("frame is undefined along the map: ") + e.what());
    }
    const auto space = Subspace<ScalarExpr>::span(rows, 2 * n, zero);
    if (space.dim() != n) throw DegenerateFrame("frame degenerates along the image of the map");
    return LinearDirac<ScalarExpr>::from_subspace(space);
}

std::optional<DiracKind> preferred(const DiracField& d) {
    if (d.kind() == DiracKind::TwoFormGraph || d.kind() == DiracKind::BivectorGraph) return d.kind();
    return std::nullopt;
}

bool hint_ok(const DiracField& d, const Point& p) { return !d.singular_locus_hint().evaluate(p).is_zero(); }

}  // namespace

BackwardImage backward_image(const DiracField& d_n, const PolyMap& phi, const ProbeOptions& probes) {
    if (!(phi.target() == d_n.variables())) throw VariableSetMismatch("map target differs from the Dirac structure's space");
    const LinearDirac<ScalarExpr> ln = pull_frame(d_n, phi);
    const ExprMatrix j = phi.jacobian();
    const LinearDirac<ScalarExpr> lb = backward(ln, LinearMap<ScalarExpr>{j});
    BackwardImage out{DiracField::recognize(lb, preferred(d_n)), {}};
    out.report.generic_rank = conormal_clean_dim(ln.space(), j);

    const auto pts = generate_probes(phi.source(), probes, [&](const Point& p) { return hint_ok(d_n, phi.apply(p)); });
    for (const auto& p : pts) {
        ProbeRank pr{p, false, 0, false, std::nullopt, phi.apply(p)};
        try {
            const LinearDirac<Rational> lq = d_n.pointwise(pr.image);
            const Matrix<Rational> jp = evaluate(j, p);
            pr.rank = conormal_clean_dim(lq.space(), jp);
            pr.jump = pr.rank != out.report.generic_rank;
            pr.fiber = backward(lq, LinearMap<Rational>{jp});
        } catch (const SingularPoint&) {
            pr.singular = true;
        }
        out.report.probes.push_back(std::move(pr));
    }
    return out;
}

ForwardImage forward_image(const DiracField& d_m, const PolyMap& phi,
                           const std::vector<std::pair<Point, Point>>& fibre_pairs,
                           const std::optional<PolyMap>& section, const ProbeOptions& probes) {
    if (!(phi.source() == d_m.variables())) throw VariableSetMismatch("map source differs from the Dirac structure's space");
    const std::size_t n = phi.target().size();
    const ExprMatrix j = phi.jacobian();
    auto jac_at = [&](const Point& p) {
        Matrix<Rational> jp = evaluate(j, p);
        if (rank(jp) != n) throw NotASubmersionAtProbe("d(phi) has rank < " + std::to_string(n) + " at " + point_str(p));
        return jp;
    };

    ForwardImage out;
    out.report.generic_rank = tangent_clean_dim(d_m.generic().space(), j);

    const auto pts = generate_probes(phi.source(), probes, [&](const Point& p) {
        return hint_ok(d_m, p) && rank(evaluate(j, p)) == n;
    });
    for (const auto& p : pts) {
        const Matrix<Rational> jp = jac_at(p);
        ProbeRank pr{p, false, 0, false, std::nullopt, phi.apply(p)};
        try {
            const LinearDirac<Rational> lp = d_m.pointwise(p);
            pr.rank = tangent_clean_dim(lp.space(), jp);
            pr.jump = pr.rank != out.report.generic_rank;
            pr.fiber = forward(lp, LinearMap<Rational>{jp});
        } catch (const SingularPoint&) {
            pr.singular = true;
        }
        out.report.probes.push_back(std::move(pr));
    }

    for (const auto& [x, y] : fibre_pairs) {
        if (!(phi.apply(x) == phi.apply(y)))
            throw PreconditionError("probe pair " + point_str(x) + ", " + point_str(y) + " has different images");
        const auto fx = forward(d_m.pointwise(x), LinearMap<Rational>{jac_at(x)});
        const auto fy = forward(d_m.pointwise(y), LinearMap<Rational>{jac_at(y)});
        if (!(fx == fy))
            throw InvarianceViolated("forward fibers differ at " + point_str(x) + " and " + point_str(y));
        ++out.invariance_pairs_checked;
    }

    if (section) {
        if (!(section->source() == phi.target()) || !(section->target() == phi.source()))
            throw VariableSetMismatch("section must map the target back into the source");
        if (!phi.after(*section).is_identity()) throw PreconditionError("section is not a right inverse of the map");
        const LinearDirac<ScalarExpr> lm = pull_frame(d_m, *section);
        ExprMatrix js(j.rows(), j.cols(), ScalarExpr(phi.target()));
        for (std::size_t a = 0; a < j.rows(); ++a)
            for (std::size_t b = 0; b < j.cols(); ++b) js(a, b) = section->pull(j(a, b));
        out.field = DiracField::recognize(forward(lm, LinearMap<ScalarExpr>{js}), preferred(d_m));
    }
    return out;
}

namespace {

DiracMapVerdict check_mode(const DiracField& d_m, const DiracField& d_n, const PolyMap& phi, MapMode mode,
                           const std::vector<Point>& pts) {
    DiracMapVerdict v;
    const ExprMatrix j = phi.jacobian();
    if (mode == MapMode::Backward) {
        const LinearDirac<ScalarExpr> lb = backward(pull_frame(d_n, phi), LinearMap<ScalarExpr>{j});
        v.generic_ok = lb == d_m.generic();
    }
    for (const auto& p : pts) {
        std::optional<LinearDirac<Rational>> lm, ln;
        try {
            lm = d_m.pointwise(p);
            ln = d_n.pointwise(phi.apply(p));
        } catch (const SingularPoint&) {
            continue;
        }
        const LinearMap<Rational> jp{evaluate(j, p)};
        const bool ok = mode == MapMode::Backward ? backward(*ln, jp) == *lm : forward(*lm, jp) == *ln;
        if (!ok) v.failing_probes.push_back(p);
    }
    v.holds = v.generic_ok && v.failing_probes.empty();
    return v;
}

}  // namespace

DiracMapVerdict check_dirac_map(const DiracField& d_m, const DiracField& d_n, const PolyMap& phi, MapMode mode,
                                const ProbeOptions& probes, const std::optional<PolyMap>& inverse) {
    if (!(phi.source() == d_m.variables()) || !(phi.target() == d_n.variables()))
        throw VariableSetMismatch("map does not match the two Dirac structures");
    const auto pts = generate_probes(phi.source(), probes,
                                     [&](const Point& p) { return hint_ok(d_m, p) && hint_ok(d_n, phi.apply(p)); });
    DiracMapVerdict v = check_mode(d_m, d_n, phi, mode, pts);
    if (inverse) {
        if (!phi.after(*inverse).is_identity() || !inverse->after(phi).is_identity())
            throw PreconditionError("supplied inverse is not a two-sided inverse of the map");
        const MapMode other = mode == MapMode::Backward ? MapMode::Forward : MapMode::Backward;
        const bool other_holds = check_mode(d_m, d_n, phi, other, pts).holds;
        if (other_holds != v.holds)
            throw ConsistencyFailure("b-Dirac and f-Dirac verdicts differ for a diffeomorphism");
        v.other_mode = other_holds;
    }
    return v;
}

bool is_invariant_under(const DiracField& d, const std::vector<ExprVec>& z_fields) {
    for (const auto& z : z_fields) {
        require_len(z, d.dim(), "vector field");
        for (const auto& a : d.frame()) {
            const Section lz{lie_bracket(z, a.vf), lie_derivative_form(z, a.form)};
            if (!d.contains(lz)) return false;
        }
    }
    return true;
}

AlgebroidBracket anchor_and_algebroid_bracket(const DiracField& d, const Section& a, const Section& b) {
    if (!d.contains(a)) throw NotASection("first argument is not a section of L");
    if (!d.contains(b)) throw NotASection("second argument is not a section of L");
    AlgebroidBracket out{a.vf, courant_bracket(a, b)};
    if (courant_tensor(d).is_zero() && !d.contains(out.bracket))
        throw ConsistencyFailure("bracket of sections left an integrable L");
    return out;
}

}  // namespace dirac
