#include "dirac/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dirac/error.hpp"

namespace dirac {

// ---------------------------------------------------------------- Variables

Variables::Variables() : names_(std::make_shared<const std::vector<std::string>>()) {}

Variables::Variables(std::vector<std::string> names) {
    if (names.size() > kMaxVariables)
        throw PreconditionError("at most " + std::to_string(kMaxVariables) + " variables supported");
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (names[i] == names[j]) throw PreconditionError("duplicate variable '" + names[i] + "'");
    names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
}

Variables::Variables(std::initializer_list<std::string> names)
    : Variables(std::vector<std::string>(names)) {}

std::optional<std::size_t> Variables::find(std::string_view name) const {
    for (std::size_t i = 0; i < names_->size(); ++i)
        if ((*names_)[i] == name) return i;
    return std::nullopt;
}

std::size_t Variables::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw UnknownVariable("unknown variable '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- Monomial

Monomial Monomial::operator*(const Monomial& o) const {
    Monomial r;
    for (std::size_t i = 0; i < kMaxVariables; ++i) {
        const unsigned e = unsigned(exps[i]) + o.exps[i];
        if (e > std::numeric_limits<std::uint16_t>::max()) throw Error("exponent overflow");
        r.exps[i] = static_cast<std::uint16_t>(e);
    }
    r.degree = degree + o.degree;
    return r;
}

bool Monomial::divides(const Monomial& o) const {
    if (degree > o.degree) return false;
    for (std::size_t i = 0; i < kMaxVariables; ++i)
        if (exps[i] > o.exps[i]) return false;
    return true;
}

Monomial Monomial::quotient_of(const Monomial& o) const {
    Monomial r;
    for (std::size_t i = 0; i < kMaxVariables; ++i) r.exps[i] = o.exps[i] - exps[i];
    r.degree = o.degree - degree;
    return r;
}

int compare_grlex(const Monomial& a, const Monomial& b) {
    if (a.degree != b.degree) return a.degree < b.degree ? -1 : 1;
    for (std::size_t i = 0; i < kMaxVariables; ++i)
        if (a.exps[i] != b.exps[i]) return a.exps[i] < b.exps[i] ? -1 : 1;
    return 0;
}

// ---------------------------------------------------------------- Poly

namespace {

bool term_greater(const Poly::Term& a, const Poly::Term& b) {
    return compare_grlex(a.mono, b.mono) > 0;
}

// Sorts descending and merges equal monomials, dropping zeros.
void normalize_terms(std::vector<Poly::Term>& terms) {
    std::sort(terms.begin(), terms.end(), term_greater);
    std::size_t out = 0;
    for (std::size_t i = 0; i < terms.size();) {
        Poly::Term t = std::move(terms[i]);
        std::size_t j = i + 1;
        while (j < terms.size() && terms[j].mono == t.mono) {
            t.coeff += terms[j].coeff;
            ++j;
        }
        if (!t.coeff.is_zero()) terms[out++] = std::move(t);
        i = j;
    }
    terms.resize(out);
}

}  // namespace

Poly::Poly(Variables vars, std::vector<Term> terms) : vars_(std::move(vars)), terms_(std::move(terms)) {
    for (const auto& t : terms_)
        for (std::size_t i = vars_.size(); i < kMaxVariables; ++i)
            if (t.mono.exps[i]) throw DimensionMismatch("monomial uses a variable outside the space");
    normalize_terms(terms_);
}

Poly Poly::constant(Variables vars, const Rational& c) {
    Poly p(std::move(vars));
    if (!c.is_zero()) p.terms_.push_back({Monomial{}, c});
    return p;
}

Poly Poly::variable(Variables vars, std::size_t index) {
    if (index >= vars.size()) throw UnknownVariable("variable index out of range");
    Poly p(std::move(vars));
    Monomial m;
    m.exps[index] = 1;
    m.degree = 1;
    p.terms_.push_back({m, Rational(1)});
    return p;
}

Rational Poly::constant_value() const {
    if (!is_constant()) throw PreconditionError("polynomial is not constant");
    return terms_.empty() ? Rational(0) : terms_[0].coeff;
}

unsigned Poly::degree_in(std::size_t var) const {
    unsigned d = 0;
    for (const auto& t : terms_) d = std::max<unsigned>(d, t.mono.exps[var]);
    return d;
}

void Poly::check_compatible(const Poly& o) const {
    if (!(vars_ == o.vars_)) throw VariableSetMismatch("polynomials over different variable sets");
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
}

Poly Poly::operator+(const Poly& o) const {
    check_compatible(o);
    Poly r(vars_);
    r.terms_.reserve(terms_.size() + o.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < terms_.size() && j < o.terms_.size()) {
        const int c = compare_grlex(terms_[i].mono, o.terms_[j].mono);
        if (c > 0) {
            r.terms_.push_back(terms_[i++]);
        } else if (c < 0) {
            r.terms_.push_back(o.terms_[j++]);
        } else {
            Rational s = terms_[i].coeff + o.terms_[j].coeff;
            if (!s.is_zero()) r.terms_.push_back({terms_[i].mono, std::move(s)});
            ++i;
            ++j;
        }
    }
    for (; i < terms_.size(); ++i) r.terms_.push_back(terms_[i]);
    for (; j < o.terms_.size(); ++j) r.terms_.push_back(o.terms_[j]);
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
    check_compatible(o);
    Poly r(vars_);
    if (is_zero() || o.is_zero()) return r;
    r.terms_.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) r.terms_.push_back({a.mono * b.mono, a.coeff * b.coeff});
    normalize_terms(r.terms_);
    return r;
}

Poly Poly::operator*(const Rational& c) const {
    if (c.is_zero()) return Poly(vars_);
    Poly r = *this;
    for (auto& t : r.terms_) t.coeff *= c;
    return r;
}

Poly Poly::pow(unsigned e) const {
    Poly result = constant(vars_, Rational(1));
    Poly base = *this;
    while (e) {
        if (e & 1u) result = result * base;
        e >>= 1u;
        if (e) base = base * base;
    }
    return result;
}

Poly Poly::derivative(std::size_t var) const {
    if (var >= vars_.size()) throw UnknownVariable("variable index out of range");
    Poly r(vars_);
    for (const auto& t : terms_) {
        const unsigned e = t.mono.exps[var];
        if (!e) continue;
        Term d{t.mono, t.coeff * Rational(long(e))};
        d.mono.exps[var] = static_cast<std::uint16_t>(e - 1);
        d.mono.degree -= 1;
        r.terms_.push_back(std::move(d));
    }
    // Differentiation is injective on the surviving monomials, but the
    // grlex position can change, so re-sort.
    normalize_terms(r.terms_);
    return r;
}

Rational Poly::evaluate(std::span<const Rational> point) const {
    if (point.size() != vars_.size()) throw DimensionMismatch("point dimension does not match variables");
    std::vector<std::vector<Rational>> powers(point.size());
    Rational sum(0);
    for (const auto& t : terms_) {
        Rational v = t.coeff;
        for (std::size_t i = 0; i < point.size(); ++i) {
            const unsigned e = t.mono.exps[i];
            if (!e) continue;
            auto& pw = powers[i];
            if (pw.empty()) pw.push_back(Rational(1));
            while (pw.size() <= e) pw.push_back(pw.back() * point[i]);
            v *= pw[e];
        }
        sum += v;
    }
    return sum;
}

double Poly::evaluate(std::span<const double> point) const {
    if (point.size() != vars_.size()) throw DimensionMismatch("point dimension does not match variables");
    double sum = 0.0;
    for (const auto& t : terms_) {
        double v = t.coeff.to_double();
        for (std::size_t i = 0; i < point.size(); ++i) {
            const unsigned e = t.mono.exps[i];
            if (e == 1) v *= point[i];
            else if (e) v *= std::pow(point[i], double(e));
        }
        sum += v;
    }
    return sum;
}

Poly Poly::substitute(std::span<const Poly> images) const {
    if (images.size() != vars_.size()) throw DimensionMismatch("substitution arity mismatch");
    if (images.empty()) return constant(Variables(), is_zero() ? Rational(0) : terms_[0].coeff);
    const Variables& target = images[0].variables();
    for (const auto& im : images)
        if (!(im.variables() == target)) throw VariableSetMismatch("substitution images over different spaces");
    std::vector<std::vector<Poly>> powers(images.size());
    Poly sum(target);
    for (const auto& t : terms_) {
        Poly v = constant(target, t.coeff);
        for (std::size_t i = 0; i < images.size(); ++i) {
            const unsigned e = t.mono.exps[i];
            if (!e) continue;
            auto& pw = powers[i];
            if (pw.empty()) pw.push_back(constant(target, Rational(1)));
            while (pw.size() <= e) pw.push_back(pw.back() * images[i]);
            v = v * pw[e];
        }
        sum += v;
    }
    return sum;
}

std::vector<Poly> Poly::coefficients_in(std::size_t var) const {
    std::vector<Poly> out(degree_in(var) + 1, Poly(vars_));
    std::vector<std::vector<Term>> buckets(out.size());
    for (const auto& t : terms_) {
        Term s = t;
        const unsigned e = s.mono.exps[var];
        s.mono.exps[var] = 0;
        s.mono.degree -= e;
        buckets[e].push_back(std::move(s));
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = Poly(vars_, std::move(buckets[k]));
    return out;
}

Poly Poly::monic() const {
    if (is_zero() || leading_coeff().is_one()) return *this;
    return *this * (Rational(1) / leading_coeff());
}

bool operator==(const Poly& a, const Poly& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
}

namespace {

std::string monomial_str(const Variables& vars, const Monomial& m) {
    std::string s;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (!m.exps[i]) continue;
        if (!s.empty()) s += '*';
        s += vars.name(i);
        if (m.exps[i] > 1) s += '^' + std::to_string(m.exps[i]);
    }
    return s;
}

}  // namespace

std::string Poly::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : terms_) {
        const bool negative = t.coeff.sign() < 0;
        const Rational mag = t.coeff.abs();
        if (first) {
            if (negative) out += '-';
        } else {
            out += negative ? " - " : " + ";
        }
        first = false;
        const std::string m = monomial_str(vars_, t.mono);
        if (m.empty()) {
            out += mag.str();
        } else if (mag.is_one()) {
            out += m;
        } else {
            out += mag.str() + "*" + m;
        }
    }
    return out;
}

// ---------------------------------------------------------------- division, gcd

std::optional<Poly> divide_exact(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw DenominatorVanishes("division by the zero polynomial");
    if (!(a.variables() == b.variables())) throw VariableSetMismatch("polynomials over different variable sets");
    Poly quotient(a.variables());
    if (a.is_zero()) return quotient;
    if (b.is_constant()) return a * (Rational(1) / b.constant_value());
    Poly rem = a;
    std::vector<Poly::Term> q;
    const Monomial& lb = b.leading_monomial();
    const Rational inv_lc = Rational(1) / b.leading_coeff();
    while (!rem.is_zero()) {
        const auto& lt = rem.terms().front();
        if (!lb.divides(lt.mono)) return std::nullopt;
        Poly::Term t{lb.quotient_of(lt.mono), lt.coeff * inv_lc};
        q.push_back(t);
        rem = rem - b * Poly(a.variables(), {t});
    }
    return Poly(a.variables(), std::move(q));
}

namespace {

Poly one_like(const Poly& p) { return Poly::constant(p.variables(), Rational(1)); }

Poly content_in(const Poly& p, std::size_t var);

Poly pseudo_remainder(const Poly& a, const Poly& b, std::size_t var) {
    const unsigned db = b.degree_in(var);
    const Poly lb = b.coefficients_in(var).back();
    const Poly x = Poly::variable(a.variables(), var);
    Poly r = a;
    while (!r.is_zero() && r.degree_in(var) >= db) {
        const unsigned dr = r.degree_in(var);
        const Poly lr = r.coefficients_in(var).back();
        r = lb * r - lr * x.pow(dr - db) * b;
    }
    return r;
}

Poly primitive_part_in(const Poly& p, std::size_t var) {
    if (p.is_zero()) return p;
    const Poly c = content_in(p, var);
    auto q = divide_exact(p, c);
    if (!q) throw ConsistencyFailure("content does not divide polynomial");
    return *q;
}

Poly content_in(const Poly& p, std::size_t var) {
    Poly g(p.variables());
    for (const auto& c : p.coefficients_in(var)) {
        if (c.is_zero()) continue;
        g = gcd(g, c);
        if (g.is_constant()) return one_like(p);
    }
    return g;
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) {
    if (!(a.variables() == b.variables())) throw VariableSetMismatch("polynomials over different variable sets");
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    if (a.is_constant() || b.is_constant()) return one_like(a);
    if (a.size() == 1 && b.size() == 1) {
        // gcd of monomials is the componentwise-minimal monomial
        Monomial m;
        const auto& ma = a.leading_monomial();
        const auto& mb = b.leading_monomial();
        for (std::size_t i = 0; i < kMaxVariables; ++i) {
            m.exps[i] = std::min(ma.exps[i], mb.exps[i]);
            m.degree += m.exps[i];
        }
        return Poly(a.variables(), {{m, Rational(1)}});
    }
    if (a == b) return a.monic();
    {
        const Poly& small = a.total_degree() <= b.total_degree() ? a : b;
        const Poly& big = &small == &a ? b : a;
        if (divide_exact(big, small)) return small.monic();
    }

    const std::size_t n = a.variables().size();
    // A variable present in only one argument cannot occur in the gcd.
    for (std::size_t v = 0; v < n; ++v) {
        const bool in_a = a.depends_on(v), in_b = b.depends_on(v);
        if (in_a && !in_b) return gcd(content_in(a, v), b);
        if (in_b && !in_a) return gcd(a, content_in(b, v));
    }
    std::size_t var = n;
    unsigned best = std::numeric_limits<unsigned>::max();
    for (std::size_t v = 0; v < n; ++v) {
        if (!a.depends_on(v)) continue;
        const unsigned d = std::max(a.degree_in(v), b.degree_in(v));
        if (d < best) {
            best = d;
            var = v;
        }
    }

    const Poly ca = content_in(a, var), cb = content_in(b, var);
    const Poly c = gcd(ca, cb);
    Poly pa = *divide_exact(a, ca);
    Poly pb = *divide_exact(b, cb);
    if (pa.degree_in(var) < pb.degree_in(var)) std::swap(pa, pb);

    Poly g(a.variables());
    while (true) {
        if (pb.is_zero()) {
            g = pa;
            break;
        }
        if (pb.degree_in(var) == 0) {
            g = one_like(a);
            break;
        }
        Poly r = pseudo_remainder(pa, pb, var);
        pa = std::move(pb);
        pb = primitive_part_in(r, var);
    }
    return (c * primitive_part_in(g, var)).monic();
}

Poly lcm(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly(a.variables());
    const Poly g = gcd(a, b);
    return (*divide_exact(a, g) * b).monic();
}

}  // namespace dirac
