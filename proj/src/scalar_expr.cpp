#include "dirac/scalar_expr.hpp"

#include <cctype>

#include "dirac/error.hpp"

namespace dirac {

ScalarExpr::ScalarExpr(Poly p) : num_(std::move(p)), den_(Poly::constant(num_.variables(), Rational(1))) {}

ScalarExpr::ScalarExpr(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
    if (!(num_.variables() == den_.variables()))
        throw VariableSetMismatch("numerator and denominator over different variable sets");
    if (den_.is_zero()) throw DenominatorVanishes("denominator is the zero polynomial");
    canonicalize();
}

void ScalarExpr::canonicalize() {
    if (num_.is_zero()) {
        den_ = Poly::constant(num_.variables(), Rational(1));
        return;
    }
    if (!den_.is_constant()) {
        const Poly g = gcd(num_, den_);
        if (!g.is_constant()) {
            num_ = *divide_exact(num_, g);
            den_ = *divide_exact(den_, g);
        }
    }
    const Rational lc = den_.leading_coeff();
    if (!lc.is_one()) {
        const Rational inv = Rational(1) / lc;
        num_ = num_ * inv;
        den_ = den_ * inv;
    }
}

ScalarExpr ScalarExpr::constant(const Variables& vars, const Rational& c) {
    return ScalarExpr(Poly::constant(vars, c));
}

ScalarExpr ScalarExpr::variable(const Variables& vars, std::size_t index) {
    return ScalarExpr(Poly::variable(vars, index));
}

ScalarExpr ScalarExpr::variable(const Variables& vars, std::string_view name) {
    return variable(vars, vars.index_of(name));
}

Rational ScalarExpr::constant_value() const {
    if (!is_constant()) throw PreconditionError("expression is not constant");
    return num_.constant_value() / den_.constant_value();
}

ScalarExpr ScalarExpr::operator-() const { return ScalarExpr(-num_, den_, Canonical{}); }

ScalarExpr ScalarExpr::operator+(const ScalarExpr& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    if (is_polynomial() && o.is_polynomial()) return ScalarExpr(num_ + o.num_, den_, Canonical{});
    if (den_ == o.den_) return ScalarExpr(num_ + o.num_, den_);
    const Poly g = gcd(den_, o.den_);
    const Poly da = *divide_exact(den_, g);
    const Poly db = *divide_exact(o.den_, g);
    return ScalarExpr(num_ * db + o.num_ * da, den_ * db);
}

ScalarExpr ScalarExpr::operator-(const ScalarExpr& o) const { return *this + (-o); }

ScalarExpr ScalarExpr::operator*(const ScalarExpr& o) const {
    if (is_zero()) return *this;
    if (o.is_zero()) return o;
    if (is_polynomial() && o.is_polynomial()) return ScalarExpr(num_ * o.num_, den_, Canonical{});
    // Cross-cancel so the product is already reduced.
    const Poly g1 = gcd(num_, o.den_);
    const Poly g2 = gcd(o.num_, den_);
    const Poly n = *divide_exact(num_, g1) * *divide_exact(o.num_, g2);
    const Poly d = *divide_exact(den_, g2) * *divide_exact(o.den_, g1);
    ScalarExpr r(n, d, Canonical{});
    const Rational lc = r.den_.leading_coeff();
    if (!lc.is_one()) {
        r.num_ = r.num_ * (Rational(1) / lc);
        r.den_ = r.den_ * (Rational(1) / lc);
    }
    return r;
}

ScalarExpr ScalarExpr::operator/(const ScalarExpr& o) const {
    if (o.is_zero()) throw DenominatorVanishes("division by the zero function");
    Poly n = o.den_;
    Poly d = o.num_;
    const Rational lc = d.leading_coeff();
    ScalarExpr inv(n * (Rational(1) / lc), d * (Rational(1) / lc), Canonical{});
    return *this * inv;
}

ScalarExpr ScalarExpr::operator*(const Rational& c) const {
    return ScalarExpr(num_ * c, c.is_zero() ? Poly::constant(num_.variables(), Rational(1)) : den_, Canonical{});
}

ScalarExpr ScalarExpr::pow(unsigned e) const {
    return ScalarExpr(num_.pow(e), den_.pow(e), Canonical{});
}

ScalarExpr ScalarExpr::differentiate(std::size_t var) const {
    if (var >= variables().size()) throw UnknownVariable("variable index out of range");
    if (is_polynomial()) return ScalarExpr(num_.derivative(var) * (Rational(1) / den_.constant_value()));
    // (n/d)' = (n' d - n d') / d^2
    return ScalarExpr(num_.derivative(var) * den_ - num_ * den_.derivative(var), den_ * den_);
}

ScalarExpr ScalarExpr::differentiate(std::string_view var) const {
    return differentiate(variables().index_of(var));
}

Rational ScalarExpr::evaluate(std::span<const Rational> p) const {
    const Rational d = den_.evaluate(p);
    if (d.is_zero()) throw DenominatorVanishes("denominator " + den_.str() + " vanishes at the point");
    return num_.evaluate(p) / d;
}

double ScalarExpr::evaluate(std::span<const double> x) const {
    const double d = den_.evaluate(x);
    if (d == 0.0) throw DenominatorVanishes("denominator " + den_.str() + " vanishes at the point");
    return num_.evaluate(x) / d;
}

ScalarExpr ScalarExpr::substitute(std::span<const Poly> images) const {
    Poly d = den_.substitute(images);
    if (d.is_zero()) throw DenominatorVanishes("denominator " + den_.str() + " vanishes identically after substitution");
    return ScalarExpr(num_.substitute(images), std::move(d));
}

namespace {

// A bare variable with optional power, e.g. "z" or "z^2": safe after '/'.
bool is_single_factor(const Poly& p) {
    if (p.size() != 1 || !p.leading_coeff().is_one()) return false;
    int vars = 0;
    for (std::size_t i = 0; i < p.variables().size(); ++i)
        if (p.leading_monomial().exps[i]) ++vars;
    return vars == 1;
}

}  // namespace

std::string ScalarExpr::str() const {
    if (is_polynomial()) return num_.str();
    // print the denominator with coprime integer coefficients
    mpz_class l = 1, g = 0;
    for (const auto& t : den_.terms()) {
        l = lcm(l, t.coeff.denominator());
        g = gcd(g, t.coeff.numerator());
    }
    const Rational scale(l, g);
    const Poly num = num_ * scale, den = den_ * scale;
    std::string n = num.str();
    if (num.size() > 1) n = "(" + n + ")";
    std::string d = den.str();
    if (!is_single_factor(den)) d = "(" + d + ")";
    return n + "/" + d;
}

// ---------------------------------------------------------------- parser

namespace {

class ExprParser {
public:
    ExprParser(std::string_view text, const Variables& vars) : text_(text), vars_(vars) {}

    ScalarExpr parse() {
        skip_ws();
        if (at_end()) fail("empty expression");
        ScalarExpr e = expr();
        skip_ws();
        if (!at_end()) fail(std::string("unexpected character '") + text_[pos_] + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_ + 1); }
    bool at_end() const { return pos_ >= text_.size(); }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (!at_end() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ScalarExpr expr() {
        ScalarExpr acc = term();
        while (true) {
            if (accept('+')) acc = acc + term();
            else if (accept('-')) acc = acc - term();
            else return acc;
        }
    }

    ScalarExpr term() {
        ScalarExpr acc = factor();
        while (true) {
            if (accept('*')) {
                acc = acc * factor();
            } else if (accept('/')) {
                const std::size_t at = pos_;
                ScalarExpr d = factor();
                if (d.is_zero()) throw ParseError("division by the zero polynomial", at + 1);
                acc = acc / d;
            } else {
                skip_ws();
                if (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                  text_[pos_] == '('))
                    fail("implicit multiplication is not allowed");
                return acc;
            }
        }
    }

    ScalarExpr factor() {
        if (accept('-')) return -factor();
        ScalarExpr b = base();
        if (accept('^')) {
            skip_ws();
            const std::size_t start = pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("expected a nonnegative integer exponent");
            const std::string digits(text_.substr(start, pos_ - start));
            if (digits.size() > 4) fail("exponent too large");
            b = b.pow(static_cast<unsigned>(std::stoul(digits)));
        }
        return b;
    }

    ScalarExpr base() {
        skip_ws();
        if (at_end()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ScalarExpr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            return ScalarExpr::constant(vars_, Rational(mpz_class(std::string(text_.substr(start, pos_ - start)))));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
            const std::string_view name = text_.substr(start, pos_ - start);
            const auto idx = vars_.find(name);
            if (!idx) throw ParseError("unknown variable '" + std::string(name) + "'", start + 1);
            return ScalarExpr::variable(vars_, *idx);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    const Variables& vars_;
    std::size_t pos_ = 0;
};

}  // namespace

ScalarExpr parse_expr(std::string_view text, const Variables& vars) { return ExprParser(text, vars).parse(); }

}  // namespace dirac
