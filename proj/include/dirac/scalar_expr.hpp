#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dirac/poly.hpp"

namespace dirac {

/// A point of the ambient space: one exact coordinate per variable.
using Point = std::vector<Rational>;

/// Rational function num/den over the rationals in canonical form:
/// gcd(num, den) = 1 and den is monic under graded-lex order (den = 1 when
/// num = 0). Canonical form makes equality a structural comparison.
class ScalarExpr {
public:
    explicit ScalarExpr(const Variables& vars) : num_(vars), den_(Poly::constant(vars, Rational(1))) {}
    explicit ScalarExpr(Poly p);
    /// Throws DenominatorVanishes if den is the zero polynomial.
    ScalarExpr(Poly num, Poly den);

    static ScalarExpr constant(const Variables& vars, const Rational& c);
    static ScalarExpr variable(const Variables& vars, std::size_t index);
    static ScalarExpr variable(const Variables& vars, std::string_view name);

    const Variables& variables() const noexcept { return num_.variables(); }
    const Poly& num() const noexcept { return num_; }
    const Poly& den() const noexcept { return den_; }

    bool is_zero() const noexcept { return num_.is_zero(); }
    bool is_polynomial() const noexcept { return den_.is_constant(); }
    bool is_constant() const noexcept { return num_.is_constant() && den_.is_constant(); }
    Rational constant_value() const;

    ScalarExpr operator-() const;
    ScalarExpr operator+(const ScalarExpr& o) const;
    ScalarExpr operator-(const ScalarExpr& o) const;
    ScalarExpr operator*(const ScalarExpr& o) const;
    /// Throws DenominatorVanishes when dividing by the zero function.
    ScalarExpr operator/(const ScalarExpr& o) const;
    ScalarExpr operator*(const Rational& c) const;
    ScalarExpr& operator+=(const ScalarExpr& o) { return *this = *this + o; }
    ScalarExpr& operator-=(const ScalarExpr& o) { return *this = *this - o; }
    ScalarExpr& operator*=(const ScalarExpr& o) { return *this = *this * o; }
    ScalarExpr& operator/=(const ScalarExpr& o) { return *this = *this / o; }
    ScalarExpr pow(unsigned e) const;

    ScalarExpr differentiate(std::size_t var) const;
    ScalarExpr differentiate(std::string_view var) const;

    /// Exact value; throws DenominatorVanishes where den(p) = 0.
    Rational evaluate(std::span<const Rational> p) const;
    /// Floating-point value (the only float entry point); throws
    /// DenominatorVanishes when den(x) is exactly 0.0.
    double evaluate(std::span<const double> x) const;

    /// Composition with polynomials in another space (variable i -> images[i]).
    /// Throws DenominatorVanishes if the denominator composes to zero.
    ScalarExpr substitute(std::span<const Poly> images) const;

    /// Text accepted by parse_expr; parse_expr(str()) == *this.
    std::string str() const;

    friend bool operator==(const ScalarExpr& a, const ScalarExpr& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

private:
    struct Canonical {};
    ScalarExpr(Poly num, Poly den, Canonical) : num_(std::move(num)), den_(std::move(den)) {}
    void canonicalize();

    Poly num_;
    Poly den_;
};

/// Parses the expression grammar
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | base ('^' nonneg-integer)?
///   base   := integer | identifier | '(' expr ')'
/// A rational literal p/q is read as a quotient of integers. Implicit
/// multiplication is rejected. Syntax errors, unknown variable names and
/// division by the zero polynomial all raise ParseError with a position.
ScalarExpr parse_expr(std::string_view text, const Variables& vars);

}  // namespace dirac
