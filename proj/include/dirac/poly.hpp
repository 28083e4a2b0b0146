#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dirac/rational.hpp"

namespace dirac {

inline constexpr std::size_t kMaxVariables = 16;

/// Ordered list of variable names shared by every polynomial of one ambient
/// space. Cheap to copy; compares by content.
class Variables {
public:
    Variables();
    explicit Variables(std::vector<std::string> names);
    Variables(std::initializer_list<std::string> names);

    std::size_t size() const noexcept { return names_->size(); }
    const std::string& name(std::size_t i) const { return (*names_)[i]; }
    const std::vector<std::string>& names() const noexcept { return *names_; }
    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws UnknownVariable.
    std::size_t index_of(std::string_view name) const;

    friend bool operator==(const Variables& a, const Variables& b) {
        return a.names_ == b.names_ || *a.names_ == *b.names_;
    }

private:
    std::shared_ptr<const std::vector<std::string>> names_;
};

/// Exponent vector with cached total degree.
struct Monomial {
    std::array<std::uint16_t, kMaxVariables> exps{};
    std::uint32_t degree = 0;

    friend bool operator==(const Monomial& a, const Monomial& b) {
        return a.degree == b.degree && a.exps == b.exps;
    }
    Monomial operator*(const Monomial& o) const;
    bool divides(const Monomial& o) const;
    /// o / *this; requires divides(o).
    Monomial quotient_of(const Monomial& o) const;
};

/// Graded-lexicographic comparison (x1 > x2 > ...): negative, zero, positive.
int compare_grlex(const Monomial& a, const Monomial& b);

/// Sparse multivariate polynomial over the rationals. Terms are stored in
/// strictly decreasing graded-lex order with nonzero coefficients, so equal
/// polynomials have identical representations.
class Poly {
public:
    struct Term {
        Monomial mono;
        Rational coeff;
        friend bool operator==(const Term&, const Term&) = default;
    };

    explicit Poly(Variables vars) : vars_(std::move(vars)) {}
    Poly(Variables vars, std::vector<Term> terms);  // any order, merged

    static Poly constant(Variables vars, const Rational& c);
    static Poly variable(Variables vars, std::size_t index);

    const Variables& variables() const noexcept { return vars_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }

    bool is_zero() const noexcept { return terms_.empty(); }
    bool is_constant() const noexcept { return terms_.empty() || terms_[0].mono.degree == 0; }
    Rational constant_value() const;  // requires is_constant()
    const Rational& leading_coeff() const { return terms_.front().coeff; }
    const Monomial& leading_monomial() const { return terms_.front().mono; }
    std::uint32_t total_degree() const { return terms_.empty() ? 0 : terms_[0].mono.degree; }
    unsigned degree_in(std::size_t var) const;
    bool depends_on(std::size_t var) const { return degree_in(var) > 0; }

    Poly operator-() const;
    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator*(const Rational& c) const;
    Poly& operator+=(const Poly& o) { return *this = *this + o; }
    Poly& operator-=(const Poly& o) { return *this = *this - o; }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }
    Poly pow(unsigned e) const;

    Poly derivative(std::size_t var) const;
    Rational evaluate(std::span<const Rational> point) const;
    double evaluate(std::span<const double> point) const;

    /// Replaces variable i by images[i]; result lives in the images' space.
    Poly substitute(std::span<const Poly> images) const;
    /// Coefficients c_k (free of `var`) with *this = sum_k c_k var^k.
    std::vector<Poly> coefficients_in(std::size_t var) const;
    /// Same polynomial scaled so the leading coefficient is 1 (zero stays zero).
    Poly monic() const;

    std::string str() const;

    friend bool operator==(const Poly& a, const Poly& b);

private:
    void check_compatible(const Poly& o) const;
    Variables vars_;
    std::vector<Term> terms_;
};

/// Quotient if `b` divides `a` exactly, otherwise nullopt. `b` must be nonzero.
std::optional<Poly> divide_exact(const Poly& a, const Poly& b);

/// Monic greatest common divisor (0 only when both inputs are 0).
Poly gcd(const Poly& a, const Poly& b);
Poly lcm(const Poly& a, const Poly& b);

}  // namespace dirac
