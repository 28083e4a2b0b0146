#pragma once

// Seeded random generators shared by the test suites.

#include <random>
#include <vector>

#include "dirac/linalg.hpp"
#include "dirac/scalar_expr.hpp"

namespace testgen {

using dirac::Matrix;
using dirac::Poly;
using dirac::Rational;
using dirac::ScalarExpr;
using dirac::Subspace;
using dirac::Variables;

class Gen {
public:
    explicit Gen(unsigned seed) : rng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    Rational small_rational() { return Rational(integer(-5, 5), integer(1, 3)); }
    Rational small_int() { return Rational(integer(-3, 3)); }

    Poly poly(const Variables& vars, unsigned max_degree, int terms) {
        std::vector<Poly::Term> ts;
        for (int t = 0; t < terms; ++t) {
            dirac::Monomial m;
            unsigned budget = static_cast<unsigned>(integer(0, static_cast<int>(max_degree)));
            for (unsigned k = 0; k < budget; ++k) {
                const auto v = static_cast<std::size_t>(integer(0, static_cast<int>(vars.size()) - 1));
                ++m.exps[v];
                ++m.degree;
            }
            ts.push_back({m, small_int()});
        }
        return Poly(vars, ts);
    }

    ScalarExpr poly_expr(const Variables& vars, unsigned max_degree, int terms) {
        return ScalarExpr(poly(vars, max_degree, terms));
    }

    ScalarExpr rational_function(const Variables& vars) {
        Poly d = poly(vars, 1, 2);
        while (d.is_zero()) d = poly(vars, 1, 2);
        return ScalarExpr(poly(vars, 2, 3), d);
    }

    Matrix<Rational> matrix(std::size_t r, std::size_t c, double density = 0.8) {
        Matrix<Rational> m(r, c, Rational(0));
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
                if (coin(density)) m(i, j) = small_int();
        return m;
    }

    Matrix<Rational> skew(std::size_t n) {
        Matrix<Rational> m(n, n, Rational(0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                m(i, j) = small_int();
                m(j, i) = -m(i, j);
            }
        return m;
    }

    Subspace<Rational> subspace(std::size_t ambient) {
        const auto k = static_cast<std::size_t>(integer(0, static_cast<int>(ambient)));
        return Subspace<Rational>::span(matrix(k, ambient, 0.6));
    }

    std::mt19937& engine() { return rng_; }

private:
    std::mt19937 rng_;
};

}  // namespace testgen
