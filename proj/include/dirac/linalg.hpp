#pragma once

// Dense linear algebra over an exact field. Two fields are supported:
// Rational, and ScalarExpr (the rational-function field, where rank means
// generic rank). All results are canonical: subspaces carry their basis in
// reduced row echelon form, so subspace equality is structural equality.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dirac/error.hpp"
#include "dirac/rational.hpp"
#include "dirac/scalar_expr.hpp"

namespace dirac {

inline bool is_zero(const Rational& x) { return x.is_zero(); }
inline Rational zero_like(const Rational&) { return Rational(0); }
inline Rational one_like(const Rational&) { return Rational(1); }

inline bool is_zero(const ScalarExpr& x) { return x.is_zero(); }
inline ScalarExpr zero_like(const ScalarExpr& x) { return ScalarExpr(x.variables()); }
inline ScalarExpr one_like(const ScalarExpr& x) { return ScalarExpr::constant(x.variables(), Rational(1)); }

template <class F>
using Vec = std::vector<F>;

/// Row-major dense matrix. Keeps a zero element so that empty matrices over
/// a rational-function field still know their variable set.
template <class F>
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, const F& zero)
        : rows_(rows), cols_(cols), zero_(zero_like(zero)), data_(rows * cols, zero_) {}

    static Matrix from_rows(const std::vector<Vec<F>>& rows, std::size_t cols, const F& zero) {
        Matrix m(rows.size(), cols, zero);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) throw DimensionMismatch("ragged matrix rows");
            for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    static Matrix identity(std::size_t n, const F& zero) {
        Matrix m(n, n, zero);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = one_like(zero);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const F& zero() const noexcept { return zero_; }

    F& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const F& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vec<F> row(std::size_t i) const { return Vec<F>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_); }
    std::span<const F> row_view(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    Vec<F> col(std::size_t j) const {
        Vec<F> c;
        c.reserve(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c.push_back((*this)(i, j));
        return c;
    }
    std::vector<Vec<F>> row_list() const {
        std::vector<Vec<F>> out;
        for (std::size_t i = 0; i < rows_; ++i) out.push_back(row(i));
        return out;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_, zero_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_) throw DimensionMismatch("matrix product shape mismatch");
        Matrix r(rows_, o.cols_, zero_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const F& a = (*this)(i, k);
                if (is_zero(a)) continue;
                for (std::size_t j = 0; j < o.cols_; ++j)
                    if (!is_zero(o(k, j))) r(i, j) = r(i, j) + a * o(k, j);
            }
        return r;
    }

    Matrix operator+(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("matrix sum shape mismatch");
        Matrix r = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] + o.data_[i];
        return r;
    }

    Matrix operator-() const {
        Matrix r = *this;
        for (auto& x : r.data_) x = -x;
        return r;
    }

    Matrix operator-(const Matrix& o) const { return *this + (-o); }

    /// Row vector times matrix.
    Vec<F> left_apply(std::span<const F> v) const {
        if (v.size() != rows_) throw DimensionMismatch("vector/matrix shape mismatch");
        Vec<F> out(cols_, zero_);
        for (std::size_t i = 0; i < rows_; ++i) {
            if (is_zero(v[i])) continue;
            for (std::size_t j = 0; j < cols_; ++j)
                if (!is_zero((*this)(i, j))) out[j] = out[j] + v[i] * (*this)(i, j);
        }
        return out;
    }

    /// Matrix times column vector.
    Vec<F> apply(std::span<const F> v) const {
        if (v.size() != cols_) throw DimensionMismatch("matrix/vector shape mismatch");
        Vec<F> out(rows_, zero_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (!is_zero(v[j]) && !is_zero((*this)(i, j))) out[i] = out[i] + (*this)(i, j) * v[j];
        return out;
    }

    bool is_zero_matrix() const {
        for (const auto& x : data_)
            if (!is_zero(x)) return false;
        return true;
    }

    bool is_skew() const {
        if (rows_ != cols_) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                if (!((*this)(i, j) == -(*this)(j, i))) return false;
        return true;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_, cols_;
    F zero_;
    std::vector<F> data_;
};

template <class F>
struct RrefResult {
    Matrix<F> reduced;
    std::size_t rank;
    std::vector<std::size_t> pivots;  // pivot column of each nonzero row
};

/// Reduced row echelon form. The pivot in each column is the first row (at or
/// below the current one) holding a nonzero entry.
template <class F>
RrefResult<F> rref(Matrix<F> m) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && is_zero(m(p, c))) ++p;
        if (p == m.rows()) continue;
        if (p != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
        const F inv = one_like(m.zero()) / m(r, c);
        for (std::size_t j = c; j < m.cols(); ++j)
            if (!is_zero(m(r, j))) m(r, j) = m(r, j) * inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || is_zero(m(i, c))) continue;
            const F factor = m(i, c);
            for (std::size_t j = c; j < m.cols(); ++j)
                if (!is_zero(m(r, j))) m(i, j) = m(i, j) - factor * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return {std::move(m), r, std::move(pivots)};
}

template <class F>
std::size_t rank(const Matrix<F>& m) {
    return rref(m).rank;
}

/// Linear subspace of F^ambient, basis stored as RREF rows.
template <class F>
class Subspace {
public:
    /// Span of the rows of `generators`.
    static Subspace span(const Matrix<F>& generators) {
        auto res = rref(generators);
        Matrix<F> basis(res.rank, generators.cols(), generators.zero());
        for (std::size_t i = 0; i < res.rank; ++i)
            for (std::size_t j = 0; j < generators.cols(); ++j) basis(i, j) = res.reduced(i, j);
        return Subspace(std::move(basis));
    }
    static Subspace span(const std::vector<Vec<F>>& vectors, std::size_t ambient, const F& zero) {
        return span(Matrix<F>::from_rows(vectors, ambient, zero));
    }
    static Subspace zero_space(std::size_t ambient, const F& zero) {
        return Subspace(Matrix<F>(0, ambient, zero));
    }
    static Subspace whole(std::size_t ambient, const F& zero) {
        return Subspace(Matrix<F>::identity(ambient, zero));
    }

    std::size_t ambient_dim() const noexcept { return basis_.cols(); }
    std::size_t dim() const noexcept { return basis_.rows(); }
    const Matrix<F>& basis() const noexcept { return basis_; }
    const F& zero() const noexcept { return basis_.zero(); }

    bool contains(std::span<const F> v) const {
        if (v.size() != ambient_dim()) throw DimensionMismatch("vector does not live in the ambient space");
        // Reduce v against the RREF basis; v belongs iff the residue vanishes.
        Vec<F> r(v.begin(), v.end());
        for (std::size_t i = 0; i < dim(); ++i) {
            std::size_t p = 0;
            while (is_zero(basis_(i, p))) ++p;
            if (is_zero(r[p])) continue;
            const F f = r[p];
            for (std::size_t j = 0; j < ambient_dim(); ++j)
                if (!is_zero(basis_(i, j))) r[j] = r[j] - f * basis_(i, j);
        }
        for (const auto& x : r)
            if (!is_zero(x)) return false;
        return true;
    }

    bool contains(const Subspace& o) const {
        for (std::size_t i = 0; i < o.dim(); ++i)
            if (!contains(o.basis_.row_view(i))) return false;
        return true;
    }

    friend bool operator==(const Subspace& a, const Subspace& b) { return a.basis_ == b.basis_; }

private:
    explicit Subspace(Matrix<F> basis) : basis_(std::move(basis)) {}
    Matrix<F> basis_;
};

/// Right null space {x | m x = 0}, dimension cols - rank.
template <class F>
Subspace<F> kernel(const Matrix<F>& m) {
    auto res = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : res.pivots) is_pivot[p] = true;
    std::vector<Vec<F>> basis;
    for (std::size_t f = 0; f < m.cols(); ++f) {
        if (is_pivot[f]) continue;
        Vec<F> v(m.cols(), m.zero());
        v[f] = one_like(m.zero());
        for (std::size_t i = 0; i < res.rank; ++i) v[res.pivots[i]] = -res.reduced(i, f);
        basis.push_back(std::move(v));
    }
    return Subspace<F>::span(basis, m.cols(), m.zero());
}

/// Column space of m as a subspace of F^rows.
template <class F>
Subspace<F> image(const Matrix<F>& m) {
    return Subspace<F>::span(m.transpose());
}

/// Some x with m x = b, or nullopt when the system is inconsistent.
template <class F>
std::optional<Vec<F>> solve(const Matrix<F>& m, std::span<const F> b) {
    if (b.size() != m.rows()) throw DimensionMismatch("right-hand side has wrong length");
    Matrix<F> aug(m.rows(), m.cols() + 1, m.zero());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) aug(i, j) = m(i, j);
        aug(i, m.cols()) = b[i];
    }
    auto res = rref(aug);
    Vec<F> x(m.cols(), m.zero());
    for (std::size_t i = 0; i < res.rank; ++i) {
        if (res.pivots[i] == m.cols()) return std::nullopt;
        x[res.pivots[i]] = res.reduced(i, m.cols());
    }
    return x;
}

/// Inverse of a square matrix, or nullopt if singular (generically singular
/// over a rational-function field).
template <class F>
std::optional<Matrix<F>> inverse(const Matrix<F>& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("inverse of a non-square matrix");
    const std::size_t n = m.rows();
    Matrix<F> aug(n, 2 * n, m.zero());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
        aug(i, n + i) = one_like(m.zero());
    }
    auto res = rref(aug);
    if (res.rank < n || (n > 0 && res.pivots[n - 1] != n - 1)) return std::nullopt;
    Matrix<F> inv(n, n, m.zero());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = res.reduced(i, n + j);
    return inv;
}

/// Determinant by Gaussian elimination with the first-nonzero pivot rule.
template <class F>
F determinant(Matrix<F> m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("determinant of a non-square matrix");
    const std::size_t n = m.rows();
    F det = one_like(m.zero());
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && is_zero(m(p, c))) ++p;
        if (p == n) return zero_like(m.zero());
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
            det = -det;
        }
        det = det * m(c, c);
        const F inv = one_like(m.zero()) / m(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
            if (is_zero(m(i, c))) continue;
            const F factor = m(i, c) * inv;
            for (std::size_t j = c; j < n; ++j)
                if (!is_zero(m(c, j))) m(i, j) = m(i, j) - factor * m(c, j);
        }
    }
    return det;
}

template <class F>
void require_same_ambient(const Subspace<F>& a, const Subspace<F>& b) {
    if (a.ambient_dim() != b.ambient_dim())
        throw DimensionMismatch("subspaces of F^" + std::to_string(a.ambient_dim()) + " and F^" +
                                std::to_string(b.ambient_dim()));
}

template <class F>
Subspace<F> sum(const Subspace<F>& a, const Subspace<F>& b) {
    require_same_ambient(a, b);
    auto rows = a.basis().row_list();
    for (auto& r : b.basis().row_list()) rows.push_back(std::move(r));
    return Subspace<F>::span(rows, a.ambient_dim(), a.zero());
}

/// a ∩ b via the left null space of the stacked bases [A; -B].
template <class F>
Subspace<F> intersect(const Subspace<F>& a, const Subspace<F>& b) {
    require_same_ambient(a, b);
    const std::size_t da = a.dim(), db = b.dim(), n = a.ambient_dim();
    Matrix<F> stacked(da + db, n, a.zero());
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < n; ++j) stacked(i, j) = a.basis()(i, j);
    for (std::size_t i = 0; i < db; ++i)
        for (std::size_t j = 0; j < n; ++j) stacked(da + i, j) = -b.basis()(i, j);
    const auto coeffs = kernel(stacked.transpose());
    std::vector<Vec<F>> rows;
    for (std::size_t k = 0; k < coeffs.dim(); ++k) {
        const auto c = coeffs.basis().row(k);
        rows.push_back(a.basis().left_apply(std::span<const F>(c.data(), da)));
    }
    return Subspace<F>::span(rows, n, a.zero());
}

template <class F>
bool equal(const Subspace<F>& a, const Subspace<F>& b) {
    require_same_ambient(a, b);
    return a == b;
}

/// One factor V ⊕ V* (dimension 2n) of a product space; sign -1 marks the
/// factor carrying the negated pairing.
struct PairingBlock {
    std::size_t n;
    int sign = 1;
};
using PairingSignature = std::vector<PairingBlock>;

inline std::size_t signature_dim(const PairingSignature& sig) {
    std::size_t d = 0;
    for (const auto& b : sig) d += 2 * b.n;
    return d;
}

/// <(v,a),(w,b)> = b(v) + a(w) within each block, times the block sign.
template <class F>
F split_pairing(std::span<const F> x, std::span<const F> y, const PairingSignature& sig, const F& zero) {
    if (x.size() != signature_dim(sig) || y.size() != x.size()) throw DimensionMismatch("pairing arity mismatch");
    F total = zero_like(zero);
    std::size_t off = 0;
    for (const auto& blk : sig) {
        F s = zero_like(total);
        for (std::size_t i = 0; i < blk.n; ++i) {
            const F& v = x[off + i];
            const F& a = x[off + blk.n + i];
            const F& w = y[off + i];
            const F& b = y[off + blk.n + i];
            if (!is_zero(v) && !is_zero(b)) s = s + v * b;
            if (!is_zero(a) && !is_zero(w)) s = s + a * w;
        }
        total = blk.sign > 0 ? total + s : total - s;
        off += 2 * blk.n;
    }
    return total;
}

template <class F>
Matrix<F> pairing_gram(const PairingSignature& sig, const F& zero) {
    const std::size_t d = signature_dim(sig);
    Matrix<F> g(d, d, zero);
    std::size_t off = 0;
    for (const auto& blk : sig) {
        const F s = blk.sign > 0 ? one_like(zero) : -one_like(zero);
        for (std::size_t i = 0; i < blk.n; ++i) {
            g(off + i, off + blk.n + i) = s;
            g(off + blk.n + i, off + i) = s;
        }
        off += 2 * blk.n;
    }
    return g;
}

/// Orthogonal complement for the (sign-twisted) split pairing.
template <class F>
Subspace<F> pairing_orthogonal(const Subspace<F>& s, const PairingSignature& sig) {
    if (signature_dim(sig) != s.ambient_dim()) throw DimensionMismatch("pairing signature does not fit the subspace");
    return kernel(s.basis() * pairing_gram(sig, s.zero()));
}

/// Single-factor convenience: the split pairing on F^{2n}.
template <class F>
Subspace<F> pairing_orthogonal(const Subspace<F>& s) {
    if (s.ambient_dim() % 2) throw DimensionMismatch("split pairing needs an even ambient dimension");
    return pairing_orthogonal(s, PairingSignature{{s.ambient_dim() / 2, 1}});
}

/// Evaluates every entry of a rational-function matrix at a point.
inline Matrix<Rational> evaluate(const Matrix<ScalarExpr>& m, std::span<const Rational> p) {
    Matrix<Rational> out(m.rows(), m.cols(), Rational(0));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).evaluate(p);
    return out;
}

/// Constant matrix viewed over a rational-function field.
inline Matrix<ScalarExpr> lift(const Matrix<Rational>& m, const Variables& vars) {
    Matrix<ScalarExpr> out(m.rows(), m.cols(), ScalarExpr(vars));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = ScalarExpr::constant(vars, m(i, j));
    return out;
}

}  // namespace dirac
