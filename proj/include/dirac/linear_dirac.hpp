#pragma once

// Dirac structures on a finite-dimensional vector space V and the calculus of
// lagrangian relations. Vectors of V ⊕ V* are laid out as (v-block, α-block).
//
// Conventions used throughout the library:
//   π♯(α)^j = α_i π^{ij}      (contraction in the first slot)
//   (i_X ω)_j = X^i ω_{ij}
// so graph_of_bivector has rows (π_{i·} | e_i) and graph_of_twoform has rows
// (e_i | ω_{i·}).
//
// All templates work over any field supported by linalg.hpp; over
// ScalarExpr they compute the structure at a generic point.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dirac/linalg.hpp"

namespace dirac {

/// True iff `s` ⊂ F^{2n} has dimension n and the split pairing vanishes on it.
template <class F>
bool is_lagrangian(const Subspace<F>& s, const PairingSignature& sig) {
    const std::size_t d = signature_dim(sig);
    if (s.ambient_dim() != d) throw DimensionMismatch("subspace does not fit the pairing signature");
    if (2 * s.dim() != d) return false;
    const Matrix<F> g = s.basis() * pairing_gram(sig, s.zero()) * s.basis().transpose();
    return g.is_zero_matrix();
}

template <class F>
bool is_lagrangian(const Subspace<F>& s) {
    if (s.ambient_dim() % 2) return false;
    return is_lagrangian(s, PairingSignature{{s.ambient_dim() / 2, 1}});
}

/// Lagrangian subspace of V ⊕ V*.
template <class F>
class LinearDirac {
public:
    /// Throws NotLagrangian.
    static LinearDirac from_subspace(Subspace<F> space) {
        if (space.ambient_dim() % 2 || !is_lagrangian(space))
            throw NotLagrangian("subspace of dimension " + std::to_string(space.dim()) + " in F^" +
                                std::to_string(space.ambient_dim()) + " is not lagrangian");
        return LinearDirac(std::move(space));
    }
    static LinearDirac from_generators(const std::vector<Vec<F>>& rows, std::size_t n, const F& zero) {
        return from_subspace(Subspace<F>::span(rows, 2 * n, zero));
    }

    std::size_t n() const noexcept { return space_.ambient_dim() / 2; }
    const Subspace<F>& space() const noexcept { return space_; }
    const F& zero() const noexcept { return space_.zero(); }

    friend bool operator==(const LinearDirac& a, const LinearDirac& b) { return a.space_ == b.space_; }

private:
    explicit LinearDirac(Subspace<F> s) : space_(std::move(s)) {}
    Subspace<F> space_;
};

/// Linear map φ: V → W stored as a dim W × dim V matrix.
template <class F>
struct LinearMap {
    Matrix<F> m;
    std::size_t source_dim() const { return m.cols(); }
    std::size_t target_dim() const { return m.rows(); }
};

/// Lagrangian subspace of 𝕃 × ℝ̄ (left factor with the pairing, right factor
/// with the negated pairing). A relation "from right to left" composes like a
/// map right → left.
template <class F>
class LagrangianRelation {
public:
    static LagrangianRelation from_subspace(std::size_t left_dim, std::size_t right_dim, Subspace<F> space) {
        if (!is_lagrangian(space, signature(left_dim, right_dim)))
            throw NotLagrangian("relation subspace is not lagrangian in L x R-bar");
        return LagrangianRelation(left_dim, right_dim, std::move(space));
    }

    static PairingSignature signature(std::size_t left_dim, std::size_t right_dim) {
        return {{left_dim, 1}, {right_dim, -1}};
    }

    std::size_t left_dim() const noexcept { return left_; }
    std::size_t right_dim() const noexcept { return right_; }
    const Subspace<F>& space() const noexcept { return space_; }

    friend bool operator==(const LagrangianRelation& a, const LagrangianRelation& b) {
        return a.left_ == b.left_ && a.right_ == b.right_ && a.space_ == b.space_;
    }

private:
    LagrangianRelation(std::size_t l, std::size_t r, Subspace<F> s) : left_(l), right_(r), space_(std::move(s)) {}
    std::size_t left_, right_;
    Subspace<F> space_;
};

namespace detail {

template <class F>
void require_skew(const Matrix<F>& m, const char* what) {
    if (!m.is_skew()) throw NotSkewSymmetric(std::string(what) + " is not skew-symmetric");
}

// Splits the basis of a subspace of F^{2n} into its v-block and α-block.
template <class F>
std::pair<Matrix<F>, Matrix<F>> split_blocks(const Subspace<F>& s) {
    const std::size_t n = s.ambient_dim() / 2;
    Matrix<F> v(s.dim(), n, s.zero()), a(s.dim(), n, s.zero());
    for (std::size_t i = 0; i < s.dim(); ++i)
        for (std::size_t j = 0; j < n; ++j) {
            v(i, j) = s.basis()(i, j);
            a(i, j) = s.basis()(i, n + j);
        }
    return {std::move(v), std::move(a)};
}

template <class F>
Vec<F> concat(const Vec<F>& a, const Vec<F>& b) {
    Vec<F> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

template <class F>
Subspace<F> v_block_subspace(std::size_t n, const F& zero) {  // V ⊕ 0
    std::vector<Vec<F>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Vec<F> r(2 * n, zero_like(zero));
        r[i] = one_like(zero);
        rows.push_back(std::move(r));
    }
    return Subspace<F>::span(rows, 2 * n, zero);
}

template <class F>
Subspace<F> covector_block_subspace(std::size_t n, const F& zero) {  // 0 ⊕ V*
    std::vector<Vec<F>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Vec<F> r(2 * n, zero_like(zero));
        r[n + i] = one_like(zero);
        rows.push_back(std::move(r));
    }
    return Subspace<F>::span(rows, 2 * n, zero);
}

// Projection of a subspace of F^{2n} onto one block, as a subspace of F^n.
template <class F>
Subspace<F> project_block(const Subspace<F>& s, bool covector_block) {
    const auto [v, a] = split_blocks(s);
    return Subspace<F>::span(covector_block ? a : v);
}

}  // namespace detail

/// Annihilator F° ⊂ V* of a subspace F ⊂ V.
template <class F>
Subspace<F> annihilator(const Subspace<F>& f) {
    return kernel(f.basis());
}

template <class F>
LinearDirac<F> graph_of_bivector(const Matrix<F>& pi) {
    detail::require_skew(pi, "bivector");
    const std::size_t n = pi.rows();
    std::vector<Vec<F>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Vec<F> r = pi.row(i);
        Vec<F> e(n, pi.zero());
        e[i] = one_like(pi.zero());
        rows.push_back(detail::concat(r, e));
    }
    return LinearDirac<F>::from_generators(rows, n, pi.zero());
}

template <class F>
LinearDirac<F> graph_of_twoform(const Matrix<F>& omega) {
    detail::require_skew(omega, "two-form");
    const std::size_t n = omega.rows();
    std::vector<Vec<F>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Vec<F> e(n, omega.zero());
        e[i] = one_like(omega.zero());
        rows.push_back(detail::concat(e, omega.row(i)));
    }
    return LinearDirac<F>::from_generators(rows, n, omega.zero());
}

/// F ⊕ F°.
template <class F>
LinearDirac<F> from_distribution(const Subspace<F>& f) {
    const std::size_t n = f.ambient_dim();
    std::vector<Vec<F>> rows;
    for (const auto& b : f.basis().row_list()) rows.push_back(detail::concat(b, Vec<F>(n, f.zero())));
    const auto ann = annihilator(f);
    for (const auto& g : ann.basis().row_list()) rows.push_back(detail::concat(Vec<F>(n, f.zero()), g));
    return LinearDirac<F>::from_generators(rows, n, f.zero());
}

/// τ_B: (X, α) ↦ (X, α + i_X B).
template <class F>
LinearDirac<F> gauge(const LinearDirac<F>& l, const Matrix<F>& b) {
    detail::require_skew(b, "gauge form");
    const std::size_t n = l.n();
    if (b.rows() != n) throw DimensionMismatch("gauge form has the wrong dimension");
    const auto [v, a] = detail::split_blocks(l.space());
    std::vector<Vec<F>> rows;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        const Vec<F> x = v.row(i);
        Vec<F> alpha = a.row(i);
        const Vec<F> ixb = b.left_apply(x);
        for (std::size_t j = 0; j < n; ++j) alpha[j] = alpha[j] + ixb[j];
        rows.push_back(detail::concat(x, alpha));
    }
    return LinearDirac<F>::from_generators(rows, n, l.zero());
}

/// 𝔅_φ(L_W) = {(v, φ*β) | (φ v, β) ∈ L_W}.
template <class F>
LinearDirac<F> backward(const LinearDirac<F>& lw, const LinearMap<F>& phi) {
    const std::size_t nv = phi.source_dim(), nw = phi.target_dim();
    if (lw.n() != nw) throw DimensionMismatch("backward image: map target does not match the Dirac structure");
    const auto [wv, wa] = detail::split_blocks(lw.space());
    const std::size_t r = wv.rows();
    // Unknowns (v, c): φ v - Σ c_k w_k = 0.
    Matrix<F> sys(nw, nv + r, lw.zero());
    for (std::size_t i = 0; i < nw; ++i) {
        for (std::size_t j = 0; j < nv; ++j) sys(i, j) = phi.m(i, j);
        for (std::size_t k = 0; k < r; ++k) sys(i, nv + k) = -wv(k, i);
    }
    const auto sol = kernel(sys);
    const Matrix<F> phit = phi.m.transpose();
    std::vector<Vec<F>> rows;
    for (const auto& s : sol.basis().row_list()) {
        Vec<F> v(s.begin(), s.begin() + nv);
        const Vec<F> c(s.begin() + nv, s.end());
        const Vec<F> beta = wa.left_apply(c);
        rows.push_back(detail::concat(v, phit.apply(beta)));
    }
    return LinearDirac<F>::from_generators(rows, nv, lw.zero());
}

/// 𝔉_φ(L_V) = {(φ v, β) | (v, φ*β) ∈ L_V}.
template <class F>
LinearDirac<F> forward(const LinearDirac<F>& lv, const LinearMap<F>& phi) {
    const std::size_t nv = phi.source_dim(), nw = phi.target_dim();
    if (lv.n() != nv) throw DimensionMismatch("forward image: map source does not match the Dirac structure");
    const auto [vv, va] = detail::split_blocks(lv.space());
    const std::size_t r = vv.rows();
    // Unknowns (c, β): Σ c_k α_k - φ* β = 0.
    Matrix<F> sys(nv, r + nw, lv.zero());
    for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t k = 0; k < r; ++k) sys(i, k) = va(k, i);
        for (std::size_t j = 0; j < nw; ++j) sys(i, r + j) = -phi.m(j, i);
    }
    const auto sol = kernel(sys);
    std::vector<Vec<F>> rows;
    for (const auto& s : sol.basis().row_list()) {
        const Vec<F> c(s.begin(), s.begin() + r);
        Vec<F> beta(s.begin() + r, s.end());
        const Vec<F> v = vv.left_apply(c);
        rows.push_back(detail::concat(phi.m.apply(v), beta));
    }
    return LinearDirac<F>::from_generators(rows, nw, lv.zero());
}

struct RoundtripVerdict {
    bool fb_identity;  // 𝔉_φ ∘ 𝔅_φ (L_W) = L_W
    bool bf_identity;  // 𝔅_φ ∘ 𝔉_φ (L_V) = L_V
};

/// Evaluates both roundtrip identities by their criteria (pr_W(L_W) ⊆ im φ,
/// ker φ ⊆ L_V ∩ V) and by explicit recomposition. Throws ConsistencyFailure
/// if the two routes disagree.
template <class F>
RoundtripVerdict roundtrip_conditions(const LinearDirac<F>& lv, const LinearDirac<F>& lw, const LinearMap<F>& phi) {
    if (lv.n() != phi.source_dim() || lw.n() != phi.target_dim())
        throw DimensionMismatch("roundtrip: map does not match the Dirac structures");
    const Subspace<F> pr_w = detail::project_block(lw.space(), false);
    const bool fb_criterion = image(phi.m).contains(pr_w);
    bool bf_criterion = true;
    for (const auto& k : kernel(phi.m).basis().row_list()) {
        const Vec<F> kv = detail::concat(k, Vec<F>(lv.n(), lv.zero()));
        if (!lv.space().contains(kv)) bf_criterion = false;
    }
    const bool fb_direct = forward(backward(lw, phi), phi) == lw;
    const bool bf_direct = backward(forward(lv, phi), phi) == lv;
    if (fb_criterion != fb_direct || bf_criterion != bf_direct)
        throw ConsistencyFailure("roundtrip criterion disagrees with explicit recomposition");
    return {fb_criterion, bf_criterion};
}

/// Γ_φ = {((φv, β), (v, φ*β))} ⊂ 𝕎 × V̄.
template <class F>
LagrangianRelation<F> graph_relation(const LinearMap<F>& phi) {
    const std::size_t nv = phi.source_dim(), nw = phi.target_dim();
    const F z = phi.m.zero();
    const std::size_t d = 2 * nw + 2 * nv;
    std::vector<Vec<F>> rows;
    for (std::size_t i = 0; i < nv; ++i) {  // v = e_i, β = 0
        Vec<F> r(d, z);
        for (std::size_t j = 0; j < nw; ++j) r[j] = phi.m(j, i);
        r[2 * nw + i] = one_like(z);
        rows.push_back(std::move(r));
    }
    for (std::size_t j = 0; j < nw; ++j) {  // v = 0, β = e_j
        Vec<F> r(d, z);
        r[nw + j] = one_like(z);
        for (std::size_t i = 0; i < nv; ++i) r[2 * nw + nv + i] = phi.m(j, i);
        rows.push_back(std::move(r));
    }
    return LagrangianRelation<F>::from_subspace(nw, nv, Subspace<F>::span(rows, d, z));
}

/// L ⊂ 𝕍 × {0}.
template <class F>
LagrangianRelation<F> as_left_relation(const LinearDirac<F>& l) {
    return LagrangianRelation<F>::from_subspace(l.n(), 0, l.space());
}

/// L ⊂ {0} × 𝕍̄.
template <class F>
LagrangianRelation<F> as_right_relation(const LinearDirac<F>& l) {
    return LagrangianRelation<F>::from_subspace(0, l.n(), l.space());
}

/// A relation with a trivial factor, read back as a Dirac structure.
template <class F>
LinearDirac<F> relation_to_dirac(const LagrangianRelation<F>& r) {
    if (r.left_dim() != 0 && r.right_dim() != 0)
        throw DimensionMismatch("relation has two nontrivial factors");
    return LinearDirac<F>::from_subspace(r.space());
}

/// L1 ∘ L2 for L1 ⊂ 𝕌 × V̄ and L2 ⊂ 𝕍 × 𝕎̄, computed as
/// ((L1 × L2) ∩ 𝒞 + 𝒞^⊥) / 𝒞^⊥ with 𝒞 = 𝕌 × Δ × 𝕎̄; the quotient is realized
/// by the coordinate projection 𝒞 → 𝕌 × 𝕎̄, whose kernel is 𝒞^⊥.
template <class F>
LagrangianRelation<F> compose(const LagrangianRelation<F>& l1, const LagrangianRelation<F>& l2) {
    if (l1.right_dim() != l2.left_dim()) throw DimensionMismatch("compose: middle dimensions differ");
    const std::size_t u = 2 * l1.left_dim(), v = 2 * l1.right_dim(), w = 2 * l2.right_dim();
    const std::size_t d = u + 2 * v + w;
    const F z = l1.space().zero();
    const PairingSignature sig{{l1.left_dim(), 1}, {l1.right_dim(), -1}, {l2.left_dim(), 1}, {l2.right_dim(), -1}};

    std::vector<Vec<F>> prod;
    for (const auto& r : l1.space().basis().row_list()) {
        Vec<F> x(d, z);
        std::copy(r.begin(), r.end(), x.begin());
        prod.push_back(std::move(x));
    }
    for (const auto& r : l2.space().basis().row_list()) {
        Vec<F> x(d, z);
        std::copy(r.begin(), r.end(), x.begin() + u + v);
        prod.push_back(std::move(x));
    }
    const auto l1xl2 = Subspace<F>::span(prod, d, z);

    std::vector<Vec<F>> cgen;
    for (std::size_t i = 0; i < u; ++i) {
        Vec<F> x(d, z);
        x[i] = one_like(z);
        cgen.push_back(std::move(x));
    }
    for (std::size_t i = 0; i < v; ++i) {
        Vec<F> x(d, z);
        x[u + i] = one_like(z);
        x[u + v + i] = one_like(z);
        cgen.push_back(std::move(x));
    }
    for (std::size_t i = 0; i < w; ++i) {
        Vec<F> x(d, z);
        x[u + 2 * v + i] = one_like(z);
        cgen.push_back(std::move(x));
    }
    const auto c = Subspace<F>::span(cgen, d, z);
    const auto c_perp = pairing_orthogonal(c, sig);
    const auto reduced = sum(intersect(l1xl2, c), c_perp);

    std::vector<Vec<F>> out;
    for (const auto& r : reduced.basis().row_list()) {
        Vec<F> x;
        x.insert(x.end(), r.begin(), r.begin() + u);
        x.insert(x.end(), r.begin() + u + 2 * v, r.end());
        out.push_back(std::move(x));
    }
    return LagrangianRelation<F>::from_subspace(l1.left_dim(), l2.right_dim(), Subspace<F>::span(out, u + w, z));
}

template <class F>
struct Decomposition {
    Subspace<F> null;       // K = L ∩ V
    Subspace<F> range;      // R = pr_V(L)
    Matrix<F> leaf_form;    // Ω_L in the RREF basis of R
};

/// Null space, range and leafwise 2-form. Internally checks that Ω_L is well
/// defined, that K is its kernel, and that L is recovered from (R, Ω_L).
template <class F>
Decomposition<F> decompose(const LinearDirac<F>& l) {
    const std::size_t n = l.n();
    const F z = l.zero();
    const auto [lv, la] = detail::split_blocks(l.space());

    const auto k_full = intersect(l.space(), detail::v_block_subspace<F>(n, z));
    const Subspace<F> null = detail::project_block(k_full, false);
    const Subspace<F> range = Subspace<F>::span(lv);
    const std::size_t r = range.dim();

    // L ∩ V* must annihilate R for Ω_L to be well defined.
    const auto l_cap_vstar = intersect(l.space(), detail::covector_block_subspace<F>(n, z));
    for (const auto& g : l_cap_vstar.basis().row_list())
        for (const auto& b : range.basis().row_list()) {
            F s = z;
            for (std::size_t j = 0; j < n; ++j) s = s + g[n + j] * b[j];
            if (!is_zero(s)) throw ConsistencyFailure("leaf form is not well defined");
        }

    Matrix<F> omega(r, r, z);
    const Matrix<F> lvt = lv.transpose();
    for (std::size_t a = 0; a < r; ++a) {
        const Vec<F> ba = range.basis().row(a);
        const auto c = solve(lvt, std::span<const F>(ba));
        if (!c) throw ConsistencyFailure("range vector without a lift to L");
        const Vec<F> alpha = la.left_apply(*c);
        for (std::size_t b = 0; b < r; ++b) {
            F s = z;
            for (std::size_t j = 0; j < n; ++j) s = s + alpha[j] * range.basis()(b, j);
            omega(a, b) = s;
        }
    }

    // ker Ω_L, pushed into V, must equal K.
    std::vector<Vec<F>> kvecs;
    for (const auto& y : kernel(omega.transpose()).basis().row_list())
        kvecs.push_back(range.basis().left_apply(y));
    if (!(Subspace<F>::span(kvecs, n, z) == null)) throw ConsistencyFailure("null space differs from ker of leaf form");

    // Reconstruct L = {(X, α) | X ∈ R, α|_R = i_X Ω_L}.
    std::vector<Vec<F>> rows;
    const Matrix<F> rb = range.basis();
    for (std::size_t a = 0; a < r; ++a) {
        const Vec<F> target = omega.row(a);
        const auto ext = solve(rb, std::span<const F>(target));
        if (!ext) throw ConsistencyFailure("leaf form row cannot be extended");
        rows.push_back(detail::concat(rb.row(a), *ext));
    }
    for (const auto& g : annihilator(range).basis().row_list()) rows.push_back(detail::concat(Vec<F>(n, z), g));
    if (!(Subspace<F>::span(rows, 2 * n, z) == l.space()))
        throw ConsistencyFailure("reconstruction from the presymplectic data differs from L");

    return {null, range, std::move(omega)};
}

/// The skew π with L = graph(π♯); throws TransversalityFailed if L ∩ V ≠ 0.
template <class F>
Matrix<F> as_bivector(const LinearDirac<F>& l) {
    const std::size_t n = l.n();
    const F z = l.zero();
    if (intersect(l.space(), detail::v_block_subspace<F>(n, z)).dim() != 0)
        throw TransversalityFailed("L meets V nontrivially: not the graph of a bivector");
    const auto [lv, la] = detail::split_blocks(l.space());
    const Matrix<F> lat = la.transpose();
    Matrix<F> pi(n, n, z);
    for (std::size_t i = 0; i < n; ++i) {
        Vec<F> e(n, z);
        e[i] = one_like(z);
        const auto c = solve(lat, std::span<const F>(e));
        const Vec<F> x = lv.left_apply(*c);
        for (std::size_t j = 0; j < n; ++j) pi(i, j) = x[j];
    }
    return pi;
}

/// The skew ω with L = graph(ω♭); throws TransversalityFailed if L ∩ V* ≠ 0.
template <class F>
Matrix<F> as_twoform(const LinearDirac<F>& l) {
    const std::size_t n = l.n();
    const F z = l.zero();
    if (intersect(l.space(), detail::covector_block_subspace<F>(n, z)).dim() != 0)
        throw TransversalityFailed("L meets V* nontrivially: not the graph of a two-form");
    const auto [lv, la] = detail::split_blocks(l.space());
    const Matrix<F> lvt = lv.transpose();
    Matrix<F> omega(n, n, z);
    for (std::size_t i = 0; i < n; ++i) {
        Vec<F> e(n, z);
        e[i] = one_like(z);
        const auto c = solve(lvt, std::span<const F>(e));
        const Vec<F> a = la.left_apply(*c);
        for (std::size_t j = 0; j < n; ++j) omega(i, j) = a[j];
    }
    return omega;
}

}  // namespace dirac
