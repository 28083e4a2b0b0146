#pragma once

// Dirac structures on R^n with rational-function coefficients.
//
// Index conventions (shared with linear_dirac.hpp):
//   [X,Y]^i        = X^j ∂_j Y^i - Y^j ∂_j X^i
//   (L_X β)_i      = X^j ∂_j β_i + β_j ∂_i X^j
//   (dα)_ij        = ∂_i α_j - ∂_j α_i,   (i_Y dα)_j = Y^i (dα)_ij
//   (i_Y i_X H)_k  = X^i Y^j H_ijk
//   {f,g}          = ∂_i f π^ij ∂_j g = dg(X_f),  X_f = π♯(df)

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dirac/linear_dirac.hpp"
#include "dirac/scalar_expr.hpp"

namespace dirac {

using ExprVec = std::vector<ScalarExpr>;
using ExprMatrix = Matrix<ScalarExpr>;

// ------------------------------------------------------------ calculus

ExprVec zero_vec(const Variables& vars, std::size_t n);
ExprVec gradient(const ScalarExpr& f);
ScalarExpr contract(const ExprVec& alpha, const ExprVec& x);  // α(X)
ExprVec lie_bracket(const ExprVec& x, const ExprVec& y);
ExprVec lie_derivative_form(const ExprVec& x, const ExprVec& beta);
ExprMatrix exterior_derivative(const ExprVec& alpha);
/// (dω)_ijk X^i Y^j Z^k for a 2-form ω.
ScalarExpr d_twoform(const ExprMatrix& omega, const ExprVec& x, const ExprVec& y, const ExprVec& z);
/// True iff dω ≡ 0.
bool is_closed(const ExprMatrix& omega);

ExprVec pi_sharp(const ExprMatrix& pi, const ExprVec& alpha);
ScalarExpr poisson_bracket(const ExprMatrix& pi, const ScalarExpr& f, const ScalarExpr& g);
/// {f,{g,h}} + {h,{f,g}} + {g,{h,f}}.
ScalarExpr jacobiator(const ExprMatrix& pi, const ScalarExpr& f, const ScalarExpr& g, const ScalarExpr& h);

/// Multiplies a vector by the lcm of its denominators (and normalizes the
/// leading nonzero entry's sign); same span, polynomial entries.
ExprVec clear_denominators(const ExprVec& v);

// ------------------------------------------------------------ sections

struct Section {
    ExprVec vf;
    ExprVec form;

    std::size_t dim() const { return vf.size(); }
    static Section zero(const Variables& vars, std::size_t n) { return {zero_vec(vars, n), zero_vec(vars, n)}; }
    /// (v-block, α-block) concatenated.
    ExprVec flat() const;
    static Section from_flat(const ExprVec& v);

    Section operator+(const Section& o) const;
    Section operator-(const Section& o) const;
    Section operator*(const ScalarExpr& f) const;
    friend bool operator==(const Section&, const Section&) = default;
};

/// ⟨⟨(X,α),(Y,β)⟩⟩ = β(X) + α(Y).
ScalarExpr pairing(const Section& a, const Section& b);
Section courant_bracket(const Section& a, const Section& b);
Section dorfman_bracket(const Section& a, const Section& b);

/// Fully antisymmetric 3-form; closedness is checked on construction.
class ThreeForm {
public:
    struct Entry {
        std::size_t i, j, k;
        ScalarExpr value;
    };
    /// Each entry sets H_ijk and its antisymmetric images. Throws NotClosed.
    static ThreeForm from_entries(const Variables& vars, std::size_t n, const std::vector<Entry>& entries);
    static ThreeForm zero(const Variables& vars, std::size_t n);

    std::size_t dim() const noexcept { return n_; }
    const ScalarExpr& operator()(std::size_t i, std::size_t j, std::size_t k) const { return c_[(i * n_ + j) * n_ + k]; }
    /// i_Y i_X H.
    ExprVec contract(const ExprVec& x, const ExprVec& y) const;
    ScalarExpr evaluate_on(const ExprVec& x, const ExprVec& y, const ExprVec& z) const;

private:
    ThreeForm(std::size_t n, std::vector<ScalarExpr> c) : n_(n), c_(std::move(c)) {}
    std::size_t n_;
    std::vector<ScalarExpr> c_;
};

Section twisted_courant_bracket(const Section& a, const Section& b, const ThreeForm& h);

// ------------------------------------------------------------ polynomial maps

/// φ: R^m → R^n with polynomial components in the source variables.
class PolyMap {
public:
    PolyMap(Variables source, Variables target, std::vector<Poly> components);
    static PolyMap identity(const Variables& vars);

    const Variables& source() const noexcept { return source_; }
    const Variables& target() const noexcept { return target_; }
    const std::vector<Poly>& components() const noexcept { return comps_; }

    /// dφ as a target × source matrix.
    ExprMatrix jacobian() const;
    Point apply(const Point& p) const;
    /// this ∘ inner.
    PolyMap after(const PolyMap& inner) const;
    bool is_identity() const;
    /// Pullback of a function on the target.
    ScalarExpr pull(const ScalarExpr& f) const;

private:
    Variables source_, target_;
    std::vector<Poly> comps_;
};

// ------------------------------------------------------------ probes

struct ProbeOptions {
    std::vector<Point> points;  // always used, never rejected
    std::size_t count = 32;     // generated probes on top of `points`
    std::uint64_t seed = 1;
};

/// User points followed by `count` deterministic pseudo-random rational
/// points (the origin is the first candidate) that satisfy `accept`.
std::vector<Point> generate_probes(const Variables& vars, const ProbeOptions& opts,
                                   const std::function<bool(const Point&)>& accept);

// ------------------------------------------------------------ Dirac fields

enum class DiracKind { BivectorGraph, TwoFormGraph, DistributionPlusGauge, Frame, GaugeShifted };
const char* kind_name(DiracKind k);

class DiracField {
public:
    struct Bivector { ExprMatrix pi; };
    struct TwoForm { ExprMatrix omega; };
    struct Distribution {
        std::vector<ExprVec> generators;
        std::optional<ExprMatrix> gauge;
    };
    struct RawFrame {};
    struct Gauged {
        std::shared_ptr<const DiracField> base;
        ExprMatrix b;
    };
    using Data = std::variant<Bivector, TwoForm, Distribution, RawFrame, Gauged>;

    static DiracField bivector_graph(const ExprMatrix& pi);
    static DiracField twoform_graph(const ExprMatrix& omega);
    static DiracField distribution(const Variables& vars, std::size_t n, const std::vector<ExprVec>& generators,
                                   const std::optional<ExprMatrix>& gauge = std::nullopt);
    /// Throws DegenerateFrame (generic rank < n) or NotLagrangian.
    static DiracField from_frame(const Variables& vars, const std::vector<Section>& frame);
    /// Picks a bivector or 2-form description when the generic structure allows one.
    static DiracField recognize(const LinearDirac<ScalarExpr>& generic, std::optional<DiracKind> prefer = std::nullopt);

    /// τ_B applied to the whole structure.
    DiracField gauge(const ExprMatrix& b) const;

    std::size_t dim() const noexcept { return frame_.size(); }
    const Variables& variables() const noexcept { return vars_; }
    DiracKind kind() const noexcept;
    const Data& data() const noexcept { return data_; }
    const std::vector<Section>& frame() const noexcept { return frame_; }
    /// Frame sections as rows of an n × 2n matrix.
    ExprMatrix frame_matrix() const;
    /// The structure over the rational-function field.
    const LinearDirac<ScalarExpr>& generic() const noexcept { return *generic_; }
    /// Off the zero set of this polynomial the frame is defined and spans.
    const Poly& singular_locus_hint() const noexcept { return hint_; }

    /// Generic membership of a section.
    bool contains(const Section& s) const;

    /// Exact fiber at p; throws SingularPoint where the frame is undefined or degenerate.
    LinearDirac<Rational> pointwise(const Point& p) const;

private:
    DiracField(Variables vars, Data data, std::vector<Section> frame);
    Variables vars_;
    Data data_;
    std::vector<Section> frame_;
    std::shared_ptr<const LinearDirac<ScalarExpr>> generic_;
    Poly hint_;
};

// ------------------------------------------------------------ integrability

struct CourantTensor {
    std::size_t n = 0;
    std::vector<ScalarExpr> entries;  // n^3, row-major
    const ScalarExpr& operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return entries[(i * n + j) * n + k];
    }
    bool is_zero() const;
};

/// Υ[i][j][k] = ⟨⟨⟦a_i,a_j⟧, a_k⟩⟩ on the frame.
CourantTensor courant_tensor(const DiracField& d);

struct IntegrabilityVerdict {
    bool integrable = true;  // on the generic locus
    struct Witness {
        std::size_t i, j, k;
        ScalarExpr entry;
        Point point;
        Rational value;
    };
    std::optional<Witness> witness;
};

/// Throws ConsistencyFailure if the kind-specific shortcut (dω, Jacobiator)
/// disagrees with the Courant tensor.
IntegrabilityVerdict is_integrable(const DiracField& d, const ProbeOptions& probes = {});

// ------------------------------------------------------------ hamiltonian calculus

struct HamiltonianField {
    ExprVec particular;
    std::vector<ExprVec> kernel_basis;  // spans L ∩ TM generically
};

/// Throws NotAdmissible.
HamiltonianField hamiltonian_vf(const DiracField& d, const ScalarExpr& f);
/// dg(X_f); throws NotAdmissible.
ScalarExpr admissible_bracket(const DiracField& d, const ScalarExpr& f, const ScalarExpr& g);

// ------------------------------------------------------------ images along maps

struct ProbeRank {
    Point point;
    bool singular = false;             // fiber undefined at this probe
    std::size_t rank = 0;              // pointwise dim of the clean-intersection space
    bool jump = false;                 // rank differs from the generic one
    std::optional<LinearDirac<Rational>> fiber;
    Point image;                       // φ(point)
};

struct CleanReport {
    std::size_t generic_rank = 0;
    std::vector<ProbeRank> probes;
    bool clean_at_probes() const;
    std::vector<Point> flagged() const;
};

struct BackwardImage {
    DiracField field;
    CleanReport report;
};

/// 𝔅_φ(L_N) over the rational-function field of the source, with the rank
/// of ker((dφ)*) ∩ φ*L_N generically and at probes.
BackwardImage backward_image(const DiracField& d_n, const PolyMap& phi, const ProbeOptions& probes = {});

struct ForwardImage {
    std::optional<DiracField> field;  // only with a right inverse of φ
    CleanReport report;               // rank of ker(dφ) ∩ L_M; fibers live on the target
    std::size_t invariance_pairs_checked = 0;
};

/// Throws NotASubmersionAtProbe, InvarianceViolated.
ForwardImage forward_image(const DiracField& d_m, const PolyMap& phi,
                           const std::vector<std::pair<Point, Point>>& fibre_pairs = {},
                           const std::optional<PolyMap>& section = std::nullopt, const ProbeOptions& probes = {});

enum class MapMode { Backward, Forward };

struct DiracMapVerdict {
    bool holds = true;
    bool generic_ok = true;  // backward mode only
    std::vector<Point> failing_probes;
    std::optional<bool> other_mode;  // filled when an inverse is supplied
};

/// With a polynomial inverse the other mode is evaluated too and the two must
/// agree (throws ConsistencyFailure otherwise).
DiracMapVerdict check_dirac_map(const DiracField& d_m, const DiracField& d_n, const PolyMap& phi, MapMode mode,
                                const ProbeOptions& probes = {}, const std::optional<PolyMap>& inverse = std::nullopt);

/// True iff ([Z,X], L_Z α) lies in the generic span for every Z and frame section.
bool is_invariant_under(const DiracField& d, const std::vector<ExprVec>& z_fields);

struct AlgebroidBracket {
    ExprVec anchor;
    Section bracket;
};

/// Throws NotASection.
AlgebroidBracket anchor_and_algebroid_bracket(const DiracField& d, const Section& a, const Section& b);

}  // namespace dirac
