#pragma once

// Submanifolds C = {ψ¹ = ... = ψᵏ = 0} of a Poisson manifold (R^m, π).
// Restriction to C is never done symbolically: restricted quantities are
// evaluated at probe points on C or transported along a parametrization.

#include <optional>
#include <vector>

#include "dirac/field_dirac.hpp"

namespace dirac {

class ConstraintSystem {
public:
    /// Throws NotSkewSymmetric, NotPoisson, NotOnConstraint, RankDropInPsi.
    ConstraintSystem(ExprMatrix pi, std::vector<Poly> psis, std::vector<Point> probes);

    std::size_t ambient_dim() const noexcept { return pi_.rows(); }
    std::size_t count() const noexcept { return psis_.size(); }
    const Variables& variables() const noexcept { return pi_.zero().variables(); }
    const ExprMatrix& pi() const noexcept { return pi_; }
    const std::vector<Poly>& psis() const noexcept { return psis_; }
    ScalarExpr psi(std::size_t i) const { return ScalarExpr(psis_[i]); }
    const std::vector<Point>& probes() const noexcept { return probes_; }

    /// Validates a point of C (NotOnConstraint, RankDropInPsi).
    void check_point(const Point& p) const;

private:
    ExprMatrix pi_;
    std::vector<Poly> psis_;
    std::vector<Point> probes_;
};

/// J⁻¹(μ) for a polynomial map J: R^m → R^k and a rational value μ.
ConstraintSystem level_set(const ExprMatrix& pi, const std::vector<Poly>& j, const Point& mu, std::vector<Point> probes);

enum class SubmanifoldKind { PoissonSubmanifold, Cosymplectic, Coisotropic, PoissonDirac, Mixed };
const char* kind_name(SubmanifoldKind k);

struct PointClass {
    SubmanifoldKind kind;
    std::size_t null_dim;   // dim TC ∩ π♯(TC°)
    std::size_t image_dim;  // dim π♯(TC°)
};

/// Strongest applicable label at a point of C.
PointClass classify_point(const ConstraintSystem& cs, const Point& p);

struct ConstraintMatrix {
    ExprMatrix c;                      // c^ij = {ψⁱ, ψʲ}
    ScalarExpr det;
    std::optional<ExprMatrix> inverse;  // c_ij, when det ≢ 0
    bool invertible() const noexcept { return inverse.has_value(); }
};

/// Cross-checks det c(p) ≠ 0 against classify_point at every probe
/// (ConsistencyFailure on disagreement).
ConstraintMatrix constraint_matrix(const ConstraintSystem& cs);

/// {F,G} - {F,ψⁱ} c_ij {ψʲ,G}. Throws SecondClassViolated when det c ≡ 0.
ScalarExpr dirac_bracket(const ConstraintSystem& cs, const ScalarExpr& f, const ScalarExpr& g);

struct TangentSplit {
    Vec<Rational> tangential;  // in TC_p
    Vec<Rational> conormal;    // in π♯(TC°)_p
};

/// Y = pr_TC(Y) + pr_{π♯(TC°)}(Y). Throws NotCosymplecticAtPoint.
TangentSplit project_to_tangent(const ConstraintSystem& cs, const Point& p, const Vec<Rational>& y);

/// σ: R^d → R^m with image in C, d = m - k.
class Parametrization {
public:
    /// Checks ψ∘σ ≡ 0 and that dσ has rank d generically and at `source_points`.
    /// Throws InvalidParametrization.
    Parametrization(const ConstraintSystem& cs, PolyMap sigma, std::vector<Point> source_points = {});

    const PolyMap& sigma() const noexcept { return sigma_; }
    const std::vector<Point>& source_points() const noexcept { return points_; }

private:
    PolyMap sigma_;
    std::vector<Point> points_;
};

/// Backward image of the graph of π along σ. The source points of the
/// parametrization are always among the probes.
BackwardImage pullback_via_parametrization(const ConstraintSystem& cs, const Parametrization& sigma,
                                           const ProbeOptions& probes = {});

}  // namespace dirac
