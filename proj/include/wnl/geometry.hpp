#pragma once

// Differential-geometric oracle for hydrodynamic-type brackets: metric /
// connection / affinor data, the six obstruction conditions (symmetry,
// Levi-Civita compatibility, g.w symmetry, Codazzi, Gauss), and the
// condition-rewriting engine used to compare backend residuals.

#include "wnl/dist.hpp"
#include "wnl/pva.hpp"
#include "wnl/schouten.hpp"
#include "wnl/wnlop.hpp"

namespace wnl {

struct TailAffinor {
  Q e;                                  // tail constant
  std::vector<std::vector<Expr>> w;     // affinor components w^i_k
};

struct PBHTData {
  int n = 1;
  std::vector<std::vector<Expr>> g;                  // g^{ij}
  std::vector<std::vector<std::vector<Expr>>> Gamma; // Gamma^{ij}_k
  std::vector<TailAffinor> tails;
};

/// Opaque data: symbols g[i,j], Gamma[i,j,k], w[i,k] (single tail) or
/// w[a,i,k] (several tails), all functions of the order-0 fields.
PBHTData symbolic_pbht(int n, int ntails = 1);

/// Assemble the first-order operator g d + Gamma u_x + sum_a e_a (w u_x)
/// dx^{-1} (w u_x).
WNLOperator pbht_operator(const PBHTData& d);

/// Extract the data back from an operator; throws Parse if the operator is
/// not hydrodynamic-shaped (first order, coefficients linear in u_x with
/// order-0 entries).
PBHTData pbht_from_operator(const WNLOperator& P, const Ctx& ctx);

/// Exact determinant and adjugate of the metric (Laplace expansion).
Expr metric_det(const PBHTData& d);
std::vector<std::vector<Expr>> metric_adjugate(const PBHTData& d);

/// All six obstruction conditions, componentwise.  The lowered-index
/// conditions (Codazzi and Gauss) are cleared of denominators with the
/// adjugate/determinant.  Throws SingularMetric when det g == 0.
ConditionSet geometric_check(const PBHTData& d, const Ctx& ctx);

/// Raised-index componentwise condition base used to reduce backend
/// residuals: the four algebraic conditions together with the raised Gauss
/// and metric-contracted Codazzi residual forms (no metric inverse needed,
/// suitable for opaque data).
ConditionSet pbht_condition_base(const PBHTData& d, const Ctx& ctx);

/// Polynomial reduction of every target modulo the base conditions, their
/// order-0 partial-derivative prolongations (up to the symbol-derivative
/// depth present in the targets) and their copies at the points y, z.
/// If a saturator s is given (typically the metric determinant), targets may
/// additionally be multiplied by powers of s before reduction: a vanishing
/// result then certifies membership on the locus where s is invertible.
/// Returns the surviving residuals.
ConditionSet reduce_modulo(const ConditionSet& targets, const ConditionSet& base,
                           const Ctx& ctx, const Expr* saturator = nullptr);

struct BackendReport {
  bool skew = false;
  bool dist_pass = false, schouten_pass = false, pva_pass = false;
  int dist_residuals = 0, schouten_residuals = 0, pva_residuals = 0;
  bool has_geometry = false;     // operator is hydrodynamic-shaped
  bool geometry_pass = false;
  int geometry_residuals = 0;
  // residuals of each backend reduced modulo the geometric base (only
  // populated for hydrodynamic-shaped operators)
  int dist_reduced = 0, schouten_reduced = 0, pva_reduced = 0;
  bool agree() const {
    bool ok = dist_pass == schouten_pass && dist_pass == pva_pass;
    if (has_geometry) ok = ok && dist_pass == geometry_pass;
    return ok;
  }
};

/// Run all backends (assuming skewness for the Jacobi computations when the
/// operator is symbolic/non-skew) and cross-check the verdicts.
BackendReport compare_backends(const WNLOperator& P, MVCtx& mv);

} // namespace wnl
