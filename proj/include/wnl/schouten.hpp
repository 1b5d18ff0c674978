#pragma once

// Schouten bracket of weakly nonlocal operators through the
// linearization/adjoint calculus, and the canonical three-vector form:
//
//   local:          c * d^p(psi^1_j) d^q(psi^2_p) psi^3_i
//   single-nonlocal: c * psi~^a d^k(psi^{a+1}_p) psi^{a+2}_i   (cyclic slots)
//   double-nonlocal: c * psi~^a psi~^b psi^c_i                 (c order 0)

#include "wnl/wnlop.hpp"

namespace wnl {

enum class Recipe { A, B, C };

/// Canonical three-vector: normalized expression plus the exact
/// antiderivative of everything discarded during normalization, so that
/// raw == canonical + d/dx(discard).
struct ThreeVector {
  Expr canonical;
  Expr discard;
};

/// Raw (un-normalized) Schouten bracket [P,Q](psi^1,psi^2,psi^3) by the
/// chosen recipe.  Throws NotSkewAdjoint unless both operators are
/// skew-adjoint or assume_skew is set.
Expr schouten_raw(const WNLOperator& P, const WNLOperator& Q, Recipe r,
                  MVCtx& mv, bool assume_skew = false);

/// Integrate by parts to the canonical trilinear form.  The returned discard
/// satisfies raw == canonical + d/dx(discard) exactly.
ThreeVector normalize_three_vector(const Expr& raw, MVCtx& mv);

/// Canonical bracket: raw recipe followed by normalization.
ThreeVector schouten_bracket(const WNLOperator& P, const WNLOperator& Q,
                             Recipe r, MVCtx& mv, bool assume_skew = false);

/// Coefficient tables of a canonical three-vector, keyed by the psi/atom
/// pattern monomial (coefficients are pure u-jet/symbol expressions).
std::map<Monomial, Expr> three_vector_tables(const Expr& canonical);

/// Nonzero canonical coefficients as labelled residuals.
ConditionSet three_vector_residuals(const Expr& canonical, const MVCtx& mv);

} // namespace wnl
