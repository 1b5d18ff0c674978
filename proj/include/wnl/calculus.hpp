#pragma once

// Differential calculus on Expr: total x-derivative, formal jet partials,
// Euler (variational derivative) operators, and formal antiderivatives.

#include "wnl/expr.hpp"

#include <functional>
#include <optional>
#include <utility>

namespace wnl {

/// Formal partial derivative with respect to the jet variable u^field_order
/// at point pt.  At order 0 this includes the chain rule through opaque
/// coefficient symbols (which depend on the order-0 fields only).
Expr partial_jet(const Expr& e, int field, int order, Point pt = Point::X);

/// Formal partial derivative with respect to psi^arg_comp at derivative
/// `order`.  Atoms are treated as constants.
Expr partial_psi(const Expr& e, int arg, int comp, int order);

/// Total derivative with respect to the point variable pt.  dx^{-1} atoms
/// differentiate to their payloads; factors tagged with other points are
/// constants.
Expr total_derivative(const Expr& e, const Ctx& ctx, Point pt = Point::X,
                      int times = 1);

/// Identity on the (always canonical) representation; provided as the
/// explicit normal-form entry point.
inline Expr normalize(Expr e) { return e; }

/// Highest derivative order of u^field (any field if field < 0) at pt,
/// looking inside atom payloads as well.  Returns -1 if absent.
int max_jet_order(const Expr& e, const Ctx& ctx, int field = -1,
                  Point pt = Point::X);

/// Highest order of psi^arg_comp present (including atom payloads).
int max_psi_order(const Expr& e, const Ctx& ctx, int arg, int comp);

/// Variational derivative delta/delta u^field.  When atom_flips is set,
/// dependence through dx^{-1} atom payloads is accounted for with the
/// integration-by-parts flip dx^{-1} -> -dx^{-1}, which may intern new atoms.
Expr euler_operator(const Expr& e, int field, Ctx& ctx, bool atom_flips = true);

/// Variational derivative with respect to the covector slot psi^arg_comp.
Expr euler_psi(const Expr& e, int arg, int comp, Ctx& ctx,
               bool atom_flips = true);

/// Greedy exact integration: split e = d/dx(Z) + R, maximizing the
/// integrated part term-by-term.  Returns {Z, R}.
std::pair<Expr, Expr> integrate_split(const Expr& e, const Ctx& ctx,
                                      Point pt = Point::X);

/// Full exact antiderivative if the greedy splitter succeeds.
std::optional<Expr> integrate_exact(const Expr& e, const Ctx& ctx,
                                    Point pt = Point::X);

/// Formal dx^{-1}: integrates what it can and interns the remainder as an
/// atom (payload normalized to unit lead coefficient).
Expr dx_inverse(const Expr& e, Ctx& ctx);

} // namespace wnl
