#pragma once

// Weakly nonlocal matrix differential operators in reduced tail form:
//
//   P^{ij} = sum_sigma B^{ij,sigma} d^sigma  +  sum_alpha e_alpha w^i_alpha
//            dx^{-1} w^j_alpha
//
// with differential-polynomial entries B and tail vectors w.

#include "wnl/calculus.hpp"
#include "wnl/conditions.hpp"

#include <map>
#include <tuple>
#include <vector>

namespace wnl {

struct TailTerm {
  Q e;                    // tail constant e_alpha
  std::vector<Expr> w;    // tail vector components w^i_alpha, i = 0..n-1
};

struct WNLOperator {
  int n = 1;
  std::map<std::tuple<int, int, int>, Expr> B; // (i, j, sigma) -> coefficient
  std::vector<TailTerm> tails;

  Expr coeff(int i, int j, int sigma) const {
    auto it = B.find({i, j, sigma});
    return it == B.end() ? Expr() : it->second;
  }
  void set_coeff(int i, int j, int sigma, Expr v) {
    if (v.is_zero())
      B.erase({i, j, sigma});
    else
      B[{i, j, sigma}] = std::move(v);
  }
  int max_order() const {
    int s = 0;
    for (auto& [k, v] : B) s = std::max(s, std::get<2>(k));
    return s;
  }
  WNLOperator operator-(const WNLOperator& o) const;
  WNLOperator operator+(const WNLOperator& o) const;
};

/// Formal adjoint: local part integrates by parts, tail constants flip sign.
WNLOperator adjoint(const WNLOperator& P, const Ctx& ctx);

/// Canonical local coefficients of P + P*.  The tail part of P + P* vanishes
/// identically (dx^{-1} is skew), so skewness is equivalent to these being
/// zero.  Labels are "B[i,j]@sigma".
ConditionSet skew_residuals(const WNLOperator& P, Ctx& ctx);

/// Shared context for multivector computations: the field count/atom table
/// plus a registry of the tails of all operators involved.  Canonical
/// psi-tilde atoms are interned per (argument slot, global tail index).
struct MVCtx {
  Ctx ctx;
  std::vector<TailTerm> tails; // global tail list

  explicit MVCtx(int n) { ctx.n = n; }

  /// Register an operator's tails; returns their global indices.
  std::vector<int> add_tails(const WNLOperator& P);

  /// Atom id of psi~^arg_alpha = dx^{-1}(sum_i w^i_alpha psi^arg_i).
  int nl_atom(int arg, int tail_idx);
  Expr nl_scalar(int arg, int tail_idx) {
    return Expr::from(atom_factor(nl_atom(arg, tail_idx)));
  }
  /// Payload sum_i w^i_alpha psi^arg_i.
  Expr tail_pairing(int arg, int tail_idx) const;
};

/// P applied to the covector slot `arg`: returns the n components of
/// P(psi^arg), using canonical psi-tilde atoms for the tail part.
std::vector<Expr> apply_op(const WNLOperator& P, const std::vector<int>& tl,
                           int arg, MVCtx& mv);

/// <P(v), psi^c> where v is a vector of expressions.  The tail contribution
/// e w^i dx^{-1}(w.v) psi^c_i is flipped structurally to -e psi~^c (w.v).
Expr apply_contract(const WNLOperator& P, const std::vector<int>& tl,
                    const std::vector<Expr>& v, int c, MVCtx& mv);

/// <P(psi^a), psi^b> without flips (tail atoms already canonical).
Expr pair_contract(const WNLOperator& P, const std::vector<int>& tl, int a,
                   int b, MVCtx& mv);

/// <l_{P,psi^a}(v), psi^c>: linearization of P along psi^a applied to v,
/// contracted with psi^c (nonlocal pieces flipped to canonical atoms).
Expr lin_contract(const WNLOperator& P, const std::vector<int>& tl, int a,
                  const std::vector<Expr>& v, int c, MVCtx& mv);

/// Components of l*_{P,psi^a}(psi^b): the formal adjoint of the map
/// phi -> l_{P,psi^a}(phi), applied to psi^b.
std::vector<Expr> lin_adjoint(const WNLOperator& P, const std::vector<int>& tl,
                              int a, int b, MVCtx& mv);

/// E_l(<P(psi^a), psi^b>): variational derivative of the pairing, with the
/// nonlocal contributions computed structurally (atoms stay canonical).
Expr euler_pair(const WNLOperator& P, const std::vector<int>& tl, int a, int b,
                int l, MVCtx& mv);

} // namespace wnl
