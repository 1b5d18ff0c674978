#pragma once

// Lambda-bracket (Poisson vertex algebra) backend.  Expressions are
// polynomials in two formal parameters lambda, mu with differential-polynomial
// coefficients and formal nonlocal atoms
//
//   (lambda+d)^{-1} F,   (mu+d)^{-1} F,   (lambda+mu+d)^{-1} F,
//
// where each payload F is a monomial times possibly nested inner atoms
// (parameters and rational factors are always hoisted out of payloads, and
// payloads are fully distributed, so equal expressions have equal term maps).

#include "wnl/wnlop.hpp"

#include <compare>

namespace wnl {

enum class Shift : uint8_t { Lam = 0, Mu = 1, LamMu = 2 };

struct PAtom {
  Shift s = Shift::Lam;
  Monomial m;               // payload monomial (jets/symbols, point X)
  std::vector<PAtom> inner; // nested atoms multiplying the payload
};

std::strong_ordering cmp(const PAtom& a, const PAtom& b);
inline bool operator<(const PAtom& a, const PAtom& b) { return cmp(a, b) < 0; }
inline bool operator==(const PAtom& a, const PAtom& b) { return cmp(a, b) == 0; }

/// One canonical lambda-monomial: lambda^p mu^q * m * product of atoms.
struct LMono {
  int p = 0, q = 0;
  Monomial m;
  std::vector<PAtom> at;
};

std::strong_ordering cmp(const LMono& a, const LMono& b);
inline bool operator<(const LMono& a, const LMono& b) { return cmp(a, b) < 0; }
inline bool operator==(const LMono& a, const LMono& b) { return cmp(a, b) == 0; }

struct LambdaExpr {
  std::map<LMono, Q> t;

  bool is_zero() const { return t.empty(); }
  void add(LMono m, const Q& c);
  LambdaExpr operator+(const LambdaExpr& o) const;
  LambdaExpr operator-(const LambdaExpr& o) const;
  LambdaExpr operator-() const;
  friend bool operator==(const LambdaExpr&, const LambdaExpr&) = default;
};

std::string to_string(const PAtom& a, const Ctx* ctx = nullptr);
std::string to_string(const LMono& m, const Ctx* ctx = nullptr);
std::string to_string(const LambdaExpr& e, const Ctx* ctx = nullptr);

/// Lift an ordinary differential polynomial.
LambdaExpr lift(const Expr& e);
LambdaExpr lmul(const LambdaExpr& a, const LambdaExpr& b);
LambdaExpr mul_lam(const LambdaExpr& a); // multiply by lambda
LambdaExpr mul_mu(const LambdaExpr& a);  // multiply by mu

/// Total derivative d: acts on coefficients and on atoms via
/// d (nu+d)^{-1}F = F - nu (nu+d)^{-1}F.
LambdaExpr lderiv(const LambdaExpr& a, const Ctx& ctx);

/// Atom constructor (nu+d)^{-1}(pay), hoisting parameters and coefficients.
LambdaExpr mkatom(Shift s, const LambdaExpr& pay);

/// Generator bracket {u^i_nu u^j} = sum_s B^{ji,s} nu^s
///   + sum_a e_a w^j_a (nu+d)^{-1} w^i_a, with nu = lambda (s=Lam) or mu.
LambdaExpr gen_bracket(const WNLOperator& P, int i, int j, Shift s);

/// Outer bracket {u^i_nu X} of a composite expression X by the master
/// formula / Leibniz rules; nu = lambda or mu, atoms of the opposite
/// parameter commute to (lambda+mu+d)^{-1} atoms.
LambdaExpr outer_bracket(const WNLOperator& P, const Ctx& ctx, int i, Shift s,
                         const LambdaExpr& x);

/// Left master formula {c_{lambda+mu+d} u^k} applied to the trailing factor
/// F:  sum_{l,tau} P^{kl}(lambda+mu+d) [(-lambda-mu-d)^tau (dc/du^l_tau F)].
LambdaExpr master_left(const WNLOperator& P, const Ctx& ctx, const Monomial& c,
                       const LambdaExpr& f, int k);

/// Normal form: lambda powers are eliminated against (lambda+d)^{-1} atoms,
/// mu powers against (mu+d)^{-1} and (lambda+mu+d)^{-1} atoms.
LambdaExpr normalize_lambda(const LambdaExpr& e, const Ctx& ctx);

/// PVA-Jacobi identity on generators,
///   J = {u^i_l {u^j_m u^k}} - {u^j_m {u^i_l u^k}} - {{u^i_l u^j}_{l+m} u^k},
/// returned in normal form.  Throws NotSkewAdjoint unless skew or assumed.
LambdaExpr pva_jacobi(const WNLOperator& P, Ctx& ctx, int i, int j, int k,
                      bool assume_skew = false);

/// Classification of a normal-form term against the admissible basis
/// (1 local, 2 (l+m+d)^{-1} with l powers, 4/5 outer atoms with the opposite
/// parameter, 6/7 nested, 8 product of the two outer atoms).
int classify_term(const LMono& m);

/// Skew-symmetry residuals of the lambda-bracket of P: the local part of
/// {u^i_l u^j} + -> {u^j_{-l-d} u^i} (the nonlocal part is skew by
/// construction).  Labels are "skew[i,j]@sigma".
ConditionSet pva_skew_residuals(const WNLOperator& P, Ctx& ctx);

/// Labelled coefficients of a normal-form lambda expression; terms are
/// grouped by (p, q, atom shape) and atom payloads are rendered at auxiliary
/// points (first/outer payload at y, second/inner at z) so that each
/// condition is an ordinary multi-point differential polynomial.
ConditionSet lambda_residuals(const LambdaExpr& e, const Ctx& ctx);

/// General master-formula bracket {f_lambda g} for a *local* operator and
/// differential polynomials f, g (used by the axiom property tests).
LambdaExpr lambda_bracket(const WNLOperator& P, const Ctx& ctx, const Expr& f,
                          const Expr& g);

} // namespace wnl
