#pragma once

// Shared randomized-input helpers for the test suites.  All generators are
// deterministic given the seed so failures reproduce.

#include <random>
#include <vector>

#include "wnl/calculus.hpp"
#include "wnl/geometry.hpp"
#include "wnl/wnlop.hpp"

namespace wnltest {

using namespace wnl;

struct Rng {
  std::mt19937 g;
  explicit Rng(unsigned seed) : g(seed) {}
  int upto(int hi) { // uniform in [0, hi]
    return std::uniform_int_distribution<int>(0, hi)(g);
  }
  int range(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(g);
  }
  Q coeff() { // small nonzero integer
    int c = range(-3, 3);
    return Q(c == 0 ? 1 : c);
  }
};

/// Random differential polynomial: up to `terms` monomials in the jets of n
/// fields with derivative order <= max_order and per-monomial degree <= deg.
inline Expr random_expr(Rng& r, int n, int max_order, int terms = 3,
                        int deg = 2) {
  Expr e;
  int t = 1 + r.upto(terms - 1);
  for (int i = 0; i < t; ++i) {
    Monomial m;
    int d = r.upto(deg);
    for (int k = 0; k < d; ++k)
      m = m.times(jet_factor(r.upto(n - 1), r.upto(max_order)));
    e += Expr::from(m, r.coeff());
  }
  return e;
}

/// Random weakly nonlocal skew-adjoint operator: R - R* for a random local R
/// of order <= max_order/..., plus (optionally) one tail term e w dx^{-1} w,
/// which is skew by construction.
inline WNLOperator random_skew_op(Rng& r, Ctx& ctx, int n, int max_order,
                                  bool with_tail, int coeff_order = 1) {
  WNLOperator R;
  R.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int s = 0; s <= max_order; ++s)
        if (r.upto(2) == 0)
          R.set_coeff(i, j, s, random_expr(r, n, coeff_order, 2, 2));
  WNLOperator P = R - adjoint(R, ctx);
  if (with_tail && r.upto(1) == 0) {
    TailTerm t;
    t.e = r.coeff();
    for (int i = 0; i < n; ++i)
      t.w.push_back(random_expr(r, n, coeff_order, 2, 1));
    P.tails.push_back(std::move(t));
  }
  return P;
}

/// Hydrodynamic instance from the round sphere in stereographic coordinates:
/// g^{ij} = (1+u1^2+u2^2)^2/4 delta^{ij}, the matching Levi-Civita upper
/// Christoffel contraction, w = Id, e = 1.  Polynomial, curved and genuinely
/// Poisson, so every backend must report an exact PASS on it.
inline PBHTData sphere_pbht() {
  using wnl::Expr;
  using wnl::Q;
  PBHTData d;
  d.n = 2;
  Expr u1 = Expr::from(jet_factor(0, 0)), u2 = Expr::from(jet_factor(1, 0));
  Expr f = Expr(Q(1)) + u1 * u1 + u2 * u2; // 1 + r^2
  Expr u[2] = {u1, u2};
  d.g.assign(2, std::vector<Expr>(2));
  d.Gamma.assign(2, std::vector<std::vector<Expr>>(2, std::vector<Expr>(2)));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      d.g[size_t(i)][size_t(j)] =
          i == j ? Expr(Q(1) / 4) * f * f : Expr();
      for (int k = 0; k < 2; ++k) {
        Expr c;
        if (i == j) c += u[k];
        if (j == k) c += u[i];
        if (i == k) c -= u[j];
        d.Gamma[size_t(i)][size_t(j)][size_t(k)] = Expr(Q(1) / 2) * f * c;
      }
    }
  TailAffinor t;
  t.e = Q(1);
  t.w.assign(2, std::vector<Expr>(2));
  t.w[0][0] = Expr(Q(1));
  t.w[1][1] = Expr(Q(1));
  d.tails.push_back(std::move(t));
  return d;
}

} // namespace wnltest
