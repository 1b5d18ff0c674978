#include "wnl/wnlop.hpp"

namespace wnl {

WNLOperator WNLOperator::operator+(const WNLOperator& o) const {
  WNLOperator r = *this;
  for (auto& [k, v] : o.B) {
    auto [i, j, s] = k;
    r.set_coeff(i, j, s, r.coeff(i, j, s) + v);
  }
  for (auto& t : o.tails) r.tails.push_back(t);
  return r;
}

WNLOperator WNLOperator::operator-(const WNLOperator& o) const {
  WNLOperator r = *this;
  for (auto& [k, v] : o.B) {
    auto [i, j, s] = k;
    r.set_coeff(i, j, s, r.coeff(i, j, s) - v);
  }
  for (auto& t : o.tails) r.tails.push_back(TailTerm{-t.e, t.w});
  return r;
}

WNLOperator adjoint(const WNLOperator& P, const Ctx& ctx) {
  WNLOperator r;
  r.n = P.n;
  for (auto& [k, B] : P.B) {
    auto [i, j, s] = k;
    for (int tau = 0; tau <= s; ++tau) {
      Expr add = sign_pow(s) * binomial(s, tau) *
                 total_derivative(B, ctx, Point::X, s - tau);
      r.set_coeff(j, i, tau, r.coeff(j, i, tau) + add);
    }
  }
  for (auto& t : P.tails) r.tails.push_back(TailTerm{-t.e, t.w});
  return r;
}

ConditionSet skew_residuals(const WNLOperator& P, Ctx& ctx) {
  WNLOperator S = P + adjoint(P, ctx);
  ConditionSet cs;
  for (auto& [k, v] : S.B) {
    auto [i, j, s] = k;
    cs.add("B[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]@" +
               std::to_string(s),
           v);
  }
  return cs;
}

std::vector<int> MVCtx::add_tails(const WNLOperator& P) {
  std::vector<int> idx;
  for (auto& t : P.tails) {
    idx.push_back(int(tails.size()));
    tails.push_back(t);
  }
  return idx;
}

Expr MVCtx::tail_pairing(int arg, int tail_idx) const {
  Expr w;
  const TailTerm& t = tails.at(size_t(tail_idx));
  for (int i = 0; i < ctx.n; ++i)
    w += t.w[size_t(i)] * Expr::from(psi_factor(arg, i, 0));
  return w;
}

int MVCtx::nl_atom(int arg, int tail_idx) {
  return ctx.atoms.intern(tail_pairing(arg, tail_idx), arg, tail_idx);
}

namespace {

/// Local part of P applied to a vector of expressions: (sum_sigma B d^sigma v)_i.
Expr local_apply_component(const WNLOperator& P, const std::vector<Expr>& v,
                           int i, const Ctx& ctx) {
  Expr r;
  for (auto& [k, B] : P.B) {
    auto [pi, pj, s] = k;
    if (pi != i) continue;
    r += B * total_derivative(v[size_t(pj)], ctx, Point::X, s);
  }
  return r;
}

int jet_bound(const Expr& e, const Ctx& ctx) {
  return std::max(0, max_jet_order(e, ctx));
}

} // namespace

std::vector<Expr> apply_op(const WNLOperator& P, const std::vector<int>& tl,
                           int arg, MVCtx& mv) {
  std::vector<Expr> r(size_t(P.n));
  for (auto& [k, B] : P.B) {
    auto [i, j, s] = k;
    r[size_t(i)] += B * Expr::from(psi_factor(arg, j, s));
  }
  for (size_t a = 0; a < tl.size(); ++a) {
    const TailTerm& t = mv.tails[size_t(tl[a])];
    Expr nl = mv.nl_scalar(arg, tl[a]);
    for (int i = 0; i < P.n; ++i) r[size_t(i)] += t.e * t.w[size_t(i)] * nl;
  }
  return r;
}

Expr apply_contract(const WNLOperator& P, const std::vector<int>& tl,
                    const std::vector<Expr>& v, int c, MVCtx& mv) {
  Expr r;
  for (int i = 0; i < P.n; ++i)
    r += local_apply_component(P, v, i, mv.ctx) * Expr::from(psi_factor(c, i, 0));
  // Tail: e w^i dx^{-1}(w.v) contracted with psi^c_i flips to -e psi~^c (w.v).
  for (int a : tl) {
    const TailTerm& t = mv.tails[size_t(a)];
    Expr wv;
    for (int j = 0; j < P.n; ++j) wv += t.w[size_t(j)] * v[size_t(j)];
    r -= t.e * mv.nl_scalar(c, a) * wv;
  }
  return r;
}

Expr pair_contract(const WNLOperator& P, const std::vector<int>& tl, int a,
                   int b, MVCtx& mv) {
  std::vector<Expr> pa = apply_op(P, tl, a, mv);
  Expr r;
  for (int i = 0; i < P.n; ++i)
    r += pa[size_t(i)] * Expr::from(psi_factor(b, i, 0));
  return r;
}

Expr lin_contract(const WNLOperator& P, const std::vector<int>& tl, int a,
                  const std::vector<Expr>& v, int c, MVCtx& mv) {
  const Ctx& ctx = mv.ctx;
  // Pre-compute d^tau v^k lazily.
  std::map<std::pair<int, int>, Expr> dv;
  auto dvk = [&](int k, int tau) -> const Expr& {
    auto it = dv.find({k, tau});
    if (it == dv.end())
      it = dv.emplace(std::pair{k, tau},
                      total_derivative(v[size_t(k)], ctx, Point::X, tau))
               .first;
    return it->second;
  };

  Expr r;
  // Local part: dB^{ij,sigma}/du^k_tau psi^a_{j,sigma} d^tau(v^k) psi^c_i.
  for (auto& [key, B] : P.B) {
    auto [i, j, s] = key;
    int bound = jet_bound(B, ctx);
    for (int k = 0; k < P.n; ++k)
      for (int tau = 0; tau <= bound; ++tau) {
        Expr dB = partial_jet(B, k, tau);
        if (dB.is_zero()) continue;
        r += dB * Expr::from(psi_factor(a, j, s)) * dvk(k, tau) *
             Expr::from(psi_factor(c, i, 0));
      }
  }
  // Tail parts.
  for (int al : tl) {
    const TailTerm& t = mv.tails[size_t(al)];
    Expr nl_a = mv.nl_scalar(a, al);
    Expr nl_c = mv.nl_scalar(c, al);
    for (int k = 0; k < P.n; ++k) {
      int bound = 0;
      for (auto& wi : t.w) bound = std::max(bound, jet_bound(wi, ctx));
      for (int tau = 0; tau <= bound; ++tau) {
        // sum_i dw^i/du^k_tau psi^c_i  and  sum_j dw^j/du^k_tau psi^a_j
        Expr dwc, dwa;
        for (int i = 0; i < P.n; ++i) {
          Expr dw = partial_jet(t.w[size_t(i)], k, tau);
          if (dw.is_zero()) continue;
          dwc += dw * Expr::from(psi_factor(c, i, 0));
          dwa += dw * Expr::from(psi_factor(a, i, 0));
        }
        if (!dwc.is_zero()) r += t.e * dwc * dvk(k, tau) * nl_a;
        if (!dwa.is_zero()) r -= t.e * nl_c * dwa * dvk(k, tau);
      }
    }
  }
  return r;
}

std::vector<Expr> lin_adjoint(const WNLOperator& P, const std::vector<int>& tl,
                              int a, int b, MVCtx& mv) {
  const Ctx& ctx = mv.ctx;
  std::vector<Expr> r(size_t(P.n));
  // Local coefficients of phi -> l_{P,psi^a}(phi):
  //   A^{ik,tau} = sum_{j,sigma} dB^{ij,sigma}/du^k_tau psi^a_{j,sigma}
  //              + sum_alpha e dw^i/du^k_tau psi~^a.
  for (int k = 0; k < P.n; ++k) {
    std::map<int, std::map<int, Expr>> A; // tau -> i -> coeff
    for (auto& [key, B] : P.B) {
      auto [i, j, s] = key;
      int bound = jet_bound(B, ctx);
      for (int tau = 0; tau <= bound; ++tau) {
        Expr dB = partial_jet(B, k, tau);
        if (!dB.is_zero()) A[tau][i] += dB * Expr::from(psi_factor(a, j, s));
      }
    }
    for (int al : tl) {
      const TailTerm& t = mv.tails[size_t(al)];
      Expr nl_a = mv.nl_scalar(a, al);
      int bound = 0;
      for (auto& wi : t.w) bound = std::max(bound, jet_bound(wi, ctx));
      for (int tau = 0; tau <= bound; ++tau)
        for (int i = 0; i < P.n; ++i) {
          Expr dw = partial_jet(t.w[size_t(i)], k, tau);
          if (!dw.is_zero()) A[tau][i] += t.e * dw * nl_a;
        }
    }
    // Adjoint of the local part: sum_{i,tau} (-d)^tau (A^{ik,tau} psi^b_i).
    for (auto& [tau, row] : A)
      for (auto& [i, coeff] : row)
        r[size_t(k)] += sign_pow(tau) *
                        total_derivative(coeff * Expr::from(psi_factor(b, i, 0)),
                                         ctx, Point::X, tau);
    // Adjoint of the nonlocal summand e w^i dx^{-1}(dw^j/du^k_tau psi^a_j d^tau .):
    //   -e sum_tau (-d)^tau( dw^j/du^k_tau psi^a_j psi~^b ).
    for (int al : tl) {
      const TailTerm& t = mv.tails[size_t(al)];
      Expr nl_b = mv.nl_scalar(b, al);
      int bound = 0;
      for (auto& wi : t.w) bound = std::max(bound, jet_bound(wi, ctx));
      for (int tau = 0; tau <= bound; ++tau) {
        Expr dwa;
        for (int j = 0; j < P.n; ++j) {
          Expr dw = partial_jet(t.w[size_t(j)], k, tau);
          if (!dw.is_zero()) dwa += dw * Expr::from(psi_factor(a, j, 0));
        }
        if (!dwa.is_zero())
          r[size_t(k)] -= t.e * sign_pow(tau) *
                          total_derivative(dwa * nl_b, ctx, Point::X, tau);
      }
    }
  }
  return r;
}

Expr euler_pair(const WNLOperator& P, const std::vector<int>& tl, int a, int b,
                int l, MVCtx& mv) {
  Ctx& ctx = mv.ctx;
  // Local part: plain variational derivative (no atoms present).
  Expr local;
  for (auto& [key, B] : P.B) {
    auto [i, j, s] = key;
    local += B * Expr::from(psi_factor(a, j, s)) * Expr::from(psi_factor(b, i, 0));
  }
  Expr r = euler_operator(local, l, ctx, /*atom_flips=*/false);
  // Nonlocal part: E_l( e W_b dx^{-1}(W_a) ) computed structurally with
  // W_c = sum_i w^i psi^c_i, so only canonical atoms appear.
  for (int al : tl) {
    const TailTerm& t = mv.tails[size_t(al)];
    Expr Wa = mv.tail_pairing(a, al);
    Expr Wb = mv.tail_pairing(b, al);
    Expr nl_a = mv.nl_scalar(a, al);
    Expr nl_b = mv.nl_scalar(b, al);
    int bound = std::max(jet_bound(Wa, ctx), jet_bound(Wb, ctx));
    for (int s = 0; s <= bound; ++s) {
      Expr dWb = partial_jet(Wb, l, s);
      if (!dWb.is_zero())
        r += t.e * sign_pow(s) *
             total_derivative(dWb * nl_a, ctx, Point::X, s);
      Expr dWa = partial_jet(Wa, l, s);
      if (!dWa.is_zero())
        r -= t.e * sign_pow(s) *
             total_derivative(dWa * nl_b, ctx, Point::X, s);
    }
  }
  return r;
}

} // namespace wnl
