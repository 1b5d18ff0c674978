#include "wnl/calculus.hpp"

#include <algorithm>

namespace wnl {

namespace {

/// d/dx of a single factor as an Expr (empty if the factor is constant in pt).
Expr factor_derivative(const Factor& g, const Ctx& ctx, Point pt) {
  switch (g.kind) {
  case Factor::Kind::Jet:
    if (g.pt != pt) return Expr();
    return Expr::from(jet_factor(g.a, g.b + 1, g.pt));
  case Factor::Kind::Psi: {
    if (pt != Point::X) return Expr();
    return Expr::from(psi_factor(g.a, g.b, g.c + 1));
  }
  case Factor::Kind::Mark:
    if (g.pt != pt) return Expr();
    return Expr::from(mark_factor(g.a, g.pt, g.b + 1));
  case Factor::Kind::Sym: {
    if (g.pt != pt) return Expr();
    Expr r;
    for (int k = 0; k < ctx.n; ++k) {
      Factor h = g;
      h.ders.push_back(k);
      std::sort(h.ders.begin(), h.ders.end());
      r += Expr::from(h) * Expr::from(jet_factor(k, 1, g.pt));
    }
    return r;
  }
  case Factor::Kind::Atom:
    if (pt != Point::X) return Expr();
    return ctx.atoms.info(g.a).payload;
  }
  return Expr();
}

} // namespace

Expr partial_jet(const Expr& e, int field, int order, Point pt) {
  const Factor v = jet_factor(field, order, pt);
  Expr r;
  for (auto& [m, c] : e.t) {
    for (auto& [g, k] : m.f) {
      if (g == v) {
        r.add_term(m.without(g, 1), c * k);
      } else if (order == 0 && g.kind == Factor::Kind::Sym && g.pt == pt) {
        Factor h = g;
        h.ders.push_back(field);
        std::sort(h.ders.begin(), h.ders.end());
        r += Expr::from(m.without(g, 1).times(h), c * k);
      }
    }
  }
  return r;
}

Expr partial_psi(const Expr& e, int arg, int comp, int order) {
  const Factor v = psi_factor(arg, comp, order);
  Expr r;
  for (auto& [m, c] : e.t)
    for (auto& [g, k] : m.f)
      if (g == v) r.add_term(m.without(g, 1), c * k);
  return r;
}

Expr total_derivative(const Expr& e, const Ctx& ctx, Point pt, int times) {
  Expr cur = e;
  for (int rep = 0; rep < times; ++rep) {
    Expr r;
    for (auto& [m, c] : cur.t) {
      for (auto& [g, k] : m.f) {
        Expr dg = factor_derivative(g, ctx, pt);
        if (dg.is_zero()) continue;
        r += Expr::from(m.without(g, 1), c * k) * dg;
      }
    }
    cur = std::move(r);
  }
  return cur;
}

int max_jet_order(const Expr& e, const Ctx& ctx, int field, Point pt) {
  int best = -1;
  for (auto& [m, c] : e.t)
    for (auto& [g, k] : m.f) {
      if (g.kind == Factor::Kind::Jet && g.pt == pt &&
          (field < 0 || g.a == field))
        best = std::max(best, g.b);
      if (g.kind == Factor::Kind::Sym && g.pt == pt)
        best = std::max(best, 0); // opaque symbols depend on the order-0 fields

      if (g.kind == Factor::Kind::Atom)
        best = std::max(best,
                        max_jet_order(ctx.atoms.info(g.a).payload, ctx, field, pt));
    }
  return best;
}

int max_psi_order(const Expr& e, const Ctx& ctx, int arg, int comp) {
  int best = -1;
  for (auto& [m, c] : e.t)
    for (auto& [g, k] : m.f) {
      if (g.kind == Factor::Kind::Psi && g.a == arg && g.b == comp)
        best = std::max(best, g.c);
      if (g.kind == Factor::Kind::Atom)
        best = std::max(best,
                        max_psi_order(ctx.atoms.info(g.a).payload, ctx, arg, comp));
    }
  return best;
}

namespace {

/// Shared Euler-operator core over an abstract base variable, described by a
/// partial-derivative callback and the maximal order present.
Expr euler_core(const Expr& e, Ctx& ctx, bool atom_flips,
                const std::function<Expr(const Expr&, int)>& partial,
                const std::function<int(const Expr&)>& maxord_of) {
  Expr r;
  for (int s = 0, maxord = maxord_of(e); s <= maxord; ++s) {
    Expr p = partial(e, s);
    if (!p.is_zero()) r += sign_pow(s) * total_derivative(p, ctx, Point::X, s);
  }
  if (!atom_flips) return r;

  // Dependence through atom payloads: for a term F * Dinv(G), the payload
  // dependence contributes -sum_s (-d/dx)^s( dG/dv_s * Dinv(F) ).
  for (auto term : e.t) {
    const Monomial& m = term.first;
    const Q& c = term.second;
    for (auto& [g, k] : m.f) {
      if (g.kind != Factor::Kind::Atom) continue;
      Expr pay = ctx.atoms.info(g.a).payload;
      Expr cof = Expr::from(m.without(g, 1), c * k);
      Expr flipped = dx_inverse(cof, ctx);
      for (int s = 0, pmax = maxord_of(pay); s <= pmax; ++s) {
        Expr p = partial(pay, s);
        if (p.is_zero()) continue;
        r -= sign_pow(s) * total_derivative(p * flipped, ctx, Point::X, s);
      }
    }
  }
  return r;
}

} // namespace

Expr euler_operator(const Expr& e, int field, Ctx& ctx, bool atom_flips) {
  return euler_core(
      e, ctx, atom_flips,
      [field](const Expr& x, int s) { return partial_jet(x, field, s); },
      [field, &ctx](const Expr& x) {
        return std::max(0, max_jet_order(x, ctx, field, Point::X));
      });
}

Expr euler_psi(const Expr& e, int arg, int comp, Ctx& ctx, bool atom_flips) {
  return euler_core(
      e, ctx, atom_flips,
      [arg, comp](const Expr& x, int s) { return partial_psi(x, arg, comp, s); },
      [arg, comp, &ctx](const Expr& x) {
        return std::max(0, max_psi_order(x, ctx, arg, comp));
      });
}

std::pair<Expr, Expr> integrate_split(const Expr& e, const Ctx& ctx, Point pt) {
  Expr rem = e, z;
  int guard = int(e.t.size()) * 64 + 256;
  while (!rem.is_zero() && guard-- > 0) {
    const Monomial m = rem.lead();
    const Q c = rem.t.at(m);
    bool progress = false;
    // Try to realize the lead monomial as the lead of d/dx(n), preferring to
    // lower the highest-ranked differentiated factor.
    for (auto it = m.f.rbegin(); it != m.f.rend() && !progress; ++it) {
      const Factor& g = it->first;
      Factor low = g;
      if (g.kind == Factor::Kind::Jet && g.pt == pt && g.b > 0)
        low.b -= 1;
      else if (g.kind == Factor::Kind::Psi && pt == Point::X && g.c > 0)
        low.c -= 1;
      else if (g.kind == Factor::Kind::Mark && g.pt == pt && g.b > 0)
        low.b -= 1;
      else
        continue;
      Monomial n = m.without(g, 1).times(low);
      Expr dn = total_derivative(Expr::from(n, Q(1)), ctx, pt);
      if (dn.is_zero() || !(dn.lead() == m)) continue;
      Q ratio = c / dn.t.at(m);
      rem -= ratio * dn;
      z.add_term(n, ratio);
      progress = true;
    }
    if (!progress) break;
  }
  return {z, rem};
}

std::optional<Expr> integrate_exact(const Expr& e, const Ctx& ctx, Point pt) {
  auto [z, rem] = integrate_split(e, ctx, pt);
  if (rem.is_zero()) return z;
  return std::nullopt;
}

Expr dx_inverse(const Expr& e, Ctx& ctx) {
  if (e.is_zero()) return Expr();
  auto [z, rem] = integrate_split(e, ctx, Point::X);
  if (rem.is_zero()) return z;
  // Normalize the residual payload to unit lead coefficient for dedup.
  Q lead_c = rem.t.at(rem.lead());
  Expr pay = rem;
  pay *= Q(1) / lead_c;
  int id = ctx.atoms.intern(pay);
  return z + Expr::from(atom_factor(id), lead_c);
}

} // namespace wnl
