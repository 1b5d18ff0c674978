#include "wnl/schouten.hpp"

#include <deque>

namespace wnl {

namespace {

void check_skew(const WNLOperator& P, MVCtx& mv, bool assume_skew) {
  if (assume_skew) return;
  ConditionSet cs = skew_residuals(P, mv.ctx);
  if (!cs.empty())
    throw EngineError(ErrCode::NotSkewAdjoint,
                      "operator is not skew-adjoint; first residual " +
                          cs.items.front().label + " = " +
                          to_string(cs.items.front().value, &mv.ctx));
}

Expr recipe_a(const WNLOperator& P, const std::vector<int>& tp,
              const WNLOperator& Q, const std::vector<int>& tq, MVCtx& mv) {
  Expr r;
  for (int c0 = 0; c0 < 3; ++c0) {
    int a = c0, b = (c0 + 1) % 3, c = (c0 + 2) % 3;
    r += lin_contract(P, tp, a, apply_op(Q, tq, b, mv), c, mv);
    r += lin_contract(Q, tq, a, apply_op(P, tp, b, mv), c, mv);
  }
  return r;
}

Expr recipe_b(const WNLOperator& P, const std::vector<int>& tp,
              const WNLOperator& Q, const std::vector<int>& tq, MVCtx& mv) {
  Expr r;
  r += lin_contract(P, tp, 0, apply_op(Q, tq, 1, mv), 2, mv);
  r -= lin_contract(P, tp, 1, apply_op(Q, tq, 0, mv), 2, mv);
  r += lin_contract(Q, tq, 0, apply_op(P, tp, 1, mv), 2, mv);
  r -= lin_contract(Q, tq, 1, apply_op(P, tp, 0, mv), 2, mv);
  r -= apply_contract(P, tp, lin_adjoint(Q, tq, 1, 0, mv), 2, mv);
  r -= apply_contract(Q, tq, lin_adjoint(P, tp, 1, 0, mv), 2, mv);
  return r;
}

Expr recipe_c(const WNLOperator& P, const std::vector<int>& tp,
              const WNLOperator& Q, const std::vector<int>& tq, MVCtx& mv) {
  Expr r;
  for (int c0 = 0; c0 < 3; ++c0) {
    int a = c0, b = (c0 + 1) % 3, c = (c0 + 2) % 3;
    std::vector<Expr> eq(size_t(P.n)), ep(size_t(P.n));
    for (int l = 0; l < P.n; ++l) {
      eq[size_t(l)] = euler_pair(Q, tq, a, b, l, mv);
      ep[size_t(l)] = euler_pair(P, tp, a, b, l, mv);
    }
    r += apply_contract(P, tp, eq, c, mv);
    r += apply_contract(Q, tq, ep, c, mv);
  }
  return r;
}

} // namespace

Expr schouten_raw(const WNLOperator& P, const WNLOperator& Q, Recipe r,
                  MVCtx& mv, bool assume_skew) {
  check_skew(P, mv, assume_skew);
  check_skew(Q, mv, assume_skew);
  std::vector<int> tp = mv.add_tails(P);
  std::vector<int> tq = mv.add_tails(Q);
  switch (r) {
  case Recipe::A: return recipe_a(P, tp, Q, tq, mv);
  case Recipe::B: return recipe_b(P, tp, Q, tq, mv);
  default: return recipe_c(P, tp, Q, tq, mv);
  }
}

namespace {

/// Classify the psi structure of a trilinear monomial: which argument slots
/// are carried by atoms and the "last" slot that must end at order zero.
struct SlotInfo {
  int n_atoms = 0;
  bool atom_arg[3] = {false, false, false};
  int last = 2;
};

SlotInfo slot_info(const Monomial& m, const MVCtx& mv) {
  SlotInfo s;
  for (auto& [g, e] : m.f) {
    if (g.kind != Factor::Kind::Atom) continue;
    const AtomInfo& ai = mv.ctx.atoms.info(g.a);
    if (ai.arg < 0)
      throw EngineError(ErrCode::Internal,
                        "non-canonical atom in three-vector normalization");
    s.n_atoms += e;
    s.atom_arg[ai.arg] = true;
  }
  if (s.n_atoms == 0) {
    s.last = 2;
  } else if (s.n_atoms == 1) {
    int a = s.atom_arg[0] ? 0 : (s.atom_arg[1] ? 1 : 2);
    s.last = (a + 2) % 3;
  } else {
    s.last = 0;
    for (int a = 0; a < 3; ++a)
      if (!s.atom_arg[a]) s.last = a;
  }
  return s;
}

} // namespace

ThreeVector normalize_three_vector(const Expr& raw, MVCtx& mv) {
  ThreeVector out;
  std::deque<std::pair<Monomial, Q>> work(raw.t.begin(), raw.t.end());
  size_t guard = raw.t.size() * 4096 + 65536;
  while (!work.empty()) {
    if (guard-- == 0)
      throw EngineError(ErrCode::NonTerminating,
                        "three-vector normalization did not terminate");
    auto [m, c] = work.front();
    work.pop_front();
    if (c == 0) continue;
    SlotInfo s = slot_info(m, mv);
    // Find the psi factor of the "last" slot with positive order.
    const Factor* hi = nullptr;
    for (auto& [g, e] : m.f)
      if (g.kind == Factor::Kind::Psi && g.a == s.last && g.c > 0) {
        hi = &g;
        break;
      }
    if (!hi) {
      out.canonical.add_term(m, c);
      continue;
    }
    // T = c*m with last-slot psi at order k.  With N = c*m' (order k-1),
    // T - d/dx(N) has strictly smaller last-slot order; d/dx(N) is discarded.
    Factor lowered = *hi;
    lowered.c -= 1;
    Monomial n = m.without(*hi, 1).times(lowered);
    Expr ne = Expr::from(n, c);
    Expr rest = Expr::from(m, c) - total_derivative(ne, mv.ctx, Point::X);
    out.discard += ne;
    for (auto& [mm, cc] : rest.t) work.emplace_back(mm, cc);
  }
  return out;
}

ThreeVector schouten_bracket(const WNLOperator& P, const WNLOperator& Q,
                             Recipe r, MVCtx& mv, bool assume_skew) {
  return normalize_three_vector(schouten_raw(P, Q, r, mv, assume_skew), mv);
}

std::map<Monomial, Expr> three_vector_tables(const Expr& canonical) {
  std::map<Monomial, Expr> tables;
  for (auto& [m, c] : canonical.t) {
    Monomial pattern, coeff;
    for (auto& [g, e] : m.f) {
      if (g.kind == Factor::Kind::Psi || g.kind == Factor::Kind::Atom)
        pattern = pattern.times(g, e);
      else
        coeff = coeff.times(g, e);
    }
    tables[pattern].add_term(coeff, c);
  }
  return tables;
}

ConditionSet three_vector_residuals(const Expr& canonical, const MVCtx& mv) {
  ConditionSet cs;
  for (auto& [pattern, coeff] : three_vector_tables(canonical))
    cs.add(to_string(pattern, &mv.ctx), coeff);
  return cs;
}

} // namespace wnl
