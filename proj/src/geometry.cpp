#include "wnl/geometry.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace wnl {
namespace {

Expr sym(const std::string& name, std::vector<int> idxs) {
  return Expr::from(sym_factor(name, std::move(idxs)));
}

Expr partial0(const Expr& e, int k) { return partial_jet(e, k, 0); }

std::string idx_str(std::initializer_list<int> idxs) {
  std::ostringstream os;
  bool first = true;
  for (int i : idxs) {
    os << (first ? "" : ",") << i + 1;
    first = false;
  }
  return os.str();
}

Expr det_rec(const std::vector<std::vector<Expr>>& m,
             const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.size() == 1) return m[size_t(rows[0])][size_t(cols[0])];
  Expr d;
  std::vector<int> sub_rows(rows.begin() + 1, rows.end());
  for (size_t c = 0; c < cols.size(); ++c) {
    const Expr& pivot = m[size_t(rows[0])][size_t(cols[c])];
    if (pivot.is_zero()) continue;
    std::vector<int> sub_cols;
    for (size_t c2 = 0; c2 < cols.size(); ++c2)
      if (c2 != c) sub_cols.push_back(cols[c2]);
    Expr minor = det_rec(m, sub_rows, sub_cols);
    d += (c % 2 == 0 ? pivot : Expr(Q(-1)) * pivot) * minor;
  }
  return d;
}

Expr matrix_det(const std::vector<std::vector<Expr>>& m) {
  std::vector<int> all(m.size());
  for (size_t i = 0; i < m.size(); ++i) all[i] = int(i);
  return det_rec(m, all, all);
}

} // namespace

PBHTData symbolic_pbht(int n, int ntails) {
  PBHTData d;
  d.n = n;
  d.g.assign(size_t(n), std::vector<Expr>(size_t(n)));
  d.Gamma.assign(size_t(n),
                 std::vector<std::vector<Expr>>(size_t(n),
                                                std::vector<Expr>(size_t(n))));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      d.g[size_t(i)][size_t(j)] = sym("g", {i, j});
      for (int k = 0; k < n; ++k)
        d.Gamma[size_t(i)][size_t(j)][size_t(k)] = sym("Gamma", {i, j, k});
    }
  for (int a = 0; a < ntails; ++a) {
    TailAffinor t;
    t.e = Q(1);
    t.w.assign(size_t(n), std::vector<Expr>(size_t(n)));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        t.w[size_t(i)][size_t(k)] =
            ntails == 1 ? sym("w", {i, k}) : sym("w", {a, i, k});
    d.tails.push_back(std::move(t));
  }
  return d;
}

WNLOperator pbht_operator(const PBHTData& d) {
  WNLOperator P;
  P.n = d.n;
  for (int i = 0; i < d.n; ++i)
    for (int j = 0; j < d.n; ++j) {
      P.set_coeff(i, j, 1, d.g[size_t(i)][size_t(j)]);
      Expr b0;
      for (int k = 0; k < d.n; ++k)
        b0 += d.Gamma[size_t(i)][size_t(j)][size_t(k)] *
              Expr::from(jet_factor(k, 1));
      P.set_coeff(i, j, 0, b0);
    }
  for (const auto& t : d.tails) {
    TailTerm tt;
    tt.e = t.e;
    tt.w.resize(size_t(d.n));
    for (int i = 0; i < d.n; ++i)
      for (int k = 0; k < d.n; ++k)
        tt.w[size_t(i)] +=
            t.w[size_t(i)][size_t(k)] * Expr::from(jet_factor(k, 1));
    P.tails.push_back(std::move(tt));
  }
  return P;
}

PBHTData pbht_from_operator(const WNLOperator& P, const Ctx& ctx) {
  auto shape_error = [](const std::string& what) {
    throw EngineError(ErrCode::Parse,
                      "operator is not hydrodynamic-shaped: " + what);
  };
  if (P.max_order() > 1) shape_error("local order exceeds 1");
  PBHTData d;
  d.n = P.n;
  d.g.assign(size_t(d.n), std::vector<Expr>(size_t(d.n)));
  d.Gamma.assign(size_t(d.n),
                 std::vector<std::vector<Expr>>(
                     size_t(d.n), std::vector<Expr>(size_t(d.n))));
  // splits e = sum_k c_k(u) u^k_x, erroring out on anything else
  auto split_linear = [&](const Expr& e, std::vector<Expr>& out,
                          const std::string& where) {
    Expr rebuilt;
    for (int k = 0; k < d.n; ++k) {
      out[size_t(k)] = partial_jet(e, k, 1);
      if (max_jet_order(out[size_t(k)], ctx) > 0)
        shape_error(where + " is not linear in the first-order jets");
      rebuilt += out[size_t(k)] * Expr::from(jet_factor(k, 1));
    }
    if (!(rebuilt == e))
      shape_error(where + " is not homogeneous linear in the first-order jets");
  };
  for (int i = 0; i < d.n; ++i)
    for (int j = 0; j < d.n; ++j) {
      d.g[size_t(i)][size_t(j)] = P.coeff(i, j, 1);
      if (max_jet_order(d.g[size_t(i)][size_t(j)], ctx) > 0)
        shape_error("leading coefficient depends on jets");
      std::vector<Expr> gam(size_t(d.n));
      split_linear(P.coeff(i, j, 0), gam,
                   "order-0 coefficient [" + idx_str({i, j}) + "]");
      for (int k = 0; k < d.n; ++k)
        d.Gamma[size_t(i)][size_t(j)][size_t(k)] = gam[size_t(k)];
    }
  for (size_t a = 0; a < P.tails.size(); ++a) {
    TailAffinor t;
    t.e = P.tails[a].e;
    t.w.assign(size_t(d.n), std::vector<Expr>(size_t(d.n)));
    for (int i = 0; i < d.n; ++i)
      split_linear(P.tails[a].w[size_t(i)], t.w[size_t(i)],
                   "tail vector component " + std::to_string(i + 1));
    d.tails.push_back(std::move(t));
  }
  return d;
}

Expr metric_det(const PBHTData& d) { return matrix_det(d.g); }

std::vector<std::vector<Expr>> metric_adjugate(const PBHTData& d) {
  size_t n = size_t(d.n);
  std::vector<std::vector<Expr>> adj(n, std::vector<Expr>(n));
  if (n == 1) {
    adj[0][0] = Expr(Q(1));
    return adj;
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      std::vector<int> rows, cols;
      for (size_t r = 0; r < n; ++r)
        if (r != j) rows.push_back(int(r));
      for (size_t c = 0; c < n; ++c)
        if (c != i) cols.push_back(int(c));
      Expr minor = det_rec(d.g, rows, cols);
      adj[i][j] = ((i + j) % 2 == 0) ? minor : Expr(Q(-1)) * minor;
    }
  return adj;
}

ConditionSet geometric_check(const PBHTData& d, const Ctx& ctx) {
  (void)ctx;
  const int n = d.n;
  const auto& g = d.g;
  const auto& Ga = d.Gamma;
  Expr D = metric_det(d);
  if (D.is_zero())
    throw EngineError(ErrCode::SingularMetric, "metric determinant vanishes");
  auto adj = metric_adjugate(d);

  ConditionSet out;
  // (6a) symmetry of the metric
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.add("g-sym[" + idx_str({i, j}) + "]",
              g[size_t(i)][size_t(j)] - g[size_t(j)][size_t(i)]);
  // (6b) connection compatible with the metric derivative
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        out.add("levi-civita[" + idx_str({i, j, k}) + "]",
                partial0(g[size_t(i)][size_t(j)], k) -
                    Ga[size_t(i)][size_t(j)][size_t(k)] -
                    Ga[size_t(j)][size_t(i)][size_t(k)]);
  // (6c) symmetry of g.Gamma
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Expr c;
        for (int s = 0; s < n; ++s)
          c += g[size_t(i)][size_t(s)] * Ga[size_t(j)][size_t(k)][size_t(s)] -
               g[size_t(j)][size_t(s)] * Ga[size_t(i)][size_t(k)][size_t(s)];
        out.add("gGamma-sym[" + idx_str({i, j, k}) + "]", c);
      }
  // (6d) symmetry of g.w, per tail
  for (size_t a = 0; a < d.tails.size(); ++a) {
    const auto& w = d.tails[a].w;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Expr c;
        for (int s = 0; s < n; ++s)
          c += g[size_t(i)][size_t(s)] * w[size_t(j)][size_t(s)] -
               g[size_t(j)][size_t(s)] * w[size_t(i)][size_t(s)];
        out.add("gw-sym[" + std::to_string(a + 1) + ";" + idx_str({i, j}) + "]",
                c);
      }
  }
  // (6e) Codazzi equation per tail, cleared of 1/det(g) by the adjugate:
  // det(g) * (nabla_i w^j_k - nabla_k w^j_i) with the lowered Christoffel
  // symbols Gamma^s_{il} = -g_{it} Gamma^{ts}_l.
  for (size_t a = 0; a < d.tails.size(); ++a) {
    const auto& w = d.tails[a].w;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) {
          Expr c = D * (partial0(w[size_t(j)][size_t(k)], i) -
                        partial0(w[size_t(j)][size_t(i)], k));
          for (int s = 0; s < n; ++s)
            for (int l = 0; l < n; ++l)
              c += Expr(Q(-1)) * adj[size_t(i)][size_t(s)] *
                       Ga[size_t(s)][size_t(j)][size_t(l)] *
                       w[size_t(l)][size_t(k)] +
                   adj[size_t(i)][size_t(s)] *
                       Ga[size_t(s)][size_t(l)][size_t(k)] *
                       w[size_t(j)][size_t(l)] +
                   adj[size_t(k)][size_t(s)] *
                       Ga[size_t(s)][size_t(j)][size_t(l)] *
                       w[size_t(l)][size_t(i)] -
                   adj[size_t(k)][size_t(s)] *
                       Ga[size_t(s)][size_t(l)][size_t(i)] *
                       w[size_t(j)][size_t(l)];
          out.add("codazzi[" + std::to_string(a + 1) + ";" +
                      idx_str({j, i, k}) + "]",
                  c);
        }
  }
  // (6f) Gauss equation, cleared of 1/det(g)^2.  With C^k_{ij} =
  // det(g) * Gamma^k_{ij} = -adj_{is} Gamma^{sk}_j, the doubled-cleared
  // curvature is
  //   det^2 R^j_{skh} = D dC^j_{hs}/du^k - C^j_{hs} D_{,k}
  //                   - D dC^j_{ks}/du^h + C^j_{ks} D_{,h}
  //                   + C^j_{kl} C^l_{hs} - C^j_{hl} C^l_{ks}.
  {
    std::vector<std::vector<std::vector<Expr>>> C;
    C.assign(size_t(n), std::vector<std::vector<Expr>>(
                            size_t(n), std::vector<Expr>(size_t(n))));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Expr c;
          for (int s = 0; s < n; ++s)
            c -= adj[size_t(i)][size_t(s)] * Ga[size_t(s)][size_t(k)][size_t(j)];
          C[size_t(k)][size_t(i)][size_t(j)] = c;
        }
    std::vector<Expr> Dd;
    Dd.resize(size_t(n));
    for (int k = 0; k < n; ++k) Dd[size_t(k)] = partial0(D, k);
    auto R2 = [&](int j, int s, int k, int h) {
      Expr r = D * partial0(C[size_t(j)][size_t(h)][size_t(s)], k) -
               C[size_t(j)][size_t(h)][size_t(s)] * Dd[size_t(k)] -
               D * partial0(C[size_t(j)][size_t(k)][size_t(s)], h) +
               C[size_t(j)][size_t(k)][size_t(s)] * Dd[size_t(h)];
      for (int l = 0; l < n; ++l)
        r += C[size_t(j)][size_t(k)][size_t(l)] *
                 C[size_t(l)][size_t(h)][size_t(s)] -
             C[size_t(j)][size_t(h)][size_t(l)] *
                 C[size_t(l)][size_t(k)][size_t(s)];
      return r;
    };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int h = k + 1; h < n; ++h) {
            Expr c;
            for (int s = 0; s < n; ++s)
              c -= g[size_t(i)][size_t(s)] * R2(j, s, k, h);
            Expr ww;
            for (const auto& t : d.tails)
              ww += Expr(t.e) *
                    (t.w[size_t(i)][size_t(k)] * t.w[size_t(j)][size_t(h)] -
                     t.w[size_t(j)][size_t(k)] * t.w[size_t(i)][size_t(h)]);
            c -= D * D * ww;
            out.add("gauss[" + idx_str({i, j, k, h}) + "]", c);
          }
  }
  return out;
}

ConditionSet pbht_condition_base(const PBHTData& d, const Ctx& ctx) {
  (void)ctx;
  const int n = d.n;
  const auto& g = d.g;
  const auto& Ga = d.Gamma;
  ConditionSet out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.add("g-sym[" + idx_str({i, j}) + "]",
              g[size_t(j)][size_t(i)] - g[size_t(i)][size_t(j)]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        out.add("levi-civita[" + idx_str({i, j, k}) + "]",
                partial0(g[size_t(i)][size_t(j)], k) -
                    Ga[size_t(i)][size_t(j)][size_t(k)] -
                    Ga[size_t(j)][size_t(i)][size_t(k)]);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Expr c;
        for (int s = 0; s < n; ++s)
          c += g[size_t(i)][size_t(s)] * Ga[size_t(j)][size_t(k)][size_t(s)] -
               g[size_t(j)][size_t(s)] * Ga[size_t(i)][size_t(k)][size_t(s)];
        out.add("gGamma-sym[" + idx_str({i, j, k}) + "]", c);
      }
  for (size_t a = 0; a < d.tails.size(); ++a) {
    const auto& w = d.tails[a].w;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Expr c;
        for (int s = 0; s < n; ++s)
          c += g[size_t(i)][size_t(s)] * w[size_t(j)][size_t(s)] -
               g[size_t(j)][size_t(s)] * w[size_t(i)][size_t(s)];
        out.add("gw-sym[" + std::to_string(a + 1) + ";" + idx_str({i, j}) + "]",
                c);
      }
  }
  // raised Codazzi residual: metric-contracted, no inverse metric needed
  for (size_t a = 0; a < d.tails.size(); ++a) {
    const auto& w = d.tails[a].w;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m) {
          Expr c;
          for (int k = 0; k < n; ++k)
            c += Expr(Q(-1)) * partial0(g[size_t(i)][size_t(j)], k) *
                     w[size_t(k)][size_t(m)] +
                 Ga[size_t(i)][size_t(j)][size_t(k)] * w[size_t(k)][size_t(m)] +
                 w[size_t(j)][size_t(k)] * Ga[size_t(k)][size_t(i)][size_t(m)] +
                 partial0(w[size_t(i)][size_t(m)], k) * g[size_t(k)][size_t(j)] -
                 partial0(w[size_t(i)][size_t(k)], m) * g[size_t(k)][size_t(j)];
          out.add("codazzi-raised[" + std::to_string(a + 1) + ";" +
                      idx_str({i, j, m}) + "]",
                  c);
        }
  }
  // raised Gauss residual
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < n; ++p)
        for (int k = 0; k < n; ++k) {
          Expr c;
          for (int h = 0; h < n; ++h) {
            c += (partial0(Ga[size_t(j)][size_t(p)][size_t(h)], k) -
                  partial0(Ga[size_t(j)][size_t(p)][size_t(k)], h)) *
                 g[size_t(h)][size_t(i)];
            c += Ga[size_t(i)][size_t(j)][size_t(h)] *
                     Ga[size_t(h)][size_t(p)][size_t(k)] -
                 Ga[size_t(i)][size_t(p)][size_t(h)] *
                     Ga[size_t(h)][size_t(j)][size_t(k)];
            Expr ww;
            for (const auto& t : d.tails)
              ww += Expr(t.e) *
                    (t.w[size_t(j)][size_t(h)] * t.w[size_t(p)][size_t(k)] -
                     t.w[size_t(p)][size_t(h)] * t.w[size_t(j)][size_t(k)]);
            c += g[size_t(h)][size_t(i)] * ww;
          }
          out.add("gauss-raised[" + idx_str({i, j, p, k}) + "]", c);
        }
  return out;
}

namespace {

// Graded lexicographic monomial order (total degree first, then exponents of
// the factors walked from the largest factor down).  Unlike the std::map key
// order this one is compatible with multiplication, so polynomial reduction
// with respect to it terminates.
std::strong_ordering grlex(const Monomial& a, const Monomial& b) {
  if (auto c = a.total_degree() <=> b.total_degree(); c != 0) return c;
  auto ia = a.f.rbegin(), ib = b.f.rbegin();
  while (ia != a.f.rend() && ib != b.f.rend()) {
    if (auto c = ia->first <=> ib->first; c != 0) return c;
    if (auto c = ia->second <=> ib->second; c != 0) return c;
    ++ia;
    ++ib;
  }
  if (ia != a.f.rend()) return std::strong_ordering::greater;
  if (ib != b.f.rend()) return std::strong_ordering::less;
  return std::strong_ordering::equal;
}

struct Rule {
  Monomial lead;
  Q c;
  Expr value; // full condition, c * lead + lower terms
};

const Monomial& grlex_lead(const Expr& e) {
  auto best = e.t.begin();
  for (auto it = std::next(e.t.begin()); it != e.t.end(); ++it)
    if (grlex(it->first, best->first) > 0) best = it;
  return best->first;
}

// Multivariate division: rewrite v modulo the rules until no monomial is
// divisible by any rule lead.
Expr divide_rules(Expr v, const std::vector<Rule>& rules, long& guard) {
  std::set<Monomial> stuck;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [m, q] : v.t) {
      if (stuck.count(m)) continue;
      const Rule* hit = nullptr;
      for (const auto& r : rules)
        if (m.divisible_by(r.lead)) {
          hit = &r;
          break;
        }
      if (!hit) {
        stuck.insert(m);
        continue;
      }
      v -= (q / hit->c) * Expr::from(m.divided_by(hit->lead)) * hit->value;
      changed = true;
      if (++guard > 200000000)
        throw EngineError(ErrCode::NonTerminating,
                          "condition reduction exceeded the step budget");
      break;
    }
  }
  return v;
}

// Reduce every rule modulo the others until the set is stable.  This makes
// plain division dramatically more effective on overlapping condition sets.
void interreduce(std::vector<Rule>& rules, long& guard) {
  bool changed = true;
  int rounds = 0;
  while (changed && rounds < 10) {
    changed = false;
    ++rounds;
    for (size_t i = 0; i < rules.size(); ++i) {
      std::vector<Rule> others;
      others.reserve(rules.size() - 1);
      for (size_t j = 0; j < rules.size(); ++j)
        if (j != i) others.push_back(rules[j]);
      Expr red = divide_rules(rules[i].value, others, guard);
      if (red == rules[i].value) continue;
      changed = true;
      if (red.is_zero()) {
        rules.erase(rules.begin() + long(i));
        --i;
        continue;
      }
      const Monomial& l = grlex_lead(red);
      rules[i] = {l, red.t.at(l), std::move(red)};
    }
  }
}

// Exact linear-combination membership test: grow a candidate set of
// rule-times-monomial products that touch the target's monomials (and, in
// later rounds, monomials those products introduce), then solve by exact
// Gaussian elimination.  Returns true iff the target is a linear combination
// of the candidates.
bool linear_member(const Expr& target, const std::vector<Rule>& rules,
                   int rounds, size_t cap) {
  std::set<Monomial> reach;
  for (const auto& [m, q] : target.t) reach.insert(m);
  std::set<std::pair<size_t, Monomial>> seen;
  std::vector<Expr> cands;
  bool capped = false;
  for (int rd = 0; rd < rounds && !capped; ++rd) {
    std::set<Monomial> fresh;
    for (size_t ri = 0; ri < rules.size() && !capped; ++ri)
      for (const auto& [mr, qr] : rules[ri].value.t) {
        for (const auto& mt : reach) {
          if (!mt.divisible_by(mr)) continue;
          Monomial mult = mt.divided_by(mr);
          if (!seen.insert({ri, mult}).second) continue;
          Expr cand = Expr::from(mult) * rules[ri].value;
          for (const auto& [cm, cq] : cand.t)
            if (!reach.count(cm)) fresh.insert(cm);
          cands.push_back(std::move(cand));
          if (cands.size() > cap) {
            capped = true;
            break;
          }
        }
        if (capped) break;
      }
    if (fresh.empty()) break;
    reach.insert(fresh.begin(), fresh.end());
  }
  std::map<Monomial, Expr> echelon;
  auto insert = [&](Expr v) {
    while (!v.is_zero()) {
      const Monomial& l = grlex_lead(v);
      auto it = echelon.find(l);
      if (it == echelon.end()) {
        Q c = v.t.at(l);
        echelon[l] = (Q(1) / c) * v;
        return;
      }
      v -= v.t.at(l) * it->second;
    }
  };
  for (auto& c : cands) insert(std::move(c));
  Expr v = target;
  while (!v.is_zero()) {
    const Monomial& l = grlex_lead(v);
    auto it = echelon.find(l);
    if (it == echelon.end()) return false;
    v -= v.t.at(l) * it->second;
  }
  return true;
}

} // namespace

ConditionSet reduce_modulo(const ConditionSet& targets,
                           const ConditionSet& base, const Ctx& ctx,
                           const Expr* saturator) {
  // points and symbol-derivative depth present in the targets
  std::set<Point> points{Point::X};
  size_t depth = 0;
  for (const auto& t : targets.items)
    for (const auto& [m, q] : t.value.t)
      for (const auto& [f, e] : m.f) {
        if (f.kind == Factor::Kind::Sym) {
          points.insert(f.pt);
          depth = std::max(depth, f.ders.size());
        }
        if (f.kind == Factor::Kind::Jet) points.insert(f.pt);
      }
  // also look inside atom payloads (nonlocal backends keep symbols there)
  for (const auto& info : ctx.atoms.infos)
    for (const auto& [m, q] : info.payload.t)
      for (const auto& [f, e] : m.f)
        if (f.kind == Factor::Kind::Sym)
          depth = std::max(depth, f.ders.size());

  // prolong the base by order-0 partials up to the observed depth, then
  // retag every prolongation at every point in play
  std::vector<Expr> level;
  for (const auto& b : base.items) level.push_back(b.value);
  std::vector<Expr> all = level;
  for (size_t d = 1; d <= depth; ++d) {
    std::vector<Expr> next;
    for (const auto& e : level)
      for (int k = 0; k < ctx.n; ++k) {
        Expr p = partial0(e, k);
        if (!p.is_zero()) next.push_back(std::move(p));
      }
    all.insert(all.end(), next.begin(), next.end());
    level = std::move(next);
  }
  long guard = 0;
  std::vector<Rule> rules;
  for (const auto& e : all)
    for (Point pt : points) {
      Expr c = pt == Point::X ? e : move_point(e, Point::X, pt);
      Expr red = divide_rules(std::move(c), rules, guard);
      if (red.is_zero()) continue;
      const Monomial& lead = grlex_lead(red);
      rules.push_back({lead, red.t.at(lead), std::move(red)});
    }
  interreduce(rules, guard);

  // saturation multipliers: successive products of the saturator placed at
  // each point in play, then their squares
  std::vector<Expr> sats{Expr(Q(1))};
  if (saturator && !saturator->is_zero()) {
    Expr acc(Q(1));
    for (int pass = 0; pass < 2; ++pass)
      for (Point pt : points) {
        acc = acc * (pt == Point::X ? *saturator
                                    : move_point(*saturator, Point::X, pt));
        sats.push_back(acc);
      }
  }

  ConditionSet out;
  for (const auto& t : targets.items) {
    Expr v = divide_rules(t.value, rules, guard);
    if (v.is_zero()) continue;
    // split into pieces sharing the same non-symbol factors; each piece must
    // vanish separately since the base only involves the opaque symbols
    std::map<Monomial, Expr> pieces;
    for (const auto& [m, q] : v.t) {
      Monomial symp, rest;
      for (const auto& [f, e] : m.f)
        (f.kind == Factor::Kind::Sym ? symp : rest).f.push_back({f, e});
      pieces[rest].add_term(symp, q);
    }
    bool all_zero = true;
    for (const auto& [rest, piece] : pieces) {
      bool ok = false;
      for (const auto& s : sats) {
        Expr cur = divide_rules(s * piece, rules, guard);
        if (cur.is_zero() || linear_member(cur, rules, 3, 20000)) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        all_zero = false;
        break;
      }
    }
    if (!all_zero) out.add(t.label, v);
  }
  return out;
}

BackendReport compare_backends(const WNLOperator& P, MVCtx& mv) {
  BackendReport r;
  r.skew = skew_residuals(P, mv.ctx).empty();

  ConditionSet dist_all, pva_all;
  for (int i = 0; i < P.n; ++i)
    for (int j = 0; j < P.n; ++j)
      for (int k = 0; k < P.n; ++k) {
        auto tag = "[" + idx_str({i, j, k}) + "] ";
        auto dres = dist_residuals(
            reduce_dist(jacobi_dist(P, mv.ctx, i, j, k, true), mv.ctx), mv.ctx);
        for (auto& it : dres.items) dist_all.add(tag + it.label, it.value);
        auto pres =
            lambda_residuals(pva_jacobi(P, mv.ctx, i, j, k, true), mv.ctx);
        for (auto& it : pres.items) pva_all.add(tag + it.label, it.value);
      }
  auto tv = schouten_bracket(P, P, Recipe::A, mv, true);
  ConditionSet sres = three_vector_residuals(tv.canonical, mv);

  r.dist_residuals = int(dist_all.size());
  r.pva_residuals = int(pva_all.size());
  r.schouten_residuals = int(sres.size());
  r.dist_pass = dist_all.empty();
  r.pva_pass = pva_all.empty();
  r.schouten_pass = sres.empty();

  try {
    PBHTData data = pbht_from_operator(P, mv.ctx);
    r.has_geometry = true;
    ConditionSet geo = geometric_check(data, mv.ctx);
    r.geometry_residuals = int(geo.size());
    r.geometry_pass = geo.empty();
    ConditionSet base = pbht_condition_base(data, mv.ctx);
    Expr det = metric_det(data);
    r.dist_reduced = int(reduce_modulo(dist_all, base, mv.ctx, &det).size());
    r.schouten_reduced = int(reduce_modulo(sres, base, mv.ctx, &det).size());
    r.pva_reduced = int(reduce_modulo(pva_all, base, mv.ctx, &det).size());
  } catch (const EngineError& e) {
    if (e.code == ErrCode::SingularMetric) {
      r.has_geometry = true;
      r.geometry_pass = false;
      r.geometry_residuals = -1;
    } else if (e.code != ErrCode::Parse) {
      throw;
    }
  }
  return r;
}

} // namespace wnl
