#include "wnl/pva.hpp"

#include <algorithm>
#include <deque>

namespace wnl {

std::strong_ordering cmp(const PAtom& a, const PAtom& b) {
  if (auto c = a.s <=> b.s; c != 0) return c;
  if (auto c = a.m <=> b.m; c != 0) return c;
  if (auto c = a.inner.size() <=> b.inner.size(); c != 0) return c;
  for (size_t i = 0; i < a.inner.size(); ++i)
    if (auto c = cmp(a.inner[i], b.inner[i]); c != 0) return c;
  return std::strong_ordering::equal;
}

std::strong_ordering cmp(const LMono& a, const LMono& b) {
  if (auto c = a.p <=> b.p; c != 0) return c;
  if (auto c = a.q <=> b.q; c != 0) return c;
  if (auto c = a.m <=> b.m; c != 0) return c;
  if (auto c = a.at.size() <=> b.at.size(); c != 0) return c;
  for (size_t i = 0; i < a.at.size(); ++i)
    if (auto c = cmp(a.at[i], b.at[i]); c != 0) return c;
  return std::strong_ordering::equal;
}

void LambdaExpr::add(LMono m, const Q& c) {
  if (c == 0) return;
  std::sort(m.at.begin(), m.at.end());
  auto it = t.find(m);
  if (it == t.end()) {
    t.emplace(std::move(m), c);
    return;
  }
  it->second += c;
  if (it->second == 0) t.erase(it);
}

LambdaExpr LambdaExpr::operator+(const LambdaExpr& o) const {
  LambdaExpr r = *this;
  for (auto& [m, c] : o.t) r.add(m, c);
  return r;
}

LambdaExpr LambdaExpr::operator-(const LambdaExpr& o) const {
  LambdaExpr r = *this;
  for (auto& [m, c] : o.t) r.add(m, -c);
  return r;
}

LambdaExpr LambdaExpr::operator-() const {
  LambdaExpr r;
  for (auto& [m, c] : t) r.t.emplace(m, -c);
  return r;
}

std::string to_string(const PAtom& a, const Ctx* ctx) {
  static const char* nm[3] = {"(l+d)^-1", "(m+d)^-1", "(l+m+d)^-1"};
  std::string s = nm[int(a.s)];
  s += "[";
  s += a.m.is_one() && a.inner.empty() ? "1" : to_string(a.m, ctx);
  for (auto& in : a.inner) {
    if (!a.m.is_one()) s += "*";
    s += to_string(in, ctx);
  }
  s += "]";
  return s;
}

std::string to_string(const LMono& m, const Ctx* ctx) {
  std::string s;
  auto app = [&](const std::string& x) {
    if (!s.empty()) s += "*";
    s += x;
  };
  if (m.p == 1) app("l");
  if (m.p > 1) app("l^" + std::to_string(m.p));
  if (m.q == 1) app("m");
  if (m.q > 1) app("m^" + std::to_string(m.q));
  if (!m.m.is_one()) app(to_string(m.m, ctx));
  for (auto& a : m.at) app(to_string(a, ctx));
  return s.empty() ? "1" : s;
}

std::string to_string(const LambdaExpr& e, const Ctx* ctx) {
  if (e.t.empty()) return "0";
  std::string s;
  for (auto& [m, c] : e.t) {
    std::string cs = to_string(c);
    if (!s.empty()) s += (cs[0] == '-') ? " - " : " + ";
    else if (cs[0] == '-') s += "-";
    std::string abs = (cs[0] == '-') ? cs.substr(1) : cs;
    if (abs == "1" && !(m == LMono{}))
      s += to_string(m, ctx);
    else
      s += abs + (m == LMono{} ? "" : "*" + to_string(m, ctx));
  }
  return s;
}

LambdaExpr lift(const Expr& e) {
  LambdaExpr r;
  for (auto& [m, c] : e.t) r.add(LMono{0, 0, m, {}}, c);
  return r;
}

LambdaExpr lmul(const LambdaExpr& a, const LambdaExpr& b) {
  LambdaExpr r;
  for (auto& [ma, ca] : a.t)
    for (auto& [mb, cb] : b.t) {
      LMono m{ma.p + mb.p, ma.q + mb.q, ma.m.times(mb.m), ma.at};
      m.at.insert(m.at.end(), mb.at.begin(), mb.at.end());
      r.add(std::move(m), ca * cb);
    }
  return r;
}

LambdaExpr mul_lam(const LambdaExpr& a) {
  LambdaExpr r;
  for (auto& [m, c] : a.t) {
    LMono n = m;
    ++n.p;
    r.t.emplace(std::move(n), c);
  }
  return r;
}

LambdaExpr mul_mu(const LambdaExpr& a) {
  LambdaExpr r;
  for (auto& [m, c] : a.t) {
    LMono n = m;
    ++n.q;
    r.t.emplace(std::move(n), c);
  }
  return r;
}

namespace {

LambdaExpr atom_term(const PAtom& a) {
  LambdaExpr r;
  r.add(LMono{0, 0, Monomial{}, {a}}, Q(1));
  return r;
}

LambdaExpr payload_of(const PAtom& a) {
  LambdaExpr r;
  r.add(LMono{0, 0, a.m, a.inner}, Q(1));
  return r;
}

/// d(atom) = payload - nu * atom.
LambdaExpr atom_deriv(const PAtom& a) {
  LambdaExpr r = payload_of(a);
  LambdaExpr at = atom_term(a);
  if (a.s == Shift::Lam || a.s == Shift::LamMu) r = r - mul_lam(at);
  if (a.s == Shift::Mu || a.s == Shift::LamMu) r = r - mul_mu(at);
  return r;
}

} // namespace

LambdaExpr lderiv(const LambdaExpr& a, const Ctx& ctx) {
  LambdaExpr r;
  for (auto& [m, c] : a.t) {
    LambdaExpr dm = lift(total_derivative(Expr::from(m.m), ctx));
    LambdaExpr rest;
    {
      LMono base{m.p, m.q, Monomial{}, m.at};
      rest.add(base, c);
    }
    r = r + lmul(dm, rest);
    for (size_t i = 0; i < m.at.size(); ++i) {
      LambdaExpr da = atom_deriv(m.at[i]);
      LMono others{m.p, m.q, m.m, {}};
      for (size_t j = 0; j < m.at.size(); ++j)
        if (j != i) others.at.push_back(m.at[j]);
      LambdaExpr oe;
      oe.add(others, c);
      r = r + lmul(da, oe);
    }
  }
  return r;
}

LambdaExpr mkatom(Shift s, const LambdaExpr& pay) {
  LambdaExpr r;
  for (auto& [m, c] : pay.t) {
    PAtom a{s, m.m, m.at};
    std::sort(a.inner.begin(), a.inner.end());
    r.add(LMono{m.p, m.q, Monomial{}, {a}}, c);
  }
  return r;
}

LambdaExpr gen_bracket(const WNLOperator& P, int i, int j, Shift s) {
  LambdaExpr r;
  for (auto& [key, v] : P.B) {
    if (std::get<0>(key) != j || std::get<1>(key) != i) continue;
    LambdaExpr b = lift(v);
    for (int d = 0; d < std::get<2>(key); ++d)
      b = (s == Shift::Lam) ? mul_lam(b) : mul_mu(b);
    r = r + b;
  }
  for (auto& tl : P.tails) {
    LambdaExpr piece = lmul(lift(tl.w[j] * tl.e), mkatom(s, lift(tl.w[i])));
    r = r + piece;
  }
  return r;
}

namespace {

LambdaExpr shift_pow(const LambdaExpr& x, const Ctx& ctx, Shift s, int times,
                     bool negate = false) {
  LambdaExpr r = x;
  for (int d = 0; d < times; ++d) {
    LambdaExpr y = lderiv(r, ctx);
    if (s == Shift::Lam || s == Shift::LamMu) y = y + mul_lam(r);
    if (s == Shift::Mu || s == Shift::LamMu) y = y + mul_mu(r);
    r = negate ? -y : y;
  }
  return r;
}

} // namespace

LambdaExpr outer_bracket(const WNLOperator& P, const Ctx& ctx, int i, Shift s,
                         const LambdaExpr& x) {
  if (s == Shift::LamMu)
    throw EngineError(ErrCode::Internal, "outer bracket parameter must be lambda or mu");
  const Shift other = (s == Shift::Lam) ? Shift::Mu : Shift::Lam;
  LambdaExpr r;
  for (auto& [m, c] : x.t) {
    for (auto& [f, ex] : m.m.f) {
      LambdaExpr piece;
      if (f.kind == Factor::Kind::Jet) {
        piece = shift_pow(gen_bracket(P, i, f.a, s), ctx, s, f.b);
      } else if (f.kind == Factor::Kind::Sym) {
        for (int l = 0; l < P.n; ++l) {
          Factor g = f;
          g.ders.push_back(l);
          std::sort(g.ders.begin(), g.ders.end());
          piece = piece + lmul(lift(Expr::from(g)), gen_bracket(P, i, l, s));
        }
      } else {
        throw EngineError(ErrCode::Internal, "unexpected factor in lambda bracket");
      }
      LambdaExpr rest;
      rest.add(LMono{m.p, m.q, m.m.without(f), m.at}, c * ex);
      r = r + lmul(piece, rest);
    }
    for (size_t a = 0; a < m.at.size(); ++a) {
      if (m.at[a].s != other)
        throw EngineError(ErrCode::Internal, "unexpected atom parameter in outer bracket");
      LambdaExpr piece =
          mkatom(Shift::LamMu, outer_bracket(P, ctx, i, s, payload_of(m.at[a])));
      LMono rest{m.p, m.q, m.m, {}};
      for (size_t b = 0; b < m.at.size(); ++b)
        if (b != a) rest.at.push_back(m.at[b]);
      LambdaExpr re;
      re.add(rest, c);
      r = r + lmul(piece, re);
    }
  }
  return r;
}

LambdaExpr master_left(const WNLOperator& P, const Ctx& ctx, const Monomial& c,
                       const LambdaExpr& f, int k) {
  const Expr ce = Expr::from(c);
  const int tmax = std::max(0, max_jet_order(ce, ctx, -1, Point::X));
  LambdaExpr r;
  for (int l = 0; l < P.n; ++l) {
    for (int tau = 0; tau <= tmax; ++tau) {
      Expr d = partial_jet(ce, l, tau);
      if (d.is_zero()) continue;
      LambdaExpr t = shift_pow(lmul(lift(d), f), ctx, Shift::LamMu, tau, true);
      for (auto& [key, v] : P.B) {
        if (std::get<0>(key) != k || std::get<1>(key) != l) continue;
        r = r + lmul(lift(v), shift_pow(t, ctx, Shift::LamMu, std::get<2>(key)));
      }
      for (auto& tl : P.tails)
        r = r + lmul(lift(tl.w[k] * tl.e),
                     mkatom(Shift::LamMu, lmul(lift(tl.w[l]), t)));
    }
  }
  return r;
}

LambdaExpr normalize_lambda(const LambdaExpr& e, const Ctx& ctx) {
  std::deque<std::pair<LMono, Q>> work(e.t.begin(), e.t.end());
  LambdaExpr out;
  long guard = 0;
  while (!work.empty()) {
    if (++guard > 5000000)
      throw EngineError(ErrCode::NonTerminating, "lambda normal form did not terminate");
    auto [m, c] = std::move(work.front());
    work.pop_front();
    if (c == 0) continue;

    // Pick an atom and a parameter power it can absorb.  For plain
    // (l+d)^{-1}, (m+d)^{-1} atoms: nu (nu+d)^{-1}F = F - (nu+d)^{-1}dF.
    // For (l+m+d)^{-1} atoms the parameter to eliminate depends on the
    // payload: (l+m+d) - (m+d) absorbs l when (m+d)(payload) is
    // parameter-free (payload with an inner (m+d)^{-1} atom), and
    // symmetrically for m; for plain payloads m is absorbed generically,
    // trading it for an allowed l power.
    auto param_free = [](const LambdaExpr& x) {
      for (auto& [mm, cc] : x.t)
        if (mm.p != 0 || mm.q != 0) return false;
      return true;
    };
    int pick = -1;
    bool dec_lam = false;       // which power the rule absorbs
    LambdaExpr repl;            // replacement for power * atom
    for (size_t a = 0; a < m.at.size(); ++a) {
      const PAtom& at = m.at[a];
      LambdaExpr pa = payload_of(at);
      if (at.s == Shift::Lam && m.p > 0) {
        pick = int(a); dec_lam = true;
        repl = pa - mkatom(at.s, lderiv(pa, ctx));
        break;
      }
      if (at.s == Shift::Mu && m.q > 0) {
        pick = int(a); dec_lam = false;
        repl = pa - mkatom(at.s, lderiv(pa, ctx));
        break;
      }
      if (at.s == Shift::LamMu) {
        if (m.p > 0) {
          LambdaExpr y = mul_mu(pa) + lderiv(pa, ctx);
          if (param_free(y)) {
            pick = int(a); dec_lam = true;
            repl = pa - mkatom(at.s, y);
            break;
          }
        }
        if (m.q > 0) {
          LambdaExpr y = mul_lam(pa) + lderiv(pa, ctx);
          if (param_free(y)) {
            pick = int(a); dec_lam = false;
            repl = pa - mkatom(at.s, y);
            break;
          }
          if (at.inner.empty()) {
            pick = int(a); dec_lam = false;
            repl = pa - mul_lam(mkatom(at.s, pa)) - mkatom(at.s, lderiv(pa, ctx));
            break;
          }
        }
      }
    }
    if (pick < 0) {
      out.add(std::move(m), c);
      continue;
    }

    LMono rest = m;
    rest.at.erase(rest.at.begin() + pick);
    if (dec_lam) --rest.p; else --rest.q;
    LambdaExpr re;
    re.add(rest, c);
    for (auto& [mm, cc] : lmul(re, repl).t) work.emplace_back(mm, cc);
  }
  return out;
}

LambdaExpr pva_jacobi(const WNLOperator& P, Ctx& ctx, int i, int j, int k,
                      bool assume_skew) {
  if (!assume_skew) {
    ConditionSet sk = skew_residuals(P, ctx);
    if (!sk.empty())
      throw EngineError(ErrCode::NotSkewAdjoint,
                        "operator is not skew-adjoint: " + sk.items[0].label);
  }
  LambdaExpr j1 = outer_bracket(P, ctx, i, Shift::Lam, gen_bracket(P, j, k, Shift::Mu));
  LambdaExpr j2 = outer_bracket(P, ctx, j, Shift::Mu, gen_bracket(P, i, k, Shift::Lam));
  LambdaExpr j3;
  for (auto& [m, c] : gen_bracket(P, i, j, Shift::Lam).t) {
    if (m.q != 0)
      throw EngineError(ErrCode::Internal, "mu power in a lambda-generator bracket");
    LambdaExpr piece;
    if (m.at.empty()) {
      piece = master_left(P, ctx, m.m, lift(Expr(1)), k);
    } else if (m.at.size() == 1 && m.at[0].s == Shift::Lam && m.at[0].inner.empty()) {
      // left Leibniz: {m A_{l+m+d} u^k} = {m_{l+m+d} u^k}(A)
      //   + {pay_{l+m+d} u^k}((l - l-m-d)^{-1} m), the last inverse being
      //   -(m+d)^{-1}.
      piece = master_left(P, ctx, m.m, atom_term(m.at[0]), k) -
              master_left(P, ctx, m.at[0].m,
                          mkatom(Shift::Mu, lift(Expr::from(m.m))), k);
    } else {
      throw EngineError(ErrCode::Internal, "unexpected left argument structure");
    }
    for (int d = 0; d < m.p; ++d) piece = mul_lam(piece);
    LambdaExpr ce;
    ce.add(LMono{}, c);
    j3 = j3 + lmul(ce, piece);
  }
  return normalize_lambda(j1 - j2 - j3, ctx);
}

int classify_term(const LMono& m) {
  auto bad = [&]() -> EngineError {
    return EngineError(ErrCode::UnclassifiableTerm,
                       "lambda term outside the admissible basis: " + to_string(m));
  };
  if (m.at.empty()) return 1;
  if (m.at.size() == 1) {
    const PAtom& a = m.at[0];
    if (a.s == Shift::LamMu && a.inner.empty()) {
      if (m.q != 0) throw bad();
      return 2;
    }
    if (a.s == Shift::Lam && a.inner.empty()) {
      if (m.p != 0) throw bad();
      return 4;
    }
    if (a.s == Shift::Mu && a.inner.empty()) {
      if (m.q != 0) throw bad();
      return 5;
    }
    if (a.s == Shift::LamMu && a.inner.size() == 1 && a.inner[0].inner.empty()) {
      if (m.p != 0 || m.q != 0) throw bad();
      if (a.inner[0].s == Shift::Lam) return 6;
      if (a.inner[0].s == Shift::Mu) return 7;
    }
    throw bad();
  }
  if (m.at.size() == 2 && m.p == 0 && m.q == 0 && m.at[0].inner.empty() &&
      m.at[1].inner.empty() &&
      ((m.at[0].s == Shift::Lam && m.at[1].s == Shift::Mu) ||
       (m.at[0].s == Shift::Mu && m.at[1].s == Shift::Lam)))
    return 8;
  throw bad();
}

ConditionSet pva_skew_residuals(const WNLOperator& P, Ctx& ctx) {
  ConditionSet cs;
  const int smax = P.max_order();
  for (int i = 0; i < P.n; ++i)
    for (int j = 0; j < P.n; ++j)
      for (int s = 0; s <= smax; ++s) {
        Expr r = P.coeff(j, i, s);
        for (int tau = s; tau <= smax; ++tau) {
          Expr b = P.coeff(i, j, tau);
          if (b.is_zero()) continue;
          r += sign_pow(tau) * binomial(tau, s) *
               total_derivative(b, ctx, Point::X, tau - s);
        }
        cs.add("skew[" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                   "]@" + std::to_string(s),
               r);
      }
  return cs;
}

namespace {

void flatten_atom(const PAtom& a, Expr& value, std::string& shape, int& next) {
  static const char* nm[3] = {"(l+d)^-1", "(m+d)^-1", "(l+m+d)^-1"};
  if (next > 2)
    throw EngineError(ErrCode::Internal, "atom nesting too deep to flatten");
  Point pt = static_cast<Point>(next++);
  value *= move_point(Expr::from(a.m), Point::X, pt);
  shape += nm[int(a.s)];
  shape += "[";
  bool first = true;
  for (auto& in : a.inner) {
    if (!first) shape += "*";
    first = false;
    flatten_atom(in, value, shape, next);
  }
  shape += "]";
}

} // namespace

ConditionSet lambda_residuals(const LambdaExpr& e, const Ctx& ctx) {
  (void)ctx;
  std::map<std::string, Expr> groups;
  for (auto& [m, c] : e.t) {
    Expr value = Expr::from(m.m, c);
    std::string shape;
    if (m.p) shape += "l^" + std::to_string(m.p);
    if (m.q) shape += (shape.empty() ? "" : "*") + std::string("m^") + std::to_string(m.q);
    int next = 1; // payloads rendered at y, then z
    for (auto& a : m.at) {
      if (!shape.empty()) shape += "*";
      flatten_atom(a, value, shape, next);
    }
    if (shape.empty()) shape = "1";
    groups[shape] += value;
  }
  ConditionSet cs;
  for (auto& [shape, v] : groups) cs.add(shape, v);
  return cs;
}

LambdaExpr lambda_bracket(const WNLOperator& P, const Ctx& ctx, const Expr& f,
                          const Expr& g) {
  if (!P.tails.empty())
    throw EngineError(ErrCode::Internal, "general bracket requires a local operator");
  const int tmax = std::max(0, max_jet_order(f, ctx, -1, Point::X));
  const int smax = std::max(0, max_jet_order(g, ctx, -1, Point::X));
  LambdaExpr r;
  for (int m = 0; m < P.n; ++m)
    for (int l = 0; l < P.n; ++l) {
      LambdaExpr inner;
      for (int tau = 0; tau <= tmax; ++tau) {
        Expr df = partial_jet(f, l, tau);
        if (df.is_zero()) continue;
        inner = inner + shift_pow(lift(df), ctx, Shift::Lam, tau, true);
      }
      if (inner.is_zero()) continue;
      LambdaExpr mid;
      for (auto& [key, v] : P.B) {
        if (std::get<0>(key) != m || std::get<1>(key) != l) continue;
        mid = mid + lmul(lift(v), shift_pow(inner, ctx, Shift::Lam, std::get<2>(key)));
      }
      if (mid.is_zero()) continue;
      for (int sig = 0; sig <= smax; ++sig) {
        Expr dg = partial_jet(g, m, sig);
        if (dg.is_zero()) continue;
        r = r + lmul(lift(dg), shift_pow(mid, ctx, Shift::Lam, sig));
      }
    }
  return r;
}

} // namespace wnl
