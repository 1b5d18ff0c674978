#include "wnl/dist.hpp"

#include <algorithm>
#include <deque>

namespace wnl {

namespace {

int point_arg(Point p) { return static_cast<int>(p); } // test-function slot
Point arg_point(int a) { return static_cast<Point>(a); }

} // namespace

std::pair<DistFactor, int> make_delta(Point a, Point b, int order) {
  DistFactor f;
  f.is_nu = false;
  f.order = order;
  if (a < b) {
    f.p = a;
    f.q = b;
    return {f, 1};
  }
  f.p = b;
  f.q = a;
  return {f, (order % 2 == 0) ? 1 : -1};
}

std::pair<DistFactor, int> make_nu(Point a, Point b) {
  DistFactor f;
  f.is_nu = true;
  // canonical cyclic pairs: (x,y), (y,z), (z,x)
  bool canon = (a == Point::X && b == Point::Y) ||
               (a == Point::Y && b == Point::Z) ||
               (a == Point::Z && b == Point::X);
  if (canon) {
    f.p = a;
    f.q = b;
    return {f, 1};
  }
  f.p = b;
  f.q = a;
  return {f, -1};
}

void DistExpr::add(FactorKey k, const Expr& c) {
  if (c.is_zero()) return;
  std::sort(k.begin(), k.end());
  auto it = t.find(k);
  if (it == t.end()) {
    t.emplace(std::move(k), c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) t.erase(it);
}

DistExpr DistExpr::operator+(const DistExpr& o) const {
  DistExpr r = *this;
  for (auto& [k, c] : o.t) r.add(k, c);
  return r;
}

DistExpr DistExpr::operator-() const {
  DistExpr r;
  for (auto& [k, c] : t) r.t.emplace(k, -c);
  return r;
}

std::string to_string(const DistFactor& f) {
  static const char* pn[3] = {"x", "y", "z"};
  std::string s = f.is_nu ? "nu" : (f.order == 0 ? "d" : "d" + std::to_string(f.order));
  s += "[";
  s += pn[point_arg(f.p)];
  s += pn[point_arg(f.q)];
  s += "]";
  return s;
}

std::string to_string(const DistExpr& e, const Ctx* ctx) {
  if (e.t.empty()) return "0";
  std::string s;
  for (auto& [k, c] : e.t) {
    if (!s.empty()) s += "\n";
    std::string pat;
    for (auto& f : k) {
      if (!pat.empty()) pat += "*";
      pat += to_string(f);
    }
    if (pat.empty()) pat = "1";
    s += pat + " : " + to_string(c, ctx);
  }
  return s;
}

namespace {

DistExpr dmul(const DistExpr& a, const DistExpr& b) {
  DistExpr r;
  for (auto& [ka, ca] : a.t)
    for (auto& [kb, cb] : b.t) {
      FactorKey k = ka;
      k.insert(k.end(), kb.begin(), kb.end());
      r.add(std::move(k), ca * cb);
    }
  return r;
}

/// d/d(pt) of a distributional expression (total derivative in the point).
DistExpr dderiv(const DistExpr& e, const Ctx& ctx, Point pt) {
  DistExpr r;
  for (auto& [k, c] : e.t) {
    r.add(k, total_derivative(c, ctx, pt));
    for (size_t i = 0; i < k.size(); ++i) {
      const DistFactor& f = k[i];
      if (f.p != pt && f.q != pt) continue;
      int sgn = (f.p == pt) ? 1 : -1; // d/dp delta(p-q) = delta', d/dq = -delta'
      DistFactor g = f;
      g.is_nu = false;
      g.order = f.is_nu ? 0 : f.order + 1;
      if (f.is_nu) {
        // nu(p-q) is stored unsigned; its derivative is a delta over the
        // same ordered pair, re-canonicalised for p < q.
        auto [cd, s2] = make_delta(f.p, f.q, 0);
        g = cd;
        sgn *= s2;
      }
      FactorKey nk = k;
      nk[i] = g;
      r.add(std::move(nk), c * Q(sgn));
    }
  }
  return r;
}

DistExpr dpartial(const DistExpr& e, int field, int order, Point pt) {
  DistExpr r;
  for (auto& [k, c] : e.t) r.add(k, partial_jet(c, field, order, pt));
  return r;
}

} // namespace

Expr retag(const Expr& e, Point pt) {
  Expr r = e;
  for (int a = 0; a < 3; ++a)
    if (arg_point(a) != pt) r = move_point(r, arg_point(a), pt);
  return r;
}

DistExpr op_kernel(const WNLOperator& P, const Ctx& ctx, int i, int j, Point a,
                   Point b) {
  (void)ctx;
  DistExpr r;
  for (auto& [key, v] : P.B) {
    if (std::get<0>(key) != i || std::get<1>(key) != j) continue;
    auto [d, s] = make_delta(a, b, std::get<2>(key));
    r.add({d}, retag(v, a) * Q(s));
  }
  for (auto& tl : P.tails) {
    auto [nu, s] = make_nu(a, b);
    r.add({nu}, retag(tl.w[i], a) * retag(tl.w[j], b) * tl.e * Q(s));
  }
  return r;
}

DistExpr jacobi_dist_summand(const WNLOperator& P, const Ctx& ctx, int i, int j,
                             int k, int sum_idx, int sigma) {
  struct Spec {
    int a1, b1;       // indices of the first kernel (l replaces -1)
    Point p1, q1;     // its points
    Point dp;         // point of the outer partial / derivative
    int a2, b2;       // indices of the second kernel
    Point p2, q2;
  };
  const Point X = Point::X, Y = Point::Y, Z = Point::Z;
  const Spec spec[6] = {
      {i, j, X, Y, X, -1, k, X, Z}, {i, j, X, Y, Y, -1, k, Y, Z},
      {k, i, Z, X, Z, -1, j, Z, Y}, {k, i, Z, X, X, -1, j, X, Y},
      {j, k, Y, Z, Y, -1, i, Y, X}, {j, k, Y, Z, Z, -1, i, Z, X}};
  const Spec& s = spec[sum_idx];
  DistExpr r;
  for (int l = 0; l < P.n; ++l) {
    DistExpr k1 = dpartial(op_kernel(P, ctx, s.a1, s.b1, s.p1, s.q1), l, sigma, s.dp);
    if (k1.t.empty()) continue;
    DistExpr k2 = op_kernel(P, ctx, l, s.b2, s.p2, s.q2);
    for (int d = 0; d < sigma; ++d) k2 = dderiv(k2, ctx, s.dp);
    r = r + dmul(k1, k2);
  }
  return r;
}

DistExpr jacobi_dist(const WNLOperator& P, Ctx& ctx, int i, int j, int k,
                     bool assume_skew) {
  if (!assume_skew) {
    ConditionSet sk = skew_residuals(P, ctx);
    if (!sk.empty())
      throw EngineError(ErrCode::NotSkewAdjoint,
                        "operator is not skew-adjoint: " + sk.items[0].label);
  }
  int smax = 0;
  for (auto& [key, v] : P.B)
    smax = std::max(smax, max_jet_order(v, ctx, -1, Point::X));
  for (auto& tl : P.tails)
    for (auto& w : tl.w)
      smax = std::max(smax, max_jet_order(w, ctx, -1, Point::X));
  DistExpr r;
  for (int s = 0; s < 6; ++s)
    for (int sg = 0; sg <= smax; ++sg)
      r = r + jacobi_dist_summand(P, ctx, i, j, k, s, sg);
  return r;
}

namespace {

/// Integrate out the point c against delta^{(n)}(p-q) (one of p,q equals c):
/// multiply the coefficient by a fresh order-0 marker for c's test-function
/// slot, apply the n-th derivative to the c-tagged part of each monomial, and
/// move the result to the surviving point.
Expr integrate_delta(const Expr& coeff, const Ctx& ctx, const DistFactor& d,
                     Point c) {
  Point s = (d.p == c) ? d.q : d.p;
  Q sgn((d.p == c && d.order % 2 == 1) ? -1 : 1);
  Expr src = coeff * Expr::from(mark_factor(point_arg(c), c));
  Expr r;
  for (auto& [m, q] : src.t) {
    Monomial mc, rest;
    for (auto& [f, ex] : m.f)
      (f.pt == c ? mc : rest) = (f.pt == c ? mc : rest).times(f, ex);
    Expr g = total_derivative(Expr::from(mc), ctx, c, d.order);
    r += move_point(g, c, s) * Expr::from(rest, q * sgn);
  }
  return r;
}

struct WorkItem {
  FactorKey k;
  Expr c;
};

} // namespace

DistExpr reduce_dist(const DistExpr& e, const Ctx& ctx) {
  std::deque<WorkItem> work;
  for (auto& [k, c] : e.t) work.push_back({k, c});
  DistExpr out;
  long guard = 0;
  while (!work.empty()) {
    if (++guard > 2000000)
      throw EngineError(ErrCode::NonTerminating, "distributional reduction did not terminate");
    WorkItem it = std::move(work.front());
    work.pop_front();
    if (it.c.is_zero()) continue;

    int nnu = 0;
    for (auto& f : it.k) nnu += f.is_nu;

    if (nnu == static_cast<int>(it.k.size())) {
      // only nu factors (and markers in the coefficient) remain: finalize by
      // turning each monomial's markers back into anchored delta factors.
      for (auto& [m, q] : it.c.t) {
        FactorKey key = it.k;
        Monomial rest;
        Q coef = q;
        for (auto& [f, ex] : m.f) {
          if (f.kind != Factor::Kind::Mark) {
            rest = rest.times(f, ex);
            continue;
          }
          if (ex != 1)
            throw EngineError(ErrCode::Internal, "repeated marker in reduced term");
          auto [d, s] = make_delta(f.pt, arg_point(f.a), f.b);
          key.push_back(d);
          coef *= s;
        }
        std::sort(key.begin(), key.end());
        out.add(std::move(key), Expr::from(rest, coef));
      }
      continue;
    }

    if (nnu == 0 && it.k.size() == 1) {
      // lone delta: integrate out its non-anchor point, leaving a purely
      // local (marker-carrying) coefficient at x.
      const DistFactor& d = it.k[0];
      Point c = (d.p == Point::X) ? d.q : d.p;
      work.push_back({{}, integrate_delta(it.c, ctx, d, c)});
      continue;
    }
    if (it.k.size() != 2)
      throw EngineError(ErrCode::Internal, "unexpected factor count in reduction");
    const DistFactor f0 = it.k[0], f1 = it.k[1];

    if (nnu == 0) {
      // delta * delta: integrate out the free far points, z before y,
      // keeping x as the anchor.
      bool done = false;
      for (Point c : {Point::Z, Point::Y}) {
        int in0 = (f0.p == c || f0.q == c), in1 = (f1.p == c || f1.q == c);
        if (in0 + in1 != 1) continue;
        const DistFactor& d = in0 ? f0 : f1;
        const DistFactor& other = in0 ? f1 : f0;
        work.push_back({{other}, integrate_delta(it.c, ctx, d, c)});
        done = true;
        break;
      }
      if (!done)
        throw EngineError(ErrCode::Internal, "no free point in delta pair");
      continue;
    }

    // nu * delta
    const DistFactor& nu = f0.is_nu ? f0 : f1;
    const DistFactor& d = f0.is_nu ? f1 : f0;
    bool shares_p = (d.p == nu.p || d.q == nu.p);
    bool shares_q = (d.p == nu.q || d.q == nu.q);
    if (shares_p && shares_q)
      throw EngineError(ErrCode::Internal, "nu and delta over the same pair");
    if (shares_p) {
      // allowed pattern: delta anchored at the first point of the cyclic
      // pair; strip the far-point dependence of the coefficient.
      Point c = (d.p == nu.p) ? d.q : d.p;
      work.push_back({{nu}, integrate_delta(it.c, ctx, d, c)});
      continue;
    }
    // forbidden pattern: move the nu endpoint across the delta,
    //   nu(a-b) d^(n)(a-c) = nu(c-b) d^(n)(a-c)
    //                        - sum_k C(n,k) d^(k-1)(a-b) d^(n-k)(a-c).
    Point a = nu.q, b = nu.p;
    Point c = (d.p == a) ? d.q : d.p;
    // it.c multiplies nu(p-q) (stored) and the stored delta; orient them as
    // nu(a-b) and d^(n)(a-c).
    Q base(-1); // nu(p-q) = -nu(a-b) with a = q, b = p
    if (d.p != a && d.order % 2 == 1) base = -base; // d^(n)(c-a) = (-1)^n d^(n)(a-c)
    Expr cc = it.c * base;
    {
      auto [nn, s1] = make_nu(c, b);
      auto [dd, s2] = make_delta(a, c, d.order);
      FactorKey k{nn, dd};
      work.push_back({k, cc * Q(s1 * s2)});
    }
    for (int kk = 1; kk <= d.order; ++kk) {
      auto [d1, s1] = make_delta(a, b, kk - 1);
      auto [d2, s2] = make_delta(a, c, d.order - kk);
      FactorKey k{d1, d2};
      work.push_back({k, cc * (-binomial(d.order, kk)) * Q(s1 * s2)});
    }
  }
  return out;
}

ConditionSet dist_residuals(const DistExpr& reduced, const Ctx& ctx) {
  (void)ctx;
  ConditionSet cs;
  for (auto& [k, c] : reduced.t) {
    std::string pat;
    for (auto& f : k) {
      if (!pat.empty()) pat += "*";
      pat += to_string(f);
    }
    cs.add(pat.empty() ? "1" : pat, c);
  }
  return cs;
}

} // namespace wnl
