// Acceptance gate: one pass/fail line per criterion, exact symbolic checks
// with zero tolerance.  Exit code 0 iff every criterion passes.

#include <iostream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "wnl/dist.hpp"
#include "wnl/geometry.hpp"
#include "wnl/pva.hpp"
#include "wnl/schouten.hpp"

using namespace wnl;
using namespace wnltest;

namespace {

int failures = 0;

void report(int num, bool ok, const std::string& what) {
  std::cout << "criterion " << num << ": " << (ok ? "PASS" : "FAIL") << " - "
            << what << std::endl;
  if (!ok) ++failures;
}

Expr S(const std::string& name, std::vector<int> idxs,
       std::vector<int> ders = {}) {
  return Expr::from(sym_factor(name, std::move(idxs), std::move(ders)));
}
Expr g(int i, int j) { return S("g", {i, j}); }
Expr gd(int i, int j, int l) { return S("g", {i, j}, {l}); }
Expr G(int i, int j, int k) { return S("Gamma", {i, j, k}); }
Expr Gd(int i, int j, int k, int l) { return S("Gamma", {i, j, k}, {l}); }
Expr w(int i, int k) { return S("w", {i, k}); }
Expr wd(int i, int k, int l) { return S("w", {i, k}, {l}); }
Expr u(int t, int o = 1) { return Expr::from(jet_factor(t, o)); }
Expr Y(const Expr& e) { return move_point(e, Point::X, Point::Y); }
Expr Z(const Expr& e) { return move_point(e, Point::X, Point::Z); }

Expr find_label(const ConditionSet& cs, const std::string& label) {
  for (const auto& c : cs.items)
    if (c.label == label) return c.value;
  return Expr();
}

ConditionSet equalities_only(const ConditionSet& base) {
  ConditionSet eq;
  for (const auto& b : base.items)
    if (b.label.rfind("g-sym", 0) == 0 ||
        b.label.rfind("levi-civita", 0) == 0 || b.label.rfind("gw-sym", 0) == 0)
      eq.add(b.label, b.value);
  return eq;
}

// ---------------------------------------------------------------------------
// 1. Symbolic first-order bracket, n=2, opaque g/Gamma/w with one tail: every
//    backend's residual set reduces to zero modulo the geometric conditions
//    (saturating by det g); conversely the curvature (Gauss) and affinor
//    derivative (Codazzi) conditions appear among the extracted coefficients.
// ---------------------------------------------------------------------------
bool criterion1() {
  const int n = 2;
  MVCtx mv(n);
  PBHTData d = symbolic_pbht(n);
  WNLOperator P = pbht_operator(d);
  BackendReport r = compare_backends(P, mv);
  bool ok = r.has_geometry && !r.geometry_pass;
  ok = ok && r.schouten_residuals > 0 && r.dist_residuals > 0 &&
       r.pva_residuals > 0;
  ok = ok && r.schouten_reduced == 0 && r.dist_reduced == 0 &&
       r.pva_reduced == 0;

  // conversely: the Codazzi residual is (twice) the u^m_xx coefficient of the
  // psi-tilde^2 psi3 psi1 table, exactly ...
  mv.add_tails(P);
  auto tv = schouten_bracket(P, P, Recipe::A, mv, true);
  auto tabs = three_vector_tables(tv.canonical);
  auto coeff_of = [&](const Monomial& m) {
    auto it = tabs.find(m);
    return it == tabs.end() ? Expr() : it->second;
  };
  ConditionSet base = pbht_condition_base(d, mv.ctx);
  int at2 = mv.nl_atom(1, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m2 = 0; m2 < n; ++m2) {
        Monomial m = Monomial{}
                         .times(atom_factor(at2))
                         .times(psi_factor(2, i, 0))
                         .times(psi_factor(0, j, 0));
        Expr cod = find_label(base, "codazzi-raised[1;" + std::to_string(i + 1) +
                                        "," + std::to_string(j + 1) + "," +
                                        std::to_string(m2 + 1) + "]");
        ok = ok && partial_jet(coeff_of(m), m2, 2) == cod + cod;
      }
  // ... and the Gauss residual is (twice) the u^k_xx coefficient of the
  // psi1 psi2 psi3 table, modulo the simple symmetry equalities
  ConditionSet eqbase = equalities_only(base);
  ConditionSet diffs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < n; ++p)
        for (int k = 0; k < n; ++k) {
          Monomial m = Monomial{}
                           .times(psi_factor(0, j, 0))
                           .times(psi_factor(1, p, 0))
                           .times(psi_factor(2, i, 0));
          Expr ga = find_label(base, "gauss-raised[" + std::to_string(i + 1) +
                                         "," + std::to_string(j + 1) + "," +
                                         std::to_string(p + 1) + "," +
                                         std::to_string(k + 1) + "]");
          diffs.add("gauss", partial_jet(coeff_of(m), k, 2) - (ga + ga));
        }
  ok = ok && reduce_modulo(diffs, eqbase, mv.ctx).empty();
  return ok;
}

// ---------------------------------------------------------------------------
// 2. Golden coefficient tables of all three backends on the symbolic bracket.
// ---------------------------------------------------------------------------
bool criterion2() {
  const int n = 2;
  bool ok = true;
  MVCtx mv(n);
  PBHTData d = symbolic_pbht(n);
  WNLOperator P = pbht_operator(d);
  mv.add_tails(P);
  Ctx& ctx = mv.ctx;
  Expr Wk[2];
  for (int k = 0; k < n; ++k)
    for (int t = 0; t < n; ++t) Wk[k] += w(k, t) * u(t);

  // --- distributions: the three reduced summand tables -------------------
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        {
          auto rs = dist_residuals(
              reduce_dist(jacobi_dist_summand(P, ctx, i, j, k, 0, 0), ctx),
              ctx);
          Expr e;
          for (int l = 0; l < n; ++l) e += gd(i, j, l) * g(l, k);
          ok = ok && find_label(rs, "d1[xy]*d1[xz]") == e;
          e = Expr();
          for (int l = 0; l < n; ++l)
            for (int s = 0; s < n; ++s) e += g(l, k) * Gd(i, j, s, l) * u(s);
          ok = ok && find_label(rs, "d[xy]*d1[xz]") == e;
          e = Expr();
          for (int l = 0; l < n; ++l)
            for (int s = 0; s < n; ++s) {
              for (int t = 0; t < n; ++t)
                e += Gd(i, j, s, l) * G(l, k, t) * u(t) * u(s);
              e -= gd(i, j, l) * w(l, s) * u(s) * Wk[k];
            }
          ok = ok && find_label(rs, "d[xy]*d[xz]") == e;
          e = Expr();
          for (int l = 0; l < n; ++l)
            for (int s = 0; s < n; ++s) e += gd(i, j, l) * w(l, s) * u(s);
          ok = ok && find_label(rs, "d1[xy]*nu[yz]") == Y(e) * Z(Wk[k]);
          ok = ok && rs.size() == 9;
        }
        {
          auto rs = dist_residuals(
              reduce_dist(jacobi_dist_summand(P, ctx, i, j, k, 2, 0), ctx),
              ctx);
          Expr e;
          for (int l = 0; l < n; ++l) e -= g(l, j) * gd(k, i, l);
          ok = ok && find_label(rs, "d2[xy]*d[xz]") == e;
          ok = ok && find_label(rs, "d1[xy]*d1[xz]") == e;
          e = Expr();
          for (int l = 0; l < n; ++l)
            for (int s = 0; s < n; ++s)
              for (int t = 0; t < n; ++t)
                e += wd(k, s, l) * G(l, j, t) * u(t) * u(s);
          ok = ok && find_label(rs, "d[yz]*nu[zx]") == Z(e) * Wk[i];
          e = Expr();
          for (int l = 0; l < n; ++l)
            for (int s = 0; s < n; ++s)
              for (int m = 0; m < n; ++m)
                e += wd(k, s, l) * w(l, m) * u(m) * u(s);
          ok = ok &&
               find_label(rs, "nu[yz]*nu[zx]") == -(Z(e) * Wk[i] * Y(Wk[j]));
          ok = ok && rs.size() == 10;
        }
        {
          auto rs = dist_residuals(
              reduce_dist(jacobi_dist_summand(P, ctx, i, j, k, 0, 1), ctx),
              ctx);
          Expr e;
          for (int l = 0; l < n; ++l) e += g(l, k) * G(i, j, l);
          ok = ok && find_label(rs, "d[xy]*d2[xz]") == e;
          e = Expr();
          for (int l = 0; l < n; ++l) e += w(i, l) * g(l, k);
          ok = ok && find_label(rs, "d2[xz]*nu[xy]") == e * Y(Wk[j]);
          e = Expr();
          for (int l = 0; l < n; ++l)
            for (int s = 0; s < n; ++s) {
              for (int m = 0; m < n; ++m)
                e += w(i, l) * wd(l, s, m) * u(m) * u(s);
              e += w(i, l) * w(l, s) * u(s, 2);
            }
          ok = ok &&
               find_label(rs, "nu[xy]*nu[zx]") == -(e * Z(Wk[k]) * Y(Wk[j]));
          ok = ok && rs.size() == 8;
        }
      }

  // --- operator/Schouten backend: the four stated conditions -------------
  auto tv = schouten_bracket(P, P, Recipe::A, mv, true);
  auto tabs = three_vector_tables(tv.canonical);
  auto coeff_of = [&](const Monomial& m) {
    auto it = tabs.find(m);
    return it == tabs.end() ? Expr() : it->second;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < n; ++p) {
        Expr want;
        for (int h = 0; h < n; ++h)
          want += G(i, j, h) * g(h, p) - gd(j, p, h) * g(h, i) +
                  G(j, p, h) * g(h, i);
        Monomial m = Monomial{}
                         .times(psi_factor(0, j, 0))
                         .times(psi_factor(1, p, 2))
                         .times(psi_factor(2, i, 0));
        ok = ok && coeff_of(m) == want + want;
      }
  int at1 = mv.nl_atom(0, 0);
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p) {
      Expr want;
      for (int k = 0; k < n; ++k)
        want += w(i, k) * g(k, p) - w(p, k) * g(k, i);
      Monomial m = Monomial{}
                       .times(atom_factor(at1))
                       .times(psi_factor(1, p, 2))
                       .times(psi_factor(2, i, 0));
      ok = ok && coeff_of(m) == want + want;
    }
  int at2 = mv.nl_atom(1, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m2 = 0; m2 < n; ++m2) {
        Expr want;
        for (int k = 0; k < n; ++k)
          want += Expr(Q(-1)) * gd(i, j, k) * w(k, m2) +
                  G(i, j, k) * w(k, m2) + w(j, k) * G(k, i, m2) +
                  wd(i, m2, k) * g(k, j) - wd(i, k, m2) * g(k, j);
        Monomial m = Monomial{}
                         .times(atom_factor(at2))
                         .times(psi_factor(2, i, 0))
                         .times(psi_factor(0, j, 0));
        ok = ok && partial_jet(coeff_of(m), m2, 2) == want + want;
      }
  {
    ConditionSet eqbase = equalities_only(pbht_condition_base(d, mv.ctx));
    ConditionSet diffs;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p)
          for (int k = 0; k < n; ++k) {
            Expr want;
            for (int h = 0; h < n; ++h) {
              want += (Gd(j, p, h, k) - Gd(j, p, k, h)) * g(h, i);
              want += G(i, j, h) * G(h, p, k) - G(i, p, h) * G(h, j, k);
              want +=
                  g(h, i) * (w(j, h) * w(p, k) - w(p, h) * w(j, k));
            }
            Monomial m = Monomial{}
                             .times(psi_factor(0, j, 0))
                             .times(psi_factor(1, p, 0))
                             .times(psi_factor(2, i, 0));
            diffs.add("curv", partial_jet(coeff_of(m), k, 2) - (want + want));
          }
    ok = ok && reduce_modulo(diffs, eqbase, mv.ctx).empty();
  }

  // --- lambda-bracket backend: parameter-power coefficients --------------
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        auto rs =
            lambda_residuals(pva_jacobi(P, mv.ctx, i, j, k, true), mv.ctx);
        Expr l2, lm, l2atom;
        for (int l = 0; l < n; ++l) {
          l2 += g(l, i) * G(k, j, l) - g(k, l) * gd(j, i, l) +
                g(k, l) * G(j, i, l);
          lm += g(l, i) * gd(k, j, l) - g(l, j) * gd(k, i, l) -
                g(k, l) * gd(j, i, l) + Expr(Q(2)) * g(k, l) * G(j, i, l);
          l2atom += g(l, i) * w(k, l) - g(k, l) * w(i, l);
        }
        ok = ok && find_label(rs, "l^2") == l2;
        ok = ok && find_label(rs, "l^1*m^1") == lm;
        ok = ok && find_label(rs, "l^2*(m+d)^-1[]") == l2atom * Y(Wk[j]);
      }
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Equivalence of the three bracket recipes on randomized skew operators.
// ---------------------------------------------------------------------------
bool criterion3() {
  bool ok = true;
  Rng r(271828);
  for (int it = 0; it < 20; ++it) {
    MVCtx mv(1 + r.upto(1));
    int n = mv.ctx.n;
    WNLOperator P = random_skew_op(r, mv.ctx, n, 2, true);
    auto a = schouten_bracket(P, P, Recipe::A, mv);
    auto b = schouten_bracket(P, P, Recipe::B, mv);
    ok = ok && a.canonical == b.canonical;
    auto c = schouten_bracket(P, P, Recipe::C, mv);
    std::vector<std::vector<Expr>> vals(3, std::vector<Expr>(size_t(n)));
    for (int arg = 0; arg < 3; ++arg) {
      Expr dens = random_expr(r, n, 1, 2, 2);
      for (int i = 0; i < n; ++i)
        vals[size_t(arg)][size_t(i)] = euler_operator(dens, i, mv.ctx);
    }
    // evaluate the canonical three-vectors on the covectors
    auto eval = [&](const Expr& e, auto&& self) -> Expr {
      Expr out;
      for (const auto& [m, q] : e.t) {
        Expr term(q);
        for (const auto& [f, ex] : m.f) {
          Expr v;
          if (f.kind == Factor::Kind::Psi)
            v = total_derivative(vals[size_t(f.a)][size_t(f.b)], mv.ctx,
                                 Point::X, f.c);
          else if (f.kind == Factor::Kind::Atom)
            v = dx_inverse(self(mv.ctx.atoms.info(f.a).payload, self), mv.ctx);
          else
            v = Expr::from(f);
          for (int p = 0; p < ex; ++p) term *= v;
        }
        out += term;
      }
      return out;
    };
    Expr diff = eval(a.canonical - c.canonical, eval);
    for (int f = 0; f < n; ++f)
      ok = ok && euler_operator(diff, f, mv.ctx).is_zero();
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Verdicts on the four reference instances, all backends agreeing.
// ---------------------------------------------------------------------------
bool criterion4() {
  bool ok = true;
  { // P = d/dx
    MVCtx mv(1);
    WNLOperator P;
    P.n = 1;
    P.set_coeff(0, 0, 1, Expr(Q(1)));
    BackendReport r = compare_backends(P, mv);
    ok = ok && r.skew && r.dist_pass && r.schouten_pass && r.pva_pass &&
         r.agree();
  }
  { // P = g(u) d/dx + g'(u)/2 u_x
    MVCtx mv(1);
    Expr uu = Expr::from(jet_factor(0, 0));
    Expr gg = Expr(Q(3)) + uu * uu;
    WNLOperator P;
    P.n = 1;
    P.set_coeff(0, 0, 1, gg);
    P.set_coeff(0, 0, 0, Expr(Q(1, 2)) * partial_jet(gg, 0, 0) * u(0));
    BackendReport r = compare_backends(P, mv);
    ok = ok && r.skew && r.dist_pass && r.schouten_pass && r.pva_pass &&
         r.has_geometry && r.geometry_pass && r.agree();
  }
  { // P = d/dx + u_x dx^{-1} u_x
    MVCtx mv(1);
    WNLOperator P;
    P.n = 1;
    P.set_coeff(0, 0, 1, Expr(Q(1)));
    TailTerm t;
    t.e = Q(1);
    t.w = {u(0)};
    P.tails.push_back(t);
    BackendReport r = compare_backends(P, mv);
    ok = ok && r.skew && r.dist_pass && r.schouten_pass && r.pva_pass &&
         r.has_geometry && r.geometry_pass && r.agree();
  }
  { // n=2, g = Id, Gamma = 0, w = Id: fails, with a curvature residual
    MVCtx mv(2);
    PBHTData d;
    d.n = 2;
    d.g.assign(2, std::vector<Expr>(2));
    d.Gamma.assign(2, std::vector<std::vector<Expr>>(2, std::vector<Expr>(2)));
    d.g[0][0] = d.g[1][1] = Expr(Q(1));
    TailAffinor t;
    t.e = Q(1);
    t.w.assign(2, std::vector<Expr>(2));
    t.w[0][0] = t.w[1][1] = Expr(Q(1));
    d.tails.push_back(t);
    WNLOperator P = pbht_operator(d);
    BackendReport r = compare_backends(P, mv);
    ok = ok && r.skew && !r.dist_pass && !r.schouten_pass && !r.pva_pass &&
         r.has_geometry && !r.geometry_pass && r.agree();
    auto geo = geometric_check(d, mv.ctx);
    bool gauss = false;
    for (const auto& c : geo.items)
      gauss |= c.label.rfind("gauss", 0) == 0;
    ok = ok && gauss;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Randomized property suites (>= 100 cases each, n <= 3, jet order <= 4).
// ---------------------------------------------------------------------------
bool criterion5() {
  bool ok = true;
  { // Euler operator annihilates total derivatives
    Rng r(101);
    for (int it = 0; it < 120; ++it) {
      int n = 1 + r.upto(2);
      Ctx ctx(n);
      Expr e = random_expr(r, n, 3);
      for (int f = 0; f < n; ++f)
        ok = ok &&
             euler_operator(total_derivative(e, ctx), f, ctx).is_zero();
    }
  }
  { // adjoint is an involution
    Rng r(102);
    for (int it = 0; it < 120; ++it) {
      int n = 1 + r.upto(2);
      MVCtx mv(n);
      WNLOperator R;
      R.n = n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int s = 0; s <= 1 + r.upto(3); ++s)
            if (r.upto(1)) R.set_coeff(i, j, s, random_expr(r, n, 2, 2, 1));
      WNLOperator A = adjoint(adjoint(R, mv.ctx), mv.ctx);
      ok = ok && A.B == R.B;
    }
  }
  { // total derivative is a derivation
    Rng r(103);
    for (int it = 0; it < 100; ++it) {
      int n = 1 + r.upto(2);
      Ctx ctx(n);
      Expr a = random_expr(r, n, 4, 2, 2), b = random_expr(r, n, 4, 2, 2);
      ok = ok && total_derivative(a * b, ctx) ==
                     total_derivative(a, ctx) * b +
                         a * total_derivative(b, ctx);
    }
  }
  { // lambda-bracket axioms: sesquilinearity, Leibniz, skew, Jacobi
    Rng r(104);
    for (int it = 0; it < 100; ++it) {
      int n = 1 + r.upto(2);
      Ctx ctx(n);
      WNLOperator P = random_skew_op(r, ctx, n, 1 + r.upto(3), false);
      Expr f = random_expr(r, n, 2), h = random_expr(r, n, 2),
           a = random_expr(r, n, 2, 2, 1);
      LambdaExpr b = lambda_bracket(P, ctx, f, h);
      ok = ok && lambda_bracket(P, ctx, total_derivative(f, ctx), h) ==
                     -mul_lam(b);
      ok = ok && lambda_bracket(P, ctx, f, total_derivative(h, ctx)) ==
                     mul_lam(b) + lderiv(b, ctx);
      ok = ok && lambda_bracket(P, ctx, f, h * a) ==
                     lmul(b, lift(a)) +
                         lmul(lambda_bracket(P, ctx, f, a), lift(h));
    }
    Rng r2(105);
    for (int it = 0; it < 100; ++it) {
      int n = 1 + r2.upto(2);
      MVCtx mv(n);
      WNLOperator P = random_skew_op(r2, mv.ctx, n, 1 + r2.upto(3), it % 3 == 0);
      ok = ok && pva_skew_residuals(P, mv.ctx).empty();
    }
    Rng r3(106);
    for (int it = 0; it < 50; ++it) { // constant-coefficient Poisson family
      int n = 1 + r3.upto(2);
      MVCtx mv(n);
      WNLOperator R;
      R.n = n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int s = 0; s <= 2; ++s)
            if (r3.upto(1)) R.set_coeff(i, j, s, Expr(r3.coeff()));
      WNLOperator P = R - adjoint(R, mv.ctx);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            ok = ok && pva_jacobi(P, mv.ctx, i, j, k).is_zero();
    }
    for (int it = 0; it < 50; ++it) { // hydrodynamic n=1 Poisson family
      MVCtx mv(1);
      Expr gp, dgp;
      for (int deg = 0; deg <= 3; ++deg) {
        Q c = r3.coeff();
        gp += Expr::from(Monomial{}, c) * Expr::from(jet_factor(0, 0)).pow(deg);
        if (deg > 0)
          dgp += Expr::from(Monomial{}, c * deg) *
                 Expr::from(jet_factor(0, 0)).pow(deg - 1);
      }
      WNLOperator P;
      P.n = 1;
      P.set_coeff(0, 0, 1, gp);
      P.set_coeff(0, 0, 0, Expr(Q(1, 2)) * dgp * u(0));
      ok = ok && pva_jacobi(P, mv.ctx, 0, 0, 0).is_zero();
    }
  }
  { // idempotence of the two reductions
    Rng r(107);
    for (int it = 0; it < 100; ++it) {
      MVCtx mv(1 + r.upto(1));
      WNLOperator P = random_skew_op(r, mv.ctx, mv.ctx.n, 2, true);
      int i = r.upto(P.n - 1), j = r.upto(P.n - 1), k = r.upto(P.n - 1);
      DistExpr red = reduce_dist(jacobi_dist(P, mv.ctx, i, j, k), mv.ctx);
      ok = ok && reduce_dist(red, mv.ctx) == red;
    }
    Rng r2(108);
    for (int it = 0; it < 100; ++it) {
      int n = 1 + r2.upto(2);
      Ctx ctx(n);
      LambdaExpr e = mul_lam(mkatom(Shift::Lam, lift(random_expr(r2, n, 2)))) +
                     mul_mu(mkatom(Shift::LamMu, lift(random_expr(r2, n, 2))));
      LambdaExpr nf = normalize_lambda(e, ctx);
      ok = ok && normalize_lambda(nf, ctx) == nf;
    }
  }
  { // elimination of parameter*atom terms preserves the value
    Rng r(109);
    for (int it = 0; it < 100; ++it) {
      int n = 1 + r.upto(2);
      Ctx ctx(n);
      Expr F = random_expr(r, n, 2, 2, 2);
      Shift s = it % 2 ? Shift::Lam : Shift::Mu;
      LambdaExpr atom = mkatom(s, lift(F));
      LambdaExpr raised = s == Shift::Lam ? mul_lam(atom) : mul_mu(atom);
      ok = ok && normalize_lambda(raised, ctx) ==
                     normalize_lambda(lift(F) - lderiv(atom, ctx), ctx);
    }
  }
  { // double-nonlocal cancellation: surviving two-atom terms are only the
    // outer-outer products, never nested pairs
    Rng r(110);
    for (int it = 0; it < 100; ++it) {
      int n = 1 + r.upto(1);
      MVCtx mv(n);
      WNLOperator P = random_skew_op(r, mv.ctx, n, 1, true);
      int i = r.upto(n - 1), j = r.upto(n - 1), k = r.upto(n - 1);
      LambdaExpr J = pva_jacobi(P, mv.ctx, i, j, k);
      for (const auto& [m, c] : J.t) {
        int cls = classify_term(m);
        ok = ok && cls >= 1 && cls <= 8 && cls != 3;
        size_t atoms = m.at.size();
        for (const auto& a : m.at) atoms += a.inner.size();
        if (atoms >= 2)
          ok = ok && cls == 8 && m.at.size() == 2 && m.at[0].inner.empty() &&
               m.at[1].inner.empty();
      }
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 6. Cross-backend dictionary: the reduced local delta-delta table of the
//    distributional backend equals half the canonical psi-psi-psi table of
//    the operator backend, pattern d^p[xy] d^q[xz] at (i,j,k) matching
//    d^p psi1_j d^q psi2_k psi3_i.
// ---------------------------------------------------------------------------
bool criterion6() {
  const int n = 2;
  bool ok = true;
  MVCtx mv(n);
  WNLOperator P = pbht_operator(symbolic_pbht(n));
  mv.add_tails(P);
  auto tv = schouten_bracket(P, P, Recipe::A, mv, true);
  auto tabs = three_vector_tables(tv.canonical);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        auto rs = dist_residuals(
            reduce_dist(jacobi_dist(P, mv.ctx, i, j, k, true), mv.ctx),
            mv.ctx);
        int local_labels = 0;
        for (int p = 0; p <= 2; ++p)
          for (int q = 0; q <= 2; ++q) {
            std::string lbl = std::string("d") + (p ? std::to_string(p) : "") +
                              "[xy]*d" + (q ? std::to_string(q) : "") + "[xz]";
            Expr dcoeff = find_label(rs, lbl);
            if (!dcoeff.is_zero()) ++local_labels;
            Monomial m = Monomial{}
                             .times(psi_factor(0, j, p))
                             .times(psi_factor(1, k, q))
                             .times(psi_factor(2, i, 0));
            auto it = tabs.find(m);
            Expr scoeff = it == tabs.end() ? Expr() : it->second;
            ok = ok && scoeff == dcoeff + dcoeff;
          }
        // every local dist label was covered by the sweep above
        for (const auto& c : rs.items)
          if (c.label.find("nu") == std::string::npos) --local_labels;
        ok = ok && local_labels == 0;
      }
  return ok;
}

} // namespace

int main() {
  report(1, criterion1(),
         "symbolic n=2 residuals of all backends reduce to zero modulo the "
         "geometric conditions; Gauss and Codazzi recovered verbatim");
  report(2, criterion2(),
         "golden coefficient tables (dist summands 1/3/7, operator-backend "
         "conditions, lambda-bracket parameter coefficients) match exactly");
  report(3, criterion3(),
         "bracket recipes A and B coincide on 20 randomized skew operators; "
         "recipe C coincides on variational covectors");
  report(4, criterion4(),
         "reference instance verdicts correct with all backends agreeing");
  report(5, criterion5(),
         "randomized property suites (Euler/total-derivative, adjoint "
         "involution, Leibniz, lambda-bracket axioms, idempotence, "
         "elimination value preservation, double-nonlocal cancellation)");
  report(6, criterion6(),
         "reduced distributional local table equals half the canonical "
         "operator-backend table under the pattern dictionary");
  return failures == 0 ? 0 : 1;
}
