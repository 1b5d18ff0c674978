#pragma once

// Exact differential-polynomial algebra.
//
// An Expr is a finite Q-linear combination of monomials.  A monomial is a
// multiset of factors.  Factor kinds:
//
//   Sym  - opaque coefficient symbol, e.g. g^{ij}_{,k}: a name, an index
//          tuple, and a sorted multiset of partial derivatives with respect
//          to the order-0 fields.  Symbols depend on the order-0 fields only.
//   Jet  - jet variable u^i_sigma: field index and derivative order.
//   Psi  - covector test argument psi^a_i differentiated `order` times
//          (a = argument slot 0..2, i = component).
//   Atom - an antiderivative: Atom(id) stands for dx^{-1}(payload) where the
//          payload expression is interned in an AtomTable.  Structural
//          identity: equal payloads share one id.
//   Mark - internal test-function marker used by the distributional backend.
//
// Sym, Jet and Mark carry an evaluation-point tag (X, Y, Z); the point is
// only meaningful in the distributional backend and defaults to X.

#include "wnl/rational.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wnl {

enum class Point : uint8_t { X = 0, Y = 1, Z = 2 };

inline const char* point_name(Point p) {
  switch (p) {
  case Point::X: return "x";
  case Point::Y: return "y";
  default: return "z";
  }
}

struct Factor {
  enum class Kind : uint8_t { Sym = 0, Jet = 1, Psi = 2, Atom = 3, Mark = 4 };

  Kind kind = Kind::Jet;
  Point pt = Point::X;        // Sym, Jet, Mark
  int a = 0;                  // Jet: field; Psi: arg slot; Atom: id; Mark: arg slot
  int b = 0;                  // Jet: order; Psi: component; Mark: order
  int c = 0;                  // Psi: order
  std::string name;           // Sym
  std::vector<int> idxs;      // Sym: index tuple
  std::vector<int> ders;      // Sym: sorted derivative multiset

  friend auto operator<=>(const Factor&, const Factor&) = default;
};

Factor jet_factor(int field, int order, Point pt = Point::X);
Factor sym_factor(std::string name, std::vector<int> idxs,
                  std::vector<int> ders = {}, Point pt = Point::X);
Factor psi_factor(int arg, int comp, int order = 0);
Factor atom_factor(int id);
Factor mark_factor(int arg, Point pt, int order = 0);

/// A monomial: sorted (factor, exponent) pairs, exponents >= 1.
struct Monomial {
  std::vector<std::pair<Factor, int>> f;

  bool is_one() const { return f.empty(); }
  int total_degree() const;
  friend auto operator<=>(const Monomial&, const Monomial&) = default;

  Monomial times(const Factor& g, int e = 1) const;
  Monomial times(const Monomial& m) const;
  /// Remove `e` copies of g (must be present).
  Monomial without(const Factor& g, int e = 1) const;
  bool contains(const Factor& g) const;
  int exponent(const Factor& g) const;
  /// True if every factor of m (with multiplicity) occurs in *this.
  bool divisible_by(const Monomial& m) const;
  Monomial divided_by(const Monomial& m) const;
};

/// Exact multivariate differential polynomial.
struct Expr {
  std::map<Monomial, Q> t;

  Expr() = default;
  explicit Expr(const Q& c) {
    if (c != 0) t[Monomial{}] = c;
  }
  explicit Expr(long c) : Expr(Q(c)) {}
  static Expr from(const Factor& g, const Q& c = Q(1));
  static Expr from(const Monomial& m, const Q& c = Q(1));

  bool is_zero() const { return t.empty(); }
  void add_term(const Monomial& m, const Q& c);

  Expr operator-() const;
  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  friend Expr operator+(Expr a, const Expr& b) { return a += b; }
  friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
  friend Expr operator*(const Expr& a, const Expr& b);
  Expr& operator*=(const Expr& o) { return *this = *this * o; }
  Expr& operator*=(const Q& c);
  friend Expr operator*(Expr a, const Q& c) { return a *= c; }
  friend Expr operator*(const Q& c, Expr a) { return a *= c; }
  Expr pow(int e) const;

  friend bool operator==(const Expr& a, const Expr& b) { return a.t == b.t; }
  friend bool operator<(const Expr& a, const Expr& b);

  /// Largest monomial (degree-lex order used by std::map keys is pure lex on
  /// the factor list; "lead" here means the map's maximal key).
  const Monomial& lead() const { return std::prev(t.end())->first; }
};

/// Interned dx^{-1} payloads.  arg/tail >= 0 tag the canonical psi-tilde
/// scalars psi~^a_alpha used by the Schouten backend.
struct AtomInfo {
  Expr payload;
  int arg = -1;
  int tail = -1;
};

struct AtomTable {
  std::vector<AtomInfo> infos;
  std::map<Expr, int> index;

  int intern(const Expr& payload, int arg = -1, int tail = -1);
  const AtomInfo& info(int id) const { return infos.at(size_t(id)); }
};

/// Shared computation context: number of fields + atom table.
struct Ctx {
  int n = 1;
  AtomTable atoms;
};

std::string to_string(const Factor& g, const Ctx* ctx = nullptr);
std::string to_string(const Monomial& m, const Ctx* ctx = nullptr);
std::string to_string(const Expr& e, const Ctx* ctx = nullptr);
std::string to_string(const Q& q);

/// Move every factor tagged `from` to the point `to`.
Expr move_point(const Expr& e, Point from, Point to);

} // namespace wnl
