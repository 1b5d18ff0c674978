#pragma once

// Distributional form of the Jacobi identity: J^{ijk}_{xyz} built from the
// two-point kernel of a weakly nonlocal operator and reduced to the canonical
// form
//
//   sum a(x,y,z) nu nu  +  sum b_n nu delta^(n)  +  sum e_mn(x)
//   delta^(m)(x-y) delta^(n)(x-z)
//
// using the nu/delta exchange identity, the coefficient-transport identity
// f(z) d^(n)(x-z) = sum C(n,k) f^(n-k)(x) d^(n-k)(x-z), and the delta-delta
// collapse identities.

#include "wnl/wnlop.hpp"

namespace wnl {

/// One distributional factor, stored with a canonical orientation:
/// Delta: delta^{(order)}(p - q) with p < q (flips absorb (-1)^order);
/// Nu:    nu(p - q) with (p,q) in the cyclic set (x,y), (y,z), (z,x).
struct DistFactor {
  bool is_nu = false;
  Point p = Point::X;
  Point q = Point::Y;
  int order = 0;
  friend auto operator<=>(const DistFactor&, const DistFactor&) = default;
};

/// Canonical constructors; the int is the absorbed sign (+1/-1).
std::pair<DistFactor, int> make_delta(Point a, Point b, int order);
std::pair<DistFactor, int> make_nu(Point a, Point b);

using FactorKey = std::vector<DistFactor>; // sorted

struct DistExpr {
  std::map<FactorKey, Expr> t;
  void add(FactorKey k, const Expr& c);
  DistExpr operator+(const DistExpr& o) const;
  DistExpr operator-() const;
  friend bool operator==(const DistExpr&, const DistExpr&) = default;
};

std::string to_string(const DistFactor& f);
std::string to_string(const DistExpr& e, const Ctx* ctx = nullptr);

/// Retag all point-carrying factors of a (point-X) expression to pt.
Expr retag(const Expr& e, Point pt);

/// Two-point kernel P^{ij}_{a,b} of the operator.
DistExpr op_kernel(const WNLOperator& P, const Ctx& ctx, int i, int j, Point a,
                   Point b);

/// One of the six sums of the distributional Jacobi expression, restricted to
/// the jet order sigma of the outer partial derivative (sum over the field l
/// is performed).  sum_idx in 0..5, in the standard order
///   (ij;x,y|x|lk;x,z), (ij;x,y|y|lk;y,z), (ki;z,x|z|lj;z,y),
///   (ki;z,x|x|lj;x,y), (jk;y,z|y|li;y,x), (jk;y,z|z|li;z,x).
DistExpr jacobi_dist_summand(const WNLOperator& P, const Ctx& ctx, int i, int j,
                             int k, int sum_idx, int sigma);

/// Full distributional Jacobi expression for the index triple (i,j,k).
/// Throws NotSkewAdjoint unless the operator is skew or assume_skew is set.
DistExpr jacobi_dist(const WNLOperator& P, Ctx& ctx, int i, int j, int k,
                     bool assume_skew = false);

/// Reduce to the canonical form described above.  Idempotent.
DistExpr reduce_dist(const DistExpr& e, const Ctx& ctx);

/// Nonzero coefficients of the reduced form, labelled by their pattern.
ConditionSet dist_residuals(const DistExpr& reduced, const Ctx& ctx);

} // namespace wnl
