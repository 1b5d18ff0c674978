#pragma once

#include <gmpxx.h>
#include <cstdint>

namespace wnl {

/// Exact rational scalar used throughout the engine.
using Q = mpq_class;

/// Binomial coefficient C(n, k) as an exact rational (n, k small).
inline Q binomial(int n, int k) {
  if (k < 0 || k > n) return Q(0);
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(k));
  return Q(r);
}

/// (-1)^n as a rational.
inline Q sign_pow(int n) { return (n % 2 == 0) ? Q(1) : Q(-1); }

} // namespace wnl
