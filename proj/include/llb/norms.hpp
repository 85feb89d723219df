#pragma once

#include "llb/calculus.hpp"
#include "llb/field.hpp"

namespace llb {

// L^p norm with Riemann quadrature against sqrt(det g); p in [1, inf], where
// p = inf means the max over nodes of the pointwise tensor norm.
double lp_norm(const TensorField& t, double p);

// (sum_{i<=k} ||D^i V||_p^p)^(1/p); max over i for p = inf.
double sobolev_norm(const Section& v, int k, double p, const BundleConnection& conn);

// ||D^j T||_p / (||D^k T||_r^(j/k) ||T||_q^(1-j/k)).  Requires 1 <= j <= k,
// r, q >= 2, and the exponent balance k/p = j/r + (k-j)/q to within 1e-12.
// Scale-invariant by construction.  Errors on the zero field.
double gn_ratio(const Section& t, int j, int k, double p, double r, double q,
                const BundleConnection& conn);

// Admissibility of the (s, l, j, k) interpolation exponent family:
// k in [j, inf) and l in [1, s] intersect [j, s + j + 1 - k], all integers.
bool gn_exponent_check(int s, int l, int j, int k);

}  // namespace llb
