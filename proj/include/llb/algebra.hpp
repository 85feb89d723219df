#pragma once

#include <utility>
#include <vector>

#include "llb/field.hpp"

namespace llb {

// Pointwise cross product; manifold indices concatenate (S's first), so
// rank(S x T) = rank(S) + rank(T).  Both arguments must be vector-fiber.
TensorField cross(const TensorField& s, const TensorField& t);

// Contraction of S (x) T.  Each pair (slot of S, slot of T) names manifold
// indices contracted with g^{ij}; contract_fibers pairs the two R^3 fibers
// with the Euclidean dot.  Free indices keep their order (S's first).  The
// result fiber is scalar when fibers are contracted or when either argument
// is scalar-fiber; a vector (x) vector result without fiber contraction is
// not representable and is rejected.
TensorField star_contract(const TensorField& s, const TensorField& t,
                          const std::vector<std::pair<int, int>>& pairs, bool contract_fibers);

// Pointwise tensor norm |T|(x): manifold indices paired with g^{ij}, fiber
// with the Euclidean dot.  Returns a scalar field.
TensorField fiber_norm(const TensorField& t);

// All manifold indices raised with g^{ij}; used by norms and contractions.
TensorField raise_all(const TensorField& t);

// Integral of a scalar field against sqrt(det g) * cell volume, fixed-shape
// tree reduction.
double integrate(const TensorField& scalar_field);

// sum_x <u(x), v(x)> sqrt(det g) * cell (componentwise over multi-index and
// fiber, no index raising); the CG inner product.
double weighted_dot(const TensorField& u, const TensorField& v);

}  // namespace llb
