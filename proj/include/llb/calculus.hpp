#pragma once

#include "llb/algebra.hpp"
#include "llb/connection.hpp"
#include "llb/field.hpp"

namespace llb {

// Covariant derivative; the new index is appended last:
//   (DT)_{i1..ik,p} = d_p T_{i1..ik} + A_p T_{i1..ik}
//                     - sum_l Gamma^q_{p i_l} T_{i1..q..ik}
// with second-order central differences for d_p.  The A term applies only to
// vector-fiber fields.
TensorField covariant_derivative(const TensorField& t, const BundleConnection& conn);

// D applied k times to a section; grid must have >= 2k + 4 nodes per axis so
// the widening stencil stays meaningful.
TensorField iterated_derivative(const Section& v, int k, const BundleConnection& conn);

// Trace of the nested second derivative: (Lap T)_I = g^{pq} (D(DT))_{I,p,q}.
// Not an independent stencil, so the second-derivative identities below are
// exact statements about this operator.
TensorField laplacian(const TensorField& t, const BundleConnection& conn);

// max-node |D(f1 x f2) - (Df1) x f2 - f1 x (Df2)|.  The connection term
// cancels pointwise (skew A acts as a cross-product derivation); what is left
// is the finite-difference product defect, O(h^2) for smooth fields.
double leibniz_defect(const Section& f1, const Section& f2, const BundleConnection& conn);

// max-node |(D^2 V)_{qp} - (D^2 V)_{pq} - F_pq V| over p < q: the discrete
// second derivatives commute up to the bundle curvature.
double ricci_defect(const Section& v, const BundleConnection& conn);

// Relative defect of the integral identity connecting |Lap V|^2 and |D^2 V|^2:
//   ||Lap V||^2 = ||D^2 V||^2
//                 + 2 Int g^{ij} g^{kl} <F_il V_,j, V_,k>
//                 +   Int g^{ij} g^{kl} <(DF)_{il,j} V, V_,k>
//                 -   Int g^{ij} g^{kl} R^h_{jli} <V_,h, V_,k>
// with (DF)_{il,j} = d_j F_il + [A_j, F_il] - Gamma^c_{ji} F_cl - Gamma^c_{jl} F_ic.
// Exact to rounding on the flat/trivial grid; O(h^2) otherwise.
double bochner_residual(const Section& v, const BundleConnection& conn);

// Int <Lap V, W> + Int g^{ij} <(DV)_i, (DW)_j>.  Vanishes to rounding whenever
// sqrt(det g) g^{pq} is node-independent and g^{pq} Gamma^c_{pq} = 0 (flat
// grids, and 2-d conformal ones by conformal invariance of the Dirichlet
// energy); O(h^2) otherwise.  Property-test helper.
double ibp_defect(const Section& v, const Section& w, const BundleConnection& conn);

// max-node |d_p<u,v> - <(Du)_p, v> - <u, (Dv)_p>| over p: discrete metric
// compatibility of the fiber metric.
double metric_compat_defect(const Section& u, const Section& v, const BundleConnection& conn);

}  // namespace llb
