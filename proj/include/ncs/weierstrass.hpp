#pragma once

// The generalized Weierstrass map z -> (p_1, ..., p_N), its squared norm and
// first derivatives.
//
// Column and gradient ordering throughout is node-major: the derivative with
// respect to coordinate j of node i sits at index i * n + j.

#include <cstddef>
#include <vector>

#include "ncs/counters.hpp"
#include "ncs/functions.hpp"
#include "ncs/interpolation.hpp"

namespace ncs {

/// Per-function quantities at the current nodes. Everything the solvers need
/// is computed once here so that evaluation counts stay honest.
struct BlockData {
  ComplexMatrix vandermonde;   // k x m
  ComplexMatrix pinv;          // m x k, column i is the coefficient vector of L_i
  ComplexVector values;        // f(z_i)
  ComplexVector coefficients;  // W_t = V^dagger f
  ComplexVector weights;       // M^{-1} f

  // Filled when derivatives are requested.
  ComplexMatrix input_gradients;               // k x n
  std::vector<ComplexMatrix> basis_gradients;  // per node, n x m
  ComplexMatrix node_derivatives;              // k x n, d(f - p)/dx_j at z_i

  // Filled when second derivatives are requested.
  std::vector<ComplexMatrix> input_hessians;               // per node, n x n
  std::vector<std::vector<ComplexMatrix>> basis_hessians;  // [node][element], n x n
};

enum class ModelDepth { Values, FirstOrder, SecondOrder };

struct LocalModel {
  std::size_t variables = 0;
  std::size_t roots = 0;
  std::vector<BlockData> blocks;

  /// Sum of ||W_t||^2.
  double objective() const;
  /// dphi/dz_{i,j} as a holomorphic derivative, length n k.
  ComplexVector holomorphic_gradient() const;
};

/// Throws RankDeficient naming the basis whose Vandermonde matrix lost rank.
LocalModel build_local_model(const SystemInstance& sys, const RootTuple& z, ModelDepth depth,
                             EvaluationCounters* counters = nullptr);

struct WeierstrassValue {
  std::vector<ComplexVector> blocks;

  ComplexVector stacked() const;
  double norm_sq() const;
};

WeierstrassValue weierstrass_map(const SystemInstance& sys, const RootTuple& z);

struct ObjectiveEvaluation {
  double value = 0.0;
  ComplexVector residuals;              // f_t(z_i), function-major, length N k
  std::vector<double> per_function;     // f_t^* M_t^{-1} f_t
};

/// Computed through Gram solves rather than through the coefficients.
ObjectiveEvaluation objective(const SystemInstance& sys, const RootTuple& z,
                              EvaluationCounters* counters = nullptr);

struct WeierstrassJacobian {
  ComplexMatrix matrix;  // (sum m_t) x (n k)
};

WeierstrassJacobian jacobian(const SystemInstance& sys, const RootTuple& z);
WeierstrassJacobian jacobian(const LocalModel& model);

/// Component (i, j) is W^* times column (i, j) of the Jacobian.
ComplexVector gradient_of_objective(const SystemInstance& sys, const RootTuple& z);

/// Gradient of ||W||^2 in the real coordinates laid out as
/// [Re z (n k entries); Im z (n k entries)].
RealVector real_gradient(const ComplexVector& holomorphic);

/// Inverse pair for the real layout above.
RealVector to_real(const ComplexVector& z);
ComplexVector from_real(const RealVector& x);

std::vector<BasisExpansion> perturbations(const SystemInstance& sys, const RootTuple& z);

/// f_t - p_t for every t.
std::vector<FunctionPtr> perturbed_system(const SystemInstance& sys, const RootTuple& z);

}  // namespace ncs
