#pragma once

// Spectral-norm estimation.
//
//   power iteration  matrices, x -> A^T A x from random unit starts
//   hopm             higher-order power method; always a lower bound
//   epsilon_net      (1/(1-eps))^(d-1) * max over net tuples of
//                    |A x_0 x_0 ... x_{d-2} x_{d-2}|_2; an upper bound as
//                    long as eps really covers the sphere
//
// Convergence is declared when the objective changes by at most
// tol * objective between sweeps.

#include <cstdint>
#include <string_view>
#include <vector>

#include "tsparse/tensor.hpp"

namespace tsparse {

enum class BoundDirection { lower_bound, upper_bound, converged_estimate };
enum class NormMethod { power_iteration, hopm, epsilon_net };

std::string_view to_string(BoundDirection d) noexcept;
std::string_view to_string(NormMethod m) noexcept;

struct SpectralEstimate {
  double value = 0;
  BoundDirection direction = BoundDirection::lower_bound;
  NormMethod method = NormMethod::power_iteration;
  int restarts = 0;
  // Total sweeps over all restarts; tuples enumerated for epsilon_net.
  long iterations = 0;
  // Convergence tolerance, or the covering radius eps for epsilon_net.
  double tolerance = 0;
};

struct IterationOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  int restarts = 16;
  std::uint64_t seed = 0;
};

inline constexpr int kDefaultMatrixRestarts = 16;
inline constexpr int kDefaultTensorRestarts = 64;

// Uniformly distributed unit vector in R^n from keyed Gaussians.
VectorXd random_unit_vector(std::size_t n, std::uint64_t seed);

SpectralEstimate spectral_norm_matrix(const Tensor& a, const IterationOptions& opt = {});

SpectralEstimate spectral_norm_tensor_hopm(const Tensor& t, IterationOptions opt = {
                                                                .restarts = kDefaultTensorRestarts});

struct EpsilonNet {
  std::size_t n = 0;
  std::vector<VectorXd> points;
  double eps = 0;
  int resolution = 0;
};

inline constexpr std::size_t kMaxNetDimension = 6;
inline constexpr std::size_t kCoveringProbes = 10000;
inline constexpr double kCoveringInflation = 1.25;

// Normalised primitive lattice directions {-m..m}^n \ {0}; eps is the probed
// covering radius times kCoveringInflation.
EpsilonNet build_epsilon_net(std::size_t n, int m);

inline constexpr std::size_t kDefaultNetTupleBudget = 50'000'000;

SpectralEstimate net_upper_bound(const Tensor& t, const EpsilonNet& net,
                                 std::size_t tuple_budget = kDefaultNetTupleBudget);

struct SphereSplit {
  VectorXd sparse;  // entries with |x_i| >= 1/sqrt(lambda n)
  VectorXd spread;  // the rest
};

SphereSplit split_sphere_vector(const VectorXd& x, double lambda);

}  // namespace tsparse
