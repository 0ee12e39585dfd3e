#pragma once

#include "tfvb/model.hpp"
#include "tfvb/tensor.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tfvb {

// Every solver entry point takes one observation tensor per model
// observation, in declaration order. The stored coordinates of each tensor are
// its mask.

enum class Algorithm { EM, MapEM, VB };

std::string_view to_string(Algorithm algo);
/// Accepts "em", "map-em", "vb". Throws InvalidConfig.
Algorithm parse_algorithm(std::string_view name);

struct SolverConfig {
  Algorithm algorithm = Algorithm::EM;
  int max_iters = 200;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  double epsilon_guard = 1e-12;
  bool trace_objective = true;

  /// Throws InvalidConfig.
  void validate() const;
};

enum class Termination { Converged, MaxIters };

std::string_view to_string(Termination t);

struct FitResult {
  std::vector<Factor> factors;
  std::vector<double> objective_trace;
  int iterations_run = 0;
  Termination termination = Termination::MaxIters;
  std::vector<double> iteration_seconds;
  std::vector<std::string> warnings;
};

/// Validates every observation tensor against the model.
void check_observations(const ModelSpec& spec, std::span<const SparseTensor> observations);

/// Multiplicative KL update of factor `alpha`, summed over every observation
/// the factor is connected to:
///   Z <- Z * sum_nu delta(M X / Xhat) / sum_nu delta(M).
/// Xhat is floored at `eps` inside the ratio; cells whose denominator is at
/// most `eps` keep their value.
Factor em_step(const ModelSpec& spec, std::span<const Factor> factors,
               std::span<const SparseTensor> observations, Index alpha, double eps = 1e-12);

/// Same update driven by the single observation `nu` only.
Factor single_em_step(const ModelSpec& spec, std::span<const Factor> factors,
                      const SparseTensor& observation, Index nu, Index alpha,
                      double eps = 1e-12);

/// Gamma-prior mode update:
///   Z <- ((A - 1) + Z * sum delta(M X / Xhat)) / (A / B + sum delta(M)),
/// clamped at zero. A = 1 with B = infinity reduces to em_step exactly.
Factor map_em_step(const ModelSpec& spec, std::span<const Factor> factors,
                   std::span<const SparseTensor> observations, const PriorSpec& prior,
                   Index alpha, double eps = 1e-12);

/// Variational update of factor `alpha`'s gamma posterior:
///   C = A + L * sum_nu delta_L(M X / Xhat_L)
///   D = 1 / (A / B + sum_nu delta_E(M))
///   E = C D,  L = exp(digamma(C)) D.
/// Xhat_L is rebuilt from the current log-mean fields on every call. The
/// returned factor's `values` equal E.
Factor vb_step(const ModelSpec& spec, std::span<const Factor> factors,
               std::span<const SparseTensor> observations, const PriorSpec& prior,
               Index alpha, double eps = 1e-12);

/// Same update driven by the single observation `nu` only.
Factor single_vb_step(const ModelSpec& spec, std::span<const Factor> factors,
                      const SparseTensor& observation, Index nu, const PriorSpec& prior,
                      Index alpha, double eps = 1e-12);

/// Posterior fields at the prior shape with mean equal to the current values:
/// C = A, D = values / A.
void attach_vb_fields(Factor& factor, const PriorSpec& prior);

/// One draw per factor from its prior, each from its own seed stream.
std::vector<Factor> init_factors(const ModelSpec& spec, std::span<const PriorSpec> priors,
                                 std::uint64_t seed, bool with_vb_fields);

/// One pass over every factor in declaration order.
void sweep(const ModelSpec& spec, std::vector<Factor>& factors,
           std::span<const SparseTensor> observations, std::span<const PriorSpec> priors,
           Algorithm algo, double eps = 1e-12);

/// Masked generalized KL divergence sum_nu sum_obs [X log(X / Xhat) - X + Xhat]
/// with 0 log 0 = 0. Throws NonFiniteResult when X > 0 meets Xhat = 0.
double kl_objective(const ModelSpec& spec, std::span<const Factor> factors,
                    std::span<const SparseTensor> observations,
                    FactorView view = FactorView::Values);

/// Variational lower bound with the source posterior at its optimum:
///   sum_obs [-Xhat_E + X log Xhat_L - log Gamma(X + 1)]
///   - sum_alpha sum_cells KL(Gamma(C, D) || Gamma(A, B / A)).
double elbo(const ModelSpec& spec, std::span<const Factor> factors,
            std::span<const SparseTensor> observations, std::span<const PriorSpec> priors);

using IterationObserver = std::function<void(int iteration, const std::vector<Factor>&)>;

/// Runs the configured algorithm from prior draws (or `initial`, when given)
/// until the relative objective change |f_t - f_{t-1}| / (|f_{t-1}| + 1)
/// drops below rel_tol or max_iters sweeps are done. The objective is the KL
/// divergence for EM and MAP-EM and the ELBO for VB.
FitResult fit(const ModelSpec& spec, std::span<const SparseTensor> observations,
              const SolverConfig& config, std::span<const PriorSpec> priors,
              std::optional<std::vector<Factor>> initial = std::nullopt,
              const IterationObserver& observer = {});

}  // namespace tfvb
