#pragma once

#include "tfvb/model.hpp"
#include "tfvb/tensor.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace tfvb {

/// Precomputed addressing for one observation: for every connected factor,
/// the offset contributed by the visible coordinates and a table of offsets
/// for each latent configuration (lexicographic over latent indices).
struct ContractionPlan {
  Index observation = 0;
  std::vector<Index> visible;  // space positions, observation order
  std::vector<Index> latent;   // space positions, space order
  Index latent_count = 1;
  std::vector<Index> factors;  // connected factors, declaration order
  std::vector<std::vector<Index>> visible_stride;  // [k][visible dim]
  std::vector<std::vector<Index>> latent_offset;   // [k][latent config]
  // Single latent index: offsets are l * latent_stride[k].
  bool single_latent = false;
  std::vector<Index> latent_stride;
};

ContractionPlan make_plan(const ModelSpec& spec, Index nu);

/// Model output of observation `nu` evaluated only at the coordinates stored
/// in `support`, using the chosen factor field. Output has the same support.
/// Throws ShapeMismatch or NonFiniteResult.
SparseTensor reconstruct_observed(const ModelSpec& spec, std::span<const Factor> factors,
                                  FactorView view, Index nu, const SparseTensor& support);

/// Contraction of the observation-shaped field `q` against every connected
/// factor except `alpha`, accumulated into an array shaped like factor
/// `alpha`. Throws ShapeMismatch or FactorNotConnected.
Eigen::ArrayXd delta(const ModelSpec& spec, std::span<const Factor> factors,
                     FactorView view, Index nu, Index alpha, const SparseTensor& q);

/// Reference version of `delta` over a dense `q`: plain nested iteration over
/// every configuration of the observation's indices. Throws
/// TooLargeToMaterialize above 1e8 configurations.
Eigen::ArrayXd dense_oracle_delta(const ModelSpec& spec, std::span<const Factor> factors,
                                  FactorView view, Index nu, Index alpha,
                                  const DenseTensor& q);

/// Reference reconstruction of the full dense observation.
DenseTensor dense_oracle_reconstruct(const ModelSpec& spec, std::span<const Factor> factors,
                                     FactorView view, Index nu);

/// Throws ShapeMismatch unless the factors match the model and the selected
/// field is present and finite.
void check_factors(const ModelSpec& spec, std::span<const Factor> factors, FactorView view);

}  // namespace tfvb
