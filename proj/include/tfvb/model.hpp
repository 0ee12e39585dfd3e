#pragma once

#include "tfvb/tensor.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tfvb {

/// Gamma prior with shape A and mean B (scale B / A). Arrays of size one
/// broadcast over the factor.
struct PriorSpec {
  Eigen::ArrayXd shape = Eigen::ArrayXd::Constant(1, 0.5);
  Eigen::ArrayXd mean = Eigen::ArrayXd::Constant(1, 10.0);

  static PriorSpec scalar(double a, double b) {
    return {Eigen::ArrayXd::Constant(1, a), Eigen::ArrayXd::Constant(1, b)};
  }
  bool is_scalar() const { return shape.size() == 1 && mean.size() == 1; }
  double shape_at(Index i) const { return shape.size() == 1 ? shape[0] : shape[i]; }
  double mean_at(Index i) const { return mean.size() == 1 ? mean[0] : mean[i]; }

  /// Throws InvalidPrior unless every entry is finite and positive and array
  /// sizes are one or `cells`.
  void validate(Index cells, std::string_view owner) const;
};

bool operator==(const PriorSpec& a, const PriorSpec& b);

struct FactorSpec {
  std::string name;
  std::vector<Index> indices;  // positions in the index space
  std::optional<PriorSpec> prior;  // unset: use the run default
};

struct ObservationSpec {
  std::string name;
  std::vector<Index> indices;  // visible indices, positions in the index space
  std::vector<Index> factors;  // connected factors, declaration order
};

bool operator==(const FactorSpec& a, const FactorSpec& b);
bool operator==(const ObservationSpec& a, const ObservationSpec& b);

/// Validated factorization model: every observation is a sum over its latent
/// indices of the product of its connected factors. The 0/1 coupling matrix
/// is derived from the observation factor lists.
class ModelSpec {
 public:
  ModelSpec() = default;
  /// Throws UnknownIndex, UncoveredVisibleIndex, OrphanFactor, InvalidPrior or
  /// InvalidSpec.
  ModelSpec(IndexSpace space, std::vector<FactorSpec> factors,
            std::vector<ObservationSpec> observations);

  const IndexSpace& space() const { return space_; }
  const std::vector<FactorSpec>& factors() const { return factors_; }
  const std::vector<ObservationSpec>& observations() const { return observations_; }
  const FactorSpec& factor(Index alpha) const { return factors_[alpha]; }
  const ObservationSpec& observation(Index nu) const { return observations_[nu]; }
  Index num_factors() const { return static_cast<Index>(factors_.size()); }
  Index num_observations() const { return static_cast<Index>(observations_.size()); }

  /// |observations| x |factors| 0/1 matrix.
  const Eigen::MatrixXi& coupling() const { return coupling_; }
  bool connected(Index nu, Index alpha) const { return coupling_(nu, alpha) != 0; }

  std::optional<Index> find_factor(std::string_view name) const;
  std::optional<Index> find_observation(std::string_view name) const;

  std::vector<std::string> factor_index_names(Index alpha) const;
  std::vector<Index> factor_shape(Index alpha) const;
  Index factor_size(Index alpha) const;
  std::vector<std::string> observation_index_names(Index nu) const;
  std::vector<Index> observation_shape(Index nu) const;

 private:
  IndexSpace space_;
  std::vector<FactorSpec> factors_;
  std::vector<ObservationSpec> observations_;
  Eigen::MatrixXi coupling_;
};

bool operator==(const ModelSpec& a, const ModelSpec& b);

/// Parses the line-oriented model format:
///
///   index <name> <cardinality>
///   factor <name> <idx,...> [A=<v>] [B=<v>]
///   observe <name> <idx,...> = <factor,...>
///
/// `#` starts a comment. Throws SyntaxError carrying the 1-based line, or one
/// of the ModelSpec validation errors.
ModelSpec parse_model_spec(std::string_view text);

/// Inverse of parse_model_spec. Throws InvalidSpec for array-valued priors,
/// which the text format cannot express.
std::string serialize(const ModelSpec& spec);

/// Indices summed over in observation `nu` (connected factor indices minus
/// the visible ones), as space positions in space order.
std::vector<Index> latent_indices(const ModelSpec& spec, Index nu);

/// Per-factor priors with unset entries filled from `fallback`.
std::vector<PriorSpec> resolve_priors(const ModelSpec& spec, const PriorSpec& fallback);

}  // namespace tfvb
