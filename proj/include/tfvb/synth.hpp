#pragma once

#include "tfvb/model.hpp"
#include "tfvb/tensor.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace tfvb {

struct SynthSpec {
  std::vector<Index> dims;
  Index rank = 5;
  double observed_fraction = 0.01;
  /// Gaussian noise std as a fraction of the std of the noiseless values.
  double noise_std_fraction = 0.2;
  std::uint64_t seed = 0;
  bool binarize = false;
  /// Binarization cut; when unset, the (1 - positive_fraction) quantile of the
  /// observed values.
  std::optional<double> threshold;
  double positive_fraction = 0.2;

  /// Throws InvalidSpec.
  void validate() const;
};

struct SynthData {
  ModelSpec model;
  SparseTensor observations;
  std::vector<Factor> truth;
};

/// CP model over indices i, j, k, ... with a shared rank index r.
ModelSpec cp_model(const std::vector<Index>& dims, Index rank);

/// Uniform sample of `count` distinct cells of `shape`, sorted, as a flat
/// coordinate block.
std::vector<Coord> sample_cells(const std::vector<Index>& shape, std::uint64_t count,
                                std::mt19937_64& rng);

/// Planted CP data: unit-mean exponential factors, a uniform observed cell
/// set of exactly round(observed_fraction * cells) entries, additive Gaussian
/// noise clamped at zero, optional binarization. Deterministic per seed.
SynthData generate_cp_data(const SynthSpec& spec);

}  // namespace tfvb
