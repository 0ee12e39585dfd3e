#pragma once

#include "tfvb/model.hpp"
#include "tfvb/solvers.hpp"
#include "tfvb/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tfvb {

enum class SplitScope { Entries, Slices };

struct SplitSpec {
  double hide_fraction = 0.6;
  std::uint64_t seed = 0;
  SplitScope scope = SplitScope::Entries;
  std::string slice_index;  // index whose slices are hidden in Slices scope
};

struct Split {
  SparseTensor train;
  SparseTensor test;
};

/// Entries scope hides round(hide_fraction * nnz) stored entries chosen
/// uniformly. Slices scope hides every stored entry in round(hide_fraction *
/// cardinality) randomly chosen slices of `slice_index`. Throws EmptyTensor,
/// InvalidConfig or DegenerateSplit.
Split make_split(const SparseTensor& tensor, const SplitSpec& spec);

/// Mann-Whitney AUC with midrank ties. Throws SingleClass or ShapeMismatch.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Root mean squared difference over identical supports. Throws
/// SupportMismatch.
double rmse(const SparseTensor& predicted, const SparseTensor& truth);

struct LinkPredictionReport {
  double auc = 0.0;
  double rmse = 0.0;
  FitResult fit;
  SparseTensor scores;  // model output at the test coordinates
};

/// Fits on `train` (observation `target`) plus the fully observed side
/// observations, then scores the test coordinates with the posterior means
/// (VB) or point estimates (EM, MAP-EM). Test values must be 0 or 1.
LinkPredictionReport link_prediction_eval(const ModelSpec& spec, const SolverConfig& config,
                                          std::span<const PriorSpec> priors,
                                          std::span<const SparseTensor> observations,
                                          Index target, const SparseTensor& train,
                                          const SparseTensor& test);

}  // namespace tfvb
