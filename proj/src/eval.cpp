#include "tfvb/eval.hpp"

#include "tfvb/contraction.hpp"
#include "tfvb/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tfvb {

namespace {

SparseTensor subset(const SparseTensor& t, const std::vector<bool>& keep, bool wanted) {
  std::vector<Coord> coords;
  std::vector<double> values;
  for (Index e = 0; e < t.nnz(); ++e) {
    if (keep[e] != wanted) continue;
    auto c = t.coord(e);
    coords.insert(coords.end(), c.begin(), c.end());
    values.push_back(t.value(e));
  }
  return SparseTensor(t.indices(), t.shape(), std::move(coords), std::move(values));
}

}  // namespace

Split make_split(const SparseTensor& tensor, const SplitSpec& spec) {
  if (tensor.empty()) throw Error(Errc::EmptyTensor, "cannot split an empty tensor");
  if (!(spec.hide_fraction > 0.0 && spec.hide_fraction < 1.0))
    throw Error(Errc::InvalidConfig, "hide_fraction must lie strictly inside (0, 1)");

  std::mt19937_64 rng(spec.seed);
  std::vector<bool> hidden(static_cast<std::size_t>(tensor.nnz()), false);
  if (spec.scope == SplitScope::Entries) {
    const auto n_hide =
        static_cast<Index>(std::llround(spec.hide_fraction * static_cast<double>(tensor.nnz())));
    std::vector<Index> order(static_cast<std::size_t>(tensor.nnz()));
    std::iota(order.begin(), order.end(), Index{0});
    // Partial Fisher-Yates: the first n_hide positions are a uniform subset.
    for (Index i = 0; i < n_hide; ++i) {
      std::uniform_int_distribution<Index> pick(i, tensor.nnz() - 1);
      std::swap(order[i], order[pick(rng)]);
      hidden[order[i]] = true;
    }
  } else {
    auto it = std::find(tensor.indices().begin(), tensor.indices().end(), spec.slice_index);
    if (it == tensor.indices().end())
      throw Error(Errc::UnknownIndex, "slice index '" + spec.slice_index + "' not in tensor");
    const auto d = static_cast<Index>(it - tensor.indices().begin());
    const Index dim = tensor.shape()[d];
    const auto n_hide =
        static_cast<Index>(std::llround(spec.hide_fraction * static_cast<double>(dim)));
    std::vector<Index> slices(static_cast<std::size_t>(dim));
    std::iota(slices.begin(), slices.end(), Index{0});
    std::vector<bool> slice_hidden(static_cast<std::size_t>(dim), false);
    for (Index i = 0; i < n_hide; ++i) {
      std::uniform_int_distribution<Index> pick(i, dim - 1);
      std::swap(slices[i], slices[pick(rng)]);
      slice_hidden[slices[i]] = true;
    }
    for (Index e = 0; e < tensor.nnz(); ++e) hidden[e] = slice_hidden[tensor.coord(e)[d]];
  }

  Split out{subset(tensor, hidden, false), subset(tensor, hidden, true)};
  if (out.train.empty() || out.test.empty())
    throw Error(Errc::DegenerateSplit, "split leaves an empty train or test set");
  return out;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw Error(Errc::ShapeMismatch, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0;
  double n_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j+1 share their average.
    const double midrank = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] != 0) {
        rank_sum += midrank;
        n_pos += 1.0;
      }
    i = j + 1;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0)
    throw Error(Errc::SingleClass, "AUC needs at least one positive and one negative label");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double rmse(const SparseTensor& predicted, const SparseTensor& truth) {
  if (!predicted.same_support(truth))
    throw Error(Errc::SupportMismatch, "predicted and true tensors have different supports");
  if (truth.empty()) throw Error(Errc::SupportMismatch, "RMSE over an empty support");
  return std::sqrt((predicted.values() - truth.values()).square().mean());
}

LinkPredictionReport link_prediction_eval(const ModelSpec& spec, const SolverConfig& config,
                                          std::span<const PriorSpec> priors,
                                          std::span<const SparseTensor> observations,
                                          Index target, const SparseTensor& train,
                                          const SparseTensor& test) {
  if (target < 0 || target >= spec.num_observations())
    throw Error(Errc::InvalidConfig, "target observation out of range");
  for (Index e = 0; e < test.nnz(); ++e)
    if (test.value(e) != 0.0 && test.value(e) != 1.0)
      throw Error(Errc::InvalidConfig, "link prediction test values must be 0 or 1");

  std::vector<SparseTensor> fit_obs(observations.begin(), observations.end());
  fit_obs[target] = train;

  LinkPredictionReport report;
  report.fit = fit(spec, fit_obs, config, priors);
  const FactorView view =
      config.algorithm == Algorithm::VB ? FactorView::Mean : FactorView::Values;
  report.scores = reconstruct_observed(spec, report.fit.factors, view, target, test);

  std::vector<double> scores(report.scores.values().data(),
                             report.scores.values().data() + report.scores.nnz());
  std::vector<int> labels;
  for (Index e = 0; e < test.nnz(); ++e) labels.push_back(test.value(e) != 0.0 ? 1 : 0);
  report.auc = auc(scores, labels);
  report.rmse = rmse(report.scores, test);
  return report;
}

}  // namespace tfvb
