#include "tfvb/synth.hpp"

#include "tfvb/contraction.hpp"
#include "tfvb/error.hpp"
#include "tfvb/random.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace tfvb {

namespace {

constexpr const char* kModeNames[] = {"i", "j", "k", "l", "m", "n", "o", "p"};

double total_cells(const std::vector<Index>& dims) {
  return cell_count(dims);
}

}  // namespace

void SynthSpec::validate() const {
  if (dims.empty() || dims.size() > std::size(kModeNames))
    throw Error(Errc::InvalidSpec, "synthetic data needs between 1 and 8 modes");
  for (Index d : dims)
    if (d < 1) throw Error(Errc::InvalidSpec, "every dimension must be at least 1");
  if (rank < 1) throw Error(Errc::InvalidSpec, "rank must be at least 1");
  if (!(observed_fraction > 0.0 && observed_fraction <= 1.0))
    throw Error(Errc::InvalidSpec, "observed_fraction must lie in (0, 1]");
  if (!(noise_std_fraction >= 0.0) || !std::isfinite(noise_std_fraction))
    throw Error(Errc::InvalidSpec, "noise_std_fraction must be nonnegative");
  if (total_cells(dims) > 9.0e18)
    throw Error(Errc::InvalidSpec, "tensor has too many cells to index");
  if (std::llround(observed_fraction * total_cells(dims)) < 100)
    throw Error(Errc::InvalidSpec, "fewer than 100 observed entries requested");
  if (binarize && !threshold && !(positive_fraction > 0.0 && positive_fraction < 1.0))
    throw Error(Errc::InvalidSpec, "positive_fraction must lie in (0, 1)");
}

ModelSpec cp_model(const std::vector<Index>& dims, Index rank) {
  if (dims.empty() || dims.size() > std::size(kModeNames))
    throw Error(Errc::InvalidSpec, "CP model needs between 1 and 8 modes");
  std::vector<std::string> names;
  std::vector<Index> card;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    names.emplace_back(kModeNames[d]);
    card.push_back(dims[d]);
  }
  names.emplace_back("r");
  card.push_back(rank);
  IndexSpace space(names, card);
  const Index r = static_cast<Index>(dims.size());

  std::vector<FactorSpec> factors;
  ObservationSpec obs{"X", {}, {}};
  for (Index d = 0; d < r; ++d) {
    factors.push_back({std::string(1, static_cast<char>('A' + d)), {d, r}, std::nullopt});
    obs.indices.push_back(d);
    obs.factors.push_back(d);
  }
  return ModelSpec(std::move(space), std::move(factors), {std::move(obs)});
}

std::vector<Coord> sample_cells(const std::vector<Index>& shape, std::uint64_t count,
                                std::mt19937_64& rng) {
  std::uint64_t total = 1;
  for (Index d : shape) total *= static_cast<std::uint64_t>(d);
  if (count > total) throw Error(Errc::InvalidSpec, "more cells requested than exist");

  std::vector<std::uint64_t> linear;
  linear.reserve(count);
  if (count * 4 >= total) {
    // Selection sampling: one pass, output already sorted.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uint64_t needed = count;
    for (std::uint64_t c = 0; c < total && needed > 0; ++c) {
      if (static_cast<double>(total - c) * u(rng) < static_cast<double>(needed)) {
        linear.push_back(c);
        --needed;
      }
    }
  } else {
    // Floyd's algorithm.
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(count * 2);
    for (std::uint64_t j = total - count; j < total; ++j) {
      std::uniform_int_distribution<std::uint64_t> pick(0, j);
      std::uint64_t t = pick(rng);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    linear.assign(chosen.begin(), chosen.end());
    std::sort(linear.begin(), linear.end());
  }

  std::vector<Coord> coords(linear.size() * shape.size());
  for (std::size_t e = 0; e < linear.size(); ++e) {
    std::uint64_t rem = linear[e];
    for (std::size_t d = shape.size(); d-- > 0;) {
      coords[e * shape.size() + d] = static_cast<Coord>(rem % static_cast<std::uint64_t>(shape[d]));
      rem /= static_cast<std::uint64_t>(shape[d]);
    }
  }
  return coords;
}

SynthData generate_cp_data(const SynthSpec& spec) {
  spec.validate();
  SynthData out;
  out.model = cp_model(spec.dims, spec.rank);
  const auto& model = out.model;

  for (Index a = 0; a < model.num_factors(); ++a) {
    const auto names = model.factor_index_names(a);
    out.truth.push_back(init_factor(model.factor(a).name, names, model.space(),
                                    derive_seed(spec.seed, "factors", static_cast<std::uint64_t>(a)),
                                    1.0, 1.0));
  }

  const auto count =
      static_cast<std::uint64_t>(std::llround(spec.observed_fraction * total_cells(spec.dims)));
  std::mt19937_64 mask_rng(derive_seed(spec.seed, "mask"));
  auto coords = sample_cells(spec.dims, count, mask_rng);

  SparseTensor support(model.observation_index_names(0), model.observation_shape(0),
                       std::move(coords), std::vector<double>(count, 1.0));
  Eigen::ArrayXd values =
      reconstruct_observed(model, out.truth, FactorView::Values, 0, support).values();

  if (spec.noise_std_fraction > 0.0) {
    const double mean = values.mean();
    const double sd = std::sqrt((values - mean).square().mean());
    std::mt19937_64 noise_rng(derive_seed(spec.seed, "noise"));
    std::normal_distribution<double> noise(0.0, spec.noise_std_fraction * sd);
    for (Index e = 0; e < values.size(); ++e) values[e] = std::max(0.0, values[e] + noise(noise_rng));
  }

  if (spec.binarize) {
    double cut = 0.0;
    if (spec.threshold) {
      cut = *spec.threshold;
    } else {
      std::vector<double> sorted(values.data(), values.data() + values.size());
      auto k = static_cast<std::size_t>(
          std::floor((1.0 - spec.positive_fraction) * static_cast<double>(sorted.size())));
      k = std::min(k, sorted.size() - 1);
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
      cut = sorted[k];
    }
    values = (values >= cut).cast<double>();
  }

  out.observations = support.with_values(std::move(values));
  return out;
}

}  // namespace tfvb
