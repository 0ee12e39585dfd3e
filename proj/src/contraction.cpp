#include "tfvb/contraction.hpp"

#include "tfvb/error.hpp"

#include <algorithm>
#include <cmath>

namespace tfvb {

ContractionPlan make_plan(const ModelSpec& spec, Index nu) {
  const auto& space = spec.space();
  const auto& obs = spec.observation(nu);
  ContractionPlan plan;
  plan.observation = nu;
  plan.visible = obs.indices;
  plan.latent = latent_indices(spec, nu);
  plan.factors = obs.factors;

  std::vector<Index> latent_dims;
  for (Index p : plan.latent) latent_dims.push_back(space.dim(p));
  if (cell_count(latent_dims) > kMaxDenseCells)
    throw Error(Errc::TooLargeToMaterialize, "latent configuration space too large");
  for (Index d : latent_dims) plan.latent_count *= d;
  plan.single_latent = plan.latent.size() == 1;

  for (Index a : plan.factors) {
    const auto& f = spec.factor(a);
    const auto shape = spec.factor_shape(a);
    const auto strides = row_major_strides(shape);
    std::vector<Index> vis(plan.visible.size(), 0);
    std::vector<Index> lat(plan.latent.size(), 0);
    for (std::size_t d = 0; d < f.indices.size(); ++d) {
      auto v = std::find(plan.visible.begin(), plan.visible.end(), f.indices[d]);
      if (v != plan.visible.end()) {
        vis[v - plan.visible.begin()] = strides[d];
      } else {
        auto l = std::find(plan.latent.begin(), plan.latent.end(), f.indices[d]);
        lat[l - plan.latent.begin()] = strides[d];
      }
    }
    plan.visible_stride.push_back(vis);
    plan.latent_stride.push_back(plan.single_latent ? lat[0] : 0);

    std::vector<Index> table(static_cast<std::size_t>(plan.latent_count));
    std::vector<Index> cur(plan.latent.size(), 0);
    for (Index l = 0; l < plan.latent_count; ++l) {
      Index off = 0;
      for (std::size_t m = 0; m < cur.size(); ++m) off += cur[m] * lat[m];
      table[l] = off;
      for (std::size_t m = cur.size(); m-- > 0;) {
        if (++cur[m] < latent_dims[m]) break;
        cur[m] = 0;
      }
    }
    plan.latent_offset.push_back(std::move(table));
  }
  return plan;
}

void check_factors(const ModelSpec& spec, std::span<const Factor> factors, FactorView view) {
  if (static_cast<Index>(factors.size()) != spec.num_factors())
    throw Error(Errc::ShapeMismatch, "expected " + std::to_string(spec.num_factors()) +
                                         " factors, got " + std::to_string(factors.size()));
  for (Index a = 0; a < spec.num_factors(); ++a) {
    const auto& f = factors[a];
    if (f.shape != spec.factor_shape(a) || f.values.size() != spec.factor_size(a))
      throw Error(Errc::ShapeMismatch, "factor '" + spec.factor(a).name +
                                           "' does not match its declared shape");
    const auto& field = f.field(view);
    if (field.size() != f.values.size())
      throw Error(Errc::ShapeMismatch, "factor '" + f.name + "' has a malformed field");
    if (!field.allFinite())
      throw Error(Errc::ShapeMismatch, "factor '" + f.name + "' has non-finite entries");
  }
}

namespace {

void check_observation_tensor(const ModelSpec& spec, Index nu, const SparseTensor& t) {
  if (t.indices() != spec.observation_index_names(nu) ||
      t.shape() != spec.observation_shape(nu))
    throw Error(Errc::ShapeMismatch, "tensor does not match observation '" +
                                         spec.observation(nu).name + "'");
}

// Raw pointers to the selected field of each connected factor.
std::vector<const double*> field_pointers(const ContractionPlan& plan,
                                          std::span<const Factor> factors, FactorView view) {
  std::vector<const double*> out;
  for (Index a : plan.factors) out.push_back(factors[a].field(view).data());
  return out;
}

void visible_bases(const ContractionPlan& plan, std::span<const Coord> coord,
                   std::vector<Index>& base) {
  for (std::size_t k = 0; k < plan.factors.size(); ++k) {
    Index off = 0;
    const auto& s = plan.visible_stride[k];
    for (std::size_t d = 0; d < s.size(); ++d) off += static_cast<Index>(coord[d]) * s[d];
    base[k] = off;
  }
}

}  // namespace

SparseTensor reconstruct_observed(const ModelSpec& spec, std::span<const Factor> factors,
                                  FactorView view, Index nu, const SparseTensor& support) {
  check_factors(spec, factors, view);
  check_observation_tensor(spec, nu, support);
  const ContractionPlan plan = make_plan(spec, nu);
  const auto ptr = field_pointers(plan, factors, view);
  const std::size_t nk = plan.factors.size();
  std::vector<Index> base(nk);
  Eigen::ArrayXd out(support.nnz());

  for (Index e = 0; e < support.nnz(); ++e) {
    visible_bases(plan, support.coord(e), base);
    double sum = 0.0;
    if (plan.single_latent) {
      for (Index l = 0; l < plan.latent_count; ++l) {
        double prod = 1.0;
        for (std::size_t k = 0; k < nk; ++k) prod *= ptr[k][base[k] + l * plan.latent_stride[k]];
        sum += prod;
      }
    } else {
      for (Index l = 0; l < plan.latent_count; ++l) {
        double prod = 1.0;
        for (std::size_t k = 0; k < nk; ++k) prod *= ptr[k][base[k] + plan.latent_offset[k][l]];
        sum += prod;
      }
    }
    out[e] = sum;
  }
  if (!out.allFinite())
    throw Error(Errc::NonFiniteResult,
                "reconstruction of '" + spec.observation(nu).name + "' is not finite");
  return support.with_values(std::move(out));
}

Eigen::ArrayXd delta(const ModelSpec& spec, std::span<const Factor> factors,
                     FactorView view, Index nu, Index alpha, const SparseTensor& q) {
  check_factors(spec, factors, view);
  check_observation_tensor(spec, nu, q);
  if (!spec.connected(nu, alpha))
    throw Error(Errc::FactorNotConnected, "factor '" + spec.factor(alpha).name +
                                              "' is not connected to '" +
                                              spec.observation(nu).name + "'");
  const ContractionPlan plan = make_plan(spec, nu);
  const auto ptr = field_pointers(plan, factors, view);
  const std::size_t nk = plan.factors.size();
  const std::size_t self = static_cast<std::size_t>(
      std::find(plan.factors.begin(), plan.factors.end(), alpha) - plan.factors.begin());
  std::vector<Index> base(nk);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(spec.factor_size(alpha));

  for (Index e = 0; e < q.nnz(); ++e) {
    const double qv = q.value(e);
    if (qv == 0.0) continue;
    visible_bases(plan, q.coord(e), base);
    if (plan.single_latent) {
      for (Index l = 0; l < plan.latent_count; ++l) {
        double prod = qv;
        for (std::size_t k = 0; k < nk; ++k)
          if (k != self) prod *= ptr[k][base[k] + l * plan.latent_stride[k]];
        out[base[self] + l * plan.latent_stride[self]] += prod;
      }
    } else {
      for (Index l = 0; l < plan.latent_count; ++l) {
        double prod = qv;
        for (std::size_t k = 0; k < nk; ++k)
          if (k != self) prod *= ptr[k][base[k] + plan.latent_offset[k][l]];
        out[base[self] + plan.latent_offset[self][l]] += prod;
      }
    }
  }
  return out;
}

namespace {

// Every configuration of the indices touched by observation `nu`, in space
// order, handed to `visit` as a full-space coordinate vector.
template <typename Visit>
void for_each_configuration(const ModelSpec& spec, Index nu, Visit&& visit) {
  const auto& space = spec.space();
  std::vector<Index> used;
  for (Index p = 0; p < space.size(); ++p) {
    bool touched = false;
    for (Index a : spec.observation(nu).factors)
      for (Index q : spec.factor(a).indices) touched |= q == p;
    if (touched) used.push_back(p);
  }
  std::vector<Index> dims;
  for (Index p : used) dims.push_back(space.dim(p));
  if (cell_count(dims) > kMaxDenseCells)
    throw Error(Errc::TooLargeToMaterialize, "configuration space exceeds 1e8 cells");

  std::vector<Coord> full(static_cast<std::size_t>(space.size()), 0);
  while (true) {
    visit(std::span<const Coord>(full));
    std::size_t m = used.size();
    while (m-- > 0) {
      auto& c = full[used[m]];
      if (static_cast<Index>(++c) < dims[m]) break;
      c = 0;
    }
    if (m == static_cast<std::size_t>(-1)) break;
  }
}

Index factor_offset(const ModelSpec& spec, Index a, std::span<const Coord> full) {
  Index off = 0;
  for (Index p : spec.factor(a).indices) off = off * spec.space().dim(p) + full[p];
  return off;
}

Index observation_offset(const ModelSpec& spec, Index nu, std::span<const Coord> full) {
  Index off = 0;
  for (Index p : spec.observation(nu).indices) off = off * spec.space().dim(p) + full[p];
  return off;
}

}  // namespace

Eigen::ArrayXd dense_oracle_delta(const ModelSpec& spec, std::span<const Factor> factors,
                                  FactorView view, Index nu, Index alpha,
                                  const DenseTensor& q) {
  check_factors(spec, factors, view);
  if (!spec.connected(nu, alpha))
    throw Error(Errc::FactorNotConnected, "factor not connected to observation");
  if (q.indices != spec.observation_index_names(nu) || q.shape != spec.observation_shape(nu))
    throw Error(Errc::ShapeMismatch, "dense field does not match observation");
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(spec.factor_size(alpha));
  for_each_configuration(spec, nu, [&](std::span<const Coord> full) {
    double term = q.data[observation_offset(spec, nu, full)];
    for (Index a : spec.observation(nu).factors)
      if (a != alpha) term *= factors[a].field(view)[factor_offset(spec, a, full)];
    out[factor_offset(spec, alpha, full)] += term;
  });
  return out;
}

DenseTensor dense_oracle_reconstruct(const ModelSpec& spec, std::span<const Factor> factors,
                                     FactorView view, Index nu) {
  check_factors(spec, factors, view);
  DenseTensor out(spec.observation_index_names(nu), spec.observation_shape(nu));
  for_each_configuration(spec, nu, [&](std::span<const Coord> full) {
    double term = 1.0;
    for (Index a : spec.observation(nu).factors)
      term *= factors[a].field(view)[factor_offset(spec, a, full)];
    out.data[observation_offset(spec, nu, full)] += term;
  });
  return out;
}

}  // namespace tfvb
