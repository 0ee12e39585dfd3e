#include "tfvb/solvers.hpp"

#include "tfvb/contraction.hpp"
#include "tfvb/error.hpp"
#include "tfvb/random.hpp"
#include "tfvb/special.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace tfvb {

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::EM: return "em";
    case Algorithm::MapEM: return "map-em";
    case Algorithm::VB: return "vb";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "em") return Algorithm::EM;
  if (name == "map-em") return Algorithm::MapEM;
  if (name == "vb") return Algorithm::VB;
  throw Error(Errc::InvalidConfig, "unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Termination t) {
  return t == Termination::Converged ? "converged" : "max_iters";
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw Error(Errc::InvalidConfig, "max_iters must be at least 1");
  if (!(rel_tol > 0.0)) throw Error(Errc::InvalidConfig, "rel_tol must be positive");
  if (!(epsilon_guard > 0.0)) throw Error(Errc::InvalidConfig, "epsilon_guard must be positive");
}

void check_observations(const ModelSpec& spec, std::span<const SparseTensor> observations) {
  if (static_cast<Index>(observations.size()) != spec.num_observations())
    throw Error(Errc::ShapeMismatch, "expected " + std::to_string(spec.num_observations()) +
                                         " observation tensors, got " +
                                         std::to_string(observations.size()));
  for (Index nu = 0; nu < spec.num_observations(); ++nu) {
    const auto& x = observations[nu];
    if (x.indices() != spec.observation_index_names(nu))
      throw Error(Errc::ShapeMismatch,
                  "tensor for '" + spec.observation(nu).name + "' has the wrong indices");
    validate_tensor(x, spec.space());
  }
}

namespace {

// X / max(Xhat, eps) on the support of X.
SparseTensor ratio_field(const SparseTensor& x, const SparseTensor& xhat, double eps) {
  return x.with_values(x.values() / xhat.values().max(eps));
}

struct DataSums {
  Eigen::ArrayXd ratio;  // sum_nu delta(M X / Xhat)
  Eigen::ArrayXd mask;   // sum_nu delta(M)
};

DataSums em_sums(const ModelSpec& spec, std::span<const Factor> factors,
                 std::span<const SparseTensor> observations, Index alpha, double eps) {
  DataSums s{Eigen::ArrayXd::Zero(spec.factor_size(alpha)),
             Eigen::ArrayXd::Zero(spec.factor_size(alpha))};
  for (Index nu = 0; nu < spec.num_observations(); ++nu) {
    if (!spec.connected(nu, alpha)) continue;
    const auto& x = observations[nu];
    const auto xhat = reconstruct_observed(spec, factors, FactorView::Values, nu, x);
    s.ratio += delta(spec, factors, FactorView::Values, nu, alpha, ratio_field(x, xhat, eps));
    s.mask += delta(spec, factors, FactorView::Values, nu, alpha, x.mask());
  }
  return s;
}

DataSums vb_sums(const ModelSpec& spec, std::span<const Factor> factors,
                 std::span<const SparseTensor> observations, Index alpha, double eps) {
  DataSums s{Eigen::ArrayXd::Zero(spec.factor_size(alpha)),
             Eigen::ArrayXd::Zero(spec.factor_size(alpha))};
  for (Index nu = 0; nu < spec.num_observations(); ++nu) {
    if (!spec.connected(nu, alpha)) continue;
    const auto& x = observations[nu];
    const auto xhat = reconstruct_observed(spec, factors, FactorView::LogMean, nu, x);
    s.ratio += delta(spec, factors, FactorView::LogMean, nu, alpha, ratio_field(x, xhat, eps));
    s.mask += delta(spec, factors, FactorView::Mean, nu, alpha, x.mask());
  }
  return s;
}

Factor apply_em(const Factor& current, const DataSums& s, double eps) {
  Factor out = current;
  for (Index i = 0; i < out.size(); ++i)
    if (s.mask[i] > eps) out.values[i] = current.values[i] * s.ratio[i] / s.mask[i];
  if (!out.values.allFinite())
    throw Error(Errc::NonFiniteUpdate, "EM update of '" + out.name + "' is not finite");
  return out;
}

void check_vb_prior(const PriorSpec& prior, const Factor& f) {
  prior.validate(f.size(), f.name);
}

Factor apply_vb(const Factor& current, const DataSums& s, const PriorSpec& prior) {
  if (!current.vb)
    throw Error(Errc::ShapeMismatch, "factor '" + current.name + "' has no VB fields");
  check_vb_prior(prior, current);
  Factor out = current;
  auto& vb = *out.vb;
  const Index n = out.size();
  for (Index i = 0; i < n; ++i) {
    const double a = prior.shape_at(i);
    const double b = prior.mean_at(i);
    const double c = a + current.vb->log_mean[i] * s.ratio[i];
    const double d = 1.0 / (a / b + s.mask[i]);
    vb.shape[i] = c;
    vb.scale[i] = d;
    vb.mean[i] = c * d;
    vb.log_mean[i] = std::exp(digamma(c)) * d;
  }
  out.values = vb.mean;
  if (!vb.mean.allFinite() || !vb.log_mean.allFinite() || !vb.shape.allFinite() ||
      !vb.scale.allFinite())
    throw Error(Errc::NonFiniteUpdate, "VB update of '" + out.name + "' is not finite");
  return out;
}

}  // namespace

Factor em_step(const ModelSpec& spec, std::span<const Factor> factors,
               std::span<const SparseTensor> observations, Index alpha, double eps) {
  return apply_em(factors[alpha], em_sums(spec, factors, observations, alpha, eps), eps);
}

Factor single_em_step(const ModelSpec& spec, std::span<const Factor> factors,
                      const SparseTensor& x, Index nu, Index alpha, double eps) {
  const auto xhat = reconstruct_observed(spec, factors, FactorView::Values, nu, x);
  DataSums s{delta(spec, factors, FactorView::Values, nu, alpha, ratio_field(x, xhat, eps)),
             delta(spec, factors, FactorView::Values, nu, alpha, x.mask())};
  return apply_em(factors[alpha], s, eps);
}

Factor map_em_step(const ModelSpec& spec, std::span<const Factor> factors,
                   std::span<const SparseTensor> observations, const PriorSpec& prior,
                   Index alpha, double eps) {
  const Factor& current = factors[alpha];
  for (const Eigen::ArrayXd* a : {&prior.shape, &prior.mean})
    if ((a->size() != 1 && a->size() != current.size()) || !(*a > 0.0).all())
      throw Error(Errc::InvalidPrior, "prior for '" + current.name + "' must be positive");
  const DataSums s = em_sums(spec, factors, observations, alpha, eps);
  Factor out = current;
  for (Index i = 0; i < out.size(); ++i) {
    const double a = prior.shape_at(i);
    const double den = a / prior.mean_at(i) + s.mask[i];
    if (den <= eps) continue;
    const double z = ((a - 1.0) + current.values[i] * s.ratio[i]) / den;
    out.values[i] = z > 0.0 ? z : 0.0;
  }
  if (!out.values.allFinite())
    throw Error(Errc::NonFiniteUpdate, "MAP-EM update of '" + out.name + "' is not finite");
  return out;
}

Factor vb_step(const ModelSpec& spec, std::span<const Factor> factors,
               std::span<const SparseTensor> observations, const PriorSpec& prior,
               Index alpha, double eps) {
  return apply_vb(factors[alpha], vb_sums(spec, factors, observations, alpha, eps), prior);
}

Factor single_vb_step(const ModelSpec& spec, std::span<const Factor> factors,
                      const SparseTensor& x, Index nu, const PriorSpec& prior, Index alpha,
                      double eps) {
  const auto xhat = reconstruct_observed(spec, factors, FactorView::LogMean, nu, x);
  DataSums s{delta(spec, factors, FactorView::LogMean, nu, alpha, ratio_field(x, xhat, eps)),
             delta(spec, factors, FactorView::Mean, nu, alpha, x.mask())};
  return apply_vb(factors[alpha], s, prior);
}

void attach_vb_fields(Factor& f, const PriorSpec& prior) {
  prior.validate(f.size(), f.name);
  VbFields vb;
  const Index n = f.size();
  vb.shape.resize(n);
  vb.scale.resize(n);
  vb.mean.resize(n);
  vb.log_mean.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double a = prior.shape_at(i);
    vb.shape[i] = a;
    vb.scale[i] = f.values[i] / a;
    vb.mean[i] = f.values[i];
    vb.log_mean[i] = std::exp(digamma(a)) * vb.scale[i];
  }
  f.vb = std::move(vb);
}

std::vector<Factor> init_factors(const ModelSpec& spec, std::span<const PriorSpec> priors,
                                 std::uint64_t seed, bool with_vb_fields) {
  if (static_cast<Index>(priors.size()) != spec.num_factors())
    throw Error(Errc::InvalidPrior, "one prior per factor is required");
  std::vector<Factor> out;
  for (Index a = 0; a < spec.num_factors(); ++a) {
    const auto names = spec.factor_index_names(a);
    Factor f = init_factor(spec.factor(a).name, names, spec.space(),
                           derive_seed(seed, "init", static_cast<std::uint64_t>(a)),
                           priors[a].shape, priors[a].mean);
    if (with_vb_fields) attach_vb_fields(f, priors[a]);
    out.push_back(std::move(f));
  }
  return out;
}

void sweep(const ModelSpec& spec, std::vector<Factor>& factors,
           std::span<const SparseTensor> observations, std::span<const PriorSpec> priors,
           Algorithm algo, double eps) {
  for (Index a = 0; a < spec.num_factors(); ++a) {
    switch (algo) {
      case Algorithm::EM:
        factors[a] = em_step(spec, factors, observations, a, eps);
        break;
      case Algorithm::MapEM:
        factors[a] = map_em_step(spec, factors, observations, priors[a], a, eps);
        break;
      case Algorithm::VB:
        factors[a] = vb_step(spec, factors, observations, priors[a], a, eps);
        break;
    }
  }
}

double kl_objective(const ModelSpec& spec, std::span<const Factor> factors,
                    std::span<const SparseTensor> observations, FactorView view) {
  double total = 0.0;
  for (Index nu = 0; nu < spec.num_observations(); ++nu) {
    const auto& x = observations[nu];
    const auto xhat = reconstruct_observed(spec, factors, view, nu, x);
    for (Index e = 0; e < x.nnz(); ++e) {
      const double xv = x.value(e);
      const double yv = xhat.value(e);
      if (xv > 0.0) {
        if (!(yv > 0.0))
          throw Error(Errc::NonFiniteResult, "positive observation with zero model output in '" +
                                                 spec.observation(nu).name + "'");
        total += xv * std::log(xv / yv) - xv + yv;
      } else {
        total += yv;
      }
    }
  }
  if (!std::isfinite(total)) throw Error(Errc::NonFiniteResult, "KL objective is not finite");
  return total;
}

double elbo(const ModelSpec& spec, std::span<const Factor> factors,
            std::span<const SparseTensor> observations, std::span<const PriorSpec> priors) {
  if (static_cast<Index>(priors.size()) != spec.num_factors())
    throw Error(Errc::InvalidPrior, "one prior per factor is required");
  double bound = 0.0;
  for (Index nu = 0; nu < spec.num_observations(); ++nu) {
    const auto& x = observations[nu];
    const auto xhat_e = reconstruct_observed(spec, factors, FactorView::Mean, nu, x);
    const auto xhat_l = reconstruct_observed(spec, factors, FactorView::LogMean, nu, x);
    for (Index e = 0; e < x.nnz(); ++e) {
      const double xv = x.value(e);
      bound -= xhat_e.value(e);
      if (xv > 0.0) bound += xv * std::log(xhat_l.value(e)) - std::lgamma(xv + 1.0);
    }
  }
  for (Index a = 0; a < spec.num_factors(); ++a) {
    const auto& f = factors[a];
    if (!f.vb) throw Error(Errc::ShapeMismatch, "factor '" + f.name + "' has no VB fields");
    for (Index i = 0; i < f.size(); ++i) {
      const double pa = priors[a].shape_at(i);
      bound -= gamma_kl(f.vb->shape[i], f.vb->scale[i], pa, priors[a].mean_at(i) / pa);
    }
  }
  if (!std::isfinite(bound)) throw Error(Errc::NonFiniteResult, "ELBO is not finite");
  return bound;
}

FitResult fit(const ModelSpec& spec, std::span<const SparseTensor> observations,
              const SolverConfig& config, std::span<const PriorSpec> priors,
              std::optional<std::vector<Factor>> initial, const IterationObserver& observer) {
  config.validate();
  check_observations(spec, observations);
  if (static_cast<Index>(priors.size()) != spec.num_factors())
    throw Error(Errc::InvalidPrior, "one prior per factor is required");
  for (Index a = 0; a < spec.num_factors(); ++a)
    priors[a].validate(spec.factor_size(a), spec.factor(a).name);

  const bool vb = config.algorithm == Algorithm::VB;
  FitResult result;
  if (config.algorithm == Algorithm::MapEM)
    for (Index a = 0; a < spec.num_factors(); ++a)
      if ((priors[a].shape < 1.0).any())
        result.warnings.push_back("factor '" + spec.factor(a).name +
                                  "' has prior shape below 1; MAP-EM values are clamped at 0");

  std::vector<Factor> factors;
  if (initial) {
    factors = std::move(*initial);
    if (vb)
      for (Index a = 0; a < spec.num_factors(); ++a)
        if (!factors[a].vb) attach_vb_fields(factors[a], priors[a]);
  } else {
    factors = init_factors(spec, priors, config.seed, vb);
  }
  check_factors(spec, factors, vb ? FactorView::LogMean : FactorView::Values);

  auto objective = [&] {
    return vb ? elbo(spec, factors, observations, priors)
              : kl_objective(spec, factors, observations, FactorView::Values);
  };

  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= config.max_iters; ++it) {
    const auto start = std::chrono::steady_clock::now();
    sweep(spec, factors, observations, priors, config.algorithm, config.epsilon_guard);
    const auto stop = std::chrono::steady_clock::now();
    result.iteration_seconds.push_back(std::chrono::duration<double>(stop - start).count());
    result.iterations_run = it;

    const double f = objective();
    if (config.trace_objective) result.objective_trace.push_back(f);
    if (observer) observer(it, factors);
    if (it > 1 && std::abs(f - previous) / (std::abs(previous) + 1.0) < config.rel_tol) {
      result.termination = Termination::Converged;
      break;
    }
    previous = f;
  }
  result.factors = std::move(factors);
  return result;
}

}  // namespace tfvb
