#pragma once

#include "tfvb/model.hpp"
#include "tfvb/solvers.hpp"
#include "tfvb/tensor.hpp"

#include <random>
#include <string>
#include <vector>

namespace tfvb::testing {

struct Instance {
  ModelSpec spec;
  std::vector<SparseTensor> observations;
  std::vector<Factor> factors;
  std::vector<PriorSpec> priors;
};

inline ModelSpec cp_spec(Index I, Index J, Index K, Index R) {
  return parse_model_spec("index i " + std::to_string(I) + "\nindex j " + std::to_string(J) +
                          "\nindex k " + std::to_string(K) + "\nindex r " + std::to_string(R) +
                          "\nfactor A i,r\nfactor B j,r\nfactor C k,r\n"
                          "observe X i,j,k = A,B,C\n");
}

// Tensor X1(i,j,k) = A B C coupled with matrix X2(i,m) = A D.
inline ModelSpec coupled_spec(Index I, Index J, Index K, Index M, Index R) {
  return parse_model_spec("index i " + std::to_string(I) + "\nindex j " + std::to_string(J) +
                          "\nindex k " + std::to_string(K) + "\nindex m " + std::to_string(M) +
                          "\nindex r " + std::to_string(R) +
                          "\nfactor A i,r\nfactor B j,r\nfactor C k,r\nfactor D m,r\n"
                          "observe X1 i,j,k = A,B,C\nobserve X2 i,m = A,D\n");
}

inline ModelSpec tucker_spec(Index I, Index J, Index K, Index P, Index Q, Index S) {
  return parse_model_spec(
      "index i " + std::to_string(I) + "\nindex j " + std::to_string(J) + "\nindex k " +
      std::to_string(K) + "\nindex p " + std::to_string(P) + "\nindex q " + std::to_string(Q) +
      "\nindex s " + std::to_string(S) +
      "\nfactor A i,p\nfactor B j,q\nfactor C k,s\nfactor G p,q,s\n"
      "observe X i,j,k = A,B,C,G\n");
}

/// Random values in [0, vmax) on a random `observed` fraction of the cells,
/// with roughly `zero_fraction` of the stored values exactly zero.
inline SparseTensor random_observation(const ModelSpec& spec, Index nu, double observed,
                                       std::mt19937_64& rng, double vmax = 5.0,
                                       double zero_fraction = 0.1) {
  const auto shape = spec.observation_shape(nu);
  DenseTensor dense(spec.observation_index_names(nu), shape);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Coord> coords;
  std::vector<double> values;
  std::vector<Coord> cur(shape.size(), 0);
  for (Index c = 0; c < dense.data.size(); ++c) {
    if (u(rng) < observed) {
      coords.insert(coords.end(), cur.begin(), cur.end());
      values.push_back(u(rng) < zero_fraction ? 0.0 : vmax * u(rng));
    }
    for (std::size_t d = cur.size(); d-- > 0;) {
      if (static_cast<Index>(++cur[d]) < shape[d]) break;
      cur[d] = 0;
    }
  }
  if (values.empty()) {  // keep at least one observed cell
    coords.assign(shape.size(), 0);
    values.push_back(1.0);
  }
  return SparseTensor(spec.observation_index_names(nu), shape, std::move(coords),
                      std::move(values));
}

inline Instance make_instance(ModelSpec spec, double observed, std::uint64_t seed,
                              bool vb = false, double shape = 1.0, double mean = 1.0) {
  Instance inst;
  inst.spec = std::move(spec);
  std::mt19937_64 rng(seed);
  for (Index nu = 0; nu < inst.spec.num_observations(); ++nu)
    inst.observations.push_back(random_observation(inst.spec, nu, observed, rng));
  inst.priors = resolve_priors(inst.spec, PriorSpec::scalar(shape, mean));
  inst.factors = init_factors(inst.spec, inst.priors, seed ^ 0x5eedull, vb);
  return inst;
}

/// Largest |a - b| relative to the largest |b|.
inline double rel_diff(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  const double scale = std::max(b.abs().maxCoeff(), 1e-300);
  return (a - b).abs().maxCoeff() / scale;
}

}  // namespace tfvb::testing
