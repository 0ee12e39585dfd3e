#include "doctest.h"

#include "support/instances.hpp"
#include "tfvb/error.hpp"
#include "tfvb/eval.hpp"
#include "tfvb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace tfvb;
using namespace tfvb::testing;

namespace {

SparseTensor grid(Index I, Index J, Index K) {
  std::vector<Entry> entries;
  for (Coord i = 0; i < I; ++i)
    for (Coord j = 0; j < J; ++j)
      for (Coord k = 0; k < K; ++k) entries.push_back({{i, j, k}, double(i + j + k)});
  return SparseTensor::from_entries({"i", "j", "k"}, {I, J, K}, entries);
}

std::set<std::vector<Coord>> support(const SparseTensor& t) {
  std::set<std::vector<Coord>> s;
  for (Index e = 0; e < t.nnz(); ++e) {
    auto c = t.coord(e);
    s.emplace(c.begin(), c.end());
  }
  return s;
}

double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (y[p] != 1) continue;
    for (std::size_t n = 0; n < s.size(); ++n) {
      if (y[n] != 0) continue;
      pairs += 1.0;
      wins += s[p] > s[n] ? 1.0 : (s[p] == s[n] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("entry split sizes and partition") {
  auto t = grid(5, 5, 4);
  REQUIRE(t.nnz() == 100);
  SplitSpec s;
  s.hide_fraction = 0.9;
  s.seed = 3;
  auto split = make_split(t, s);
  CHECK(split.test.nnz() == 90);
  CHECK(split.train.nnz() == 10);

  auto a = support(split.train);
  auto b = support(split.test);
  for (const auto& c : a) CHECK(b.count(c) == 0);
  std::set<std::vector<Coord>> u = a;
  u.insert(b.begin(), b.end());
  CHECK(u == support(t));

  for (Index e = 0; e < split.test.nnz(); ++e) {
    auto c = split.test.coord(e);
    CHECK(split.test.value(e) == double(c[0] + c[1] + c[2]));
  }
}

TEST_CASE("split is deterministic and seed dependent") {
  auto t = grid(6, 5, 4);
  SplitSpec s;
  s.seed = 11;
  auto a = make_split(t, s);
  auto b = make_split(t, s);
  CHECK(support(a.test) == support(b.test));
  s.seed = 12;
  auto c = make_split(t, s);
  CHECK(support(a.test) != support(c.test));
  CHECK(a.test.nnz() == 72);
}

TEST_CASE("slice split hides whole slices") {
  auto t = grid(10, 4, 3);
  SplitSpec s;
  s.scope = SplitScope::Slices;
  s.slice_index = "i";
  s.hide_fraction = 0.3;
  s.seed = 5;
  auto split = make_split(t, s);
  std::set<Coord> hidden, kept;
  for (Index e = 0; e < split.test.nnz(); ++e) hidden.insert(split.test.coord(e)[0]);
  for (Index e = 0; e < split.train.nnz(); ++e) kept.insert(split.train.coord(e)[0]);
  CHECK(hidden.size() == 3);
  CHECK(kept.size() == 7);
  for (Coord h : hidden) CHECK(kept.count(h) == 0);
  CHECK(split.test.nnz() == 36);
}

TEST_CASE("split errors") {
  auto t = grid(3, 3, 3);
  SplitSpec s;
  s.hide_fraction = 1.5;
  CHECK_THROWS_AS(make_split(t, s), Error);
  s.hide_fraction = 0.0;
  CHECK_THROWS_AS(make_split(t, s), Error);
  s.hide_fraction = 0.01;
  try {
    make_split(t, s);
    FAIL("expected DegenerateSplit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateSplit);
  }
  SparseTensor empty({"i"}, {3}, {}, {});
  s.hide_fraction = 0.5;
  try {
    make_split(empty, s);
    FAIL("expected EmptyTensor");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyTensor);
  }
}

TEST_CASE("auc examples") {
  std::vector<double> s{0.9, 0.8, 0.1};
  std::vector<int> y{1, 1, 0};
  CHECK(auc(s, y) == 1.0);
  std::vector<double> tied{0.5, 0.5};
  std::vector<int> pair{1, 0};
  CHECK(auc(tied, pair) == 0.5);
  std::vector<double> mixed{0.9, 0.4, 0.6, 0.2};
  std::vector<int> labels{1, 0, 0, 1};
  CHECK(auc(mixed, labels) == 0.5);
  CHECK(auc(mixed, labels) == brute_auc(mixed, labels));

  std::vector<int> one_class{1, 1, 1};
  try {
    auc(s, one_class);
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SingleClass);
  }
  std::vector<int> short_labels{1, 0, 1, 0};
  CHECK_THROWS_AS(auc(s, short_labels), Error);
}

TEST_CASE("auc equals the pairwise count") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 499);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int k = 0; k < n; ++k) {
      s[k] = static_cast<double>(rng() % 20) / 4.0;  // frequent ties
      y[k] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(auc(s, y) == doctest::Approx(brute_auc(s, y)).epsilon(1e-12));
  }
}

TEST_CASE("auc invariances") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 100;
    std::vector<double> s(n), t(n);
    std::vector<int> y(n), flipped(n);
    for (int k = 0; k < n; ++k) {
      s[k] = g(rng);
      t[k] = std::exp(3.0 * s[k]) + 1.0;
      y[k] = k % 3 == 0;
      flipped[k] = 1 - y[k];
    }
    const double base = auc(s, y);
    CHECK(auc(t, y) == doctest::Approx(base).epsilon(1e-12));
    CHECK(auc(s, flipped) == doctest::Approx(1.0 - base).epsilon(1e-12));
  }
}

TEST_CASE("rmse examples") {
  auto a = SparseTensor::from_entries({"i"}, {2}, {{{0}, 1.0}, {{1}, 3.0}});
  auto b = SparseTensor::from_entries({"i"}, {2}, {{{0}, 3.0}, {{1}, 5.0}});
  CHECK(rmse(a, b) == 2.0);
  auto c = SparseTensor::from_entries({"i"}, {2}, {{{0}, 0.0}, {{1}, 0.0}});
  auto d = SparseTensor::from_entries({"i"}, {2}, {{{0}, 0.0}, {{1}, 5.0}});
  CHECK(rmse(c, d) == doctest::Approx(3.5355339059327378).epsilon(1e-15));
  CHECK(rmse(a, a) == 0.0);
  auto e = SparseTensor::from_entries({"i"}, {2}, {{{0}, 1.0}});
  try {
    rmse(a, e);
    FAIL("expected SupportMismatch");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::SupportMismatch);
  }
}

namespace {

// Fully observed binarized planted CP tensor.
SparseTensor planted_binary(std::uint64_t seed, std::vector<Index> dims, Index rank = 2) {
  SynthSpec s;
  s.dims = std::move(dims);
  s.rank = rank;
  s.observed_fraction = 1.0;
  s.noise_std_fraction = 0.0;
  s.binarize = true;
  s.positive_fraction = 0.2;
  s.seed = seed;
  return generate_cp_data(s).observations;
}

LinkPredictionReport run_link(const SparseTensor& full, Algorithm algo, Index rank,
                              std::uint64_t seed, double hide, int iters) {
  auto spec = cp_model(full.shape(), rank);
  auto priors = resolve_priors(spec, PriorSpec::scalar(0.5, 10.0));
  SplitSpec split_spec;
  split_spec.hide_fraction = hide;
  split_spec.seed = seed;
  auto split = make_split(full, split_spec);
  SolverConfig config;
  config.algorithm = algo;
  config.max_iters = iters;
  config.rel_tol = 1e-9;
  config.seed = seed;
  std::vector<SparseTensor> obs{split.train};
  return link_prediction_eval(spec, config, priors, obs, 0, split.train, split.test);
}

}  // namespace

TEST_CASE("planted link prediction beats chance") {
  auto full = planted_binary(4, {20, 20, 20});
  auto r = run_link(full, Algorithm::VB, 2, 1, 0.6, 200);
  CHECK(r.auc > 0.9);
  CHECK(r.scores.same_support(make_split(full, {0.6, 1, SplitScope::Entries, ""}).test));
  CHECK(r.fit.iterations_run > 0);
}

TEST_CASE("shuffled labels score near chance") {
  auto full = planted_binary(6, {20, 20, 20});
  std::vector<double> v(full.values().begin(), full.values().end());
  std::mt19937_64 rng(9);
  std::shuffle(v.begin(), v.end(), rng);
  Eigen::ArrayXd shuffled = Eigen::Map<Eigen::ArrayXd>(v.data(), Index(v.size()));
  auto noise = full.with_values(shuffled);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    mean += run_link(noise, Algorithm::VB, 2, seed, 0.6, 50).auc / 20.0;
  CHECK(std::abs(mean - 0.5) < 0.05);
}

TEST_CASE("VB matches or beats EM on sparse planted data") {
  auto full = planted_binary(7, {20, 20, 20});
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double vb = run_link(full, Algorithm::VB, 5, seed, 0.9, 200).auc;
    const double em = run_link(full, Algorithm::EM, 5, seed, 0.9, 200).auc;
    wins += vb >= em;
  }
  CHECK(wins >= 8);
}

TEST_CASE("link_prediction_eval rejects non-binary test values") {
  auto spec = cp_spec(3, 3, 3, 2);
  auto priors = resolve_priors(spec, PriorSpec{});
  auto full = grid(3, 3, 3);
  auto split = make_split(full, {0.5, 1, SplitScope::Entries, ""});
  std::vector<SparseTensor> obs{split.train};
  SolverConfig config;
  config.max_iters = 2;
  CHECK_THROWS_AS(link_prediction_eval(spec, config, priors, obs, 0, split.train, split.test),
                  Error);
}
