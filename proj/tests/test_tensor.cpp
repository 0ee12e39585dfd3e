#include "doctest.h"

#include "tfvb/error.hpp"
#include "tfvb/tensor.hpp"

#include <random>

using namespace tfvb;

namespace {

IndexSpace square(Index n) { return IndexSpace({"i", "j"}, {n, n}); }

SparseTensor matrix(std::vector<Entry> entries, Index n = 2) {
  return SparseTensor::from_entries({"i", "j"}, {n, n}, entries);
}

Errc error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

}  // namespace

TEST_CASE("validate_tensor accepts a well-formed matrix") {
  CHECK_NOTHROW(validate_tensor(matrix({{{0, 0}, 1.0}, {{1, 1}, 2.0}}), square(2)));
}

TEST_CASE("validate_tensor reports each invariant violation") {
  CHECK(error_of([] { validate_tensor(matrix({{{2, 0}, 1.0}}), square(2)); }) ==
        Errc::OutOfRangeCoordinate);
  CHECK(error_of([] { validate_tensor(matrix({{{0, 0}, 1.0}, {{0, 0}, 2.0}}), square(2)); }) ==
        Errc::DuplicateCoordinate);
  CHECK(error_of([] { validate_tensor(matrix({{{0, 1}, -1.0}}), square(2)); }) ==
        Errc::NegativeValue);
  CHECK(error_of([] {
          validate_tensor(SparseTensor::from_entries({"i", "q"}, {2, 2}, {}), square(2));
        }) == Errc::UnknownIndex);
}

TEST_CASE("observed zeros are stored entries") {
  auto t = matrix({{{0, 1}, 0.0}});
  CHECK(t.nnz() == 1);
  CHECK(t.find(std::vector<Coord>{0, 1}).has_value());
  CHECK_FALSE(t.find(std::vector<Coord>{1, 0}).has_value());
}

TEST_CASE("entries are sorted lexicographically") {
  auto t = matrix({{{1, 0}, 3.0}, {{0, 1}, 2.0}, {{0, 0}, 1.0}});
  CHECK(t.coord(0)[0] == 0);
  CHECK(t.coord(0)[1] == 0);
  CHECK(t.coord(1)[1] == 1);
  CHECK(t.coord(2)[0] == 1);
  CHECK(t.values()[0] == 1.0);
  CHECK(t.values()[2] == 3.0);
}

TEST_CASE("to_dense") {
  auto d = to_dense(matrix({{{0, 1}, 3.0}}));
  CHECK(d.data.size() == 4);
  CHECK(d.data[0] == 0.0);
  CHECK(d.data[1] == 3.0);
  CHECK(d.data[2] == 0.0);
  CHECK(d.data[3] == 0.0);

  auto z = to_dense(matrix({}));
  CHECK((z.data == 0.0).all());

  auto huge = SparseTensor::from_entries({"i", "j", "k"}, {1000, 1000, 1000}, {});
  CHECK(error_of([&] { to_dense(huge); }) == Errc::TooLargeToMaterialize);
}

TEST_CASE("sparse to dense to sparse preserves supports without explicit zeros") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Entry> entries;
    for (Coord i = 0; i < 4; ++i)
      for (Coord j = 0; j < 3; ++j)
        for (Coord k = 0; k < 2; ++k)
          if (u(rng) < 0.4) entries.push_back({{i, j, k}, 0.1 + u(rng)});
    auto t = SparseTensor::from_entries({"i", "j", "k"}, {4, 3, 2}, entries);
    auto back = from_dense(to_dense(t));
    CHECK(back.same_support(t));
    CHECK((back.values() == t.values()).all());
  }
}

TEST_CASE("init_factor is deterministic and positive") {
  IndexSpace space({"i", "r"}, {50, 4});
  std::vector<std::string> idx{"i", "r"};
  auto a = init_factor("A", idx, space, 42, 0.5, 10.0);
  auto b = init_factor("A", idx, space, 42, 0.5, 10.0);
  CHECK(a.values.size() == 200);
  CHECK((a.values == b.values).all());
  CHECK((a.values > 0.0).all());
  auto c = init_factor("A", idx, space, 43, 0.5, 10.0);
  CHECK_FALSE((a.values == c.values).all());
}

TEST_CASE("init_factor sample mean follows the prior mean") {
  IndexSpace space({"i"}, {10000});
  std::vector<std::string> idx{"i"};
  auto f = init_factor("A", idx, space, 1, 1e6, 5.0);
  CHECK(std::abs(f.values.mean() - 5.0) < 0.05);
}

TEST_CASE("init_factor rejects nonpositive priors") {
  IndexSpace space({"i"}, {3});
  std::vector<std::string> idx{"i"};
  CHECK(error_of([&] { init_factor("A", idx, space, 1, 0.0, 1.0); }) == Errc::InvalidPrior);
  CHECK(error_of([&] { init_factor("A", idx, space, 1, 1.0, -2.0); }) == Errc::InvalidPrior);
}

TEST_CASE("IndexSpace rejects duplicates and empty cardinalities") {
  CHECK_THROWS_AS(IndexSpace({"i", "i"}, {2, 3}), Error);
  CHECK_THROWS_AS(IndexSpace({"i"}, {0}), Error);
  CHECK(error_of([] { square(2).position("z"); }) == Errc::UnknownIndex);
}
