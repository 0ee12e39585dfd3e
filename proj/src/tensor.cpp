#include "tfvb/tensor.hpp"

#include "tfvb/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tfvb {

IndexSpace::IndexSpace(std::vector<std::string> names, std::vector<Index> dims)
    : names_(std::move(names)), dims_(std::move(dims)) {
  if (names_.size() != dims_.size())
    throw Error(Errc::ShapeMismatch, "index names and cardinalities differ in length");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (dims_[i] < 1)
      throw Error(Errc::InvalidSpec, "index '" + names_[i] + "' has cardinality < 1");
    for (std::size_t j = 0; j < i; ++j)
      if (names_[i] == names_[j])
        throw Error(Errc::InvalidSpec, "duplicate index '" + names_[i] + "'");
  }
}

std::optional<Index> IndexSpace::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<Index>(it - names_.begin());
}

Index IndexSpace::position(std::string_view name) const {
  if (auto pos = find(name)) return *pos;
  throw Error(Errc::UnknownIndex, "unknown index '" + std::string(name) + "'");
}

double cell_count(std::span<const Index> shape) {
  double n = 1.0;
  for (Index d : shape) n *= static_cast<double>(d);
  return n;
}

std::vector<Index> row_major_strides(std::span<const Index> shape) {
  std::vector<Index> strides(shape.size(), 1);
  for (std::size_t d = shape.size(); d-- > 1;) strides[d - 1] = strides[d] * shape[d];
  return strides;
}

SparseTensor::SparseTensor(std::vector<std::string> indices, std::vector<Index> shape,
                           std::vector<Coord> coords, std::vector<double> values)
    : indices_(std::move(indices)), shape_(std::move(shape)) {
  const std::size_t order = indices_.size();
  if (shape_.size() != order)
    throw Error(Errc::ShapeMismatch, "tensor index list and shape differ in length");
  if (coords.size() != values.size() * order)
    throw Error(Errc::ShapeMismatch, "coordinate block does not match entry count");

  const std::size_t nnz = values.size();
  std::vector<std::size_t> perm(nnz);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(coords.begin() + a * order,
                                        coords.begin() + (a + 1) * order,
                                        coords.begin() + b * order,
                                        coords.begin() + (b + 1) * order);
  };
  if (!std::is_sorted(perm.begin(), perm.end(), less))
    std::stable_sort(perm.begin(), perm.end(), less);

  std::vector<Coord> sorted(coords.size());
  values_.resize(static_cast<Index>(nnz));
  for (std::size_t e = 0; e < nnz; ++e) {
    std::copy_n(coords.begin() + perm[e] * order, order, sorted.begin() + e * order);
    values_[static_cast<Index>(e)] = values[perm[e]];
  }
  coords_ = std::make_shared<const std::vector<Coord>>(std::move(sorted));
}

SparseTensor SparseTensor::from_entries(std::vector<std::string> indices,
                                        std::vector<Index> shape,
                                        const std::vector<Entry>& entries) {
  std::vector<Coord> coords;
  std::vector<double> values;
  coords.reserve(entries.size() * indices.size());
  values.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.coord.size() != indices.size())
      throw Error(Errc::ShapeMismatch, "entry has wrong number of coordinates");
    coords.insert(coords.end(), e.coord.begin(), e.coord.end());
    values.push_back(e.value);
  }
  return SparseTensor(std::move(indices), std::move(shape), std::move(coords),
                      std::move(values));
}

SparseTensor SparseTensor::with_values(Eigen::ArrayXd values) const {
  if (values.size() != nnz())
    throw Error(Errc::ShapeMismatch, "value count does not match support size");
  SparseTensor out;
  out.indices_ = indices_;
  out.shape_ = shape_;
  out.coords_ = coords_;
  out.values_ = std::move(values);
  return out;
}

SparseTensor SparseTensor::mask() const {
  return with_values(Eigen::ArrayXd::Ones(nnz()));
}

bool SparseTensor::same_support(const SparseTensor& other) const {
  if (indices_ != other.indices_ || shape_ != other.shape_) return false;
  return coords_ == other.coords_ || *coords_ == *other.coords_;
}

std::optional<Index> SparseTensor::find(std::span<const Coord> coord) const {
  Index lo = 0, hi = nnz();
  while (lo < hi) {
    Index mid = lo + (hi - lo) / 2;
    auto c = this->coord(mid);
    if (std::lexicographical_compare(c.begin(), c.end(), coord.begin(), coord.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < nnz()) {
    auto c = this->coord(lo);
    if (std::equal(c.begin(), c.end(), coord.begin(), coord.end())) return lo;
  }
  return std::nullopt;
}

void validate_tensor(const SparseTensor& t, const IndexSpace& space) {
  for (Index d = 0; d < t.order(); ++d) {
    Index pos = space.position(t.indices()[d]);
    if (space.dim(pos) != t.shape()[d])
      throw Error(Errc::ShapeMismatch, "index '" + t.indices()[d] +
                                           "' has cardinality " +
                                           std::to_string(t.shape()[d]) +
                                           " but the space declares " +
                                           std::to_string(space.dim(pos)));
    for (Index e = 0; e < d; ++e)
      if (t.indices()[e] == t.indices()[d])
        throw Error(Errc::ShapeMismatch, "index '" + t.indices()[d] + "' repeated");
  }
  for (Index e = 0; e < t.nnz(); ++e) {
    auto c = t.coord(e);
    for (Index d = 0; d < t.order(); ++d)
      if (static_cast<Index>(c[d]) >= t.shape()[d])
        throw Error(Errc::OutOfRangeCoordinate,
                    "entry " + std::to_string(e) + " coordinate " + std::to_string(c[d]) +
                        " out of range for index '" + t.indices()[d] + "'");
    if (e > 0) {
      auto p = t.coord(e - 1);
      if (std::equal(p.begin(), p.end(), c.begin()))
        throw Error(Errc::DuplicateCoordinate, "duplicate coordinate at entry " +
                                                   std::to_string(e));
    }
    if (!(t.value(e) >= 0.0) || !std::isfinite(t.value(e)))
      throw Error(Errc::NegativeValue,
                  "entry " + std::to_string(e) + " has a negative or non-finite value");
  }
}

DenseTensor::DenseTensor(std::vector<std::string> idx, std::vector<Index> shp)
    : indices(std::move(idx)), shape(std::move(shp)) {
  if (cell_count(shape) > kMaxDenseCells)
    throw Error(Errc::TooLargeToMaterialize, "dense array would exceed 1e8 cells");
  Index n = 1;
  for (Index d : shape) n *= d;
  data = Eigen::ArrayXd::Zero(n);
}

Index DenseTensor::offset(std::span<const Coord> coord) const {
  Index off = 0;
  for (std::size_t d = 0; d < shape.size(); ++d) off = off * shape[d] + coord[d];
  return off;
}

DenseTensor to_dense(const SparseTensor& t) {
  DenseTensor out(t.indices(), t.shape());
  for (Index e = 0; e < t.nnz(); ++e) out(t.coord(e)) = t.value(e);
  return out;
}

SparseTensor from_dense(const DenseTensor& t, bool drop_zeros) {
  const std::size_t order = t.shape.size();
  std::vector<Coord> coords;
  std::vector<double> values;
  std::vector<Coord> cur(order, 0);
  for (Index off = 0; off < t.data.size(); ++off) {
    if (!drop_zeros || t.data[off] != 0.0) {
      coords.insert(coords.end(), cur.begin(), cur.end());
      values.push_back(t.data[off]);
    }
    for (std::size_t d = order; d-- > 0;) {
      if (static_cast<Index>(++cur[d]) < t.shape[d]) break;
      cur[d] = 0;
    }
  }
  return SparseTensor(t.indices, t.shape, std::move(coords), std::move(values));
}

Index Factor::offset(std::span<const Coord> coord) const {
  Index off = 0;
  for (std::size_t d = 0; d < shape.size(); ++d) off = off * shape[d] + coord[d];
  return off;
}

const Eigen::ArrayXd& Factor::field(FactorView view) const {
  switch (view) {
    case FactorView::Values:
      return values;
    case FactorView::Mean:
      if (!vb) throw Error(Errc::ShapeMismatch, "factor '" + name + "' has no VB fields");
      return vb->mean;
    case FactorView::LogMean:
      if (!vb) throw Error(Errc::ShapeMismatch, "factor '" + name + "' has no VB fields");
      return vb->log_mean;
  }
  return values;
}

Factor init_factor(std::string name, std::span<const std::string> indices,
                   const IndexSpace& space, std::uint64_t seed, double shape,
                   double mean) {
  return init_factor(std::move(name), indices, space, seed,
                     Eigen::ArrayXd::Constant(1, shape), Eigen::ArrayXd::Constant(1, mean));
}

Factor init_factor(std::string name, std::span<const std::string> indices,
                   const IndexSpace& space, std::uint64_t seed,
                   const Eigen::ArrayXd& shape, const Eigen::ArrayXd& mean) {
  Factor f;
  f.name = std::move(name);
  for (const auto& idx : indices) {
    f.indices.push_back(idx);
    f.shape.push_back(space.dim(space.position(idx)));
  }
  if (cell_count(f.shape) > kMaxDenseCells)
    throw Error(Errc::TooLargeToMaterialize, "factor '" + f.name + "' is too large");
  Index n = 1;
  for (Index d : f.shape) n *= d;

  auto check = [&](const Eigen::ArrayXd& a) {
    if (a.size() != 1 && a.size() != n)
      throw Error(Errc::InvalidPrior, "prior array for '" + f.name + "' has wrong size");
    if (!(a > 0.0).all() || !a.allFinite())
      throw Error(Errc::InvalidPrior, "prior for '" + f.name + "' must be positive");
  };
  check(shape);
  check(mean);

  std::mt19937_64 rng(seed);
  f.values.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double a = shape.size() == 1 ? shape[0] : shape[i];
    const double b = mean.size() == 1 ? mean[0] : mean[i];
    std::gamma_distribution<double> gamma(a, b / a);
    double v = 0.0;
    while (v <= 0.0) v = gamma(rng);
    f.values[i] = v;
  }
  return f;
}

}  // namespace tfvb
