#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tfvb {

using Index = Eigen::Index;
using Coord = std::uint32_t;

// Largest dense array the library will allocate.
inline constexpr double kMaxDenseCells = 1e8;

/// Ordered set of named indices with their cardinalities.
class IndexSpace {
 public:
  IndexSpace() = default;
  IndexSpace(std::vector<std::string> names, std::vector<Index> dims);

  Index size() const { return static_cast<Index>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Index>& dims() const { return dims_; }
  const std::string& name(Index pos) const { return names_[pos]; }
  Index dim(Index pos) const { return dims_[pos]; }

  std::optional<Index> find(std::string_view name) const;
  /// Position of `name`; throws UnknownIndex.
  Index position(std::string_view name) const;

  bool operator==(const IndexSpace&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Index> dims_;
};

/// Product of cardinalities as a double so huge spaces do not overflow.
double cell_count(std::span<const Index> shape);

/// Row-major strides for a dense array of the given shape.
std::vector<Index> row_major_strides(std::span<const Index> shape);

struct Entry {
  std::vector<Coord> coord;
  double value = 0.0;
};

/// Coordinate-list tensor. Entries are kept sorted lexicographically by
/// coordinate; the set of stored coordinates is the observation mask, so a
/// stored zero is an observed zero and an absent coordinate is missing.
///
/// The coordinate block is shared between tensors derived with
/// `with_values`, which makes per-iteration ratio fields cheap.
class SparseTensor {
 public:
  SparseTensor() = default;
  /// `coords` holds nnz * order coordinates, entry-major. Entries are sorted
  /// on construction; duplicates are kept so that validation can see them.
  SparseTensor(std::vector<std::string> indices, std::vector<Index> shape,
               std::vector<Coord> coords, std::vector<double> values);

  static SparseTensor from_entries(std::vector<std::string> indices,
                                   std::vector<Index> shape,
                                   const std::vector<Entry>& entries);

  Index order() const { return static_cast<Index>(indices_.size()); }
  Index nnz() const { return values_.size(); }
  bool empty() const { return nnz() == 0; }

  const std::vector<std::string>& indices() const { return indices_; }
  const std::vector<Index>& shape() const { return shape_; }

  std::span<const Coord> coord(Index e) const {
    return {coords_->data() + e * order(), static_cast<std::size_t>(order())};
  }
  std::span<const Coord> coords() const { return *coords_; }
  const Eigen::ArrayXd& values() const { return values_; }
  double value(Index e) const { return values_[e]; }

  /// Same support, new values.
  SparseTensor with_values(Eigen::ArrayXd values) const;
  /// Indicator of the support (all stored values set to one).
  SparseTensor mask() const;

  bool same_support(const SparseTensor& other) const;
  /// Entry position of `coord`, if stored.
  std::optional<Index> find(std::span<const Coord> coord) const;

 private:
  std::vector<std::string> indices_;
  std::vector<Index> shape_;
  std::shared_ptr<const std::vector<Coord>> coords_ =
      std::make_shared<const std::vector<Coord>>();
  Eigen::ArrayXd values_;
};

/// Throws OutOfRangeCoordinate, DuplicateCoordinate, NegativeValue,
/// UnknownIndex or ShapeMismatch.
void validate_tensor(const SparseTensor& t, const IndexSpace& space);

/// Row-major dense array over named indices.
struct DenseTensor {
  std::vector<std::string> indices;
  std::vector<Index> shape;
  Eigen::ArrayXd data;

  DenseTensor() = default;
  DenseTensor(std::vector<std::string> indices, std::vector<Index> shape);

  Index offset(std::span<const Coord> coord) const;
  double operator()(std::span<const Coord> coord) const { return data[offset(coord)]; }
  double& operator()(std::span<const Coord> coord) { return data[offset(coord)]; }
};

/// Throws TooLargeToMaterialize above kMaxDenseCells.
DenseTensor to_dense(const SparseTensor& t);
/// Stores every cell, or only the nonzero ones when `drop_zeros` is set.
SparseTensor from_dense(const DenseTensor& t, bool drop_zeros = true);

enum class FactorView { Values, Mean, LogMean };

/// Variational gamma posterior fields: shape C, scale D, mean E = C D and
/// log-mean L = exp(digamma(C)) D.
struct VbFields {
  Eigen::ArrayXd shape;
  Eigen::ArrayXd scale;
  Eigen::ArrayXd mean;
  Eigen::ArrayXd log_mean;
};

/// Dense nonnegative array over the factor's indices, row-major in
/// declaration order.
struct Factor {
  std::string name;
  std::vector<std::string> indices;
  std::vector<Index> shape;
  Eigen::ArrayXd values;
  std::optional<VbFields> vb;

  Index size() const { return values.size(); }
  Index offset(std::span<const Coord> coord) const;
  /// Throws ShapeMismatch if a VB view is requested on a factor without VB fields.
  const Eigen::ArrayXd& field(FactorView view) const;
};

/// Draws every cell from a gamma distribution with shape A and mean B.
/// Throws InvalidPrior unless A > 0 and B > 0.
Factor init_factor(std::string name, std::span<const std::string> indices,
                   const IndexSpace& space, std::uint64_t seed, double shape,
                   double mean);
/// Cellwise priors; arrays of size one broadcast.
Factor init_factor(std::string name, std::span<const std::string> indices,
                   const IndexSpace& space, std::uint64_t seed,
                   const Eigen::ArrayXd& shape, const Eigen::ArrayXd& mean);

}  // namespace tfvb
