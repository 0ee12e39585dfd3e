#pragma once

#include "tfvb/tensor.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace tfvb {

// COO text: a header line `# indices: i=146 j=168 k=5`, then one
// `i j k value` line per stored cell, 0-based, whitespace separated.
// Other `#` lines are comments.

/// Throws SyntaxError (with line), OutOfRangeCoordinate, NegativeValue or
/// DuplicateCoordinate; messages name `source`.
SparseTensor read_coo(std::istream& in, std::string_view source);
/// Throws IoError if the file cannot be opened.
SparseTensor read_coo_file(const std::string& path);
void write_coo(std::ostream& out, const SparseTensor& t);

/// `# factor A indices: i=146 r=5`, then `i r value [C D E L]` rows.
void write_factor(std::ostream& out, const Factor& f);

struct ConvertOptions {
  bool reindex = false;  // input coordinates are 1-based
};

/// Normalizes external coordinate data: optional 1-based to 0-based shift,
/// sorting, and merging of equal duplicates. Without a header, indices are
/// named i, j, k, ... and sized by the largest coordinate. Throws
/// ConflictingDuplicate for a repeated coordinate with different values.
SparseTensor convert_coo(std::istream& in, std::string_view source,
                         const ConvertOptions& options);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace tfvb
