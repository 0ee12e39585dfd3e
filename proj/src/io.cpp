#include "tfvb/io.hpp"

#include "tfvb/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tfvb {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

std::string where(std::string_view source, int line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Parses "indices: i=146 j=168" after the leading '#'. Returns false if the
// comment is not a header.
bool parse_header(std::string_view body, std::vector<std::string>& names,
                  std::vector<Index>& dims, std::string_view source, int line) {
  auto tok = split_ws(body);
  if (tok.empty() || tok[0] != "indices:") return false;
  for (std::size_t t = 1; t < tok.size(); ++t) {
    auto eq = tok[t].find('=');
    long long d = 0;
    if (eq == std::string_view::npos || eq == 0 || !parse_number(tok[t].substr(eq + 1), d) ||
        d < 1)
      throw Error(Errc::SyntaxError, where(source, line) + "malformed header field '" +
                                         std::string(tok[t]) + "'",
                  line);
    names.emplace_back(tok[t].substr(0, eq));
    dims.push_back(static_cast<Index>(d));
  }
  if (names.empty())
    throw Error(Errc::SyntaxError, where(source, line) + "header declares no indices", line);
  return true;
}

struct RawRecords {
  std::vector<std::string> names;
  std::vector<Index> dims;
  std::vector<long long> coords;
  std::vector<double> values;
  std::vector<int> lines;
  std::size_t order = 0;
};

RawRecords read_records(std::istream& in, std::string_view source, bool header_required) {
  RawRecords raw;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    auto first = view.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    view.remove_prefix(first);
    if (view[0] == '#') {
      if (!have_header && raw.values.empty() &&
          parse_header(view.substr(1), raw.names, raw.dims, source, line_no)) {
        have_header = true;
        raw.order = raw.names.size();
      }
      continue;
    }
    if (header_required && !have_header)
      throw Error(Errc::SyntaxError,
                  where(source, line_no) + "missing '# indices:' header before data", line_no);
    auto tok = split_ws(view);
    if (raw.order == 0) {
      if (tok.size() < 2)
        throw Error(Errc::SyntaxError, where(source, line_no) + "expected coordinates and a value",
                    line_no);
      raw.order = tok.size() - 1;
    }
    if (tok.size() != raw.order + 1)
      throw Error(Errc::SyntaxError,
                  where(source, line_no) + "expected " + std::to_string(raw.order) +
                      " coordinates and a value",
                  line_no);
    for (std::size_t d = 0; d < raw.order; ++d) {
      long long c = 0;
      if (!parse_number(tok[d], c))
        throw Error(Errc::SyntaxError,
                    where(source, line_no) + "malformed coordinate '" + std::string(tok[d]) + "'",
                    line_no);
      raw.coords.push_back(c);
    }
    double v = 0.0;
    if (!parse_number(tok[raw.order], v) || !std::isfinite(v))
      throw Error(Errc::SyntaxError,
                  where(source, line_no) + "malformed value '" + std::string(tok[raw.order]) + "'",
                  line_no);
    if (v < 0.0)
      throw Error(Errc::NegativeValue, where(source, line_no) + "negative value", line_no);
    raw.values.push_back(v);
    raw.lines.push_back(line_no);
  }
  if (header_required && !have_header)
    throw Error(Errc::SyntaxError, where(source, line_no) + "missing '# indices:' header",
                line_no);
  return raw;
}

std::string coord_text(std::span<const Coord> c) {
  std::string s;
  for (std::size_t d = 0; d < c.size(); ++d) s += (d ? " " : "") + std::to_string(c[d]);
  return s;
}

}  // namespace

SparseTensor read_coo(std::istream& in, std::string_view source) {
  RawRecords raw = read_records(in, source, true);
  std::vector<Coord> coords;
  coords.reserve(raw.coords.size());
  for (std::size_t e = 0; e < raw.values.size(); ++e)
    for (std::size_t d = 0; d < raw.order; ++d) {
      const long long c = raw.coords[e * raw.order + d];
      if (c < 0 || c >= raw.dims[d])
        throw Error(Errc::OutOfRangeCoordinate,
                    where(source, raw.lines[e]) + "coordinate " + std::to_string(c) +
                        " out of range for index '" + raw.names[d] + "'",
                    raw.lines[e]);
      coords.push_back(static_cast<Coord>(c));
    }
  SparseTensor t(raw.names, raw.dims, std::move(coords), std::move(raw.values));
  for (Index e = 1; e < t.nnz(); ++e) {
    auto a = t.coord(e - 1);
    auto b = t.coord(e);
    if (std::equal(a.begin(), a.end(), b.begin()))
      throw Error(Errc::DuplicateCoordinate,
                  std::string(source) + ": duplicate coordinate (" + coord_text(b) + ")");
  }
  return t;
}

SparseTensor read_coo_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open data file '" + path + "'");
  return read_coo(in, path);
}

void write_coo(std::ostream& out, const SparseTensor& t) {
  out << "# indices:";
  for (Index d = 0; d < t.order(); ++d) out << ' ' << t.indices()[d] << '=' << t.shape()[d];
  out << '\n';
  for (Index e = 0; e < t.nnz(); ++e) {
    for (Coord c : t.coord(e)) out << c << ' ';
    out << format_double(t.value(e)) << '\n';
  }
}

void write_factor(std::ostream& out, const Factor& f) {
  out << "# factor " << f.name << " indices:";
  for (std::size_t d = 0; d < f.indices.size(); ++d)
    out << ' ' << f.indices[d] << '=' << f.shape[d];
  out << '\n';
  out << "# columns:";
  for (const auto& n : f.indices) out << ' ' << n;
  out << (f.vb ? " value C D E L\n" : " value\n");
  std::vector<Coord> cur(f.shape.size(), 0);
  for (Index i = 0; i < f.size(); ++i) {
    for (Coord c : cur) out << c << ' ';
    out << format_double(f.values[i]);
    if (f.vb)
      out << ' ' << format_double(f.vb->shape[i]) << ' ' << format_double(f.vb->scale[i]) << ' '
          << format_double(f.vb->mean[i]) << ' ' << format_double(f.vb->log_mean[i]);
    out << '\n';
    for (std::size_t d = cur.size(); d-- > 0;) {
      if (static_cast<Index>(++cur[d]) < f.shape[d]) break;
      cur[d] = 0;
    }
  }
}

SparseTensor convert_coo(std::istream& in, std::string_view source,
                         const ConvertOptions& options) {
  RawRecords raw = read_records(in, source, false);
  const long long shift = options.reindex ? 1 : 0;
  if (raw.order == 0) {
    if (raw.names.empty())
      throw Error(Errc::EmptyTensor, std::string(source) + ": no header and no records");
    raw.order = raw.names.size();
  }
  const bool sized = !raw.dims.empty();
  if (!sized) raw.dims.assign(raw.order, 1);
  for (std::size_t e = 0; e < raw.values.size(); ++e)
    for (std::size_t d = 0; d < raw.order; ++d) {
      long long& c = raw.coords[e * raw.order + d];
      c -= shift;
      if (c < 0 || (sized && c >= raw.dims[d]))
        throw Error(Errc::OutOfRangeCoordinate,
                    where(source, raw.lines[e]) + "coordinate out of range after reindexing",
                    raw.lines[e]);
      if (!sized) raw.dims[d] = std::max<Index>(raw.dims[d], static_cast<Index>(c + 1));
    }
  if (raw.names.empty()) {
    static constexpr const char* names[] = {"i", "j", "k", "l", "m", "n", "o", "p"};
    for (std::size_t d = 0; d < raw.order; ++d)
      raw.names.push_back(d < std::size(names) ? names[d] : "x" + std::to_string(d));
  }

  std::vector<Coord> coords(raw.coords.begin(), raw.coords.end());
  SparseTensor sorted(raw.names, raw.dims, std::move(coords), raw.values);

  std::vector<Coord> out_coords;
  std::vector<double> out_values;
  for (Index e = 0; e < sorted.nnz(); ++e) {
    auto c = sorted.coord(e);
    if (e > 0) {
      auto p = sorted.coord(e - 1);
      if (std::equal(p.begin(), p.end(), c.begin())) {
        if (sorted.value(e) != sorted.value(e - 1))
          throw Error(Errc::ConflictingDuplicate,
                      std::string(source) + ": conflicting values for coordinate (" +
                          coord_text(c) + ")");
        continue;
      }
    }
    out_coords.insert(out_coords.end(), c.begin(), c.end());
    out_values.push_back(sorted.value(e));
  }
  return SparseTensor(raw.names, raw.dims, std::move(out_coords), std::move(out_values));
}

}  // namespace tfvb
