#include "doctest.h"

#include <algorithm>

#include "tfvb/error.hpp"
#include "tfvb/io.hpp"

#include <sstream>

using namespace tfvb;

TEST_CASE("coo text round trip") {
  auto t = SparseTensor::from_entries({"i", "j"}, {3, 4},
                                      {{{2, 1}, 0.1}, {{0, 3}, 0.0}, {{1, 1}, 1e-300}});
  std::stringstream ss;
  write_coo(ss, t);
  auto back = read_coo(ss, "mem");
  CHECK(back.indices() == t.indices());
  CHECK(back.shape() == t.shape());
  CHECK(std::ranges::equal(back.coords(), t.coords()));
  CHECK((back.values() == t.values()).all());
}

TEST_CASE("coo reader errors name the line") {
  auto expect = [](const std::string& text, Errc code, int line) {
    std::istringstream in(text);
    try {
      read_coo(in, "data.txt");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
      if (line > 0) CHECK(e.line() == line);
      CHECK(std::string(e.what()).find("data.txt") != std::string::npos);
    }
  };
  expect("0 0 1\n", Errc::SyntaxError, 1);
  expect("# indices: i=2 j=2\n0 0 1\n0 x 1\n", Errc::SyntaxError, 3);
  expect("# indices: i=2 j=2\n0 2 1\n", Errc::OutOfRangeCoordinate, 2);
  expect("# indices: i=2 j=2\n0 1 -1\n", Errc::NegativeValue, 2);
  expect("# indices: i=2 j=2\n0 1 1\n0 1 1\n", Errc::DuplicateCoordinate, 0);
  expect("# indices: i=2 j=2\n0 1\n", Errc::SyntaxError, 2);
}

TEST_CASE("missing file") {
  try {
    read_coo_file("/nonexistent/file.coo");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IoError);
  }
}

TEST_CASE("convert_coo") {
  std::istringstream in("1 1 2.5\n3 2 1\n1 1 2.5\n");
  ConvertOptions o;
  o.reindex = true;
  auto t = convert_coo(in, "raw", o);
  CHECK(t.indices() == std::vector<std::string>{"i", "j"});
  CHECK(t.shape() == std::vector<Index>{3, 2});
  CHECK(t.nnz() == 2);
  CHECK(t.value(0) == 2.5);

  std::istringstream conflict("0 0 1\n0 0 2\n");
  try {
    convert_coo(conflict, "raw", {});
    FAIL("expected ConflictingDuplicate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConflictingDuplicate);
  }

  std::istringstream zero_based("0 0 1\n");
  o.reindex = true;
  CHECK_THROWS_AS(convert_coo(zero_based, "raw", o), Error);
}

TEST_CASE("factor output") {
  Factor f;
  f.name = "A";
  f.indices = {"i", "r"};
  f.shape = {2, 1};
  f.values = Eigen::ArrayXd::Constant(2, 0.25);
  std::ostringstream out;
  write_factor(out, f);
  CHECK(out.str() == "# factor A indices: i=2 r=1\n# columns: i r value\n0 0 0.25\n1 0 0.25\n");
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(3.0) == "3");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
