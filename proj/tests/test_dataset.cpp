#include "mlpsel/dataset.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace mlpsel;

namespace {

Dataset small() {
  Matrix x(6, 2);
  x << 1, 10, 2, 20, 3, 35, 4, 40, 5, 50, 6, 66;
  Vector y(6);
  y << 0.5, 1.5, -2.25, 3.0, 1.0 / 3.0, 7.0;
  using S = Split;
  return make_dataset({"a", "b"}, x, y, {S::Train, S::Validation, S::Train, S::Train, S::Validation, S::Train});
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("standardization uses the training rows") {
  const Dataset d = small();
  CHECK(d.train_rows == std::vector<Index>{0, 2, 3, 5});
  CHECK(d.validation_rows == std::vector<Index>{1, 4});
  CHECK(d.normalization.mean(0) == doctest::Approx(3.5));
  double m = 0.0, s = 0.0;
  for (Index r : d.train_rows) m += d.features(r, 1);
  for (Index r : d.train_rows) s += d.features(r, 1) * d.features(r, 1);
  CHECK(m == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s / 4.0 == doctest::Approx(1.0));
}

TEST_CASE("make_dataset rejects bad input") {
  Matrix x(3, 1);
  x << 1, 2, 3;
  const Vector y = Vector::Zero(3);
  const std::vector<Split> all_train(3, Split::Train);
  CHECK_THROWS_AS(make_dataset({"a", "b"}, x, y, all_train), DatasetError);
  CHECK_THROWS_AS(make_dataset({"a"}, x, Vector::Zero(2), all_train), DatasetError);
  CHECK_THROWS_AS(make_dataset({"a"}, x, y, std::vector<Split>(3, Split::Validation)), DatasetError);
  Matrix c = Matrix::Constant(3, 1, 4.0);
  CHECK_THROWS_AS(make_dataset({"a"}, c, y, all_train), DatasetError);
  Matrix bad = x;
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(make_dataset({"a"}, bad, y, all_train), DatasetError);
}

TEST_CASE("random split is a seeded partition") {
  const auto s1 = random_split(300, 2.0 / 3.0, 4);
  const auto s2 = random_split(300, 2.0 / 3.0, 4);
  const auto s3 = random_split(300, 2.0 / 3.0, 5);
  CHECK(s1 == s2);
  CHECK(s1 != s3);
  CHECK(std::count(s1.begin(), s1.end(), Split::Train) == 200);
}

TEST_CASE("CSV round trip") {
  const Dataset d = small();
  const std::string text = format_csv(d, {"seed 3"});
  CHECK(text.rfind("# seed 3\na,b,delta_t,split\n", 0) == 0);
  const Dataset back = parse_csv(text);
  CHECK(back.input_names == d.input_names);
  CHECK(back.inputs == d.inputs);
  CHECK(back.targets == d.targets);
  CHECK(back.split == d.split);
  CHECK(format_csv(back, {"seed 3"}) == text);

  const auto path = std::filesystem::temp_directory_path() / "mlpsel_test_roundtrip.csv";
  save_csv(d, path);
  CHECK(load_csv(path).targets == d.targets);
  std::filesystem::remove(path);
}

TEST_CASE("CSV without a split column gets a drawn split") {
  const std::string text = "x,delta_t\n1,2\n2,3\n3,5\n4,4\n5,1\n6,0\n";
  CsvOptions opt;
  opt.train_fraction = 0.5;
  const Dataset d = parse_csv(text, opt);
  CHECK(d.train_rows.size() == 3);
  CHECK(d.validation_rows.size() == 3);
}

TEST_CASE("CSV diagnostics") {
  CHECK_THROWS_AS(parse_csv(""), CsvEmptyError);
  CHECK_THROWS_AS(parse_csv("# only a comment\n"), CsvEmptyError);
  CHECK_THROWS_AS(parse_csv("a,delta_t\n"), CsvEmptyError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,2\n3,4\n"), CsvMissingColumnError);

  try {
    parse_csv("a,b,delta_t\n1,2,3\n4,oops,6\n");
    FAIL("expected a parse error");
  } catch (const CsvParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_csv("a,delta_t\n1,2\n3\n"), CsvParseError);
  CHECK_THROWS_AS(parse_csv("a,delta_t,split\n1,2,train\n3,4,test\n"), CsvParseError);
  CHECK_THROWS_AS(parse_csv("a,delta_t\n1,inf\n2,3\n"), CsvParseError);
  CHECK_THROWS_AS(load_csv("/nonexistent/mlpsel.csv"), CsvError);
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}

}  // TEST_SUITE
