#include "tril3/dataset.hpp"

#include <fstream>

#include "doctest.h"
#include "support.hpp"

using namespace tril3;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& content) {
  auto path = testing::temp_dir("dataset") / name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("tiny file splits 3/1 at train_fraction 0.75") {
  auto path = write_file("tiny.csv", "a,b,y\n1,2,0\n3,4,1\n5,6,0\n7,8,1\n");
  DatasetSpec spec{path.string(), {"a", "b"}, "y", 0.75, 7};
  const Dataset d = load_csv(spec);
  CHECK(d.train.size() == 3);
  CHECK(d.test.size() == 1);
  CHECK(d.num_classes == 2);
}

TEST_CASE("split is deterministic given spec and seed") {
  auto samples = testing::two_gaussians(50, 11);
  auto path = testing::temp_dir("dataset") / "det.csv";
  testing::write_csv(path, samples);
  DatasetSpec spec{path.string(), testing::feature_names(2), "label", 0.8, 42};
  const Dataset a = load_csv(spec);
  const Dataset b = load_csv(spec);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].features == b.train[i].features);
    CHECK(a.train[i].label == b.train[i].label);
  }
}

TEST_CASE("non-numeric feature cell errors with row and column") {
  auto path = write_file("bad.csv", "a,b,y\n1,2,0\n3,oops,1\n");
  DatasetSpec spec{path.string(), {"a", "b"}, "y", 0.5, 0};
  CHECK_THROWS_WITH_AS(load_csv(spec),
                       "row 3, column 'b': cannot parse 'oops' as a number", DataError);
}

TEST_CASE("unknown column name is rejected") {
  auto path = write_file("cols.csv", "a,b,y\n1,2,0\n");
  DatasetSpec spec{path.string(), {"a", "nope"}, "y", 0.5, 0};
  CHECK_THROWS_AS(load_csv(spec), DataError);
}

TEST_CASE("missing file is rejected") {
  DatasetSpec spec{"/nonexistent/x.csv", {"a"}, "y", 0.5, 0};
  CHECK_THROWS_AS(load_csv(spec), DataError);
}

TEST_CASE("label column may not appear among features") {
  auto path = write_file("dup.csv", "a,y\n1,0\n");
  DatasetSpec spec{path.string(), {"y"}, "y", 0.5, 0};
  CHECK_THROWS_AS(load_csv(spec), DataError);
}

TEST_CASE("raw labels map to dense ids in sorted order") {
  auto path = write_file("labels.csv", "a,y\n1,7\n2,3\n3,7\n4,12\n");
  DatasetSpec spec{path.string(), {"a"}, "y", 1.0, 0};
  const Dataset d = load_csv(spec);
  CHECK(d.num_classes == 3);
  CHECK(d.raw_labels == std::vector<long>{3, 7, 12});
  for (const Sample& s : d.train) {
    if (s.features[0] == 2) CHECK(*s.label == 0);   // raw 3
    if (s.features[0] == 1) CHECK(*s.label == 1);   // raw 7
    if (s.features[0] == 4) CHECK(*s.label == 2);   // raw 12
  }
}

TEST_CASE("negative label is rejected") {
  auto path = write_file("neg.csv", "a,y\n1,-1\n");
  DatasetSpec spec{path.string(), {"a"}, "y", 1.0, 0};
  CHECK_THROWS_AS(load_csv(spec), DataError);
}
