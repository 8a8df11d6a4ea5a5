#include "tril3/standardizer.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace tril3;

namespace {

Batch batch_1d(const std::vector<double>& values) {
  Batch b;
  for (double v : values) {
    Eigen::VectorXd x(1);
    x[0] = v;
    b.samples.push_back({x, std::nullopt});
  }
  return b;
}

// Independent two-pass oracle: plain mean, then sum of squared deviations.
std::pair<Eigen::VectorXd, Eigen::VectorXd> two_pass_moments(const Batch& batch) {
  const Eigen::Index d = batch.feature_dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const Sample& s : batch.samples) mean += s.features;
  mean /= static_cast<double>(batch.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const Sample& s : batch.samples)
    var += (s.features - mean).cwiseAbs2();
  var /= static_cast<double>(batch.size());
  return {mean, var};
}

}  // namespace

TEST_CASE("hand arithmetic on {1,2,3}") {
  RunningMoments m;
  m.update(batch_1d({1, 2, 3}));
  CHECK(m.count() == 3);
  CHECK(m.mean()[0] == doctest::Approx(2.0));
  CHECK(m.variance()[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("empty batch leaves the state unchanged") {
  RunningMoments m;
  m.update(batch_1d({5, 7}));
  const auto mean = m.mean();
  m.update(Batch{});
  CHECK(m.count() == 2);
  CHECK(m.mean() == mean);
}

TEST_CASE("streaming moments match the two-pass oracle on random data") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> d(3.0, 7.0);
  Batch all;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j) x[j] = d(rng);
    all.samples.push_back({x, std::nullopt});
  }
  RunningMoments m;
  // Feed in uneven chunks.
  for (std::size_t at = 0; at < all.size();) {
    Batch chunk;
    const std::size_t n = std::min<std::size_t>(all.size() - at, 1 + at % 37);
    for (std::size_t i = 0; i < n; ++i) chunk.samples.push_back(all.samples[at + i]);
    m.update(chunk);
    at += n;
  }
  const auto [mean, var] = two_pass_moments(all);
  for (int j = 0; j < 4; ++j) {
    CHECK(m.mean()[j] == doctest::Approx(mean[j]).epsilon(1e-9));
    CHECK(m.variance()[j] == doctest::Approx(var[j]).epsilon(1e-9));
  }
}

TEST_CASE("transform maps 4 to 1.0 under mean 2, var 4") {
  RunningMoments m;
  m.update(batch_1d({0, 4}));  // mean 2, population variance 4
  Eigen::VectorXd x(1);
  x[0] = 4;
  CHECK(m.transform(x)[0] == doctest::Approx(1.0));
}

TEST_CASE("constant feature transforms to all zeros") {
  RunningMoments m;
  m.update(batch_1d({3, 3, 3, 3}));
  const Batch out = m.transform(batch_1d({3, 3}));
  for (const Sample& s : out.samples) CHECK(s.features[0] == 0.0);
}

TEST_CASE("transform before any update is an error") {
  RunningMoments m;
  Eigen::VectorXd x(1);
  x[0] = 1;
  CHECK_THROWS_AS(m.transform(x), std::logic_error);
}

TEST_CASE("transforming the fitted data yields mean 0, std 1") {
  auto samples = testing::two_gaussians(500, 4, 2.0, 3);
  Batch b;
  b.samples = samples;
  RunningMoments m;
  m.update(b);
  const Batch out = m.transform(b);
  const auto [mean, var] = two_pass_moments(out);
  for (int j = 0; j < 3; ++j) {
    CHECK(mean[j] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var[j] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("order of samples only matters up to float error") {
  auto samples = testing::two_gaussians(200, 8, 1.0, 2);
  Batch fwd, rev;
  fwd.samples = samples;
  rev.samples = samples;
  std::reverse(rev.samples.begin(), rev.samples.end());
  RunningMoments a, b;
  a.update(fwd);
  b.update(rev);
  for (int j = 0; j < 2; ++j) {
    CHECK(a.mean()[j] == doctest::Approx(b.mean()[j]).epsilon(1e-9));
    CHECK(a.variance()[j] == doctest::Approx(b.variance()[j]).epsilon(1e-9));
  }
}

TEST_CASE("transform keeps finite inputs finite") {
  RunningMoments m;
  m.update(batch_1d({1e-300, 2e-300, 1e300, -1e300}));
  const Batch out = m.transform(batch_1d({1e300, -1e300, 0.0}));
  for (const Sample& s : out.samples) CHECK(std::isfinite(s.features[0]));
}

TEST_CASE("dimension mismatch is rejected") {
  RunningMoments m;
  m.update(batch_1d({1, 2}));
  Batch wrong;
  Eigen::VectorXd x(2);
  x << 1, 2;
  wrong.samples.push_back({x, std::nullopt});
  CHECK_THROWS_AS(m.update(wrong), std::invalid_argument);
}
