#include <doctest.h>

#include <cmath>
#include <limits>

#include "hkc/error.hpp"
#include "hkc/ikernel.hpp"
#include "hkc/kernel_space.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hkc;
using hkc::test::random_matrix;


TEST_CASE("model shape and radii") {
  const auto data = random_matrix(60, 3, 11);
  const auto m = fit_isolation_model(data, 8, 25, 4);
  CHECK(m.t == 25);
  CHECK(m.psi == 8);
  CHECK(m.dim == 3);
  REQUIRE(m.partitions.size() == 25);
  for (const auto& part : m.partitions) {
    REQUIRE(part.size() == 8);
    for (std::size_t i = 0; i < part.size(); ++i) {
      double nn = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < part.size(); ++j) {
        if (j != i) nn = std::min(nn, oracle::distance(part[i].center, part[j].center));
      }
      CHECK(part[i].radius == doctest::Approx(nn).epsilon(1e-15));
      const auto row = data.row(part[i].sample_row);
      CHECK(std::equal(row.begin(), row.end(), part[i].center.begin()));
    }
  }
}

TEST_CASE("two points, psi 2: both radii equal the gap") {
  Matrix data(2, 2, std::vector<double>{0.0, 0.0, 3.0, 4.0});
  const auto m = fit_isolation_model(data, 2, 1, 9);
  CHECK(m.partitions[0][0].radius == 5.0);
  CHECK(m.partitions[0][1].radius == 5.0);
}

TEST_CASE("embedding agrees with brute-force nearest center") {
  const auto data = random_matrix(80, 2, 21);
  const auto probe = random_matrix(40, 2, 22, -1.5, 1.5);
  for (std::size_t psi : {2, 5, 16}) {
    const auto m = fit_isolation_model(data, psi, 30, psi);
    for (std::size_t i = 0; i < probe.rows(); ++i) {
      const auto phi = embed_point(m, probe.row(i));
      REQUIRE(phi.cells.size() == m.t);
      for (std::size_t p = 0; p < m.t; ++p) {
        CHECK(phi.cells[p] == oracle::cell(m.partitions[p], probe.row(i)));
      }
      CHECK(phi.nonzeros().size() == phi.covered());
      CHECK(phi.squared_norm() ==
            doctest::Approx(static_cast<double>(phi.covered()) / m.t).epsilon(1e-14));
    }
  }
}

TEST_CASE("isolation kernel matches brute force and is bounded") {
  const auto data = random_matrix(50, 2, 31);
  const auto m = fit_isolation_model(data, 6, 40, 1);
  const auto feats = embed_points(m, data);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 20; ++j) {
      const double k = isolation_kernel(feats[i], feats[j]);
      CHECK(k == doctest::Approx(oracle::kappa(m, data.row(i), data.row(j))).epsilon(1e-14));
      CHECK(k >= 0.0);
      CHECK(k <= 1.0);
      CHECK(k == isolation_kernel(feats[j], feats[i]));
    }
  }
}

TEST_CASE("mean embedding inner product equals mean pairwise kernel") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto data = random_matrix(40, 2, 100 + trial);
    const auto m = fit_isolation_model(data, 4 + trial % 5, 10 + trial, trial);
    const auto x = random_matrix(1 + trial % 7, 2, 200 + trial);
    const auto y = random_matrix(3 + trial % 4, 2, 300 + trial);
    double brute = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < y.rows(); ++j) brute += oracle::kappa(m, x.row(i), y.row(j));
    }
    brute /= static_cast<double>(x.rows() * y.rows());
    const auto ex = embed_distribution(m, x);
    const auto ey = embed_distribution(m, y);
    CHECK(std::abs(kernel_dist_dist(ex, ey) - brute) <= 1e-12);
  }
}

TEST_CASE("merge is the size-weighted mean") {
  const auto data = random_matrix(30, 2, 41);
  const auto m = fit_isolation_model(data, 6, 50, 2);
  const auto feats = embed_points(m, data);
  std::vector<Index> a = {0, 3, 5}, b = {7, 8, 9, 10, 11}, ab = {0, 3, 5, 7, 8, 9, 10, 11};
  const auto merged = merge_embeddings(embed_distribution(feats, a), embed_distribution(feats, b));
  const auto direct = embed_distribution(feats, ab);
  CHECK(merged.support_size == 8);
  for (std::size_t i = 0; i < merged.dim(); ++i) {
    CHECK(merged.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-14));
  }
}

TEST_CASE("point-to-distribution kernel equals dirac embedding") {
  const auto data = random_matrix(30, 2, 51);
  const auto m = fit_isolation_model(data, 5, 30, 3);
  const auto feats = embed_points(m, data);
  const auto emb = embed_distribution(feats);
  for (std::size_t i = 0; i < 10; ++i) {
    const double via_dirac = kernel_dist_dist(dirac_embedding(feats[i]), emb);
    CHECK(kernel_point_dist(feats[i], emb) == doctest::Approx(via_dirac).epsilon(1e-14));
    CHECK(kernel_point_dist(m, data.row(i), emb) == doctest::Approx(via_dirac).epsilon(1e-14));
  }
  CHECK(embedding_distance(emb, emb) == doctest::Approx(0.0));
}

TEST_CASE("determinism and serialization round trip") {
  const auto data = random_matrix(40, 3, 61);
  const auto a = fit_isolation_model(data, 7, 20, 99);
  const auto b = fit_isolation_model(data, 7, 20, 99);
  CHECK(a == b);
  CHECK_FALSE(a == fit_isolation_model(data, 7, 20, 100));
  const auto c = model_from_json(model_to_json(a));
  CHECK(a == c);
  CHECK_THROWS_AS(model_from_json("{\"format\":\"other\"}"), InvalidData);
  CHECK_THROWS_AS(model_from_json("not json"), InvalidData);
}

TEST_CASE("fit and embed errors") {
  const auto data = random_matrix(5, 2, 71);
  CHECK_THROWS_AS(fit_isolation_model(data, 6, 10, 1), InvalidArgument);
  CHECK_THROWS_AS(fit_isolation_model(data, 1, 10, 1), InvalidArgument);
  CHECK_THROWS_AS(fit_isolation_model(data, 2, 0, 1), InvalidArgument);
  auto bad = data;
  bad(2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_isolation_model(bad, 2, 10, 1), InvalidData);
  const auto m = fit_isolation_model(data, 2, 10, 1);
  std::vector<double> x3 = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(embed_point(m, x3), InvalidArgument);
  std::vector<FeatureVector> none;
  CHECK_THROWS_AS(embed_distribution(none), InvalidArgument);
}

TEST_CASE("gaussian distributional kernel") {
  const auto x = random_matrix(7, 2, 81);
  const auto y = random_matrix(5, 2, 82);
  const double bw = 0.7;
  double brute = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) {
      const double d = oracle::distance(x.row(i), y.row(j));
      brute += std::exp(-d * d / (2 * bw * bw));
    }
  }
  brute /= 35.0;
  CHECK(gdk_kernel(x, y, bw) == doctest::Approx(brute).epsilon(1e-13));
  CHECK(gdk_kernel(x, y, bw) == doctest::Approx(gdk_kernel(y, x, bw)).epsilon(1e-15));
  CHECK_THROWS_AS(gdk_kernel(x, y, 0.0), InvalidArgument);
  CHECK_THROWS_AS(gdk_kernel(x, y, -1.0), InvalidArgument);

  Matrix line(3, 1, std::vector<double>{0.0, 1.0, 3.0});
  CHECK(median_bandwidth(line, 5) == 2.0);
  Matrix same(4, 1, 2.0);
  CHECK(median_bandwidth(same, 5) == 1.0);
}

TEST_CASE("kernel spaces agree with direct embeddings") {
  const auto data = random_matrix(40, 2, 91);
  const auto m = fit_isolation_model(data, 6, 40, 5);
  IdkSpace idk(m, data);
  GdkSpace gdk(data, 0.5);
  std::vector<Index> a = {1, 2, 3, 9}, b = {10, 20, 30};
  Matrix pa = data.select_rows(a), pb = data.select_rows(b);
  const auto sa = idk.summarize(a), sb = idk.summarize(b);
  CHECK(idk.set_set(sa, sb) ==
        doctest::Approx(kernel_dist_dist(embed_distribution(m, pa), embed_distribution(m, pb))));
  CHECK(gdk.set_set(gdk.summarize(a), gdk.summarize(b)) ==
        doctest::Approx(gdk_kernel(pa, pb, 0.5)).epsilon(1e-13));
  const auto merged = gdk.merge(gdk.summarize(a), gdk.summarize(b));
  std::vector<Index> ab = {1, 2, 3, 9, 10, 20, 30};
  CHECK(gdk.set_set(merged, merged) ==
        doctest::Approx(gdk_kernel(data.select_rows(ab), data.select_rows(ab), 0.5)));
  CHECK(idk.set_distance(sa, sa) == doctest::Approx(0.0));
  CHECK(gdk.point_set(4, gdk.summarize(std::vector<Index>{4})) == 1.0);
}
