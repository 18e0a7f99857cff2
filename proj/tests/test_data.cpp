#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "hkc/data.hpp"
#include "hkc/error.hpp"

using namespace hkc;

TEST_CASE("ARI and NMI on hand-worked tables") {
  const std::vector<int> a = {0, 0, 1, 1};
  const std::vector<int> b = {0, 0, 1, 2};
  // Contingency rows {2,0,0},{0,1,1}: sum C(n_ij,2) = 1, rows 2, cols 1,
  // expected 2*1/6 = 1/3, max 3/2 -> (1 - 1/3) / (3/2 - 1/3) = 4/7.
  CHECK(std::abs(ari(b, a) - 4.0 / 7.0) <= 1e-12);
  CHECK(std::abs(ari(a, b) - 4.0 / 7.0) <= 1e-12);
  // b refines a: I = H(a) = ln 2, H(b) = 1.5 ln 2 -> 2 / 2.5.
  CHECK(std::abs(nmi(b, a) - 0.8) <= 1e-12);

  const std::vector<int> c = {0, 0, 0, 1, 1, 1};
  const std::vector<int> d = {0, 0, 1, 1, 2, 2};
  // sum C(n_ij,2) = 1 + 1 = 2, rows 6, cols 3, expected 18/15, max 4.5.
  CHECK(std::abs(ari(d, c) - (2.0 - 1.2) / (4.5 - 1.2)) <= 1e-12);
  // Only the 2-cells carry information: I = 2 * (1/3) ln 2, H(c) = ln 2, H(d) = ln 3.
  const double mi = (2.0 / 3.0) * std::log(2.0);
  CHECK(std::abs(nmi(d, c) - mi / ((std::log(2.0) + std::log(3.0)) / 2)) <= 1e-12);

  const std::vector<int> swapped = {1, 1, 0, 0};
  CHECK(ari(swapped, a) == doctest::Approx(1.0));
  CHECK(nmi(swapped, a) == doctest::Approx(1.0));
  const std::vector<int> one(4, 0);
  CHECK(nmi(one, one) == 1.0);
  CHECK(ari(one, one) == 1.0);
  const std::vector<int> singletons = {0, 1, 2, 3};
  CHECK(std::abs(ari(singletons, one)) <= 1e-12);
  CHECK(std::abs(nmi(singletons, one)) <= 1e-12);
  CHECK_THROWS_AS(ari(a, c), InvalidArgument);
}

TEST_CASE("CSV parsing") {
  const auto ds = parse_csv("x,y,label\n1.5,2,0\n\n-3,4e2,1\n", std::string("label"));
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds.points(1, 1) == 400.0);
  CHECK(*ds.labels == std::vector<int>{0, 1});
  const auto raw = parse_csv("x,y,label\n1.5,2,0\n");
  CHECK(raw.dim() == 3);
  CHECK_FALSE(raw.labels.has_value());
  CHECK_THROWS_AS(parse_csv("x,y\n1,2\n", std::string("label")), InvalidArgument);
  try {
    parse_csv("x,y\n1,2\n3,abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
  }
  CHECK_THROWS_AS(parse_csv("x,y\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(parse_csv("x,label\n1,0.5\n", std::string("label")), ParseError);
  CHECK_THROWS_AS(parse_csv("x\nnan\n"), ParseError);
  CHECK_THROWS_AS(parse_csv(""), ParseError);
  CHECK_THROWS_AS(parse_csv("x,y\n"), ParseError);
}

TEST_CASE("CSV and assignment files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "hkc_test_data";
  std::filesystem::create_directories(dir);
  const auto ds = paper_analog(3);
  const auto path = (dir / "pa.csv").string();
  save_csv(path, ds);
  const auto back = load_csv(path, std::string("label"));
  CHECK(back.points == ds.points);
  CHECK(back.labels == ds.labels);
  const std::vector<int> assignment = {2, 0, -1, 5};
  save_assignments((dir / "a.csv").string(), assignment);
  CHECK(load_assignments((dir / "a.csv").string()) == assignment);
  CHECK_THROWS(load_csv((dir / "missing.csv").string()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("mixture sampling") {
  std::vector<MixtureComponent> comps(3);
  comps[0].kind = ComponentKind::kBox;
  comps[0].n = 50;
  comps[0].lower = {0, 0, 0};
  comps[0].upper = {1, 2, 3};
  comps[1].kind = ComponentKind::kGaussian;
  comps[1].n = 20;
  comps[1].center = {5, 5, 5};
  comps[1].sd = 0.1;
  comps[2].kind = ComponentKind::kBox;
  comps[2].n = 10;
  comps[2].lower = {-2, -2, -2};
  comps[2].upper = {-1, -1, -1};
  const auto ds = generate_mixture(comps, 4);
  CHECK(ds.size() == 80);
  CHECK(ds.dim() == 3);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK((*ds.labels)[i] == 0);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(ds.points(i, j) >= comps[0].lower[j]);
      CHECK(ds.points(i, j) <= comps[0].upper[j]);
    }
  }
  CHECK(generate_mixture(comps, 4).points == ds.points);
  CHECK_FALSE(generate_mixture(comps, 5).points == ds.points);
  comps[2].lower = {0, 0};
  CHECK_THROWS_AS(generate_mixture(comps, 4), InvalidArgument);
}

TEST_CASE("paper-analog preset") {
  const auto ds = paper_analog();
  CHECK(ds.size() == 3100);
  CHECK(ds.dim() == 2);
  CHECK(std::set<int>(ds.labels->begin(), ds.labels->end()).size() == 6);
  CHECK(paper_analog(7, 2).size() == 6200);
  const auto comps = paper_analog_components();
  // Three Gaussians with variance ratio 1:4:16.
  CHECK(comps[1].sd / comps[0].sd == 2.0);
  CHECK(comps[2].sd / comps[1].sd == 2.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int l = (*ds.labels)[i];
    const auto& c = comps[static_cast<std::size_t>(l)];
    if (c.kind == ComponentKind::kDisk) {
      CHECK(std::hypot(ds.points(i, 0) - c.center[0], ds.points(i, 1) - c.center[1]) <= c.radius);
    }
    if (c.kind == ComponentKind::kLShape) {
      const double x = ds.points(i, 0) - c.lower[0], y = ds.points(i, 1) - c.lower[1];
      const bool in_x = x >= 0 && x <= c.length_x && y >= 0 && y <= c.thickness;
      const bool in_y = x >= 0 && x <= c.thickness && y >= 0 && y <= c.length_y;
      CHECK((in_x || in_y));
    }
  }
}

TEST_CASE("mixture JSON") {
  const auto comps = mixture_from_json(
      R"({"components":[{"kind":"disk","n":5,"center":[0,0],"radius":2},
                        {"kind":"lshape","n":4,"lower":[0,0],"length_x":3,"length_y":2,"thickness":0.5}]})");
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].kind == ComponentKind::kDisk);
  CHECK(comps[1].length_x == 3.0);
  CHECK(mixture_from_json(R"([{"kind":"gaussian","n":3,"center":[1]}])").size() == 1);
  CHECK_THROWS_AS(mixture_from_json("[]"), InvalidArgument);
  CHECK_THROWS_AS(mixture_from_json(R"([{"kind":"cone","n":3}])"), InvalidArgument);
  CHECK_THROWS_AS(mixture_from_json("{"), InvalidArgument);
}
