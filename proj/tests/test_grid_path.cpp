#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "tailrv/grid.hpp"
#include "tailrv/path.hpp"
#include "tailrv/serialize.hpp"

using namespace tailrv;

namespace {

GridSpec grid1d(std::size_t cells, double lo = 0.0, double hi = 1.0, int d = 1) {
  GridSpec g;
  g.dim_t = 1;
  g.dim_x = d;
  g.lo = {lo};
  g.hi = {hi};
  g.res = {cells};
  g.validate();
  return g;
}

/// 1{t >= where} step path.
CadlagPath step_at(const GridSpec& g, double where, double lo_v = 0.0, double hi_v = 1.0) {
  CadlagPath p = CadlagPath::zero(g);
  for (std::size_t c = 0; c < g.cells(); ++c)
    p.at(c)[0] = g.point(c)[0] >= where - 1e-12 ? hi_v : lo_v;
  return p;
}

}  // namespace

TEST_CASE("grid indexing is lexicographic with first axis major") {
  GridSpec g;
  g.dim_t = 2;
  g.dim_x = 1;
  g.lo = {0.0, 0.0};
  g.hi = {1.0, 2.0};
  g.res = {2, 3};
  g.validate();
  CHECK(g.cells() == 6);
  CHECK(g.flatten({0, 0}) == 0);
  CHECK(g.flatten({0, 2}) == 2);
  CHECK(g.flatten({1, 0}) == 3);
  auto mi = g.unflatten(4);
  CHECK(mi[0] == 1);
  CHECK(mi[1] == 1);
  auto t = g.point(4);
  CHECK(t[0] == Catch::Approx(0.5));
  CHECK(t[1] == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("degenerate window is rejected") {
  GridSpec g = grid1d(4);
  g.hi = {0.0};
  CHECK_THROWS_AS(g.validate(), error);
  Window w{{0.5}, {0.5}};
  CHECK_THROWS_AS(w.validate(1), error);
}

TEST_CASE("evaluate is right-continuous") {
  GridSpec g = grid1d(4);
  CadlagPath p = step_at(g, 0.5);
  CHECK(p.evaluate({0.49})[0] == 0.0);
  CHECK(p.evaluate({0.5})[0] == 1.0);  // value of the cell containing 0.5
  CHECK(p.evaluate({0.74})[0] == 1.0);
  CHECK(p.evaluate({1.0})[0] == 1.0);  // clamped at the top edge
}

TEST_CASE("cells_in_window selects grid points in K") {
  GridSpec g = grid1d(4);  // points 0, .25, .5, .75
  CHECK(cells_in_window(g, Window::interval(0.0, 1.0)).size() == 4);
  CHECK(cells_in_window(g, Window::interval(0.26, 0.74)).size() == 1);
  CHECK(cells_in_window(g, Window::interval(0.26, 0.75)).size() == 2);  // closed at hi
  CHECK(cells_in_window(g, Window::interval(0.8, 0.9)).empty());
  CHECK_THROWS_AS(cells_in_window(g, Window{{0.9}, {0.8}}), error);
}

TEST_CASE("shift moves jumps and pads with the fill value") {
  GridSpec g = grid1d(8);
  CadlagPath p = step_at(g, 0.5);

  SECTION("h = 0 is the identity") {
    CadlagPath q = shift(p, {0.0});
    CHECK(q.values() == p.values());
  }
  SECTION("jump at 0.5 shifted by 0.25 lands at 0.75") {
    CadlagPath q = shift(p, {0.25});
    CHECK(q.evaluate({0.74})[0] == 0.0);
    CHECK(q.evaluate({0.75})[0] == 1.0);
  }
  SECTION("B^h B^-h is the identity away from the padded band") {
    CadlagPath q = shift(shift(p, {0.25}), {-0.25});
    for (std::size_t c = 0; c < g.cells() - 2; ++c) CHECK(q.at(c)[0] == p.at(c)[0]);
  }
  SECTION("non-aligned shift raises an alignment error") {
    CHECK_THROWS_AS(shift(p, {0.1}), error);
  }
  SECTION("custom fill value") {
    std::vector<double> fill{7.0};
    CadlagPath q = shift(p, {0.25}, &fill);
    CHECK(q.at(0)[0] == 7.0);
  }
}

TEST_CASE("JSON envelope round-trips bit-exactly") {
  GridSpec g = grid1d(5, -1.0, 1.5, 2);
  CadlagPath p = CadlagPath::zero(g);
  Rng rng(7);
  for (auto& v : p.values()) v = rng.normal();
  auto j = path_to_json(p);
  CadlagPath q = path_from_json(j);
  CHECK(q.grid() == p.grid());
  CHECK(q.values() == p.values());
}

TEST_CASE("CSV round-trips through the documented header layout") {
  GridSpec g = grid1d(4, 0.0, 1.0, 2);
  CadlagPath p = CadlagPath::zero(g);
  Rng rng(11);
  for (auto& v : p.values()) v = rng.normal();
  std::stringstream ss;
  write_path_csv(ss, p);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "t_1,x_1,x_2");
  ss.seekg(0);
  CadlagPath q = read_path_csv(ss);
  CHECK(q.grid() == p.grid());
  for (std::size_t i = 0; i < p.values().size(); ++i)
    CHECK(q.values()[i] == Catch::Approx(p.values()[i]).epsilon(1e-14));
}

TEST_CASE("CSV with a single-cell axis cannot infer the grid") {
  GridSpec g = grid1d(1);
  CadlagPath p = CadlagPath::constant(g, {3.0});
  std::stringstream ss;
  write_path_csv(ss, p);
  CHECK_THROWS_AS(read_path_csv(ss), error);
}

TEST_CASE("value-space norms are 1-homogeneous and satisfy the triangle inequality") {
  Rng rng(31337);
  for (auto norm : {NormChoice::sup, NormChoice::euclidean, NormChoice::l1}) {
    for (int rep = 0; rep < 200; ++rep) {
      double x[4], y[4], s[4];
      for (int i = 0; i < 4; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
        s[i] = x[i] + y[i];
      }
      double c = 0.1 + 5.0 * rng.uniform();
      double cx[4];
      for (int i = 0; i < 4; ++i) cx[i] = c * x[i];
      CHECK(norm_eval(norm, cx, 4) ==
            Catch::Approx(c * norm_eval(norm, x, 4)).epsilon(1e-13));
      CHECK(norm_eval(norm, s, 4) <=
            norm_eval(norm, x, 4) + norm_eval(norm, y, 4) + 1e-12);
    }
  }
}

TEST_CASE("two-axis grids: windows, moduli and shifts") {
  GridSpec g;
  g.dim_t = 2;
  g.dim_x = 1;
  g.lo = {0.0, 0.0};
  g.hi = {1.0, 1.0};
  g.res = {4, 4};
  g.validate();
  CadlagPath p = CadlagPath::zero(g);
  // a quadrant indicator: 1 on [0.5,1) x [0.5,1)
  for (std::size_t c = 0; c < g.cells(); ++c) {
    auto t = g.point(c);
    p.at(c)[0] = (t[0] >= 0.5 && t[1] >= 0.5) ? 1.0 : 0.0;
  }
  Window full{{0.0, 0.0}, {1.0, 1.0}};
  CHECK(cells_in_window(g, full).size() == 16);
  CHECK(p.evaluate({0.6, 0.6})[0] == 1.0);
  CHECK(p.evaluate({0.6, 0.4})[0] == 0.0);

  CadlagPath q = shift(p, {0.25, 0.0});
  CHECK(q.evaluate({0.6, 0.6})[0] == 0.0);  // quadrant moved right
  CHECK(q.evaluate({0.8, 0.6})[0] == 1.0);
}
