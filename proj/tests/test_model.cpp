#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>

#include "cloudchamber/model.hpp"

using namespace cloudchamber;
using doctest::Approx;

TEST_CASE("build_grid") {
  const Grid g = build_grid(1.5, 1000);
  CHECK(g.dx == Approx(3.0 / 999.0).epsilon(1e-15));
  CHECK(g.xs[0] == -1.5);
  CHECK(g.xs[999] == 1.5);
  for (Eigen::Index i = 0; i + 1 < g.xs.size(); ++i) {
    REQUIRE(std::abs(g.xs[i + 1] - g.xs[i] - g.dx) <= 8 * std::numeric_limits<double>::epsilon());
  }

  const Grid small = build_grid(1.0, 3);
  CHECK(small.xs[0] == -1.0);
  CHECK(small.xs[1] == 0.0);
  CHECK(small.xs[2] == 1.0);

  CHECK_THROWS_AS(build_grid(1.0, 2), ParameterError);
  CHECK_THROWS_AS(build_grid(0.0, 10), ParameterError);
}

TEST_CASE("nominal detector positions") {
  SUBCASE("N=4 matches the +-D +- (2k+1) d/2 pattern") {
    const auto ys = nominal_positions(Geometry{1.5, 0.5, 0.025, 4});
    REQUIRE(ys.size() == 4);
    CHECK(ys[0] == Approx(-0.5125));
    CHECK(ys[1] == Approx(-0.4875));
    CHECK(ys[2] == Approx(0.4875));
    CHECK(ys[3] == Approx(0.5125));
  }
  SUBCASE("N=2 centered rule sits on the cluster centre") {
    const auto ys = nominal_positions(Geometry{1.5, 0.5, 0.05, 2}, LayoutRule::Centered);
    CHECK(ys[0] == Approx(-0.5));
    CHECK(ys[1] == Approx(0.5));
  }
  SUBCASE("N=6 lattice rule adds the inner site") {
    const Real d = 0.1 / 6.0;
    const auto ys = nominal_positions(Geometry{1.5, 0.5, d, 6});
    const std::array<Real, 6> expect{-0.5 - d / 2, -0.5 + d / 2, -0.5 + 3 * d / 2,
                                     0.5 - 3 * d / 2, 0.5 - d / 2, 0.5 + d / 2};
    for (std::size_t k = 0; k < 6; ++k) CHECK(ys[k] == Approx(expect[k]));
  }
  SUBCASE("rules agree when N/2 is even") {
    for (std::size_t n : {4, 8, 12}) {
      const Geometry g{1.5, 0.5, 0.1 / static_cast<Real>(n), n};
      const auto a = nominal_positions(g, LayoutRule::Lattice);
      const auto b = nominal_positions(g, LayoutRule::Centered);
      for (std::size_t k = 0; k < n; ++k) CHECK(a[k] == Approx(b[k]).epsilon(1e-14));
    }
  }
}

TEST_CASE("place_detectors snaps within half a cell and stays mirror symmetric") {
  const Grid grid = build_grid(1.5, 1000);
  for (std::size_t n : {2, 4, 6, 8, 10, 12}) {
    const Geometry geom{1.5, 0.5, 0.1 / static_cast<Real>(n), n};
    const auto layout = place_detectors(geom, grid);
    REQUIRE(layout.size() == n);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(layout.positions[j] - layout.nominal[j]) <= grid.dx / 2 + 1e-15);
      CHECK(layout.sides[j] == (j < n / 2 ? Side::Left : Side::Right));
      if (j > 0) CHECK(layout.grid_indices[j] > layout.grid_indices[j - 1]);
    }
    CHECK(layout_symmetry_warnings(layout, grid).empty());
  }
}

TEST_CASE("place_detectors errors") {
  const Grid coarse = build_grid(1.5, 20);
  CHECK_THROWS_AS(place_detectors(Geometry{1.5, 0.5, 0.01, 4}, coarse), ConfigurationError);
  const Grid grid = build_grid(1.0, 101);
  const std::vector<Real> outside{-1.2, 0.5};
  CHECK_THROWS_AS(layout_from_positions(outside, grid), ConfigurationError);
  const std::vector<Real> edge{-0.999, 0.5};
  CHECK_THROWS_AS(layout_from_positions(edge, grid), ConfigurationError);
  CHECK_THROWS_AS(place_detectors(Geometry{1.5, 0.5, 0.01, 3}, grid), ParameterError);
}

TEST_CASE("snap ties go toward -infinity") {
  const Grid g = build_grid(1.0, 3);  // points -1, 0, 1
  CHECK(snap_to_grid(0.5, g) == 1);
  CHECK(snap_to_grid(-0.5, g) == 0);
  CHECK(snap_to_grid(0.51, g) == 2);
}

TEST_CASE("initial_state") {
  const Preset p = preset_from_epsilon({});
  const StateVector psi = initial_state(p.physics, p.grid, 16);
  CHECK(psi.norm2() == Approx(1.0).epsilon(1e-14));
  CHECK(psi.values.segment(1000, 15000).cwiseAbs().maxCoeff() == 0.0);
  const auto ch0 = psi.channel(0);
  for (Eigen::Index i = 0; i < 500; ++i) {
    REQUIRE(std::abs(ch0[i] - ch0[999 - i]) <= 1e-13 * ch0.cwiseAbs().maxCoeff());
  }
  // Imaginary part vanishes: the two packets sum to a cosine.
  CHECK(ch0.imag().cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("value at x = 0 is 2c") {
    const Grid odd = build_grid(1.5, 1001);
    const StateVector s = initial_state(p.physics, odd, 1);
    // Recompute c from the unnormalised samples.
    Real sum = 0.0;
    for (Eigen::Index i = 0; i < odd.xs.size(); ++i) {
      const Real x = odd.xs[i];
      if (std::abs(x) >= p.physics.trunc_a) continue;
      const Real v = 2.0 * std::exp(-x * x / (4 * p.physics.sigma * p.physics.sigma)) *
                     std::cos(p.physics.p0 * x / p.physics.hbar);
      sum += v * v;
    }
    const Real c = 1.0 / std::sqrt(odd.dx * sum);
    CHECK(s.values[500].real() == Approx(2.0 * c).epsilon(1e-13));
  }

  SUBCASE("truncation that removes every sample is an error") {
    PhysicalParams tiny = p.physics;
    tiny.trunc_a = 1e-5;
    CHECK_THROWS_AS(initial_state(tiny, p.grid, 1), ConfigurationError);
  }
}

TEST_CASE("validate_regime") {
  const Preset p = preset_from_epsilon({0.1, 4});
  for (const auto& w : validate_regime(p.physics, p.geometry)) CHECK(w.find("beta") == std::string::npos);
  // beta = 1e-4 against 1/d = 40
  CHECK(1.0 / p.geometry.d == Approx(40.0));

  PhysicalParams ph = p.physics;
  ph.sigma = 0.025;
  Geometry g = p.geometry;
  g.d = 0.05;
  auto w = validate_regime(ph, g);
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("d < sigma") != std::string::npos);

  ph.sigma = 0.5;
  g.d = 0.01;
  g.D = 0.5;
  w = validate_regime(ph, g);
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("sigma << D") != std::string::npos);

  ph.beta = 20.0;
  ph.sigma = 0.02;
  w = validate_regime(ph, g);
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("beta << 1/d") != std::string::npos);
}

TEST_CASE("preset_from_epsilon") {
  const Preset p6 = preset_from_epsilon({0.1, 6});
  CHECK(p6.physics.rho == Approx(100.0));
  CHECK(p6.physics.hbar == Approx(0.1));
  CHECK(p6.physics.p0 == Approx(13.333333333333));
  CHECK(p6.geometry.D == Approx(0.5));
  CHECK(p6.geometry.D / p6.physics.p0 == Approx(0.0375));
  CHECK(p6.physics.alpha == Approx(1e-4));
  CHECK(p6.physics.beta == Approx(1e-4));
  CHECK(p6.physics.sigma == Approx(0.025));
  CHECK(p6.time.dt() == Approx(0.065 / 350));
  CHECK(p6.time.dt() * 350 == Approx(0.065).epsilon(1e-15));
  CHECK(p6.grid.nx == 1000);

  CHECK(preset_from_epsilon({0.1, 8}).geometry.d == Approx(0.0125));
  CHECK(preset_from_epsilon({0.1, 8, 150.0}).physics.rho == 150.0);
  CHECK_THROWS_AS(preset_from_epsilon({0.1, 5}), ParameterError);
  CHECK_THROWS_AS(preset_from_epsilon({-0.1, 4}), ParameterError);
}

TEST_CASE("parameter validation") {
  PhysicalParams ph;
  CHECK_NOTHROW(ph.validate());
  ph.kappa = 3;
  CHECK_THROWS_AS(ph.validate(), ParameterError);
  ph.kappa = 1;
  ph.hbar = 0.0;
  CHECK_THROWS_AS(ph.validate(), ParameterError);
  CHECK_THROWS_AS((Geometry{1.0, 1.5, 0.1, 2}).validate(), ParameterError);
}
