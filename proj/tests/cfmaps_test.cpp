#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cfstat/cfmaps.hpp"
#include "cfstat/errors.hpp"
#include "cfstat/homography.hpp"

using namespace cfstat;

namespace {

std::vector<MapDescriptor> all_maps() {
  return {MapDescriptor::gauss(), MapDescriptor::brun(2), MapDescriptor::brun(3), MapDescriptor::jacobi_perron()};
}

Point random_point(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> u(0.001, 0.999);
  Point p;
  for (int k = 0; k < m; ++k) p.coords.push_back(u(rng));
  return p;
}

// Numerical Jacobian determinant of h at x by central differences.
double numeric_log_jacobian(const Homography& h, const Point& x) {
  const int m = h.dimension();
  const double eps = 1e-6;
  std::vector<double> J(static_cast<std::size_t>(m * m));
  for (int c = 0; c < m; ++c) {
    auto xp = x.coords, xm = x.coords;
    xp[static_cast<std::size_t>(c)] += eps;
    xm[static_cast<std::size_t>(c)] -= eps;
    const auto yp = h.apply(xp), ym = h.apply(xm);
    for (int r = 0; r < m; ++r) J[static_cast<std::size_t>(r * m + c)] = (yp[r] - ym[r]) / (2 * eps);
  }
  // Gaussian elimination with partial pivoting.
  double det = 1.0;
  for (int c = 0; c < m; ++c) {
    int piv = c;
    for (int r = c + 1; r < m; ++r) {
      if (std::fabs(J[r * m + c]) > std::fabs(J[piv * m + c])) piv = r;
    }
    if (piv != c) {
      for (int k = 0; k < m; ++k) std::swap(J[c * m + k], J[piv * m + k]);
      det = -det;
    }
    det *= J[c * m + c];
    for (int r = c + 1; r < m; ++r) {
      const double f = J[r * m + c] / J[c * m + c];
      for (int k = c; k < m; ++k) J[r * m + k] -= f * J[c * m + k];
    }
  }
  return std::log(std::fabs(det));
}

}  // namespace

TEST(Homography, ComposeActsAsFunctionComposition) {
  const auto map = MapDescriptor::gauss();
  const auto h1 = inverse_branch(map, Digit::gauss(2));
  const auto h2 = inverse_branch(map, Digit::gauss(5));
  const double x = 0.37;
  const double direct = 1.0 / (2.0 + 1.0 / (5.0 + x));
  EXPECT_NEAR(compose(h1, h2).apply(std::vector<double>{x})[0], direct, 1e-15);
  EXPECT_EQ(to_string(h1), "[0,1; 1,2]");
}

TEST(Homography, CheckedArithmeticThrowsOnOverflow) {
  const auto big = Homography::from_rows(1, {std::int64_t{1} << 40, 1, 1, std::int64_t{1} << 40});
  EXPECT_THROW(big * big * big, ArithmeticOverflow);
}

TEST(Homography, DeterminantOfProductIsProductOfDeterminants) {
  const auto map = MapDescriptor::brun(3);
  const auto h = inverse_branch(map, Digit::brun(2, 3)) * inverse_branch(map, Digit::brun(1, 1)) *
                 inverse_branch(map, Digit::brun(3, 4));
  EXPECT_TRUE(h.is_unimodular());
  EXPECT_EQ(std::abs(h.determinant()), 1);
}

TEST(Cfmaps, ParseAlgorithmNames) {
  EXPECT_EQ(parse_algorithm("gauss"), MapDescriptor::gauss());
  EXPECT_EQ(parse_algorithm("brun2"), MapDescriptor::brun(2));
  EXPECT_EQ(parse_algorithm("brun3").dimension(), 3);
  EXPECT_EQ(parse_algorithm("jp2"), MapDescriptor::jacobi_perron());
  EXPECT_THROW(parse_algorithm("jp3x"), ValidationError);
  EXPECT_THROW(parse_algorithm(""), ValidationError);
}

TEST(Cfmaps, GaussForwardKnownValues) {
  auto [y, d] = gauss_forward(0.3);
  EXPECT_EQ(d.j, 3);
  EXPECT_NEAR(y, 1.0 / 0.3 - 3.0, 1e-15);
  EXPECT_THROW(gauss_forward(0.0), Terminated);
  EXPECT_THROW(gauss_forward(1.5), DomainError);
}

TEST(Cfmaps, BrunInverseBranchExplicitForm) {
  // Branch (i = 1, j = 2) in dimension 2 sends (y1, y2) to (1/(2 + y2), y1/(2 + y2)).
  const auto map = MapDescriptor::brun(2);
  const auto x = inverse_branch(map, Digit::brun(1, 2)).apply(std::vector<double>{0.3, 0.6});
  EXPECT_NEAR(x[0], 1.0 / 2.6, 1e-15);
  EXPECT_NEAR(x[1], 0.3 / 2.6, 1e-15);
  // The forward map recovers the digit and the point.
  auto [y, d] = brun_forward(Point{x});
  EXPECT_EQ(d.position, 1);
  EXPECT_EQ(d.j, 2);
  EXPECT_NEAR(y.coords[0], 0.3, 1e-14);
  EXPECT_NEAR(y.coords[1], 0.6, 1e-14);
}

TEST(Cfmaps, JacobiPerronForwardKnownValues) {
  auto [y, d] = jp_forward(Point{{0.3, 0.7}});
  EXPECT_EQ(d.a, 2);
  EXPECT_EQ(d.j, 3);
  EXPECT_NEAR(y.coords[0], 0.7 / 0.3 - 2.0, 1e-14);
  EXPECT_NEAR(y.coords[1], 1.0 / 0.3 - 3.0, 1e-14);
}

TEST(Cfmaps, DigitValidation) {
  const auto jp = MapDescriptor::jacobi_perron();
  EXPECT_THROW(jp.validate(Digit::jp(3, 2)), ValidationError);
  EXPECT_THROW(jp.validate(Digit::jp(0, 0)), ValidationError);
  EXPECT_NO_THROW(jp.validate(Digit::jp(2, 2)));
  EXPECT_THROW(MapDescriptor::brun(2).validate(Digit::brun(3, 1)), ValidationError);
  EXPECT_THROW(MapDescriptor::gauss().validate(Digit::brun(1, 1)), ValidationError);
  EXPECT_THROW(MapDescriptor::gauss().validate(Digit::gauss(0)), ValidationError);
}

TEST(Cfmaps, JacobiPerronAdmissibility) {
  const auto jp = MapDescriptor::jacobi_perron();
  EXPECT_TRUE(jp.admissible(Digit::jp(0, 3), Digit::jp(0, 1)));
  EXPECT_FALSE(jp.admissible(Digit::jp(2, 2), Digit::jp(0, 5)));
  EXPECT_TRUE(jp.admissible(Digit::jp(2, 2), Digit::jp(1, 5)));
  EXPECT_FALSE(jp.terminal_ok(Digit::jp(0, 1)));
  EXPECT_TRUE(jp.terminal_ok(Digit::jp(1, 2)));
  EXPECT_TRUE(jp.image_covers(Digit::jp(1, 3), 1));
  EXPECT_FALSE(jp.image_covers(Digit::jp(3, 3), 1));
}

// Property: T(h_d(y)) = y with digit d, for random interior y and digits.
TEST(CfmapsProperty, ForwardInvertsInverseBranches) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dj(1, 40);
  for (const auto& map : all_maps()) {
    const int m = map.dimension();
    for (int trial = 0; trial < 2000; ++trial) {
      Digit d;
      Point y = random_point(rng, m);
      switch (map.algorithm()) {
        case Algorithm::gauss:
          d = Digit::gauss(dj(rng));
          break;
        case Algorithm::brun:
          d = Digit::brun(1 + static_cast<int>(rng() % static_cast<unsigned>(m)), dj(rng));
          break;
        case Algorithm::jacobi_perron: {
          const std::int64_t b = dj(rng);
          d = Digit::jp(static_cast<std::int64_t>(rng() % static_cast<unsigned>(b + 1)), b);
          // a = b maps into [0,1]^2 only from xi' <= eta'.
          if (d.a == d.j && y.coords[0] > y.coords[1]) std::swap(y.coords[0], y.coords[1]);
          break;
        }
      }
      const auto x = inverse_branch(map, d).apply(y.coords);
      Point px{x};
      auto [back, digit] = forward(map, px);
      EXPECT_EQ(digit, d) << map.name() << " " << to_string(d);
      for (int k = 0; k < m; ++k) EXPECT_NEAR(back.coords[k], y.coords[k], 1e-9) << map.name() << " " << to_string(d);
    }
  }
}

// Property: h_{d(x)}(T x) = x for random x.
TEST(CfmapsProperty, InverseBranchUndoesForward) {
  std::mt19937_64 rng(11);
  for (const auto& map : all_maps()) {
    for (int trial = 0; trial < 5000; ++trial) {
      const Point x = random_point(rng, map.dimension());
      auto [y, d] = forward(map, x);
      const auto back = inverse_branch(map, d).apply(y.coords);
      for (int k = 0; k < map.dimension(); ++k) EXPECT_NEAR(back[k], x.coords[k], 1e-12);
    }
  }
}

// Property: every inverse branch is unimodular and its log-Jacobian agrees
// with a finite-difference determinant.
TEST(CfmapsProperty, LogJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (const auto& map : all_maps()) {
    for (int trial = 0; trial < 300; ++trial) {
      const Point x = random_point(rng, map.dimension());
      auto [y, d] = forward(map, x);
      const auto h = inverse_branch(map, d);
      EXPECT_TRUE(h.is_unimodular());
      const double lj = log_jacobian(map, h, y);
      EXPECT_NEAR(lj, numeric_log_jacobian(h, y), 1e-5 * std::max(1.0, std::fabs(lj)));
      // The forward log-Jacobian at x is minus the inverse one at T x.
      EXPECT_NEAR(forward_log_jacobian(map, x), -lj, 1e-9 * std::max(1.0, std::fabs(lj)));
    }
  }
}

TEST(CfmapsProperty, ExactForwardAgreesWithDoubleForward) {
  std::mt19937_64 rng(5);
  for (const auto& map : all_maps()) {
    const int m = map.dimension();
    for (int trial = 0; trial < 2000; ++trial) {
      const std::int64_t q = 2 + static_cast<std::int64_t>(rng() % 5000);
      RationalPoint x;
      x.denominator = q;
      for (int k = 0; k < m; ++k) x.numerators.push_back(1 + static_cast<std::int64_t>(rng() % (q - 1)));
      x.normalize();
      auto [ye, de] = forward_exact(map, x);
      auto [yd, dd] = forward(map, x.to_point());
      // Exact boundary hits can flip the floor in double precision; only compare generic points.
      bool boundary = false;
      for (double v : yd.coords) boundary = boundary || v < 1e-9 || v > 1 - 1e-9;
      if (boundary) continue;
      EXPECT_EQ(de, dd);
      const auto yp = ye.to_point();
      for (int k = 0; k < m; ++k) EXPECT_NEAR(yp.coords[k], yd.coords[k], 1e-8);
    }
  }
}

TEST(Cfmaps, RationalPointNormalize) {
  RationalPoint p{{4, 6}, 8};
  p.normalize();
  EXPECT_EQ(p, (RationalPoint{{2, 3}, 4}));
  RationalPoint bad{{1}, 0};
  EXPECT_THROW(bad.normalize(), ValidationError);
  EXPECT_EQ(to_string(RationalPoint{{1, 2}, 5}), "(1/5, 2/5)");
}

TEST(Cfmaps, JacobiPerronCells) {
  const auto jp = MapDescriptor::jacobi_perron();
  EXPECT_EQ(jp.cell_count(), 2);
  EXPECT_EQ(jp.cell_of(std::vector<double>{0.2, 0.5}), 0);
  EXPECT_EQ(jp.cell_of(std::vector<double>{0.5, 0.2}), 1);
  EXPECT_EQ(jp.domain_cell(Digit::jp(1, 3)), 0);
  EXPECT_EQ(jp.domain_cell(Digit::jp(0, 3)), 1);
}
