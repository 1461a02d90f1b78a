#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "cfstat/errors.hpp"
#include "cfstat/orbitenum.hpp"

using namespace cfstat;

namespace {

std::vector<std::int64_t> js(const std::vector<Digit>& ds) {
  std::vector<std::int64_t> out;
  for (const auto& d : ds) out.push_back(d.j);
  return out;
}

std::vector<std::vector<std::int64_t>> collect(const MapDescriptor& map, double Q, EnumerationStats* stats = nullptr) {
  std::vector<std::vector<std::int64_t>> rows;
  const auto s = enumerate_trajectories(map, Q, [&](const TrajectoryRecord& r) {
    auto row = r.point.numerators;
    row.push_back(r.point.denominator);
    rows.push_back(row);
  });
  if (stats) *stats = s;
  return rows;
}

}  // namespace

TEST(Euclid, KnownExpansions) {
  EXPECT_EQ(js(euclid_digits(3, 7)), (std::vector<std::int64_t>{2, 3}));
  EXPECT_EQ(js(euclid_digits(1, 2)), (std::vector<std::int64_t>{2}));
  // 13/21 = [0; 1, 1, 1, 1, 1, 2] with the last quotient >= 2.
  EXPECT_EQ(js(euclid_digits(13, 21)), (std::vector<std::int64_t>{1, 1, 1, 1, 1, 2}));
}

TEST(BrunGcd, RepeatedlyDividesLargestBySecondLargest) {
  const std::vector<std::int64_t> t{10, 7, 3};
  const auto r = brun_gcd_digits(t);
  EXPECT_EQ(r.gcd, 1);
  // (10,7,3) -> 10 = 1*7 + 3 -> (7,3,3) -> 7 = 2*3 + 1 -> (3,3,1) -> 3 = 1*3 + 0 -> (3,1,0) -> 3 = 3*1 -> (1,0,0)
  EXPECT_EQ(js(r.digits), (std::vector<std::int64_t>{1, 2, 1, 3}));
  EXPECT_THROW(brun_gcd_digits(std::vector<std::int64_t>{0, 0}), ValidationError);
}

TEST(JacobiPerron, DigitsRoundTripAndAdmissible) {
  const auto map = MapDescriptor::jacobi_perron();
  const auto d = jp_digits(3, 5, 7);
  const auto v = reconstruct_homogeneous(map, d);
  EXPECT_EQ(v, (std::vector<std::int64_t>{3, 5, 7}));
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_TRUE(map.admissible(d[k - 1], d[k]));
  EXPECT_GE(d.back().j, 2);
}

TEST(Enumeration, DenominatorBoundIsInclusive) {
  EXPECT_EQ(denominator_bound(MapDescriptor::gauss(), 2 * std::log(7.0)), 7);
  EXPECT_EQ(denominator_bound(MapDescriptor::jacobi_perron(), 3 * std::log(500.0)), 500);
  EXPECT_THROW(denominator_bound(MapDescriptor::gauss(), -1.0), ValidationError);
}

// Oracle: the Gauss points with q <= N are the reduced fractions p/q, 1 <= p < q, q >= 2.
TEST(Enumeration, GaussCountMatchesTotientSum) {
  for (std::int64_t n : {5, 50, 333}) {
    std::uint64_t phi_sum = 0;
    for (std::int64_t q = 2; q <= n; ++q) {
      for (std::int64_t p = 1; p < q; ++p) phi_sum += std::gcd(p, q) == 1;
    }
    EnumerationStats s;
    collect(MapDescriptor::gauss(), 2 * std::log(static_cast<double>(n)), &s);
    EXPECT_EQ(s.records, phi_sum) << n;
  }
}

// Oracle: brute-force triple loop over the coprime (p, r, q) with 1 <= p <= q,
// 0 <= r <= q; each is either emitted or counted unreachable.
TEST(Enumeration, JacobiPerronPartitionOfCoprimeTriples) {
  const auto map = MapDescriptor::jacobi_perron();
  const std::int64_t n = 40;
  std::set<std::vector<std::int64_t>> brute;
  for (std::int64_t q = 1; q <= n; ++q) {
    for (std::int64_t p = 1; p <= q; ++p) {
      for (std::int64_t r = 0; r <= q; ++r) {
        if (std::gcd(std::gcd(p, r), q) == 1) brute.insert({p, r, q});
      }
    }
  }
  EnumerationStats s;
  const auto rows = collect(map, 3 * std::log(static_cast<double>(n)), &s);
  EXPECT_EQ(rows.size() + s.unreachable, brute.size());
  for (const auto& row : rows) EXPECT_TRUE(brute.count(row));
  const std::set<std::vector<std::int64_t>> unique(rows.begin(), rows.end());
  EXPECT_EQ(unique.size(), rows.size());
}

TEST(Enumeration, JacobiPerronSmallBound) {
  const auto rows = collect(MapDescriptor::jacobi_perron(), 3 * std::log(2.0));
  const std::set<std::vector<std::int64_t>> got(rows.begin(), rows.end());
  for (auto t : {std::vector<std::int64_t>{1, 0, 2}, {1, 1, 2}, {1, 2, 2}}) EXPECT_TRUE(got.count(t));
}

// Oracle: every primitive (p1, p2)/q is expanded by the exact forward map and
// kept when the composed homography's denominator at the origin is <= N.
TEST(Enumeration, BrunMatchesForwardMapOracle) {
  const auto map = MapDescriptor::brun(2);
  const std::int64_t n = 30;
  std::set<std::vector<std::int64_t>> oracle;
  for (std::int64_t q = 1; q <= n; ++q) {
    for (std::int64_t a = 1; a <= q; ++a) {
      for (std::int64_t b = 1; b <= q; ++b) {
        if (std::gcd(std::gcd(a, b), q) != 1) continue;
        const auto ds = canonical_digits(map, RationalPoint{{a, b}, q});
        ASSERT_TRUE(ds.has_value());
        const auto v = compose_digits(map, *ds).apply_projective(std::vector<std::int64_t>{0, 0, 1});
        if (v.back() <= n) oracle.insert({a, b, q});
      }
    }
  }
  const auto rows = collect(map, 3 * std::log(static_cast<double>(n)));
  EXPECT_EQ(std::set<std::vector<std::int64_t>>(rows.begin(), rows.end()), oracle);
  EXPECT_EQ(rows.size(), oracle.size());
}

// Property: records reconstruct exactly and carry weight (m+1) log(den) <= Q.
TEST(EnumerationProperty, RecordsRoundTripWithinWeightBound) {
  for (const auto& map : {MapDescriptor::gauss(), MapDescriptor::brun(2), MapDescriptor::brun(3),
                          MapDescriptor::jacobi_perron()}) {
    const double Q = (map.dimension() + 1) * std::log(map.dimension() == 1 ? 400.0 : 25.0);
    std::uint64_t n = 0;
    enumerate_trajectories(map, Q, [&](const TrajectoryRecord& r) {
      ++n;
      auto v = reconstruct_homogeneous(map, r.digits);
      auto expect = r.point.numerators;
      expect.push_back(r.point.denominator);
      EXPECT_EQ(v, expect) << map.name() << " " << to_string(r.point);
      EXPECT_LE(r.weight, Q * (1 + 1e-12));
      EXPECT_NEAR(r.weight, r.weight_coefficient * std::log(static_cast<double>(r.weight_denominator)), 1e-12);
      EXPECT_EQ(r.depth, static_cast<int>(r.digits.size()));
      EXPECT_TRUE(map.terminal_ok(r.digits.back()));
      for (std::size_t k = 1; k < r.digits.size(); ++k) EXPECT_TRUE(map.admissible(r.digits[k - 1], r.digits[k]));
    });
    EXPECT_GT(n, 0u);
  }
}

// Property: the partitioned enumeration concatenates to the sequential one.
TEST(EnumerationProperty, PartitionsReproduceSequentialOrder) {
  for (const auto& map : {MapDescriptor::gauss(), MapDescriptor::jacobi_perron()}) {
    const double Q = (map.dimension() + 1) * std::log(map.dimension() == 1 ? 500.0 : 30.0);
    const auto seq = collect(map, Q);
    const auto n = denominator_bound(map, Q);
    const auto parts = partition_denominators(map, n, 7);
    std::vector<std::vector<std::vector<std::int64_t>>> chunks(parts.size());
    run_partitions(parts.size(), 3, [&](std::size_t k) {
      enumerate_range(map, Q, parts[k], [&](const TrajectoryRecord& r) {
        auto row = r.point.numerators;
        row.push_back(r.point.denominator);
        chunks[k].push_back(row);
      });
    });
    std::vector<std::vector<std::int64_t>> joined;
    for (auto& c : chunks) joined.insert(joined.end(), c.begin(), c.end());
    EXPECT_EQ(joined, seq);
    EXPECT_EQ(parts.front().lo, 1);
    EXPECT_EQ(parts.back().hi, n);
  }
}

TEST(Enumeration, BudgetCheckedBeforeWork) {
  EnumerationOptions o;
  o.budget = 100;
  bool visited = false;
  EXPECT_THROW(enumerate_trajectories(MapDescriptor::gauss(), 2 * std::log(1000.0),
                                      [&](const TrajectoryRecord&) { visited = true; }, o),
               BudgetExceeded);
  EXPECT_FALSE(visited);
}

TEST(Enumeration, CanonicalDigitsRejectsPointsOutsideX) {
  EXPECT_FALSE(canonical_digits(MapDescriptor::gauss(), RationalPoint{{0}, 1}).has_value());
  EXPECT_FALSE(canonical_digits(MapDescriptor::jacobi_perron(), RationalPoint{{0, 1}, 3}).has_value());
  EXPECT_TRUE(canonical_digits(MapDescriptor::gauss(), RationalPoint{{2}, 5}).has_value());
}
