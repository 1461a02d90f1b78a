#include "cfstat/orbitenum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

namespace cfstat {

std::vector<Digit> euclid_digits(std::int64_t p, std::int64_t q) {
  if (!(0 < p && p < q)) throw ValidationError("euclid_digits: need 0 < p < q");
  if (std::gcd(p, q) != 1) throw ValidationError("euclid_digits: gcd(p, q) != 1");
  std::vector<Digit> out;
  while (p != 0) {
    const std::int64_t j = q / p;
    out.push_back(Digit::gauss(j));
    const std::int64_t rem = q - j * p;
    q = p;
    p = rem;
  }
  return out;
}

BrunGcdResult brun_gcd_digits(std::span<const std::int64_t> t) {
  if (t.size() < 2) throw ValidationError("brun_gcd_digits: need at least two entries");
  std::vector<std::int64_t> v(t.begin(), t.end());
  for (auto x : v) {
    if (x < 0) throw ValidationError("brun_gcd_digits: entries must be non-negative");
  }
  if (std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; })) {
    throw ValidationError("brun_gcd_digits: all-zero input");
  }
  BrunGcdResult res;
  auto desc = [](std::int64_t a, std::int64_t b) { return a > b; };
  std::stable_sort(v.begin(), v.end(), desc);
  while (v[1] != 0) {
    const std::int64_t a = v[0] / v[1];
    res.digits.push_back(Digit::brun(0, a));
    v[0] -= a * v[1];
    std::stable_sort(v.begin(), v.end(), desc);
  }
  res.gcd = v[0];
  return res;
}

namespace {

// Depth-first search over the two floor conventions at cell boundaries.
// Homogeneous state (p, r, q) stands for (p/q, r/q) and stays primitive.
bool jp_search(std::int64_t p, std::int64_t r, std::int64_t q, bool need_a_pos, std::vector<Digit>& out,
               int depth) {
  if (depth > 256) return false;
  const std::int64_t b0 = q / p;
  const std::int64_t a0 = r / p;
  std::int64_t bs[2] = {b0, b0 - 1};
  std::int64_t as[2] = {a0, a0 - 1};
  const int nb = (q % p == 0 && b0 - 1 >= 1) ? 2 : 1;
  const int na = (r % p == 0 && r > 0) ? 2 : 1;
  for (int ib = 0; ib < nb; ++ib) {
    const std::int64_t b = bs[ib];
    for (int ia = 0; ia < na; ++ia) {
      const std::int64_t a = as[ia];
      if (a > b || a < 0) continue;
      if (need_a_pos && a < 1) continue;
      const std::int64_t np = r - a * p;  // new xi numerator
      const std::int64_t nr = q - b * p;  // new eta numerator
      if (a == b && np > nr) continue;    // T(I_{a,a}) lies in the closure of P_1
      out.push_back(Digit{Algorithm::jacobi_perron, b, a, 0});
      if (np == 0) {
        if (nr == 0 && b >= 2) return true;
      } else if (jp_search(np, nr, p, a == b, out, depth + 1)) {
        return true;
      }
      out.pop_back();
    }
  }
  return false;
}

bool jp_search_root(std::int64_t p, std::int64_t r, std::int64_t q, std::vector<Digit>& out) {
  out.clear();
  return jp_search(p, r, q, false, out, 0);
}

void check_jp_input(std::int64_t p, std::int64_t r, std::int64_t q) {
  if (q < 1 || p < 0 || r < 0 || p > q || r > q) throw ValidationError("jp_digits: need 0 <= p, r <= q, q >= 1");
  if (std::gcd(std::gcd(p, r), q) != 1) throw ValidationError("jp_digits: gcd(p, r, q) != 1");
  if (p == 0) throw Terminated("jp_digits: xi = 0 is terminal");
}

// Projective action of one inverse branch on a homogeneous integer vector.
void apply_branch_homogeneous(const MapDescriptor& map, const Digit& d, std::int64_t* v, std::int64_t* tmp) {
  const int m = map.dimension();
  switch (map.algorithm()) {
    case Algorithm::gauss: {
      // (x, 1) -> (1, j + x)
      const std::int64_t x = v[0];
      v[0] = v[1];
      v[1] = detail::checked_add(detail::checked_mul(d.j, v[1]), x);
      break;
    }
    case Algorithm::jacobi_perron: {
      // (xi, eta, 1) -> (1, xi + a, b + eta)
      const std::int64_t xi = v[0], eta = v[1], one = v[2];
      v[0] = one;
      v[1] = detail::checked_add(xi, detail::checked_mul(d.a, one));
      v[2] = detail::checked_add(eta, detail::checked_mul(d.j, one));
      break;
    }
    case Algorithm::brun: {
      const int i = d.position;
      const int p = m - i + 1;
      for (int k = 1; k <= m; ++k) {
        if (k == i) {
          tmp[k - 1] = v[m];
        } else if (k > i) {
          tmp[k - 1] = v[k - i - 1];
        } else {
          tmp[k - 1] = v[p + k - 1];
        }
      }
      tmp[m] = detail::checked_add(v[p - 1], detail::checked_mul(d.j, v[m]));
      std::copy(tmp, tmp + m + 1, v);
      break;
    }
  }
}

}  // namespace

std::optional<std::vector<Digit>> try_jp_digits(std::int64_t p, std::int64_t r, std::int64_t q) {
  check_jp_input(p, r, q);
  std::vector<Digit> out;
  if (!jp_search_root(p, r, q, out)) return std::nullopt;
  return out;
}

std::vector<Digit> jp_digits(std::int64_t p, std::int64_t r, std::int64_t q) {
  auto d = try_jp_digits(p, r, q);
  if (!d) {
    throw DomainError("jp_digits: (" + std::to_string(p) + "," + std::to_string(r) + ")/" + std::to_string(q) +
                      " is not reachable from (0,0) by an admissible digit string");
  }
  return *d;
}

std::optional<std::vector<Digit>> canonical_digits(const MapDescriptor& map, const RationalPoint& x) {
  RationalPoint y = x;
  y.normalize();
  if (static_cast<int>(y.numerators.size()) != map.dimension()) {
    throw ValidationError("canonical_digits: dimension mismatch");
  }
  switch (map.algorithm()) {
    case Algorithm::gauss: {
      const auto p = y.numerators[0];
      if (p <= 0 || p >= y.denominator) return std::nullopt;
      return euclid_digits(p, y.denominator);
    }
    case Algorithm::jacobi_perron: {
      if (y.numerators[0] == 0) return std::nullopt;
      return try_jp_digits(y.numerators[0], y.numerators[1], y.denominator);
    }
    case Algorithm::brun: {
      if (y.is_zero()) return std::nullopt;
      std::vector<Digit> out;
      while (!y.is_zero()) {
        auto [next, d] = brun_forward_exact(y);
        out.push_back(d);
        y = std::move(next);
      }
      return out;
    }
  }
  return std::nullopt;
}

std::vector<std::int64_t> reconstruct_homogeneous(const MapDescriptor& map, std::span<const Digit> digits) {
  const auto base = map.base_point_homogeneous();
  const Homography h = compose_digits(map, digits);
  return h.apply_projective(std::span<const std::int64_t>(base));
}

EnumerationStats& EnumerationStats::operator+=(const EnumerationStats& o) {
  records += o.records;
  candidates += o.candidates;
  unreachable += o.unreachable;
  weight_filtered += o.weight_filtered;
  round_trip_failures += o.round_trip_failures;
  return *this;
}

std::int64_t denominator_bound(const MapDescriptor& map, double Q) {
  if (!(Q > 0.0) || !std::isfinite(Q)) throw ValidationError("weight bound Q must be positive and finite");
  const double x = std::exp(Q / static_cast<double>(map.dimension() + 1)) * (1.0 + 1e-12);
  if (x > 9.0e15) throw BudgetExceeded("weight bound Q implies a denominator bound beyond 64-bit range");
  return static_cast<std::int64_t>(std::floor(x));
}

double weight_for_denominator(const MapDescriptor& map, std::int64_t q) {
  return static_cast<double>(map.dimension() + 1) * std::log(static_cast<double>(q));
}

std::uint64_t candidate_count(const MapDescriptor& map, std::int64_t n) {
  // Points examined for denominators up to n: Gauss ~ n^2/2, JP ~ n^3/3, Brun(m) ~ n^{m+1}/(m+1).
  const double dn = static_cast<double>(std::max<std::int64_t>(n, 0));
  double c = 0.0;
  switch (map.algorithm()) {
    case Algorithm::gauss:
      c = dn * dn / 2.0;
      break;
    case Algorithm::jacobi_perron:
      c = dn * dn * dn / 3.0;
      break;
    case Algorithm::brun:
      c = std::pow(dn, map.dimension() + 1) / (map.dimension() + 1);
      break;
  }
  return c > 1.8e19 ? ~0ULL : static_cast<std::uint64_t>(c);
}

void check_budget(const MapDescriptor& map, double Q, const EnumerationOptions& options) {
  const auto n = denominator_bound(map, Q);
  const auto c = candidate_count(map, n);
  if (c > options.budget) {
    throw BudgetExceeded("enumeration of " + map.name() + " up to denominator " + std::to_string(n) + " needs ~" +
                         std::to_string(c) + " candidates, budget is " + std::to_string(options.budget));
  }
}

std::vector<DenominatorRange> partition_denominators(const MapDescriptor& map, std::int64_t n, int parts) {
  std::vector<DenominatorRange> out;
  if (n < 1) return out;
  parts = std::max(1, parts);
  const int exponent = map.algorithm() == Algorithm::gauss ? 2 : map.dimension() + 1;
  std::int64_t lo = 1;
  for (int k = 1; k <= parts && lo <= n; ++k) {
    std::int64_t hi = n;
    if (k < parts) {
      // Work up to q grows like q^exponent; invert the cumulative share.
      const double share = static_cast<double>(k) / parts;
      hi = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * std::pow(share, 1.0 / exponent)));
      hi = std::clamp<std::int64_t>(hi, lo, n);
    }
    out.push_back({lo, hi});
    lo = hi + 1;
  }
  return out;
}

EnumerationStats enumerate_range(const MapDescriptor& map, double Q, DenominatorRange range,
                                 const TrajectoryVisitor& visit, const EnumerationOptions& options) {
  EnumerationStats stats;
  const std::int64_t bound = denominator_bound(map, Q);
  const std::int64_t lo = std::max<std::int64_t>(range.lo, 1);
  const std::int64_t hi = std::min(range.hi, bound);
  const int m = map.dimension();
  const int coeff = m + 1;

  TrajectoryRecord rec;
  rec.point.numerators.assign(static_cast<std::size_t>(m), 0);
  rec.weight_coefficient = coeff;
  std::vector<Digit> digits;
  digits.reserve(128);
  std::vector<std::int64_t> hv(static_cast<std::size_t>(m + 1)), tmp(static_cast<std::size_t>(m + 1));

  auto reconstruct = [&](std::span<const Digit> ds) {
    std::fill(hv.begin(), hv.end(), 0);
    hv.back() = 1;
    for (auto it = ds.rbegin(); it != ds.rend(); ++it) apply_branch_homogeneous(map, *it, hv.data(), tmp.data());
  };

  auto emit = [&](std::int64_t den) {
    rec.point.denominator = den;
    rec.digits = std::span<const Digit>(digits);
    rec.depth = static_cast<int>(digits.size());
    rec.weight_denominator = den;
    rec.weight = coeff * std::log(static_cast<double>(den));
    visit(rec);
    ++stats.records;
  };

  auto verify = [&](std::int64_t den) {
    if (!options.verify_round_trip) return;
    const auto h = reconstruct_homogeneous(map, digits);
    bool ok = h.back() == den;
    for (int k = 0; k < m && ok; ++k) ok = h[static_cast<std::size_t>(k)] == rec.point.numerators[static_cast<std::size_t>(k)];
    if (!ok) ++stats.round_trip_failures;
  };

  switch (map.algorithm()) {
    case Algorithm::gauss: {
      for (std::int64_t q = std::max<std::int64_t>(lo, 2); q <= hi; ++q) {
        for (std::int64_t p = 1; p < q; ++p) {
          ++stats.candidates;
          if (std::gcd(p, q) != 1) continue;
          digits.clear();
          std::int64_t a = p, b = q;
          while (a != 0) {
            const std::int64_t j = b / a;
            digits.push_back(Digit{Algorithm::gauss, j, 0, 0});
            const std::int64_t rem = b - j * a;
            b = a;
            a = rem;
          }
          rec.point.numerators[0] = p;
          verify(q);
          emit(q);
        }
      }
      break;
    }
    case Algorithm::jacobi_perron: {
      for (std::int64_t q = lo; q <= hi; ++q) {
        for (std::int64_t p = 1; p <= q; ++p) {
          const std::int64_t gpq = std::gcd(p, q);
          for (std::int64_t r = 0; r <= q; ++r) {
            ++stats.candidates;
            if (std::gcd(gpq, r) != 1) continue;
            if (!jp_search_root(p, r, q, digits)) {
              ++stats.unreachable;
              continue;
            }
            rec.point.numerators[0] = p;
            rec.point.numerators[1] = r;
            verify(q);
            emit(q);
          }
        }
      }
      break;
    }
    case Algorithm::brun: {
      std::vector<std::int64_t> num(static_cast<std::size_t>(m));
      std::vector<std::int64_t> state(static_cast<std::size_t>(m + 1));
      for (std::int64_t t1 = lo; t1 <= hi; ++t1) {
        std::fill(num.begin(), num.end(), 1);
        while (true) {
          ++stats.candidates;
          std::int64_t g = t1;
          for (auto x : num) g = std::gcd(g, x);
          if (g == 1) {
            // Exact forward Brun map on the primitive homogeneous state.
            digits.clear();
            std::copy(num.begin(), num.end(), state.begin());
            state[static_cast<std::size_t>(m)] = t1;
            while (true) {
              int i = 0;
              for (int k = 1; k < m; ++k) {
                if (state[static_cast<std::size_t>(k)] > state[static_cast<std::size_t>(i)]) i = k;
              }
              const std::int64_t ni = state[static_cast<std::size_t>(i)];
              if (ni == 0) break;
              const std::int64_t d = state[static_cast<std::size_t>(m)];
              const std::int64_t j = d / ni;
              digits.push_back(Digit{Algorithm::brun, j, 0, i + 1});
              std::size_t w = 0;
              for (int k = i + 1; k < m; ++k) tmp[w++] = state[static_cast<std::size_t>(k)];
              tmp[w++] = d - j * ni;
              for (int k = 0; k < i; ++k) tmp[w++] = state[static_cast<std::size_t>(k)];
              tmp[w] = ni;
              std::copy(tmp.begin(), tmp.end(), state.begin());
            }
            // Exact weight from the composed homography at the origin.
            reconstruct(digits);
            const std::int64_t wden = hv.back();
            if (wden > bound) {
              ++stats.weight_filtered;
            } else {
              std::copy(num.begin(), num.end(), rec.point.numerators.begin());
              verify(t1);
              rec.point.denominator = t1;
              rec.digits = std::span<const Digit>(digits);
              rec.depth = static_cast<int>(digits.size());
              rec.weight_denominator = wden;
              rec.weight = coeff * std::log(static_cast<double>(wden));
              visit(rec);
              ++stats.records;
            }
          }
          int k = m - 1;
          while (k >= 0 && num[static_cast<std::size_t>(k)] == t1) {
            num[static_cast<std::size_t>(k)] = 1;
            --k;
          }
          if (k < 0) break;
          ++num[static_cast<std::size_t>(k)];
        }
      }
      break;
    }
  }
  return stats;
}

EnumerationStats enumerate_trajectories(const MapDescriptor& map, double Q, const TrajectoryVisitor& visit,
                                        const EnumerationOptions& options) {
  check_budget(map, Q, options);
  const auto n = denominator_bound(map, Q);
  return enumerate_range(map, Q, DenominatorRange{1, n}, visit, options);
}

void run_partitions(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        // Static round-robin assignment keeps the schedule deterministic.
        for (std::size_t k = w; k < count; k += workers) job(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cfstat
