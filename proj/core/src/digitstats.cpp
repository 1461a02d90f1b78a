#include "cfstat/digitstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cfstat/summation.hpp"

namespace cfstat {

bool cholesky_ok(const Matrix& m, double floor) {
  const std::size_t n = m.n;
  std::vector<double> L(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
    if (d < floor) return false;
    const double ljj = d > 0.0 ? std::sqrt(d) : 0.0;
    L[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
      L[i * n + j] = ljj > 0.0 ? s / ljj : 0.0;
    }
  }
  return true;
}

Ensemble::Ensemble(MapDescriptor map, TargetSet targets, double Q)
    : map_(std::move(map)), targets_(std::move(targets)), Q_(Q) {}

double Ensemble::weight(std::size_t k) const { return weight_for_denominator(map_, den_[k]); }

std::size_t Ensemble::prefix(double Q) const {
  if (Q > Q_ * (1.0 + 1e-12)) throw ValidationError("statistic requested above the ensemble's weight bound");
  const std::int64_t bound = denominator_bound(map_, Q);
  return static_cast<std::size_t>(std::upper_bound(den_.begin(), den_.end(), bound) - den_.begin());
}

std::uint64_t Ensemble::size(double Q) const {
  const std::size_t end = prefix(Q);
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < end; ++k) s += mult_[k];
  return s;
}

void Ensemble::append_atom(std::int64_t den, std::span<const std::int32_t> counts, std::uint64_t mult) {
  if (counts.size() != dimension()) throw ValidationError("append_atom: count vector has wrong length");
  den_.push_back(den);
  counts_.insert(counts_.end(), counts.begin(), counts.end());
  mult_.push_back(mult);
}

void Ensemble::append(const Ensemble& tail) {
  den_.insert(den_.end(), tail.den_.begin(), tail.den_.end());
  counts_.insert(counts_.end(), tail.counts_.begin(), tail.counts_.end());
  mult_.insert(mult_.end(), tail.mult_.begin(), tail.mult_.end());
  stats_ += tail.stats_;
  depth_violations_ += tail.depth_violations_;
}

namespace {

// Groups the records of one denominator by count vector.
class AtomAccumulator {
 public:
  explicit AtomAccumulator(std::size_t d) : d_(d), packed_(d <= 4), table_(kSlots) {}

  void add(std::span<const std::int32_t> c) {
    if (packed_) {
      std::uint64_t key = 0;
      bool fits = true;
      for (auto v : c) {
        if (v >= 0xFFFF) fits = false;
        key = (key << 16) | static_cast<std::uint64_t>(v);
      }
      if (fits && used_.size() < kSlots / 2) {
        insert_packed(key);
        return;
      }
      spill();
    }
    ++general_[std::vector<std::int32_t>(c.begin(), c.end())];
  }

  void flush(std::int64_t den, Ensemble& out) {
    if (packed_) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> items;
      items.reserve(used_.size());
      for (auto s : used_) items.emplace_back(table_[s].key, table_[s].count);
      std::sort(items.begin(), items.end());
      std::vector<std::int32_t> c(d_);
      for (const auto& [key, count] : items) {
        std::uint64_t k = key;
        for (std::size_t i = d_; i-- > 0;) {
          c[i] = static_cast<std::int32_t>(k & 0xFFFF);
          k >>= 16;
        }
        out.append_atom(den, c, count);
      }
      for (auto s : used_) table_[s] = Slot{};
      used_.clear();
    } else {
      for (const auto& [c, count] : general_) out.append_atom(den, c, count);
      general_.clear();
      packed_ = d_ <= 4;
    }
  }

 private:
  static constexpr std::size_t kSlots = 4096;
  struct Slot {
    std::uint64_t key = 0;
    std::uint64_t count = 0;
  };

  void insert_packed(std::uint64_t key) {
    std::size_t s = static_cast<std::size_t>((key * 0x9E3779B97F4A7C15ULL) >> 52) & (kSlots - 1);
    while (table_[s].count != 0 && table_[s].key != key) s = (s + 1) & (kSlots - 1);
    if (table_[s].count == 0) {
      table_[s].key = key;
      used_.push_back(s);
    }
    ++table_[s].count;
  }

  // Moves packed entries into the general map (rare: huge counts or many keys).
  void spill() {
    std::vector<std::int32_t> c(d_);
    for (auto s : used_) {
      std::uint64_t k = table_[s].key;
      for (std::size_t i = d_; i-- > 0;) {
        c[i] = static_cast<std::int32_t>(k & 0xFFFF);
        k >>= 16;
      }
      general_[c] += table_[s].count;
      table_[s] = Slot{};
    }
    used_.clear();
    packed_ = false;
  }

  std::size_t d_;
  bool packed_;
  std::vector<Slot> table_;
  std::vector<std::size_t> used_;
  std::map<std::vector<std::int32_t>, std::uint64_t> general_;
};

// Sorts atoms by (denominator, counts) and merges duplicates.
Ensemble canonicalize(const Ensemble& in) {
  const std::size_t n = in.atom_count();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    if (in.denominator(a) != in.denominator(b)) return in.denominator(a) < in.denominator(b);
    const auto ca = in.counts(a);
    const auto cb = in.counts(b);
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  };
  bool sorted = true;
  for (std::size_t k = 1; k < n && sorted; ++k) sorted = less(idx[k - 1], idx[k]);
  if (sorted) return in;
  std::stable_sort(idx.begin(), idx.end(), less);
  Ensemble out(in.map(), in.targets(), in.bound());
  out.add_stats(in.stats());
  out.add_depth_violations(in.depth_violations());
  std::size_t k = 0;
  while (k < n) {
    std::size_t e = k + 1;
    std::uint64_t m = in.multiplicity(idx[k]);
    while (e < n && !less(idx[k], idx[e]) && !less(idx[e], idx[k])) m += in.multiplicity(idx[e++]);
    out.append_atom(in.denominator(idx[k]), in.counts(idx[k]), m);
    k = e;
  }
  return out;
}

}  // namespace

Ensemble build_ensemble(const MapDescriptor& map, const TargetSet& targets, double Q,
                        const EnumerationOptions& options) {
  check_budget(map, Q, options);
  const std::int64_t n = denominator_bound(map, Q);
  const auto ranges = partition_denominators(map, n, options.partitions);
  std::vector<Ensemble> parts(ranges.size(), Ensemble(map, targets, Q));
  const std::size_t d = targets.size();

  run_partitions(ranges.size(), options.threads, [&](std::size_t p) {
    Ensemble& part = parts[p];
    AtomAccumulator acc(d);
    std::vector<std::int32_t> c(d);
    std::int64_t current = -1;
    std::uint64_t violations = 0;
    const auto stats = enumerate_range(
        map, Q, ranges[p],
        [&](const TrajectoryRecord& r) {
          if (r.weight_denominator != current) {
            if (current >= 0) acc.flush(current, part);
            current = r.weight_denominator;
          }
          count_digits_into(r.digits, targets, c);
          std::int64_t total = 0;
          for (auto v : c) total += v;
          if (total > r.depth) ++violations;
          acc.add(c);
        },
        options);
    if (current >= 0) acc.flush(current, part);
    part.add_stats(stats);
    part.add_depth_violations(violations);
  });

  Ensemble out(map, targets, Q);
  for (const auto& p : parts) out.append(p);
  return canonicalize(out);
}

std::vector<double> centre(std::span<const std::int64_t> counts, double w, std::span<const double> lambda) {
  if (counts.size() != lambda.size()) throw ValidationError("centre: dimension mismatch");
  std::vector<double> out(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) out[k] = static_cast<double>(counts[k]) - w * lambda[k];
  return out;
}

std::vector<double> empirical_lambda(const Ensemble& e, double Q) {
  const std::size_t end = e.prefix(Q);
  const std::size_t d = e.dimension();
  std::vector<std::uint64_t> sums(d, 0);
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < end; ++k) {
    const auto c = e.counts(k);
    const auto m = e.multiplicity(k);
    for (std::size_t i = 0; i < d; ++i) sums[i] += static_cast<std::uint64_t>(c[i]) * m;
    total += m;
  }
  if (total == 0) throw ValidationError("empirical_lambda: empty ensemble");
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = static_cast<double>(sums[i]) / (Q * static_cast<double>(total));
  return out;
}

GrowthResult growth_constant(const Ensemble& e, double Q) {
  GrowthResult g;
  g.count = e.size(Q);
  g.normalized = static_cast<double>(g.count) * std::exp(-Q);
  return g;
}

double normal_cdf(double x, double sigma) {
  if (sigma <= 0.0) return x < 0.0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0)));
}

double ks_distance(std::span<const double> values, std::span<const double> weights,
                   const std::function<double(double)>& cdf) {
  if (values.size() != weights.size()) throw ValidationError("ks_distance: size mismatch");
  const std::size_t n = values.size();
  if (n == 0) throw ValidationError("ks_distance: empty sample");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  KahanSum total;
  for (auto w : weights) total.add(w);
  const double W = total.value();
  KahanSum cum;
  double dmax = 0.0;
  std::size_t k = 0;
  while (k < n) {
    const double x = values[idx[k]];
    const double before = cum.value() / W;
    while (k < n && values[idx[k]] == x) cum.add(weights[idx[k++]]);
    const double after = cum.value() / W;
    const double F = cdf(x);
    dmax = std::max({dmax, std::fabs(F - before), std::fabs(after - F)});
  }
  return dmax;
}

double ks_distance_normal(std::span<const double> values, std::span<const double> weights, double sigma) {
  return ks_distance(values, weights, [sigma](double x) { return normal_cdf(x, sigma); });
}

CentredSample centred_sample(const Ensemble& e, std::span<const double> lambda, double Q) {
  const std::size_t d = e.dimension();
  if (lambda.size() != d) throw ValidationError("centred_sample: lambda has wrong length");
  const std::size_t end = e.prefix(Q);
  CentredSample s;
  s.d = d;
  s.values.resize(end * d);
  s.weights.resize(end);
  const double rq = 1.0 / std::sqrt(Q);
  KahanSum tw;
  for (std::size_t k = 0; k < end; ++k) {
    const double w = e.weight(k);
    const auto c = e.counts(k);
    for (std::size_t i = 0; i < d; ++i) s.values[k * d + i] = (static_cast<double>(c[i]) - w * lambda[i]) * rq;
    s.weights[k] = static_cast<double>(e.multiplicity(k));
    tw.add(s.weights[k]);
  }
  s.total_weight = tw.value();
  return s;
}

Matrix empirical_covariance(const CentredSample& s) {
  const std::size_t d = s.d;
  Matrix c(d);
  const std::size_t n = s.weights.size();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = i; k < d; ++k) {
      KahanSum acc;
      for (std::size_t a = 0; a < n; ++a) acc.add(s.weights[a] * s.values[a * d + i] * s.values[a * d + k]);
      c(i, k) = c(k, i) = s.total_weight > 0 ? acc.value() / s.total_weight : 0.0;
    }
  }
  return c;
}

double wick_moment(std::span<const int> index, const Matrix& c) {
  std::vector<std::size_t> items;
  for (std::size_t i = 0; i < index.size(); ++i) {
    for (int r = 0; r < index[i]; ++r) items.push_back(i);
  }
  if (items.size() % 2 == 1) return 0.0;
  // Sum over perfect matchings, recursively pairing the first free item.
  std::function<double(std::vector<std::size_t>&)> rec = [&](std::vector<std::size_t>& rest) -> double {
    if (rest.empty()) return 1.0;
    const std::size_t first = rest.front();
    double total = 0.0;
    for (std::size_t k = 1; k < rest.size(); ++k) {
      std::vector<std::size_t> sub;
      sub.reserve(rest.size() - 2);
      for (std::size_t r = 1; r < rest.size(); ++r) {
        if (r != k) sub.push_back(rest[r]);
      }
      total += c(first, rest[k]) * rec(sub);
    }
    return total;
  };
  return rec(items);
}

namespace {

void multi_indices(std::size_t d, int order, std::vector<int>& cur, std::size_t pos, std::vector<std::vector<int>>& out) {
  if (pos + 1 == d) {
    cur[pos] = order;
    out.push_back(cur);
    return;
  }
  for (int k = order; k >= 0; --k) {
    cur[pos] = k;
    multi_indices(d, order - k, cur, pos + 1, out);
  }
}

}  // namespace

std::vector<MomentEntry> moment_table(const CentredSample& s, const Matrix& reference, int max_order) {
  const std::size_t d = s.d;
  const std::size_t n = s.weights.size();
  std::vector<MomentEntry> out;
  for (int order = 1; order <= max_order; ++order) {
    std::vector<std::vector<int>> idx;
    std::vector<int> cur(d, 0);
    multi_indices(d, order, cur, 0, idx);
    for (const auto& p : idx) {
      KahanSum acc;
      for (std::size_t a = 0; a < n; ++a) {
        double prod = s.weights[a];
        for (std::size_t i = 0; i < d; ++i) {
          for (int r = 0; r < p[i]; ++r) prod *= s.values[a * d + i];
        }
        acc.add(prod);
      }
      MomentEntry m;
      m.index = p;
      m.value = s.total_weight > 0 ? acc.value() / s.total_weight : 0.0;
      m.wick = wick_moment(p, reference);
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::vector<MomentEntry> moment_table(const Ensemble& e, std::span<const double> lambda, double Q, int max_order) {
  const auto s = centred_sample(e, lambda, Q);
  return moment_table(s, empirical_covariance(s), max_order);
}

EmpiricalSummary clt_summary(const Ensemble& e, std::span<const double> lambda, double Q,
                             const std::optional<Matrix>& reference_sigma, int bins) {
  if (bins < 1) throw ValidationError("clt_summary: bins must be positive");
  const std::size_t d = e.dimension();
  if (reference_sigma && reference_sigma->n != d) throw ValidationError("clt_summary: reference covariance size");
  EmpiricalSummary out;
  out.Q = Q;
  out.size = e.size(Q);
  out.low_confidence = out.size < 100;
  if (out.size == 0) throw ValidationError("clt_summary: empty ensemble");
  out.mean_count_over_Q = empirical_lambda(e, Q);
  const auto s = centred_sample(e, lambda, Q);
  out.covariance = empirical_covariance(s);
  const Matrix& ref = reference_sigma ? *reference_sigma : out.covariance;
  out.mean_phi.assign(d, 0.0);
  const std::size_t n = s.weights.size();
  for (std::size_t i = 0; i < d; ++i) {
    KahanSum acc;
    for (std::size_t a = 0; a < n; ++a) acc.add(s.weights[a] * s.values[a * d + i]);
    out.mean_phi[i] = acc.value() / s.total_weight;
  }
  std::vector<double> marginal(n);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t a = 0; a < n; ++a) marginal[a] = s.values[a * d + i];
    const double var = ref(i, i);
    const double sigma = std::sqrt(std::max(var, 0.0));
    out.ks_sigma2.push_back(var);
    out.ks.push_back(ks_distance_normal(marginal, s.weights, sigma));
    Histogram h;
    const double scale = sigma > 0.0 ? sigma : 1.0;
    h.lo = -5.0 * scale;
    h.hi = 5.0 * scale;
    h.counts.assign(static_cast<std::size_t>(bins), 0.0);
    const double width = (h.hi - h.lo) / bins;
    for (std::size_t a = 0; a < n; ++a) {
      const double x = marginal[a];
      if (x < h.lo) {
        h.underflow += s.weights[a];
      } else if (x >= h.hi) {
        h.overflow += s.weights[a];
      } else {
        auto b = static_cast<std::size_t>((x - h.lo) / width);
        b = std::min(b, static_cast<std::size_t>(bins - 1));
        h.counts[b] += s.weights[a];
      }
    }
    out.histograms.push_back(std::move(h));
  }
  out.moments = moment_table(s, ref, 4);
  return out;
}

LdpResult ldp_tail(const Ensemble& e, std::size_t target, double lambda_j, double eps,
                   std::span<const double> q_grid) {
  if (target >= e.dimension()) throw ValidationError("ldp_tail: target index out of range");
  if (!(eps > 0.0)) throw ValidationError("ldp_tail: epsilon must be positive");
  if (q_grid.size() < 2) throw ValidationError("ldp_tail: Q-grid needs at least two points");
  for (std::size_t k = 1; k < q_grid.size(); ++k) {
    if (!(q_grid[k] > q_grid[k - 1])) throw ValidationError("ldp_tail: Q-grid must be increasing");
  }
  LdpResult r;
  for (double Q : q_grid) {
    const std::size_t end = e.prefix(Q);
    std::uint64_t dev = 0, total = 0;
    for (std::size_t k = 0; k < end; ++k) {
      const double f = static_cast<double>(e.counts(k)[target]) / Q;
      total += e.multiplicity(k);
      if (std::fabs(f - lambda_j) > eps) dev += e.multiplicity(k);
    }
    const double p = total ? static_cast<double>(dev) / static_cast<double>(total) : 0.0;
    r.Q.push_back(Q);
    r.proportion.push_back(p);
    r.log_proportion.push_back(p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity());
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < r.Q.size(); ++k) {
    if (!std::isfinite(r.log_proportion[k])) continue;
    sx += r.Q[k];
    sy += r.log_proportion[k];
    sxx += r.Q[k] * r.Q[k];
    sxy += r.Q[k] * r.log_proportion[k];
    ++n;
  }
  r.fitted_points = n;
  const double den = n * sxx - sx * sx;
  r.slope = (n >= 2 && den != 0.0) ? (n * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
  r.non_increasing = true;
  for (std::size_t k = 1; k < r.proportion.size(); ++k) {
    if (r.proportion[k] > r.proportion[k - 1]) r.non_increasing = false;
  }
  return r;
}

DirichletSum dirichlet_partial_sum(const Ensemble& e, double s, std::span<const double> t, double Q) {
  if (t.size() != e.dimension()) throw ValidationError("dirichlet_partial_sum: t has wrong length");
  const std::size_t end = e.prefix(Q);
  LogSumExp lse;
  for (std::size_t k = 0; k < end; ++k) {
    const auto c = e.counts(k);
    double term = std::log(static_cast<double>(e.multiplicity(k))) - s * e.weight(k);
    for (std::size_t i = 0; i < t.size(); ++i) term += t[i] * c[i];
    lse.add(term);
  }
  DirichletSum out;
  out.log_value = lse.value();
  out.value = std::exp(out.log_value);
  return out;
}

}  // namespace cfstat
