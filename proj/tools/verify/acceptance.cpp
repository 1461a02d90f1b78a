#include "acceptance.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <tuple>

#include "cfstat/cfmaps.hpp"
#include "cfstat/digitstats.hpp"
#include "cfstat/orbitenum.hpp"
#include "cfstat/spectral.hpp"
#include "cfstat/witnesses.hpp"

namespace cfstat::verify {

namespace {

using Big = boost::multiprecision::checked_int128_t;
using BigHomography = BasicHomography<Big>;

constexpr double kPi = 3.14159265358979323846;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g17(double v) { return fmt("%.6g", v); }

// Expensive inputs shared by several criteria, computed on first use.
struct Context {
  AcceptanceOptions options;
  static constexpr std::int64_t kGaussN = 20000;
  const double QA = 2.0 * std::log(20000.0);
  const double QB = 2.0 * std::log(2000.0);

  std::optional<Ensemble> gauss;
  std::optional<EigenDerivatives> gauss_spectral;
  std::optional<EmpiricalSummary> summary_a;
  std::optional<EmpiricalSummary> summary_b;

  struct JpScan {
    std::uint64_t records = 0;
    std::uint64_t unreachable = 0;
    std::uint64_t violations = 0;
    std::string first_violation;
    std::map<std::int64_t, std::uint64_t> count_upto;  // by denominator bound
  };
  std::optional<JpScan> jp;

  const Ensemble& gauss_ensemble() {
    if (!gauss) {
      const auto map = MapDescriptor::gauss();
      EnumerationOptions eo;
      eo.threads = options.threads;
      gauss = build_ensemble(map, TargetSet::parse(map, "1,2"), QA, eo);
    }
    return *gauss;
  }

  const EigenDerivatives& spectral() {
    if (!gauss_spectral) {
      const auto map = MapDescriptor::gauss();
      OperatorConfig oc;
      oc.grid = 1024;
      oc.jmax = 10000;
      TransferOperator op(map, TargetSet::parse(map, "1,2"), oc);
      gauss_spectral = eigenvalue_derivatives(op);
    }
    return *gauss_spectral;
  }

  const EmpiricalSummary& summary(bool at_a) {
    auto& slot = at_a ? summary_a : summary_b;
    if (!slot) {
      const auto& d = spectral();
      slot = clt_summary(gauss_ensemble(), d.frequencies, at_a ? QA : QB, d.sigma);
    }
    return *slot;
  }

  const JpScan& jp_scan() {
    if (!jp) {
      JpScan s;
      const auto map = MapDescriptor::jacobi_perron();
      std::vector<std::uint64_t> per_q(501, 0);
      EnumerationOptions eo;
      eo.budget = ~0ULL;
      const auto stats = enumerate_range(
          map, 3.0 * std::log(500.0), {1, 500},
          [&](const TrajectoryRecord& r) {
            const auto ds = r.digits;
            bool ok = !ds.empty() && map.terminal_ok(ds.back());
            for (std::size_t k = 1; k < ds.size() && ok; ++k) ok = map.admissible(ds[k - 1], ds[k]);
            if (!ok) {
              if (s.violations == 0) s.first_violation = to_string(r.point);
              ++s.violations;
            }
            ++per_q[static_cast<std::size_t>(r.point.denominator)];
          },
          eo);
      s.records = stats.records;
      s.unreachable = stats.unreachable;
      std::uint64_t acc = 0;
      for (std::int64_t q = 1; q <= 500; ++q) {
        acc += per_q[static_cast<std::size_t>(q)];
        s.count_upto[q] = acc;
      }
      jp = s;
    }
    return *jp;
  }
};

// Independent oracle: sum of Euler's totient over 2..n by sieve.
std::uint64_t totient_sum(std::int64_t n) {
  std::vector<std::int64_t> phi(static_cast<std::size_t>(n + 1));
  std::iota(phi.begin(), phi.end(), 0);
  for (std::int64_t p = 2; p <= n; ++p) {
    if (phi[static_cast<std::size_t>(p)] == p) {
      for (std::int64_t k = p; k <= n; k += p) phi[static_cast<std::size_t>(k)] -= phi[static_cast<std::size_t>(k)] / p;
    }
  }
  std::uint64_t s = 0;
  for (std::int64_t q = 2; q <= n; ++q) s += static_cast<std::uint64_t>(phi[static_cast<std::size_t>(q)]);
  return s;
}

struct RoundTrip {
  std::uint64_t points = 0;
  std::uint64_t failures = 0;
  std::string first_failure;
  double max_weight_gap = 0.0;
};

// Composes the inverse branches in 128-bit checked arithmetic, applies the
// product to the base point, and separately telescopes the forward
// log-Jacobians along the exact orbit.
RoundTrip round_trip(const MapDescriptor& map, std::int64_t n) {
  RoundTrip rt;
  const int m = map.dimension();
  std::map<std::tuple<int, std::int64_t, std::int64_t>, BigHomography> cache;
  auto branch = [&](const Digit& d) -> const BigHomography& {
    const auto key = std::make_tuple(d.position, d.a, d.j);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, inverse_branch(map, d).cast<Big>()).first;
    return it->second;
  };
  std::vector<Big> base(static_cast<std::size_t>(m + 1), Big(0));
  base.back() = Big(1);
  Point p;
  p.coords.resize(static_cast<std::size_t>(m));
  std::vector<std::int64_t> v(static_cast<std::size_t>(m + 1));
  EnumerationOptions eo;
  eo.budget = ~0ULL;
  enumerate_range(
      map, (m + 1) * std::log(static_cast<double>(n)), {1, n},
      [&](const TrajectoryRecord& r) {
        ++rt.points;
        BigHomography h = BigHomography::identity(m);
        for (const auto& d : r.digits) h = h * branch(d);
        const auto img = h.apply_projective(std::span<const Big>(base));
        bool ok = img.back() == Big(r.point.denominator);
        for (int k = 0; k < m && ok; ++k) ok = img[static_cast<std::size_t>(k)] == Big(r.point.numerators[static_cast<std::size_t>(k)]);
        if (!ok && rt.failures++ == 0) rt.first_failure = to_string(r.point);

        // Orbit states T^k x from the tail of the digit string.
        const double hom_weight = (m + 1) * std::log(img.back().convert_to<double>());
        double acc = 0.0;
        std::fill(v.begin(), v.end(), 0);
        v.back() = 1;
        std::vector<std::vector<std::int64_t>> states;
        states.reserve(r.digits.size());
        for (auto it = r.digits.rbegin(); it != r.digits.rend(); ++it) {
          v = inverse_branch(map, *it).apply_projective(std::span<const std::int64_t>(v));
          states.push_back(v);
        }
        for (const auto& st : states) {
          for (int k = 0; k < m; ++k) {
            p.coords[static_cast<std::size_t>(k)] =
                static_cast<double>(st[static_cast<std::size_t>(k)]) / static_cast<double>(st.back());
          }
          acc += forward_log_jacobian(map, p);
        }
        rt.max_weight_gap = std::max({rt.max_weight_gap, std::fabs(acc - r.weight), std::fabs(hom_weight - r.weight)});
      },
      eo);
  return rt;
}

using Runner = std::function<CriterionResult(Context&)>;

struct Criterion {
  std::string id;
  std::string title;
  Runner run;
};

std::vector<Criterion> criteria() {
  std::vector<Criterion> c;
  c.push_back({"A1", "Gauss digit frequency Lambda_1 vs spectral", [](Context& ctx) {
                 CriterionResult r;
                 const double emp = empirical_lambda(ctx.gauss_ensemble(), ctx.QA)[0];
                 const double spec = ctx.spectral().frequencies[0];
                 const double rel = std::fabs(emp - spec) / spec;
                 r.pass = rel < 0.02;
                 r.detail = "empirical " + g17(emp) + " spectral " + g17(spec) + " rel.err " + g17(rel) +
                            " (tol 0.02, #=" + std::to_string(ctx.gauss_ensemble().size(ctx.QA)) + ")";
                 return r;
               }});
  c.push_back({"A2", "Gauss invariant density", [](Context&) {
                 CriterionResult r;
                 const auto map = MapDescriptor::gauss();
                 OperatorConfig oc;
                 oc.grid = 4096;
                 oc.jmax = 10000;
                 TransferOperator op(map, TargetSet::parse(map, "1"), oc);
                 const auto f = invariant_density(op);
                 double err = 0.0;
                 for (int k = 0; k < oc.grid; ++k) {
                   const double x = f.node(k);
                   const double g = 1.0 / (std::log(2.0) * (1.0 + x));
                   err = std::max(err, std::fabs(f.at(0, k) - g) / g);
                 }
                 r.pass = err < 1e-2;
                 r.detail = "relative sup error " + g17(err) + " (tol 1e-2, G=4096, J_max=1e4)";
                 return r;
               }});
  c.push_back({"A3", "Gauss entropy -lambda_s(1,0)", [](Context& ctx) {
                 CriterionResult r;
                 const double h = -ctx.spectral().lambda_s;
                 r.pass = h >= 2.36 && h <= 2.39;
                 r.detail = "-lambda_s " + fmt("%.9f", h) + " in [2.36, 2.39]; pi^2/(6 log 2) = " +
                            fmt("%.9f", kPi * kPi / (6.0 * std::log(2.0)));
                 return r;
               }});
  c.push_back({"A4", "Gauss CLT, KS distance for j=1", [](Context& ctx) {
                 CriterionResult r;
                 const double ka = ctx.summary(true).ks[0];
                 const double kb = ctx.summary(false).ks[0];
                 r.pass = ka < 0.05 && ka < kb;
                 r.detail = "KS at 2log(2e4) " + g17(ka) + " (tol 0.05), at 2log(2e3) " + g17(kb) +
                            ", sigma^2 " + g17(ctx.spectral().sigma(0, 0));
                 return r;
               }});
  c.push_back({"A5", "Gauss large deviations, eps = Lambda_1/2", [](Context& ctx) {
                 CriterionResult r;
                 const double lam = ctx.spectral().frequencies[0];
                 const std::vector<double> grid{11, 13, 15, 17, 19};
                 const auto l = ldp_tail(ctx.gauss_ensemble(), 0, lam, 0.5 * lam, grid);
                 r.pass = l.slope < 0.0 && l.non_increasing;
                 std::string props;
                 for (double p : l.proportion) props += (props.empty() ? "" : ",") + g17(p);
                 r.detail = "slope " + g17(l.slope) + " proportions [" + props + "]" +
                            (l.non_increasing ? " non-increasing" : " NOT non-increasing");
                 return r;
               }});
  c.push_back({"A6", "Brun m=2 invariant density", [](Context&) {
                 CriterionResult r;
                 const auto map = MapDescriptor::brun(2);
                 OperatorConfig oc;
                 oc.grid = 256;
                 oc.jmax = 512;
                 TransferOperator op(map, TargetSet::parse(map, "1"), oc);
                 const auto res = leading_eigenvalue(op, 1.0, {});
                 const int G = oc.grid;
                 auto rho = [](double x, double y) {
                   return 1.0 / ((1 + x) * (1 + x + y)) + 1.0 / ((1 + y) * (1 + x + y));
                 };
                 double sf = 0.0, sr = 0.0;
                 for (int i = 0; i < G; ++i) {
                   for (int j = 0; j < G; ++j) {
                     sf += res.eigenfunction.at(0, i, j);
                     sr += rho((i + 0.5) / G, (j + 0.5) / G);
                   }
                 }
                 double err = 0.0;
                 for (int i = 0; i < G; ++i) {
                   for (int j = 0; j < G; ++j) {
                     const double e = rho((i + 0.5) / G, (j + 0.5) / G) / sr;
                     err = std::max(err, std::fabs(res.eigenfunction.at(0, i, j) / sf - e) / e);
                   }
                 }
                 r.pass = err < 5e-2;
                 r.detail = "relative sup error " + g17(err) + " (tol 5e-2), lambda(1,0) " + fmt("%.9f", res.eigenvalue);
                 return r;
               }});
  c.push_back({"A7", "Jacobi-Perron admissibility, q <= 500", [](Context& ctx) {
                 CriterionResult r;
                 const auto& s = ctx.jp_scan();
                 r.pass = s.violations == 0 && s.records > 0;
                 r.detail = std::to_string(s.records) + " strings, " + std::to_string(s.violations) + " violations" +
                            (s.violations ? " (first " + s.first_violation + ")" : "") + "; " +
                            std::to_string(s.unreachable) + " coprime triples unreachable from (0,0)";
                 return r;
               }});
  auto rt_cache = std::make_shared<std::map<std::string, RoundTrip>>();
  auto rts = [rt_cache]() -> std::map<std::string, RoundTrip>& {
    if (rt_cache->empty()) {
      (*rt_cache)["gauss"] = round_trip(MapDescriptor::gauss(), 5000);
      (*rt_cache)["jp2"] = round_trip(MapDescriptor::jacobi_perron(), 300);
      (*rt_cache)["brun2"] = round_trip(MapDescriptor::brun(2), 300);
    }
    return *rt_cache;
  };
  c.push_back({"A8", "Round-trip exactness", [rts](Context&) {
                 CriterionResult r;
                 r.pass = true;
                 for (const auto& [name, rt] : rts()) {
                   r.pass = r.pass && rt.failures == 0 && rt.points > 0;
                   r.detail += name + " " + std::to_string(rt.points) + " points " + std::to_string(rt.failures) +
                               " failures" + (rt.failures ? " (first " + rt.first_failure + ")" : "") + "; ";
                 }
                 return r;
               }});
  c.push_back({"A9", "Weight telescoping", [rts](Context&) {
                 CriterionResult r;
                 r.pass = true;
                 for (const auto& [name, rt] : rts()) {
                   r.pass = r.pass && rt.max_weight_gap < 1e-9;
                   r.detail += name + " max gap " + g17(rt.max_weight_gap) + "; ";
                 }
                 r.detail += "tol 1e-9";
                 return r;
               }});
  c.push_back({"A10", "Non-arithmeticity witnesses", [](Context&) {
                 CriterionResult r;
                 const auto g = nonarithmeticity_witnesses(MapDescriptor::gauss());
                 const double e1 = std::fabs(g.witness1 + 2.0 * std::log((1.0 + std::sqrt(5.0)) / 2.0));
                 const double e2 = std::fabs(g.witness2 + 2.0 * std::log(1.0 + std::sqrt(2.0)));
                 const auto b = nonarithmeticity_witnesses(MapDescriptor::brun(2));
                 const double t = b.root1, q = b.root2;
                 const double c1 = std::fabs(t * t * t + t - 1.0);
                 const double c2 = std::fabs(q * q * q + 2.0 * q - 1.0);
                 r.pass = e1 < 1e-12 && e2 < 1e-12 && c1 < 1e-12 && c2 < 1e-12;
                 r.detail = "gauss " + fmt("%.10f", g.witness1) + " " + fmt("%.10f", g.witness2) + " (errors " +
                            g17(e1) + ", " + g17(e2) + "); brun tau_2 " + fmt("%.10f", t) + " rho_2 " +
                            fmt("%.10f", q) + " (cubic residuals " + g17(c1) + ", " + g17(c2) + ")";
                 return r;
               }});
  c.push_back({"A11", "Gauss 2-d CLT covariance, targets {1,2}", [](Context& ctx) {
                 CriterionResult r;
                 const auto& emp = ctx.summary(true).covariance;
                 const auto& sig = ctx.spectral().sigma;
                 const double e0 = std::fabs(emp(0, 0) - sig(0, 0)) / sig(0, 0);
                 const double e1 = std::fabs(emp(1, 1) - sig(1, 1)) / sig(1, 1);
                 r.pass = e0 < 0.1 && e1 < 0.1;
                 r.detail = "diag empirical (" + g17(emp(0, 0)) + ", " + g17(emp(1, 1)) + ") spectral (" +
                            g17(sig(0, 0)) + ", " + g17(sig(1, 1)) + ") rel.err (" + g17(e0) + ", " + g17(e1) +
                            ") tol 0.1; off-diagonal empirical " + g17(emp(0, 1)) + " spectral " + g17(sig(0, 1));
                 return r;
               }});
  c.push_back({"A12", "Gauss moments, j=1", [](Context& ctx) {
                 CriterionResult r;
                 double m3 = 0.0, m4 = 0.0;
                 for (const auto& m : ctx.summary(true).moments) {
                   if (m.index == std::vector<int>{3, 0}) m3 = m.value;
                   if (m.index == std::vector<int>{4, 0}) m4 = m.value;
                 }
                 const double s2 = ctx.spectral().sigma(0, 0);
                 const double w4 = 3.0 * s2 * s2;
                 const double rel = std::fabs(m4 - w4) / w4;
                 r.pass = std::fabs(m3) < 0.05 && rel < 0.15;
                 r.detail = "|third| " + g17(std::fabs(m3)) + " (tol 0.05); fourth " + g17(m4) + " vs 3 sigma^4 " +
                            g17(w4) + " rel.err " + g17(rel) + " (tol 0.15)";
                 return r;
               }});
  c.push_back({"A13", "Growth constants", [](Context& ctx) {
                 CriterionResult r;
                 const auto g = growth_constant(ctx.gauss_ensemble(), ctx.QA);
                 const std::uint64_t oracle = totient_sum(Context::kGaussN);
                 const double target = 3.0 / (kPi * kPi);
                 const double grel = std::fabs(g.normalized - target) / target;
                 const bool gauss_ok = g.count == oracle && grel < 0.02;

                 auto brun_ratio = [](std::int64_t n) {
                   const auto map = MapDescriptor::brun(2);
                   const double Q = 3.0 * std::log(static_cast<double>(n));
                   EnumerationOptions eo;
                   const auto st = enumerate_range(map, Q, {1, n}, [](const TrajectoryRecord&) {}, eo);
                   return static_cast<double>(st.records) * std::exp(-Q);
                 };
                 const double b1 = brun_ratio(150), b2 = brun_ratio(300);
                 const double brel = std::fabs(b2 - b1) / b2;
                 const auto& jp = ctx.jp_scan();
                 const double j1 = static_cast<double>(jp.count_upto.at(250)) * std::exp(-3.0 * std::log(250.0));
                 const double j2 = static_cast<double>(jp.count_upto.at(500)) * std::exp(-3.0 * std::log(500.0));
                 const double jrel = std::fabs(j2 - j1) / j2;
                 r.pass = gauss_ok && brel < 0.1 && jrel < 0.1;
                 r.detail = "gauss count " + std::to_string(g.count) + (g.count == oracle ? " = " : " != ") +
                            "totient sum " + std::to_string(oracle) + ", count e^-Q " + g17(g.normalized) +
                            " vs 3/pi^2 rel.err " + g17(grel) + "; brun2 ratio " + g17(b1) + " -> " + g17(b2) +
                            " (rel " + g17(brel) + "); jp2 ratio " + g17(j1) + " -> " + g17(j2) + " (rel " +
                            g17(jrel) + ")";
                 return r;
               }});
  c.push_back({"M", "Markov consistency of branch tables", [](Context& ctx) {
                 CriterionResult r;
                 r.pass = true;
                 struct Case {
                   MapDescriptor map;
                   int grid;
                   std::int64_t jmax;
                 };
                 const std::vector<Case> cases{{MapDescriptor::gauss(), 1024, 10000},
                                               {MapDescriptor::brun(2), 64, 64},
                                               {MapDescriptor::jacobi_perron(), 64, 64}};
                 for (const auto& cs : cases) {
                   BranchTable table(cs.map, cs.jmax, TargetSet{});
                   if (ctx.options.inject_fault) table.inject_fault();
                   OperatorConfig oc;
                   oc.grid = cs.grid;
                   oc.jmax = cs.jmax;
                   try {
                     TransferOperator op(std::move(table), oc);
                     r.detail += cs.map.name() + " ok; ";
                   } catch (const MarkovViolation& e) {
                     r.pass = false;
                     r.detail += cs.map.name() + " violation: " + e.trace() + "; ";
                   }
                 }
                 return r;
               }});
  return c;
}

}  // namespace

std::vector<std::string> criterion_ids() {
  std::vector<std::string> ids;
  for (const auto& c : criteria()) ids.push_back(c.id);
  return ids;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  Context ctx;
  ctx.options = options;
  std::vector<CriterionResult> out;
  for (const auto& c : criteria()) {
    if (!options.only.empty() && !options.only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = c.run(ctx);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.id = c.id;
    r.title = c.title;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS " : "FAIL ") << r.id << "  " << r.title << ": " << r.detail << " [" << fmt("%.1f", r.seconds)
     << "s]";
  return os.str();
}

}  // namespace cfstat::verify
