#include "cfstat/transfer_operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfstat {

double hurwitz_tail(double sigma, double a) {
  if (!(sigma > 1.0)) throw ValidationError("hurwitz_tail: sigma must exceed 1");
  double acc = 0.0;
  while (a < 20.0) {
    acc += std::pow(a, -sigma);
    a += 1.0;
  }
  const double am = std::pow(a, -sigma);
  acc += a * am / (sigma - 1.0) + 0.5 * am + sigma * am / (12.0 * a) -
         sigma * (sigma + 1.0) * (sigma + 2.0) * am / (720.0 * a * a * a);
  return acc;
}

BranchTable::BranchTable(const MapDescriptor& map, std::int64_t jmax, const TargetSet& targets)
    : map_(map), jmax_(jmax) {
  if (jmax < 2) throw ValidationError("branch cap must be >= 2");
  if (targets.size() > 0 && targets.max_digit() > jmax) {
    throw ValidationError("target digit exceeds the branch cap");
  }
  const int m = map.dimension();
  auto push = [&](const Digit& d) {
    BranchEntry e;
    e.digit = d;
    e.h = inverse_branch(map, d);
    e.domain_cell = map.domain_cell(d);
    e.image_cells.resize(static_cast<std::size_t>(map.cell_count()));
    for (int c = 0; c < map.cell_count(); ++c) e.image_cells[static_cast<std::size_t>(c)] = map.image_covers(d, c);
    e.target = targets.size() > 0 ? targets.index_of(d.label()) : -1;
    finalize(e, m);
    entries_.push_back(std::move(e));
  };
  switch (map.algorithm()) {
    case Algorithm::gauss:
      for (std::int64_t j = 1; j <= jmax; ++j) push(Digit::gauss(j));
      break;
    case Algorithm::brun:
      for (int i = 1; i <= m; ++i) {
        for (std::int64_t j = 1; j <= jmax; ++j) push(Digit::brun(i, j));
      }
      break;
    case Algorithm::jacobi_perron:
      for (std::int64_t b = 1; b <= jmax; ++b) {
        for (std::int64_t a = 0; a <= b; ++a) push(Digit::jp(a, b));
      }
      break;
  }
}

void BranchTable::finalize(BranchEntry& e, int m) {
  const int n = m + 1;
  e.coef.resize(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) e.coef[static_cast<std::size_t>(r * n + c)] = static_cast<double>(e.h.at(r, c));
  }
  int nonzero = 0, k = -1;
  for (int c = 0; c < m; ++c) {
    if (e.h.at(m, c) != 0) {
      ++nonzero;
      k = c;
    }
  }
  if (nonzero == 1) {
    e.den_k = k;
    e.den_a = static_cast<double>(e.h.at(m, k));
    e.den_b = static_cast<double>(e.h.at(m, m));
  } else if (nonzero == 0) {
    e.den_k = 0;
    e.den_a = 0.0;
    e.den_b = static_cast<double>(e.h.at(m, m));
  } else {
    e.den_k = -1;
  }
}

void BranchTable::inject_fault() {
  const int m = map_.dimension();
  if (map_.algorithm() == Algorithm::jacobi_perron) {
    for (auto& e : entries_) {
      if (e.digit.a == e.digit.j && e.digit.a >= 1) {
        // Claims T(I_{a,a}) covers P_2 as well.
        std::fill(e.image_cells.begin(), e.image_cells.end(), true);
        return;
      }
    }
  }
  auto& e = entries_.front();
  std::vector<std::int64_t> rows = e.h.entries();
  const int n = m + 1;
  for (int c = 0; c < n; ++c) std::swap(rows[static_cast<std::size_t>(c)], rows[static_cast<std::size_t>(m * n + c)]);
  e.h = Homography::from_rows(m, std::move(rows));
  finalize(e, m);
}

OperatorConfig default_operator_config(const MapDescriptor& map) {
  OperatorConfig c;
  switch (map.algorithm()) {
    case Algorithm::gauss:
      c.jmax = 10000;
      c.grid = 4096;
      break;
    case Algorithm::brun:
      c.jmax = 512;
      c.grid = 256;
      break;
    case Algorithm::jacobi_perron:
      c.jmax = 64;
      c.grid = 128;
      break;
  }
  return c;
}

namespace {

OperatorConfig resolve(const MapDescriptor& map, OperatorConfig c) {
  const auto d = default_operator_config(map);
  if (c.jmax == 0) c.jmax = d.jmax;
  if (c.grid == 0) c.grid = d.grid;
  if (map.dimension() > 2) throw ValidationError("spectral: only dimensions 1 and 2 are supported");
  return c;
}

}  // namespace

TransferOperator::TransferOperator(const MapDescriptor& map, const TargetSet& targets, OperatorConfig config)
    : TransferOperator(BranchTable(map, resolve(map, config).jmax, targets), resolve(map, config)) {
  targets_ = targets.size();
}

TransferOperator::TransferOperator(BranchTable table, OperatorConfig config)
    : table_(std::move(table)), config_(resolve(table_.map(), config)) {
  config_.jmax = table_.jmax();
  for (const auto& e : table_.entries()) targets_ = std::max<std::size_t>(targets_, static_cast<std::size_t>(e.target + 1));
  if (config_.check_markov) check_markov();
}

GridFunction TransferOperator::make_function(double fill) const {
  return GridFunction(map().dimension(), config_.grid, map().cell_count(), fill);
}

bool TransferOperator::node_in_cell(int c, std::size_t node) const {
  if (map().algorithm() != Algorithm::jacobi_perron) return true;
  const auto G = static_cast<std::size_t>(config_.grid);
  const std::size_t i = node / G;  // xi index
  const std::size_t j = node % G;  // eta index
  if (i == j) return true;         // diagonal nodes belong to both closures
  return c == 0 ? i < j : i > j;
}

void TransferOperator::build_weights(double s) const {
  if (s == cached_s_) return;
  const int G = config_.grid;
  const double expo = -static_cast<double>(map().dimension() + 1) * s;
  const auto& es = table_.entries();
  weights_.assign(es.size() * static_cast<std::size_t>(G), 0.0);
  for (std::size_t b = 0; b < es.size(); ++b) {
    const auto& e = es[b];
    if (e.den_k < 0) continue;
    for (int k = 0; k < G; ++k) {
      const double x = (k + 0.5) / G;
      weights_[b * static_cast<std::size_t>(G) + static_cast<std::size_t>(k)] =
          std::pow(std::fabs(e.den_a * x + e.den_b), expo);
    }
  }
  cached_s_ = s;
}

double TransferOperator::apply(const GridFunction& f, double s, std::span<const double> t, GridFunction& out) const {
  if (t.size() != targets_ && !(t.empty())) throw ValidationError("transfer operator: t has wrong length");
  const int m = map().dimension();
  const int G = config_.grid;
  const auto Gs = static_cast<std::size_t>(G);
  if (f.resolution() != G || f.cells() != map().cell_count()) throw ValidationError("transfer operator: grid mismatch");
  if (out.resolution() != G || out.cells() != f.cells()) out = make_function();
  build_weights(s);
  const auto& es = table_.entries();
  std::vector<double> factor(es.size(), 1.0);
  if (!t.empty()) {
    for (std::size_t b = 0; b < es.size(); ++b) {
      if (es[b].target >= 0) factor[b] = std::exp(t[static_cast<std::size_t>(es[b].target)]);
    }
  }
  const double expo = -static_cast<double>(m + 1) * s;
  const double J = static_cast<double>(config_.jmax);
  const bool fold = config_.tail == TailTreatment::leading_order;
  double bar = 0.0;

  if (m == 1) {
    const double* fv = f.cell(0).data();
    double* ov = out.cell(0).data();
    const double f0 = f.interpolate(0, 0.0);
    double slope = 0.0;
    for (int k = 0; k + 1 < G; ++k) slope = std::max(slope, std::fabs(fv[k + 1] - fv[k]) * G);
    std::fill(ov, ov + G, 0.0);
    for (std::size_t b = 0; b < es.size(); ++b) {
      const auto& e = es[b];
      const double* c = e.coef.data();
      const double* w = weights_.data() + b * Gs;
      const double fac = factor[b];
      for (int k = 0; k < G; ++k) {
        const double x = (k + 0.5) / G;
        const double den = c[2] * x + c[3];
        const double y = (c[0] * x + c[1]) / den;
        int i;
        double fr;
        grid_locate(y, G, i, fr);
        const double val = fv[i] + fr * (fv[i + 1] - fv[i]);
        const double wt = e.den_k >= 0 ? w[k] : std::pow(std::fabs(den), expo);
        ov[k] += fac * wt * val;
      }
    }
    for (int k = 0; k < G; ++k) {
      const double x = (k + 0.5) / G;
      const double lead = f0 * hurwitz_tail(2.0 * s, J + 1.0 + x);
      if (fold) {
        ov[k] += lead;
        bar = std::max(bar, slope * hurwitz_tail(2.0 * s + 1.0, J + 1.0 + x));
      } else {
        bar = std::max(bar, std::fabs(lead));
      }
    }
    return bar;
  }

  // m == 2
  const int cells = map().cell_count();
  const bool jp = map().algorithm() == Algorithm::jacobi_perron;
  double fsup = 0.0;
  for (double v : f.raw()) fsup = std::max(fsup, std::fabs(v));
  for (int c = 0; c < cells; ++c) {
    double* ov = out.cell(c).data();
    std::fill(ov, ov + Gs * Gs, 0.0);
    for (std::size_t b = 0; b < es.size(); ++b) {
      const auto& e = es[b];
      if (!e.image_cells[static_cast<std::size_t>(c)]) continue;
      const double* cf = e.coef.data();
      const double* w = weights_.data() + b * Gs;
      const double fac = factor[b];
      const int dc = e.domain_cell;
      const double* fv = f.cell(dc).data();
      for (int i = 0; i < G; ++i) {
        const double x0 = (i + 0.5) / G;
        for (int j = 0; j < G; ++j) {
          const double x1 = (j + 0.5) / G;
          const double den = cf[6] * x0 + cf[7] * x1 + cf[8];
          const double inv = 1.0 / den;
          const double y0 = (cf[0] * x0 + cf[1] * x1 + cf[2]) * inv;
          const double y1 = (cf[3] * x0 + cf[4] * x1 + cf[5]) * inv;
          int ii, jj;
          double fx, fy;
          grid_locate(y0, G, ii, fx);
          grid_locate(y1, G, jj, fy);
          const double* r0 = fv + static_cast<std::size_t>(ii) * Gs;
          const double* r1 = r0 + Gs;
          const double a0 = r0[jj] + fy * (r0[jj + 1] - r0[jj]);
          const double a1 = r1[jj] + fy * (r1[jj + 1] - r1[jj]);
          const double val = a0 + fx * (a1 - a0);
          double wt;
          if (e.den_k == 0) {
            wt = w[i];
          } else if (e.den_k == 1) {
            wt = w[j];
          } else {
            wt = std::pow(std::fabs(den), expo);
          }
          ov[static_cast<std::size_t>(i) * Gs + static_cast<std::size_t>(j)] += fac * wt * val;
        }
      }
    }
    // Tail of the branch sum beyond the cap.
    if (!jp) {
      const double f00 = f.interpolate(0, 0.0, 0.0);
      for (int i = 0; i < G; ++i) {
        const double x0 = (i + 0.5) / G;
        for (int j = 0; j < G; ++j) {
          const double x1 = (j + 0.5) / G;
          // Branch (1, j) divides by j + x_2, branch (2, j) by j + x_1.
          const double lead = f00 * (hurwitz_tail(3.0 * s, J + 1.0 + x1) + hurwitz_tail(3.0 * s, J + 1.0 + x0));
          if (fold) {
            ov[static_cast<std::size_t>(i) * Gs + static_cast<std::size_t>(j)] += lead;
            bar = std::max(bar, fsup * (hurwitz_tail(3.0 * s + 1.0, J + 1.0 + x1) +
                                        hurwitz_tail(3.0 * s + 1.0, J + 1.0 + x0)) * 4.0);
          } else {
            bar = std::max(bar, std::fabs(lead));
          }
        }
      }
    } else {
      // Images of the digits b > cap approach xi = 0 with eta spread evenly, so
      // the inner a-sum is (b + eta) times the mean of f_{P_1} on xi = 0.
      double F = 0.0;
      for (int j = 0; j < G; ++j) F += f.interpolate(0, 0.0, (j + 0.5) / G);
      F /= G;
      for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
          const double x1 = (j + 0.5) / G;
          const double lead = F * hurwitz_tail(3.0 * s - 1.0, J + 1.0 + x1);
          if (fold) {
            ov[static_cast<std::size_t>(i) * Gs + static_cast<std::size_t>(j)] += lead;
            bar = std::max(bar, 2.0 * fsup * hurwitz_tail(3.0 * s, J + 1.0 + x1));
          } else {
            bar = std::max(bar, std::fabs(lead));
          }
        }
      }
    }
  }
  return bar;
}

void TransferOperator::check_markov() const {
  const int m = map().dimension();
  const int G = config_.grid;
  const auto& es = table_.entries();
  const double tol = 1e-12;
  const double half = 0.5 / G;
  const auto& mp = map();
  for (int c = 0; c < mp.cell_count(); ++c) {
    const std::size_t n = m == 1 ? static_cast<std::size_t>(G) : static_cast<std::size_t>(G) * G;
    for (std::size_t node = 0; node < n; ++node) {
      if (!node_in_cell(c, node)) continue;
      std::vector<double> x(static_cast<std::size_t>(m));
      if (m == 1) {
        x[0] = (static_cast<double>(node) + 0.5) / G;
      } else {
        x[0] = (static_cast<double>(node / static_cast<std::size_t>(G)) + 0.5) / G;
        x[1] = (static_cast<double>(node % static_cast<std::size_t>(G)) + 0.5) / G;
        if (mp.algorithm() == Algorithm::jacobi_perron && node / G == node % G) {
          // Diagonal node: move inward by half a node spacing.
          x[0] += c == 0 ? -half : half;
        }
      }
      for (const auto& e : es) {
        if (!e.image_cells[static_cast<std::size_t>(c)]) continue;
        const double* cf = e.coef.data();
        const int n1 = m + 1;
        double den = cf[m * n1 + m];
        for (int k = 0; k < m; ++k) den += cf[m * n1 + k] * x[static_cast<std::size_t>(k)];
        bool ok = den > 0.0;
        double y[2] = {0.0, 0.0};
        if (ok) {
          for (int r = 0; r < m; ++r) {
            double acc = cf[r * n1 + m];
            for (int k = 0; k < m; ++k) acc += cf[r * n1 + k] * x[static_cast<std::size_t>(k)];
            y[r] = acc / den;
            ok = ok && y[r] >= -tol && y[r] <= 1.0 + tol;
          }
        }
        if (ok && mp.algorithm() == Algorithm::jacobi_perron) {
          ok = e.domain_cell == 0 ? y[0] <= y[1] + tol : y[0] >= y[1] - tol;
        }
        if (ok && mp.algorithm() == Algorithm::brun) {
          const double yi = y[e.digit.position - 1];
          for (int k = 0; k < m; ++k) ok = ok && yi >= y[k] - tol;
        }
        if (!ok) {
          std::ostringstream os;
          os.precision(17);
          os << mp.name() << " cell " << c << " node (";
          for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
          os << ") branch " << to_string(e.digit) << " " << to_string(e.h) << " -> ";
          if (!(den > 0.0)) {
            os << "denominator " << den;
          } else {
            os << "(";
            for (int k = 0; k < m; ++k) os << (k ? ", " : "") << y[k];
            os << ")";
          }
          os << " outside domain cell " << e.domain_cell;
          throw MarkovViolation(os.str());
        }
      }
    }
  }
}

}  // namespace cfstat
