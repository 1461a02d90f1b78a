#include "cfstat/cfmaps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cfstat {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gauss:
      return "gauss";
    case Algorithm::brun:
      return "brun";
    case Algorithm::jacobi_perron:
      return "jp";
  }
  return "?";
}

std::string to_string(const DigitLabel& label) {
  if (label.a < 0) return std::to_string(label.b);
  return std::to_string(label.a) + ":" + std::to_string(label.b);
}

Digit Digit::gauss(std::int64_t j) {
  if (j < 1) throw ValidationError("gauss digit must be >= 1");
  return Digit{Algorithm::gauss, j, 0, 0};
}

Digit Digit::brun(int position, std::int64_t j) {
  if (j < 1) throw ValidationError("brun digit must be >= 1");
  if (position < 0) throw ValidationError("brun max-position must be >= 1");
  return Digit{Algorithm::brun, j, 0, position};
}

Digit Digit::jp(std::int64_t a, std::int64_t b) {
  if (b < 1 || a < 0 || a > b) throw ValidationError("jp digit requires 0 <= a <= b, b >= 1");
  return Digit{Algorithm::jacobi_perron, b, a, 0};
}

DigitLabel Digit::label() const noexcept {
  if (algorithm == Algorithm::jacobi_perron) return DigitLabel{a, j};
  return DigitLabel{-1, j};
}

std::string to_string(const Digit& d) {
  switch (d.algorithm) {
    case Algorithm::gauss:
      return std::to_string(d.j);
    case Algorithm::brun:
      return "(" + std::to_string(d.position) + "," + std::to_string(d.j) + ")";
    case Algorithm::jacobi_perron:
      return "(" + std::to_string(d.a) + "," + std::to_string(d.j) + ")";
  }
  return "?";
}

void RationalPoint::normalize() {
  if (denominator <= 0) throw ValidationError("rational point: denominator must be positive");
  std::int64_t g = denominator;
  for (auto n : numerators) g = std::gcd(g, n);
  if (g > 1) {
    denominator /= g;
    for (auto& n : numerators) n /= g;
  }
}

bool RationalPoint::is_zero() const noexcept {
  return std::all_of(numerators.begin(), numerators.end(), [](std::int64_t n) { return n == 0; });
}

Point RationalPoint::to_point() const {
  Point p;
  p.coords.reserve(numerators.size());
  for (auto n : numerators) p.coords.push_back(static_cast<double>(n) / static_cast<double>(denominator));
  return p;
}

std::string to_string(const RationalPoint& p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < p.numerators.size(); ++k) {
    if (k) os << ", ";
    os << p.numerators[k] << "/" << p.denominator;
  }
  os << ")";
  return os.str();
}

MapDescriptor MapDescriptor::gauss() { return MapDescriptor(Algorithm::gauss, 1); }

MapDescriptor MapDescriptor::brun(int m) {
  if (m < 1) throw ValidationError("brun: dimension must be >= 1");
  return MapDescriptor(Algorithm::brun, m);
}

MapDescriptor MapDescriptor::jacobi_perron(int m) {
  if (m != 2) throw ValidationError("jacobi-perron: only m = 2 is implemented");
  return MapDescriptor(Algorithm::jacobi_perron, 2);
}

std::string MapDescriptor::name() const {
  switch (algorithm_) {
    case Algorithm::gauss:
      return "gauss";
    case Algorithm::brun:
      return "brun" + std::to_string(dim_);
    case Algorithm::jacobi_perron:
      return "jp" + std::to_string(dim_);
  }
  return "?";
}

Point MapDescriptor::base_point() const { return Point{std::vector<double>(static_cast<std::size_t>(dim_), 0.0)}; }

std::vector<std::int64_t> MapDescriptor::base_point_homogeneous() const {
  std::vector<std::int64_t> v(static_cast<std::size_t>(dim_ + 1), 0);
  v.back() = 1;
  return v;
}

int MapDescriptor::cell_of(std::span<const double> x) const {
  if (algorithm_ != Algorithm::jacobi_perron) return 0;
  return x[0] < x[1] ? 0 : 1;
}

int MapDescriptor::domain_cell(const Digit& d) const {
  if (algorithm_ != Algorithm::jacobi_perron) return 0;
  return d.a >= 1 ? 0 : 1;
}

bool MapDescriptor::image_covers(const Digit& d, int cell) const {
  if (algorithm_ != Algorithm::jacobi_perron) return true;
  if (d.a == d.j) return cell == 0;
  return true;
}

void MapDescriptor::validate(const Digit& d) const {
  if (d.algorithm != algorithm_) throw ValidationError("digit belongs to a different algorithm");
  switch (algorithm_) {
    case Algorithm::gauss:
      if (d.j < 1) throw ValidationError("gauss digit must be >= 1");
      break;
    case Algorithm::brun:
      if (d.j < 1) throw ValidationError("brun digit must be >= 1");
      if (d.position < 1 || d.position > dim_) throw ValidationError("brun max-position out of range 1..m");
      break;
    case Algorithm::jacobi_perron:
      if (d.j < 1 || d.a < 0 || d.a > d.j) throw ValidationError("jp digit requires 0 <= a <= b, b >= 1");
      break;
  }
}

bool MapDescriptor::admissible(const Digit& prev, const Digit& next) const {
  if (algorithm_ != Algorithm::jacobi_perron) return true;
  if (prev.a == prev.j) return next.a >= 1;
  return true;
}

bool MapDescriptor::terminal_ok(const Digit& last) const {
  switch (algorithm_) {
    case Algorithm::gauss:
      return last.j >= 2;
    case Algorithm::jacobi_perron:
      return last.j >= 2;
    case Algorithm::brun:
      return true;
  }
  return true;
}

MapDescriptor parse_algorithm(const std::string& name) {
  if (name == "gauss") return MapDescriptor::gauss();
  if (name == "jp2" || name == "jp" || name == "jacobi-perron") return MapDescriptor::jacobi_perron(2);
  if (name.rfind("brun", 0) == 0 && name.size() > 4) {
    const std::string tail = name.substr(4);
    if (std::all_of(tail.begin(), tail.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return MapDescriptor::brun(std::stoi(tail));
    }
  }
  throw ValidationError("unknown algorithm '" + name + "' (expected gauss, brun2, brun3, jp2)");
}

std::pair<double, Digit> gauss_forward(double x) {
  if (x == 0.0) throw Terminated("gauss_forward: x = 0 is terminal");
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("gauss_forward: x must lie in (0,1]");
  const double inv = 1.0 / x;
  const double j = std::floor(inv);
  return {inv - j, Digit::gauss(static_cast<std::int64_t>(j))};
}

namespace {

int argmax_first(std::span<const double> x) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(x.size()); ++k) {
    if (x[static_cast<std::size_t>(k)] > x[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

int argmax_first(std::span<const std::int64_t> x) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(x.size()); ++k) {
    if (x[static_cast<std::size_t>(k)] > x[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

}  // namespace

std::pair<Point, Digit> brun_forward(const Point& x) {
  const int m = static_cast<int>(x.coords.size());
  if (m < 1) throw ValidationError("brun_forward: empty point");
  const int i = argmax_first(x.coords);
  const double xi = x.coords[static_cast<std::size_t>(i)];
  if (xi == 0.0) throw Terminated("brun_forward: zero vector is terminal");
  if (xi > 1.0 || xi < 0.0) throw DomainError("brun_forward: coordinates must lie in [0,1]");
  const double inv = 1.0 / xi;
  const double j = std::floor(inv);
  Point out;
  out.coords.reserve(static_cast<std::size_t>(m));
  for (int k = i + 1; k < m; ++k) out.coords.push_back(x.coords[static_cast<std::size_t>(k)] / xi);
  out.coords.push_back(inv - j);
  for (int k = 0; k < i; ++k) out.coords.push_back(x.coords[static_cast<std::size_t>(k)] / xi);
  return {out, Digit::brun(i + 1, static_cast<std::int64_t>(j))};
}

std::pair<Point, Digit> jp_forward(const Point& x) {
  if (x.coords.size() != 2) throw ValidationError("jp_forward: only m = 2 is implemented");
  const double xi = x.coords[0];
  const double eta = x.coords[1];
  if (xi == 0.0) throw Terminated("jp_forward: xi = 0 is terminal");
  if (!(xi > 0.0 && xi <= 1.0 && eta >= 0.0 && eta <= 1.0)) throw DomainError("jp_forward: point outside [0,1]^2");
  const double q1 = eta / xi;
  const double q2 = 1.0 / xi;
  const double a = std::floor(q1);
  const double b = std::floor(q2);
  return {Point{{q1 - a, q2 - b}}, Digit::jp(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b))};
}

std::pair<Point, Digit> forward(const MapDescriptor& map, const Point& x) {
  if (static_cast<int>(x.coords.size()) != map.dimension()) throw ValidationError("forward: dimension mismatch");
  switch (map.algorithm()) {
    case Algorithm::gauss: {
      auto [y, d] = gauss_forward(x.coords[0]);
      return {Point{{y}}, d};
    }
    case Algorithm::brun:
      return brun_forward(x);
    case Algorithm::jacobi_perron:
      return jp_forward(x);
  }
  throw ValidationError("forward: unknown algorithm");
}

namespace {

void check_exact(const RationalPoint& x, std::size_t m) {
  if (x.numerators.size() != m) throw ValidationError("exact forward: dimension mismatch");
  if (x.denominator <= 0) throw ValidationError("exact forward: denominator must be positive");
  for (auto n : x.numerators) {
    if (n < 0 || n > x.denominator) throw DomainError("exact forward: coordinate outside [0,1]");
  }
}

}  // namespace

std::pair<RationalPoint, Digit> gauss_forward_exact(const RationalPoint& x) {
  check_exact(x, 1);
  const std::int64_t p = x.numerators[0];
  const std::int64_t q = x.denominator;
  if (p == 0) throw Terminated("gauss_forward_exact: x = 0 is terminal");
  const std::int64_t j = q / p;
  RationalPoint y{{q - j * p}, p};
  y.normalize();
  return {y, Digit::gauss(j)};
}

std::pair<RationalPoint, Digit> brun_forward_exact(const RationalPoint& x) {
  const std::size_t m = x.numerators.size();
  if (m < 1) throw ValidationError("brun_forward_exact: empty point");
  check_exact(x, m);
  const int i = argmax_first(x.numerators);
  const std::int64_t ni = x.numerators[static_cast<std::size_t>(i)];
  if (ni == 0) throw Terminated("brun_forward_exact: zero vector is terminal");
  const std::int64_t d = x.denominator;
  const std::int64_t j = d / ni;
  RationalPoint y;
  y.denominator = ni;
  y.numerators.reserve(m);
  for (std::size_t k = static_cast<std::size_t>(i) + 1; k < m; ++k) y.numerators.push_back(x.numerators[k]);
  y.numerators.push_back(d - j * ni);
  for (std::size_t k = 0; k < static_cast<std::size_t>(i); ++k) y.numerators.push_back(x.numerators[k]);
  y.normalize();
  return {y, Digit::brun(i + 1, j)};
}

std::pair<RationalPoint, Digit> jp_forward_exact(const RationalPoint& x) {
  check_exact(x, 2);
  const std::int64_t p = x.numerators[0];
  const std::int64_t r = x.numerators[1];
  const std::int64_t q = x.denominator;
  if (p == 0) throw Terminated("jp_forward_exact: xi = 0 is terminal");
  const std::int64_t a = r / p;
  const std::int64_t b = q / p;
  RationalPoint y{{r - a * p, q - b * p}, p};
  y.normalize();
  return {y, Digit::jp(a, b)};
}

std::pair<RationalPoint, Digit> forward_exact(const MapDescriptor& map, const RationalPoint& x) {
  switch (map.algorithm()) {
    case Algorithm::gauss:
      return gauss_forward_exact(x);
    case Algorithm::brun:
      if (static_cast<int>(x.numerators.size()) != map.dimension()) {
        throw ValidationError("forward_exact: dimension mismatch");
      }
      return brun_forward_exact(x);
    case Algorithm::jacobi_perron:
      return jp_forward_exact(x);
  }
  throw ValidationError("forward_exact: unknown algorithm");
}

Homography inverse_branch(const MapDescriptor& map, const Digit& d) {
  map.validate(d);
  const int m = map.dimension();
  const int n = m + 1;
  std::vector<std::int64_t> e(static_cast<std::size_t>(n * n), 0);
  auto set = [&](int r, int c, std::int64_t v) { e[static_cast<std::size_t>(r * n + c)] = v; };
  switch (map.algorithm()) {
    case Algorithm::gauss:
      // x -> 1 / (j + x)
      set(0, 1, 1);
      set(1, 0, 1);
      set(1, 1, d.j);
      break;
    case Algorithm::brun: {
      // Undo the cyclic shift: with p = m - i + 1 (1-based), x_i = 1/(j + y_p),
      // x_k = y_{k-i} x_i for k > i and x_k = y_{p+k} x_i for k < i.
      const int i = d.position;
      const int p = m - i + 1;
      for (int k = 1; k <= m; ++k) {
        if (k == i) {
          set(k - 1, m, 1);
        } else if (k > i) {
          set(k - 1, k - i - 1, 1);
        } else {
          set(k - 1, p + k - 1, 1);
        }
      }
      set(m, p - 1, 1);
      set(m, m, d.j);
      break;
    }
    case Algorithm::jacobi_perron:
      // (xi, eta) -> (1, xi + a) / (b + eta)
      set(0, 2, 1);
      set(1, 0, 1);
      set(1, 2, d.a);
      set(2, 1, 1);
      set(2, 2, d.j);
      break;
  }
  return Homography::from_rows(m, std::move(e));
}

Homography compose_digits(const MapDescriptor& map, std::span<const Digit> digits) {
  Homography h = Homography::identity(map.dimension());
  for (const auto& d : digits) h = h * inverse_branch(map, d);
  return h;
}

double log_jacobian(const MapDescriptor& map, const Homography& h, const Point& x) {
  if (h.dimension() != map.dimension() || static_cast<int>(x.coords.size()) != map.dimension()) {
    throw ValidationError("log_jacobian: dimension mismatch");
  }
  return h.log_jacobian(x.coords);
}

double weight_of(const MapDescriptor& map, const Homography& h, const Point& x) { return -log_jacobian(map, h, x); }

double forward_log_jacobian(const MapDescriptor& map, const Point& x) {
  const double m1 = static_cast<double>(map.dimension() + 1);
  switch (map.algorithm()) {
    case Algorithm::gauss:
    case Algorithm::jacobi_perron:
      if (!(x.coords[0] > 0.0)) throw Terminated("forward_log_jacobian: terminal point");
      return -m1 * std::log(x.coords[0]);
    case Algorithm::brun: {
      const double xi = x.coords[static_cast<std::size_t>(argmax_first(x.coords))];
      if (!(xi > 0.0)) throw Terminated("forward_log_jacobian: terminal point");
      return -m1 * std::log(xi);
    }
  }
  return 0.0;
}

}  // namespace cfstat
