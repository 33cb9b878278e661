// Thermodynamic-limit doublons: symmetric closed forms and the momentum-kernel
// determinant route.
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "cbh/bethe.hpp"

namespace cbh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double half_width(const ModelParams& p, double P) { return 4 * std::abs(p.j1 * std::cos(P / 2)); }

double root_sq(double e, double w) { return std::sqrt(std::max(0.0, e * e - w * w)); }

// U(eps) on each branch; sp = sqrt(+), sm = sqrt(-)
double relation(BranchId b, double eps, double omega, double w) {
  double sp = root_sq(eps + 2 * omega, w), sm = root_sq(eps - 2 * omega, w);
  switch (b) {
    case BranchId::below:
      return -2 * sp * sm / (sp + sm);
    case BranchId::middle:
      return 2 * sm * sp / (sm - sp);
    case BranchId::above:
      return 2 * sp * sm / (sp + sm);
  }
  return 0;
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void require_kernel_params(const ModelParams& p) {
  if (std::abs(p.u3) > 0)
    throw Error(ErrorKind::Unsupported, "momentum kernel needs U3 = 0");
}

// M(p) with the U factors stripped: M = K diag(U1, U2)
Eigen::Matrix2d bare_kernel(const ModelParams& p, double P, double eps, double k, double* eta) {
  auto [wp, wpp] = dispersion_pair(p, k);
  auto [wq, wqp] = dispersion_pair(p, P - k);
  double d1 = eps - wp - wqp, d2 = eps - wq - wpp;
  double a = eps - wp - wq, b = eps - wpp - wqp;
  double o2 = p.omega * p.omega, s = d1 + d2;
  double den = a * b * d1 * d2 - o2 * s * (a + b);
  for (double d : {d1, d2, a, b, den})
    if (std::abs(d) < 1e-12)
      throw Error(ErrorKind::PoleEncountered,
                  "kernel pole at eps " + std::to_string(eps) + ", p " + std::to_string(k));
  if (eta) *eta = o2 * (1 / d1 + 1 / d2);
  Eigen::Matrix2d m;
  m << b * d1 * d2 - o2 * s, o2 * s, o2 * s, a * d1 * d2 - o2 * s;
  return m / den;
}

// column i of (K U - 1), divided by U_i for a hard-core species
double condition_from_mean(const ModelParams& p, const Eigen::Matrix2d& kbar) {
  Eigen::Matrix2d m;
  bool inf[2] = {p.u1_infinite, p.u2_infinite};
  double u[2] = {p.u1, p.u2};
  for (int i = 0; i < 2; ++i) {
    if (inf[i]) {
      m.col(i) = kbar.col(i);
    } else {
      m.col(i) = u[i] * kbar.col(i);
      m(i, i) -= 1;
    }
  }
  return m.determinant();
}

double smallest_decay(const ModelParams& p, double P, double eps) {
  // real quasi-momenta belong to continua the doublon merely overlaps; they carry no weight
  double best = kInf;
  try {
    for (auto& k : energy_roots(p, P, eps).k) {
      double K = std::abs(k.imag());
      if (K > 1e-9) best = std::min(best, K);
    }
  } catch (const Error&) {
  }
  return best;
}

double closed_form_decay(const ModelParams& p, double P, double eps) {
  double w = half_width(p, P);
  if (w < 1e-300) return kInf;
  double best = kInf;
  for (double e : {eps - 2 * p.omega, eps + 2 * p.omega})
    if (std::abs(e) > w) best = std::min(best, std::acosh(std::abs(e) / w));
  return best;
}

int gap_index(const std::vector<std::pair<double, double>>& cont, double eps) {
  int g = 0;
  for (auto& c : cont)
    if (eps > c.second) ++g;
  return g;
}

BranchId gap_branch(int gap, int ngaps) {
  if (gap == 0) return BranchId::below;
  if (gap == ngaps - 1) return BranchId::above;
  return BranchId::middle;
}

// root of the kernel condition nearest to guess, searched outward at fixed P
std::optional<double> track_root(const ModelParams& p, double P, double guess) {
  auto f = [&](double e) { return kernel_condition(p, P, e); };
  auto cont = continuum_intervals(p, P);
  int g = gap_index(cont, guess);
  double lo_lim = g == 0 ? -kInf : cont[g - 1].second;
  double hi_lim = g == static_cast<int>(cont.size()) ? kInf : cont[g].first;
  double step = 1e-6 * std::max(1.0, std::abs(guess));
  try {
    double f0 = f(guess);
    for (int it = 0; it < 40; ++it, step *= 2) {
      double lo = guess - step, hi = guess + step;
      if (lo > lo_lim && (f(lo) < 0) != (f0 < 0)) return bisect(f, lo, guess);
      if (hi < hi_lim && (f(hi) < 0) != (f0 < 0)) return bisect(f, guess, hi);
      if (lo <= lo_lim && hi >= hi_lim) break;
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

}  // namespace

const char* branch_name(BranchId b) {
  switch (b) {
    case BranchId::below:
      return "below";
    case BranchId::middle:
      return "middle";
    case BranchId::above:
      return "above";
  }
  return "?";
}

std::optional<double> closed_form_branch(const ModelParams& p, BranchId b, double P) {
  if (!p.symmetric(1e-12) || std::abs(p.u3) > 0)
    throw Error(ErrorKind::Unsupported, "closed forms need J1 = J2, U1 = U2, Delta = 0, U3 = 0");
  const double w = half_width(p, P), om = std::abs(p.omega);
  if (p.u1_infinite) {
    if (b == BranchId::middle && 2 * om > w) return 0.0;
    return std::nullopt;
  }
  const double u = p.u1;
  if (u == 0) return std::nullopt;
  auto f = [&](double e) { return relation(b, e, om, w) - u; };
  switch (b) {
    case BranchId::below: {
      if (u > 0) return std::nullopt;
      double hi = -2 * om - w, lo = hi - 2 * std::abs(u) - 1;
      while (f(lo) > 0) lo = hi - 2 * (hi - lo);
      return bisect(f, lo, hi);
    }
    case BranchId::above: {
      if (u < 0) return std::nullopt;
      double lo = 2 * om + w, hi = lo + 2 * u + 1;
      while (f(hi) < 0) hi = lo + 2 * (hi - lo);
      return bisect(f, lo, hi);
    }
    case BranchId::middle: {
      if (2 * om <= w) return std::nullopt;
      // U(eps) has a pole at eps = 0, so bisect on 1/U. U > 0 binds below zero, U < 0 above.
      auto g = [&](double e) {
        double sp = root_sq(e + 2 * om, w), sm = root_sq(e - 2 * om, w);
        return (sm - sp) / (2 * sm * sp) - 1 / u;
      };
      return u > 0 ? bisect(g, -2 * om + w, 0.0) : bisect(g, 0.0, 2 * om - w);
    }
  }
  return std::nullopt;
}

MomentumKernel momentum_kernel(const ModelParams& p, double P, double eps, double q) {
  require_kernel_params(p);
  if (p.u1_infinite || p.u2_infinite)
    throw Error(ErrorKind::Unsupported, "M(p) carries finite U; use kernel_condition");
  MomentumKernel out;
  Eigen::Matrix2d k = bare_kernel(p, P, eps, q, &out.eta);
  out.M = k * Eigen::Vector2d(p.u1, p.u2).asDiagonal();
  return out;
}

double finite_kernel_condition(const ModelParams& p, int r, double eps) {
  require_kernel_params(p);
  const int n = p.n;
  const double P = 2 * kPi * r / n;
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  for (int j = 0; j < n; ++j) sum += bare_kernel(p, P, eps, 2 * kPi * j / n, nullptr);
  return condition_from_mean(p, sum / n);
}

double kernel_condition(const ModelParams& p, double P, double eps) {
  require_kernel_params(p);
  // periodic integrand: the trapezoid rule converges geometrically away from continua
  int m = 64;
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  for (int j = 0; j < m; ++j) sum += bare_kernel(p, P, eps, 2 * kPi * j / m, nullptr);
  double prev = condition_from_mean(p, sum / m);
  while (m < (1 << 18)) {
    for (int j = 0; j < m; ++j) sum += bare_kernel(p, P, eps, 2 * kPi * (j + 0.5) / m, nullptr);
    m *= 2;
    double cur = condition_from_mean(p, sum / m);
    if (std::abs(cur - prev) < 1e-13 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

std::vector<std::pair<double, double>> continuum_intervals(const ModelParams& p, double P) {
  constexpr int M = 2048;
  std::vector<std::pair<double, double>> iv;
  for (int a : {-1, 1})
    for (int b : {-1, 1}) {
      auto f = [&](double k) {
        auto s1 = single_excitation_solve(p, k), s2 = single_excitation_solve(p, P - k);
        return (a < 0 ? s1.eps_minus : s1.eps_plus) + (b < 0 ? s2.eps_minus : s2.eps_plus);
      };
      const double h = 2 * kPi / M;
      int imin = 0, imax = 0;
      std::vector<double> v(M);
      for (int j = 0; j < M; ++j) {
        v[j] = f(j * h);
        if (v[j] < v[imin]) imin = j;
        if (v[j] > v[imax]) imax = j;
      }
      // golden-section polish of the extremes
      auto polish = [&](int j, double sign) {
        double lo = (j - 1) * h, hi = (j + 1) * h;
        const double g = 0.5 * (std::sqrt(5.0) - 1);
        for (int it = 0; it < 80; ++it) {
          double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
          if (sign * f(c) < sign * f(d)) hi = d;
          else lo = c;
        }
        return std::min(sign * v[j], sign * f(0.5 * (lo + hi))) * sign;
      };
      iv.emplace_back(polish(imin, 1.0), polish(imax, -1.0));
    }
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> out;
  for (auto& x : iv) {
    if (!out.empty() && x.first <= out.back().second + 1e-12)
      out.back().second = std::max(out.back().second, x.second);
    else
      out.push_back(x);
  }
  return out;
}

std::vector<double> det_route_energies(const ModelParams& p, double P) {
  require_kernel_params(p);
  auto cont = continuum_intervals(p, P);
  double bound = 2 * std::abs(p.delta) + 4 * (std::abs(p.j1) + std::abs(p.j2)) +
                 4 * std::abs(p.omega) + 1;
  if (!p.u1_infinite) bound += std::abs(p.u1);
  if (!p.u2_infinite) bound += std::abs(p.u2);
  std::vector<std::pair<double, double>> gaps;
  gaps.emplace_back(std::min(-bound, cont.front().first - 1), cont.front().first);
  for (size_t i = 1; i < cont.size(); ++i) gaps.emplace_back(cont[i - 1].second, cont[i].first);
  gaps.emplace_back(cont.back().second, std::max(bound, cont.back().second + 1));

  auto f = [&](double e) { return kernel_condition(p, P, e); };
  std::vector<double> out;
  for (size_t g = 0; g < gaps.size(); ++g) {
    auto [a, b] = gaps[g];
    double width = b - a;
    if (width < 1e-9) continue;
    // uniform grid plus points crowding toward inner continuum edges
    std::vector<double> xs;
    const int M = 400;
    for (int i = 0; i <= M; ++i) xs.push_back(a + width * i / M);
    for (double t = 1e-2; t > 1e-7; t *= 0.3) {
      if (g > 0) xs.push_back(a + width * t);
      if (g + 1 < gaps.size()) xs.push_back(b - width * t);
    }
    std::sort(xs.begin(), xs.end());
    if (g > 0) xs.erase(xs.begin());
    if (g + 1 < gaps.size()) xs.pop_back();
    double xprev = 0, fprev = 0;
    bool have = false;
    for (double x : xs) {
      double fx;
      try {
        fx = f(x);
      } catch (const Error&) {
        have = false;
        continue;
      }
      if (have && (fx < 0) != (fprev < 0)) out.push_back(bisect(f, xprev, x));
      xprev = x;
      fprev = fx;
      have = true;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> onsite_energies(const ModelParams& p) {
  // orthonormal aa, ab, bb doubly occupied states; hard-core species drop out
  std::vector<int> keep;
  if (!p.u1_infinite) keep.push_back(0);
  keep.push_back(1);
  if (!p.u2_infinite) keep.push_back(2);
  const double c = std::sqrt(2.0) * p.omega;
  Eigen::Matrix3d h;
  h << 2 * p.delta + p.u1, c, 0, c, p.delta + p.u3, c, 0, c, p.u2;
  Eigen::MatrixXd m(keep.size(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i)
    for (size_t j = 0; j < keep.size(); ++j) m(i, j) = h(keep[i], keep[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  auto ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<DoublonBranch> doublon_branches(const ModelParams& p, const std::vector<double>& P_grid) {
  require_kernel_params(p);
  const bool closed = p.symmetric(1e-12);
  constexpr double h = 1e-5;
  std::map<std::pair<int, int>, DoublonBranch> found;

  auto branch = [&](BranchId id, int ordinal) -> DoublonBranch& {
    auto& b = found[{static_cast<int>(id), ordinal}];
    b.branch_id = id;
    b.ordinal = ordinal;
    return b;
  };

  if (closed) {
    for (BranchId id : {BranchId::below, BranchId::middle, BranchId::above}) {
      DoublonBranch b;
      b.branch_id = id;
      for (double P : P_grid) {
        auto e = closed_form_branch(p, id, P);
        if (!e) {
          b.missing.push_back(P);
          continue;
        }
        auto ep = closed_form_branch(p, id, P + h), em = closed_form_branch(p, id, P - h);
        double v = ep && em ? (*ep - *em) / (2 * h)
                   : ep     ? (*ep - *e) / h
                   : em     ? (*e - *em) / h
                            : 0.0;
        b.samples.emplace_back(P, *e);
        b.decay_constants.push_back(closed_form_decay(p, P, *e));
        b.group_velocity.push_back(v);
      }
      if (!b.samples.empty()) found[{static_cast<int>(id), 0}] = b;
    }
  } else {
    std::vector<std::vector<std::pair<BranchId, int>>> seen(P_grid.size());
    for (size_t i = 0; i < P_grid.size(); ++i) {
      double P = P_grid[i];
      auto cont = continuum_intervals(p, P);
      const int ngaps = static_cast<int>(cont.size()) + 1;
      auto roots = det_route_energies(p, P);
      std::map<int, int> per_gap;
      int middle_count = 0;
      for (double e : roots) {
        int g = gap_index(cont, e);
        BranchId id = gap_branch(g, ngaps);
        int ord = id == BranchId::middle ? middle_count++ : per_gap[g]++;
        auto ep = track_root(p, P + h, e), em = track_root(p, P - h, e);
        double v = ep && em ? (*ep - *em) / (2 * h) : 0.0;
        auto& b = branch(id, ord);
        b.samples.emplace_back(P, e);
        b.decay_constants.push_back(smallest_decay(p, P, e));
        b.group_velocity.push_back(v);
        seen[i].emplace_back(id, ord);
      }
    }
    for (auto& [key, b] : found)
      for (size_t i = 0; i < P_grid.size(); ++i)
        if (std::find(seen[i].begin(), seen[i].end(), std::make_pair(b.branch_id, b.ordinal)) ==
            seen[i].end())
          b.missing.push_back(P_grid[i]);
  }
  std::vector<DoublonBranch> out;
  for (auto& [key, b] : found) out.push_back(std::move(b));
  return out;
}

}  // namespace cbh
