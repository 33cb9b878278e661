#include "cbh/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cbh/ed.hpp"

namespace cbh {

namespace {

constexpr cplx I(0.0, 1.0);

int rep_index(int r, int n) {
  int rr = ((r % n) + n) % n;
  return 2 * rr > n ? rr - n : rr;
}

bool odd(int v) { return (v % 2 + 2) % 2 == 1; }

cplx band_parameter(double e, double c, double j) {
  cplx t = std::acos(cplx(-e / (4.0 * j * c), 0.0));
  return t.imag() > 0 ? std::conj(t) : t;
}

// Real roots of f on [lo, hi]: sign changes on an m-point grid, then bisection.
std::vector<double> bracket_roots(const std::function<double(double)>& f, double lo, double hi,
                                  int m) {
  std::vector<double> roots;
  double xa = lo, fa = f(lo);
  for (int i = 1; i <= m; ++i) {
    double xb = lo + (hi - lo) * i / m, fb = f(xb);
    if (fa == 0.0) {
      roots.push_back(xa);
    } else if (fa * fb < 0) {
      double a = xa, b = xb, ya = fa;
      for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
        double mid = 0.5 * (a + b), ym = f(mid);
        if (ym == 0.0) {
          a = b = mid;
          break;
        }
        if (ya * ym < 0) {
          b = mid;
        } else {
          a = mid;
          ya = ym;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    xa = xb;
    fa = fb;
  }
  if (fa == 0.0) roots.push_back(hi);
  return roots;
}

// Retries with a finer grid until the expected number of roots is isolated.
std::vector<double> roots_with_count(const std::function<double(double)>& f, double lo,
                                     double hi, int m, size_t expected, const std::string& what) {
  std::vector<double> roots;
  for (int pass = 0; pass < 4; ++pass, m *= 4) {
    roots = bracket_roots(f, lo, hi, m);
    if (roots.size() == expected) return roots;
  }
  throw Error(ErrorKind::RootCountMismatch, what + ": expected " + std::to_string(expected) +
                                                " roots, isolated " + std::to_string(roots.size()));
}

int grid_points(int n, double lo, double hi, double j) {
  double span = (hi - lo) / std::max(16.0 * std::abs(j), 1e-3);
  return static_cast<int>(std::clamp(64.0 * n * std::max(1.0, span), 2000.0, 400000.0));
}

TwoExcitationState finish(TwoExcitationState s, double eps, int r) {
  s = normalize_state(s);
  s.energy = eps;
  s.momentum_index = r;
  return s;
}

// Half-integer grid pairs (k, pi - k) with k != q: hard-core states of the flat P = pi sector.
std::vector<ChoyHaldaneComponent> flat_components(int n) {
  std::vector<ChoyHaldaneComponent> out;
  for (int j = 0; j < n; ++j) {
    int jp = (((n / 2 - 1 - j) % n) + n) % n;
    if (jp <= j) continue;
    ChoyHaldaneComponent c;
    c.k = kPi * (2 * j + 1) / n;
    c.q = kPi - c.k;
    c.s = kHardCoreS;
    c.u_tilde = std::numeric_limits<double>::infinity();
    out.push_back(c);
  }
  return out;
}

CMat staggered_diagonal(int n) {
  CMat d = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = (i % 2) ? -1.0 : 1.0;
  return d;
}

Region classify(double e1, double e2, double half_width, bool& overlap) {
  const double tol = 1e-9;
  auto cls = [&](double e) { return e < -half_width - tol ? 0 : (e > half_width + tol ? 2 : 1); };
  int a = cls(std::min(e1, e2)), b = cls(std::max(e1, e2));
  overlap = false;
  if (a == 0 && b == 0) return Region::I;
  if (a == 0 && b == 1) return Region::II;
  if (a == 0 && b == 2) return Region::III;
  if (a == 1 && b == 1) {
    overlap = true;
    return Region::III;
  }
  if (a == 1 && b == 2) return Region::IV;
  return Region::V;
}

}  // namespace

const char* kind_name(StateKind k) {
  switch (k) {
    case StateKind::type1: return "type1";
    case StateKind::type2: return "type2";
    case StateKind::type3: return "type3";
    case StateKind::generic: return "generic";
    case StateKind::flat: return "flat";
  }
  return "?";
}

const char* region_name(Region r) {
  switch (r) {
    case Region::none: return "-";
    case Region::I: return "I";
    case Region::II: return "II";
    case Region::III: return "III";
    case Region::IV: return "IV";
    case Region::V: return "V";
  }
  return "?";
}

cplx scattering_factor(cplx k, cplx q, cplx u_tilde, double j) {
  cplx x = 2.0 * j * (std::sin(k) - std::sin(q));
  cplx den = x + I * u_tilde;
  if (std::abs(den) <= 1e-14)
    throw Error(ErrorKind::SingularDenominator, "scattering factor denominator vanishes");
  return (x - I * u_tilde) / den;
}

cplx fictitious_interaction(cplx k, cplx q, cplx s, double j) {
  if (std::abs(1.0 + s) < 1e-14) return std::numeric_limits<double>::infinity();
  cplx x = 2.0 * j * (std::sin(k) - std::sin(q));
  return -I * x * (1.0 - s) / (1.0 + s);
}

CMat choy_haldane_matrix(int n, const ChoyHaldaneComponent& c) {
  CMat m = CMat::Zero(n, n);
  double sign = c.symmetric ? 1.0 : -1.0;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      cplx v = std::exp(I * (c.k * double(a) + c.q * double(b))) +
               sign * c.s * std::exp(I * (c.q * double(a) + c.k * double(b)));
      if (c.symmetric) {
        m(a, b) = m(b, a) = v;
      } else if (a < b) {
        m(a, b) = v;
        m(b, a) = -v;
      }
    }
  return m;
}

ChoyHaldaneComponent component_at_energy(double e, int r, int n, double j) {
  double P = lattice_momentum(r, n), c = std::cos(P / 2);
  if (std::abs(c) < 1e-12) throw Error(ErrorKind::Unsupported, "flat P = pi sector");
  cplx t = band_parameter(e, c, j);
  ChoyHaldaneComponent comp;
  comp.k = P / 2 + t;
  comp.q = P - comp.k;
  comp.s = std::exp(-I * comp.k * double(n));
  comp.u_tilde = fictitious_interaction(comp.k, comp.q, comp.s, j);
  return comp;
}

std::pair<double, double> quantization_pair(double e, int r, int n, double j) {
  int rr = rep_index(r, n);
  double P = 2.0 * kPi * rr / n, c = std::cos(P / 2);
  for (int attempt = 0; attempt < 8; ++attempt, e += 1e-9) {
    cplx t = band_parameter(e, c, j);
    cplx k = P / 2 + t;
    cplx nn = std::cos(k * (n / 2.0));
    cplx h = 4.0 * j * c * std::sin(t) * std::sin(k * (n / 2.0));
    // divide out the factor that makes (n, h) odd or antiperiodic in t
    cplx d = 1.0;
    if (odd(rr)) d *= std::sin(t / 2.0);
    if (odd(rr + n)) d *= std::cos(t / 2.0);
    if (std::abs(d) < 1e-12) continue;
    return {(nn / d).real(), (h / d).real()};
  }
  throw Error(ErrorKind::ConvergenceFailure, "quantization pair stuck at a removable point");
}

namespace {

// Energies e of single-species (J, U) states; U = nullopt means hard-core.
std::vector<double> single_species_energies(int r, int n, double j, std::optional<double> u,
                                            size_t expected) {
  double lim = 4 * std::abs(j) + (u ? std::abs(*u) : 0.0) + 1.0;
  auto f = [&](double e) {
    auto [nn, h] = quantization_pair(e, r, n, j);
    return u ? *u * nn - h : nn;
  };
  return roots_with_count(f, -lim, lim, grid_points(n, -lim, lim, j), expected,
                          "single-species sector " + std::to_string(r));
}

}  // namespace

std::vector<SingleSpeciesRoot> solve_single_species(const ModelParams& p, int r) {
  p.validate();
  const int n = p.n;
  r = ((r % n) + n) % n;
  const double j = p.j1;
  std::optional<double> u;
  if (!p.u1_infinite) u = p.u1;
  auto dims = sector_class_dims(n, r);
  std::vector<SingleSpeciesRoot> out;
  double P = lattice_momentum(r, n);
  if (std::abs(std::cos(P / 2)) < 1e-12) {
    for (auto& c : flat_components(n)) {
      SingleSpeciesRoot root;
      root.energy = 2 * p.delta;
      root.k = c.k;
      root.s = c.s;
      root.bethe_residual = std::abs(std::exp(-I * c.k * double(n)) - c.s);
      root.flat = true;
      out.push_back(root);
    }
    if (u) {
      SingleSpeciesRoot root;
      root.energy = 2 * p.delta + *u;
      root.k = cplx(P / 2 + kPi, -std::numeric_limits<double>::infinity());
      root.s = 0.0;
      root.flat = true;
      out.push_back(root);
    }
  } else {
    size_t expected = u ? dims.sym_full : dims.sym_hc;
    for (double e : single_species_energies(r, n, j, u, expected)) {
      auto c = component_at_energy(e, r, n, j);
      if (u && *u == 0 && std::abs(c.k.imag()) < 1e-6) {
        // free momenta sit on the 2 pi / N grid; acos near a band edge only gets sqrt(eps)
        double kk = 2 * kPi * std::round(c.k.real() * n / (2 * kPi)) / n;
        if (std::abs(kk - c.k.real()) < 1e-5) {
          c.k = kk;
          c.q = P - c.k;
          c.s = std::exp(-I * c.k * double(n));
        }
      }
      SingleSpeciesRoot root;
      root.energy = 2 * p.delta + e;
      root.k = c.k;
      root.s = c.s;
      // free pairs with k = q make the factor 0/0; its limit is 1
      cplx sb = !u ? cplx(kHardCoreS) : *u == 0 ? cplx(1.0) : scattering_factor(c.k, c.q, *u, j);
      root.bethe_residual = std::abs(std::exp(-I * c.k * double(n)) - sb);
      out.push_back(root);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.energy < b.energy; });
  return out;
}

std::vector<AnalyticState> solve_symmetric_sector(const ModelParams& p, int r) {
  p.validate();
  if (!p.symmetric())
    throw Error(ErrorKind::BadParams, "symmetric solver needs J1 = J2, U1 = U2, Delta = 0");
  const int n = p.n;
  r = ((r % n) + n) % n;
  const double j = p.j1, w = p.omega, u3 = p.u3;
  const bool hc = p.hardcore();
  const double u = p.u1;
  const double P = lattice_momentum(r, n), c = std::cos(P / 2);
  const auto dims = sector_class_dims(n, r);
  std::vector<AnalyticState> out;

  auto push = [&](TwoExcitationState s, double eps, StateKind kind,
                  std::vector<ChoyHaldaneComponent> comps, std::vector<cplx> weights) {
    AnalyticState a;
    a.state = finish(std::move(s), eps, r);
    a.kind = kind;
    a.components = std::move(comps);
    a.weights = std::move(weights);
    a.residual = residual_max(p, a.state, eps);
    out.push_back(std::move(a));
  };
  auto type2_region = [&](AnalyticState& a) {
    double eps = *a.state.energy;
    a.region = classify(eps - 2 * w, eps + 2 * w, 4 * std::abs(j) * c, a.overlap);
  };

  // type 3: antisymmetric B of two free plane waves
  for (int a = 0; a < n; ++a) {
    int b = (((r - a) % n) + n) % n;
    if (b <= a) continue;
    ChoyHaldaneComponent comp;
    comp.k = 2 * kPi * a / n;
    comp.q = 2 * kPi * b / n;
    comp.s = 1.0;
    comp.u_tilde = 0.0;
    comp.symmetric = false;
    TwoExcitationState s(n);
    s.B = choy_haldane_matrix(n, comp);
    double eps = -2 * j * (std::cos(comp.k.real()) + std::cos(comp.q.real()));
    push(s, eps, StateKind::type3, {comp}, {1.0});
  }

  if (std::abs(c) < 1e-12) {
    // P = pi: states are localized in the relative coordinate
    const CMat dd = staggered_diagonal(n);
    for (auto& comp : flat_components(n)) {
      CMat hcm = choy_haldane_matrix(n, comp);
      TwoExcitationState s1(n);
      s1.A = hcm;
      s1.C = -hcm;
      push(s1, 0.0, StateKind::type1, {comp}, {1.0});
      for (double sgn : {1.0, -1.0}) {
        TwoExcitationState s2(n);
        s2.A = hcm;
        s2.C = hcm;
        s2.B = 2.0 * sgn * hcm;
        push(s2, 2 * w * sgn, StateKind::flat, {comp},
             sgn > 0 ? std::vector<cplx>{1.0, 0.0} : std::vector<cplx>{0.0, 1.0});
        type2_region(out.back());
      }
    }
    if (!hc) {
      TwoExcitationState s1(n);
      s1.A = dd;
      s1.C = -dd;
      push(s1, u, StateKind::type1, {}, {});
      // on-site block: eps a = U a + W b, eps b = U3 b + 4 W a
      double mean = 0.5 * (u + u3), rad = std::sqrt(0.25 * (u - u3) * (u - u3) + 4 * w * w);
      for (double eps : {mean - rad, mean + rad}) {
        cplx a = w, b = eps - u;
        if (std::abs(w) < 1e-300) {
          bool first = std::abs(eps - u) <= std::abs(eps - u3);
          a = first ? 1.0 : 0.0;
          b = first ? 0.0 : 1.0;
        }
        TwoExcitationState s2(n);
        s2.A = a * dd;
        s2.C = a * dd;
        s2.B = b * dd;
        // A = C = l1 + l2, B = 2 (l1 - l2)
        push(s2, eps, StateKind::flat, {}, {0.5 * (a + 0.5 * b), 0.5 * (a - 0.5 * b)});
        type2_region(out.back());
      }
    } else {
      TwoExcitationState s2(n);
      s2.B = dd;
      push(s2, u3, StateKind::flat, {}, {0.25, -0.25});
      type2_region(out.back());
    }
  } else {
    std::optional<double> uu;
    if (!hc) uu = u;
    // type 1: A = -C, a single-species state of energy eps
    for (double e : single_species_energies(r, n, j, uu, hc ? dims.sym_hc : dims.sym_full)) {
      auto comp = component_at_energy(e, r, n, j);
      CMat hcm = choy_haldane_matrix(n, comp);
      TwoExcitationState s(n);
      s.A = hcm;
      s.C = -hcm;
      push(s, e, StateKind::type1, {comp}, {1.0});
    }

    // type 2: A = C = v0 psi1 + v1 psi2, B = 2 (v0 psi1 - v1 psi2), psi_i at eps -/+ 2 Omega
    auto type2_state = [&](double eps, Eigen::Vector2cd v) {
      auto c1 = component_at_energy(eps - 2 * w, r, n, j);
      auto c2 = component_at_energy(eps + 2 * w, r, n, j);
      CMat p1 = choy_haldane_matrix(n, c1), p2 = choy_haldane_matrix(n, c2);
      TwoExcitationState s(n);
      s.A = v(0) * p1 + v(1) * p2;
      s.C = s.A;
      s.B = 2.0 * (v(0) * p1 - v(1) * p2);
      double scale = std::max(std::abs(v(0)), std::abs(v(1)));
      push(s, eps, StateKind::type2, {c1, c2}, {v(0) / scale, v(1) / scale});
      type2_region(out.back());
    };

    if (!hc && std::abs(u - u3) <= 1e-14 * std::max(1.0, std::abs(u))) {
      // G2 factorizes: each state carries a single component
      auto es = single_species_energies(r, n, j, u, dims.sym_full);
      for (double e : es) type2_state(e + 2 * w, Eigen::Vector2cd(1.0, 0.0));
      for (double e : es) type2_state(e - 2 * w, Eigen::Vector2cd(0.0, 1.0));
    } else {
      auto g2 = [&](double eps) {
        auto [n1, h1] = quantization_pair(eps - 2 * w, r, n, j);
        auto [n2, h2] = quantization_pair(eps + 2 * w, r, n, j);
        if (hc) return -2 * (n1 * h2 + n2 * h1) + 4 * u3 * n1 * n2;
        return 4 * h1 * h2 - 2 * (u + u3) * (n1 * h2 + n2 * h1) + 4 * u * u3 * n1 * n2;
      };
      double lim = 4 * std::abs(j) + 2 * std::abs(w) + (hc ? 0.0 : std::abs(u)) +
                   std::abs(u3) + 1.0;
      size_t expected = (hc ? dims.sym_hc : dims.sym_full) + dims.sym_full;
      auto roots = roots_with_count(g2, -lim, lim, grid_points(n, -lim, lim, j), expected,
                                    "type-2 sector " + std::to_string(r));
      for (double eps : roots) {
        auto c1 = component_at_energy(eps - 2 * w, r, n, j);
        auto c2 = component_at_energy(eps + 2 * w, r, n, j);
        // diagonal equations for the two components, one row per species channel
        cplx d1 = 1.0 + c1.s, d2 = 1.0 + c2.s;
        cplx x1 = 2.0 * j * (std::sin(c1.k) - std::sin(c1.q));
        cplx x2 = 2.0 * j * (std::sin(c2.k) - std::sin(c2.q));
        cplx w1 = -I * x1 * (1.0 - c1.s), w2 = -I * x2 * (1.0 - c2.s);
        Eigen::Matrix2cd m;
        if (hc) {
          m << d1, d2, w1 - u3 * d1, -(w2 - u3 * d2);
        } else {
          m << w1 - u * d1, w2 - u * d2, w1 - u3 * d1, -(w2 - u3 * d2);
        }
        Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullV);
        type2_state(eps, svd.matrixV().col(1));
      }
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const AnalyticState& a, const AnalyticState& b) {
    return *a.state.energy < *b.state.energy;
  });
  return out;
}

std::vector<AnalyticState> region_enumerate_infU(const ModelParams& p, int r) {
  if (!p.hardcore() || std::abs(p.j1 - p.j2) > 1e-14 || std::abs(p.delta) > 1e-14)
    throw Error(ErrorKind::BadParams, "region enumeration needs hard-core U and J1 = J2");
  std::vector<AnalyticState> all;
  try {
    all = solve_symmetric_sector(p, r);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConvergenceFailure,
                std::string(e.what()) + " (P index " + std::to_string(r) + ")");
  }
  std::vector<AnalyticState> out;
  for (auto& a : all)
    if (a.region != Region::none) out.push_back(std::move(a));
  return out;
}

}  // namespace cbh
