// Generic couplings: quasi-momenta from the two-band energy equation, weights from
// the residual of the Hamiltonian restricted to the span of the components.
#include <algorithm>
#include <cmath>
#include <limits>

#include "cbh/bethe.hpp"
#include "cbh/ed.hpp"

namespace cbh {

namespace {

constexpr cplx I(0.0, 1.0);

struct Disp {
  cplx w, wp;
};

Disp disp(const ModelParams& p, cplx k) {
  cplx ck = std::cos(k);
  return {p.delta - 2.0 * p.j1 * ck, -2.0 * p.j2 * ck};
}

// det(eps - h_k x 1 - 1 x h_q)
cplx energy_det(const ModelParams& p, cplx k, cplx q, double eps) {
  auto a = disp(p, k), b = disp(p, q);
  Eigen::Matrix2cd hk, hq;
  hk << a.w, p.omega, p.omega, a.wp;
  hq << b.w, p.omega, p.omega, b.wp;
  Eigen::Matrix4cd m = eps * Eigen::Matrix4cd::Identity();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a2 = 0; a2 < 2; ++a2) {
        m(2 * i + a2, 2 * j + a2) -= hk(i, j);
        m(2 * a2 + i, 2 * a2 + j) -= hq(i, j);
      }
  return m.determinant();
}

cplx band_value(const ModelParams& p, cplx k, int sign) {
  auto d = disp(p, k);
  cplx root = std::sqrt((d.w - d.wp) * (d.w - d.wp) + 4.0 * p.omega * p.omega);
  return 0.5 * (d.w + d.wp + double(sign) * root);
}

cplx horner(const std::vector<cplx>& a, cplx z, cplx& deriv) {
  cplx v = 0.0;
  deriv = 0.0;
  for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) {
    deriv = deriv * z + v;
    v = v * z + a[i];
  }
  return v;
}

struct ComponentTerms {
  cplx a, b, lam_p, lam_pp, kappa;
  bool offset = false;
};

ComponentTerms terms(const ModelParams& p, const ChoyHaldaneComponent& c, double eps) {
  ComponentTerms t;
  auto dk = disp(p, c.k), dq = disp(p, c.q);
  double scale = std::max(1.0, std::abs(eps));
  auto guard = [&](auto f) {
    cplx v = f(eps);
    if (std::abs(v) < 1e-9 * scale) {
      t.offset = true;
      v = f(eps + 1e-9);
    }
    return v;
  };
  t.a = eps - dk.w - dq.w;
  t.b = guard([&](double e) { return e - dk.wp - dq.wp; });
  cplx den = guard([&](double e) { return 2.0 * e - dk.w - dk.wp - dq.w - dq.wp; });
  t.kappa = (dk.w - dk.wp - dq.w + dq.wp) / den;
  t.lam_p = t.a / t.b;
  t.lam_pp = t.a / p.omega;
  return t;
}

TwoExcitationState component_state(const ModelParams& p, const ChoyHaldaneComponent& c,
                                   const ComponentTerms& t) {
  int n = p.n;
  ChoyHaldaneComponent anti = c;
  anti.symmetric = false;
  CMat hcm = choy_haldane_matrix(n, c), hcp = choy_haldane_matrix(n, anti);
  TwoExcitationState s(n);
  s.A = hcm;
  s.C = t.lam_p * hcm;
  s.B = t.lam_pp * (hcm + t.kappa * hcp);
  if (p.u1_infinite) s.A.diagonal().setZero();
  if (p.u2_infinite) s.C.diagonal().setZero();
  return s;
}

CVec flatten(const TwoExcitationState& s) {
  const int n = s.sites(), nn = n * n;
  CVec v(3 * nn);
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < nn; ++i) {
    v(i) = r2 * s.A(i % n, i / n);
    v(nn + i) = s.B(i % n, i / n);
    v(2 * nn + i) = r2 * s.C(i % n, i / n);
  }
  return v;
}

struct SpanSolve {
  std::vector<ComponentTerms> terms;
  std::vector<TwoExcitationState> states;
  Eigen::VectorXd sigmas;  // ascending
  CMat coeffs;             // column j: component coefficients for sigma j
};

SpanSolve span_solve(const ModelParams& p, const std::vector<ChoyHaldaneComponent>& comps,
                     double eps) {
  if (std::abs(p.omega) < 1e-300)
    throw Error(ErrorKind::Unsupported, "generic weights need Omega != 0");
  SpanSolve out;
  std::vector<int> idx;
  for (size_t i = 0; i < comps.size(); ++i) {
    out.terms.push_back(terms(p, comps[i], eps));
    out.states.push_back(component_state(p, comps[i], out.terms.back()));
    if (comps[i].active) idx.push_back(static_cast<int>(i));
  }
  if (idx.empty()) throw Error(ErrorKind::NoRoots, "no active component");
  const int m = static_cast<int>(idx.size()), len = 3 * p.n * p.n;
  CMat phi(len, m), res(len, m);
  for (int j = 0; j < m; ++j) {
    const auto& s = out.states[idx[j]];
    phi.col(j) = flatten(s);
    res.col(j) = flatten(apply_hamiltonian(p, s) - cplx(eps) * s);
  }
  if (p.u1_infinite || p.u2_infinite) {
    // hard-core diagonals are not part of the Hilbert space
    const int n = p.n, nn = n * n;
    for (int d = 0; d < n; ++d) {
      if (p.u1_infinite) res.row(d * n + d).setZero();
      if (p.u2_infinite) res.row(2 * nn + d * n + d).setZero();
    }
  }
  Eigen::JacobiSVD<CMat> sp(phi, Eigen::ComputeThinV);
  const auto& sv = sp.singularValues();
  int keep = 0;
  while (keep < m && sv(keep) > 1e-10 * sv(0)) ++keep;
  CMat map = sp.matrixV().leftCols(keep) * sv.head(keep).cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<CMat> sr(res * map, Eigen::ComputeThinV);
  out.sigmas = sr.singularValues().reverse();
  CMat y = sr.matrixV().rowwise().reverse();
  CMat c = map * y;
  out.coeffs = CMat::Zero(comps.size(), keep);
  for (int j = 0; j < m; ++j) out.coeffs.row(idx[j]) = c.row(j);
  return out;
}

}  // namespace

EnergyRoots energy_roots(const ModelParams& p, double P, double eps) {
  constexpr int M = 16;
  std::vector<cplx> vals(M);
  for (int m = 0; m < M; ++m) {
    double k = 2 * kPi * m / M;
    vals[m] = energy_det(p, k, P - k, eps);
  }
  // Laurent coefficients c_j, j = -4..4, stored as a_{j+4}
  std::vector<cplx> a(9);
  for (int j = -4; j <= 4; ++j) {
    cplx s = 0.0;
    for (int m = 0; m < M; ++m) s += vals[m] * std::polar(1.0, -2 * kPi * j * m / M);
    a[j + 4] = s / double(M);
  }
  double big = 0;
  for (auto& v : a) big = std::max(big, std::abs(v));
  if (big == 0) throw Error(ErrorKind::NoRoots, "energy equation vanishes identically");
  EnergyRoots out;
  int hi = 8, lo = 0;
  while (hi > lo && std::abs(a[hi]) < 1e-12 * big) --hi;
  while (lo < hi && std::abs(a[lo]) < 1e-12 * big) ++lo;
  out.escaped = 8 - hi;
  std::vector<cplx> poly(a.begin() + lo, a.begin() + hi + 1);
  const int deg = static_cast<int>(poly.size()) - 1;
  if (deg < 1) throw Error(ErrorKind::NoRoots, "energy equation has no finite roots");
  CMat comp = CMat::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -poly[i] / poly[deg];
  Eigen::ComplexEigenSolver<CMat> es(comp);
  std::vector<cplx> z(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  for (auto& zi : z)
    for (int it = 0; it < 3; ++it) {
      cplx d;
      cplx v = horner(poly, zi, d);
      if (std::abs(d) > 0) zi -= v / d;
    }

  const cplx eP = std::polar(1.0, P);
  if (std::abs(eP - 1.0) < 1e-12) {
    // P = 0: reflection symmetry makes the mixed-band pair a double root; the
    // mean of the split pair is accurate where each member is only sqrt(eps) accurate
    std::vector<bool> merged(z.size(), false);
    std::vector<cplx> zc;
    for (size_t i = 0; i < z.size(); ++i) {
      if (merged[i]) continue;
      cplx sum = z[i];
      int cnt = 1;
      for (size_t j = i + 1; j < z.size(); ++j)
        if (!merged[j] && std::abs(z[j] - z[i]) < 1e-5 * std::max(1.0, std::abs(z[i]))) {
          merged[j] = true;
          sum += z[j];
          ++cnt;
        }
      cplx zm = sum / double(cnt);
      if (cnt == 2) {
        // a double root is a simple root of the derivative
        std::vector<cplx> dp(poly.size() - 1);
        for (size_t q = 1; q < poly.size(); ++q) dp[q - 1] = double(q) * poly[q];
        for (int it = 0; it < 4; ++it) {
          cplx d;
          cplx v = horner(dp, zm, d);
          if (std::abs(d) > 0) zm -= v / d;
        }
      }
      for (int c = 0; c < cnt; ++c) zc.push_back(zm);
    }
    z = zc;
  }
  std::vector<bool> used(z.size(), false);
  std::vector<cplx> reps;
  for (size_t i = 0; i < z.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    cplx partner = eP / z[i];
    size_t best = z.size();
    double bd = 1e-6 * std::max(1.0, std::abs(partner));
    for (size_t j = 0; j < z.size(); ++j)
      if (!used[j] && std::abs(z[j] - partner) < bd) {
        bd = std::abs(z[j] - partner);
        best = j;
      }
    cplx zi = z[i];
    if (best < z.size()) {
      used[best] = true;
      if (std::abs(z[best]) > std::abs(zi)) zi = z[best];
    }
    // |z| >= 1 <=> Im k <= 0, the decaying representative
    if (std::abs(zi) < 1.0 && std::abs(eP / zi) >= 1.0) zi = eP / zi;
    bool dup = false;
    for (auto& r : reps)
      if (std::abs(r - zi) < 1e-7 * std::abs(zi) || std::abs(eP / r - zi) < 1e-7 * std::abs(zi))
        dup = true;
    if (dup) {
      ++out.duplicates;
      continue;
    }
    reps.push_back(zi);
  }
  for (auto& zi : reps) {
    cplx k = -I * std::log(zi);
    int sa = 1, sb = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int a : {-1, 1})
      for (int b : {-1, 1}) {
        double r = std::abs(eps - band_value(p, k, a) - band_value(p, P - k, b));
        if (r < best) best = r, sa = a, sb = b;
      }
    // near-double roots leave the polynomial route at sqrt(eps) accuracy; polish on the
    // band equation itself, with small steps only so the root cannot jump branch
    auto f = [&](cplx x) { return eps - band_value(p, x, sa) - band_value(p, P - x, sb); };
    for (int it = 0; it < 8 && best > 1e-13; ++it) {
      const double h = 1e-6;
      cplx d = (f(k + h) - f(k - h)) / (2 * h);
      if (std::abs(d) == 0) break;
      cplx step = f(k) / d;
      if (std::abs(step) > 1e-5 * std::max(1.0, std::abs(k))) break;
      double r = std::abs(f(k - step));
      if (!(r < best)) break;
      k -= step;
      best = r;
    }
    out.k.push_back(k);
    out.max_backsub = std::max(out.max_backsub, best);
  }
  return out;
}

std::vector<ChoyHaldaneComponent> generic_components(const ModelParams& p, double P, double eps) {
  auto roots = energy_roots(p, P, eps);
  std::vector<ChoyHaldaneComponent> out;
  for (auto& k : roots.k) {
    ChoyHaldaneComponent c;
    c.k = k;
    c.q = P - k;
    c.s = std::exp(-I * k * double(p.n));
    c.u_tilde = fictitious_interaction(c.k, c.q, c.s, p.j1);
    out.push_back(c);
  }
  while (out.size() < 4) {
    ChoyHaldaneComponent c;
    c.active = false;
    c.k = c.q = c.s = c.u_tilde = 0.0;
    out.push_back(c);
  }
  return out;
}

WeightSolution weight_system(const ModelParams& p, double /*P*/,
                             const std::vector<ChoyHaldaneComponent>& comps, double eps) {
  auto sol = span_solve(p, comps, eps);
  double scale = std::max(1.0, std::abs(eps));
  if (sol.sigmas(0) > 1e-6 * scale)
    throw Error(ErrorKind::NoNontrivialSolution,
                "smallest residual " + std::to_string(sol.sigmas(0)) + " at eps " +
                    std::to_string(eps));
  WeightSolution w;
  w.energy = eps;
  w.sigma = sol.sigmas(0);
  TwoExcitationState sum(p.n);
  for (size_t i = 0; i < comps.size(); ++i) sum += sol.coeffs(i, 0) * sol.states[i];
  double norm = std::sqrt(weighted_norm2(sum));
  for (size_t i = 0; i < comps.size(); ++i) {
    cplx l = sol.coeffs(i, 0) / norm;
    const auto& t = sol.terms[i];
    w.lambdas.push_back(l);
    w.lambdas_prime.push_back(l * t.lam_p);
    w.lambdas_dprime.push_back(l * t.lam_pp);
    w.kappas.push_back(t.kappa);
    w.active.push_back(comps[i].active);
    w.offset_used = w.offset_used || (comps[i].active && t.offset);
  }
  return w;
}

TwoExcitationState assemble_eigenstate(const ModelParams& p, double /*P*/,
                                       const std::vector<ChoyHaldaneComponent>& comps,
                                       const WeightSolution& w) {
  if (w.lambdas.size() != comps.size() || w.lambdas_prime.size() != comps.size() ||
      w.lambdas_dprime.size() != comps.size() || w.kappas.size() != comps.size())
    throw Error(ErrorKind::InconsistentWeights, "weight and component counts differ");
  TwoExcitationState s(p.n);
  for (size_t i = 0; i < comps.size(); ++i) {
    if (!comps[i].active) continue;
    ChoyHaldaneComponent anti = comps[i];
    anti.symmetric = false;
    CMat hcm = choy_haldane_matrix(p.n, comps[i]), hcp = choy_haldane_matrix(p.n, anti);
    s.A += w.lambdas[i] * hcm;
    s.C += w.lambdas_prime[i] * hcm;
    s.B += w.lambdas_dprime[i] * (hcm + w.kappas[i] * hcp);
  }
  if (p.u1_infinite) s.A.diagonal().setZero();
  if (p.u2_infinite) s.C.diagonal().setZero();
  s = normalize_state(s);
  s.energy = w.energy;
  return s;
}

std::vector<AnalyticState> solve_generic_sector(const ModelParams& p, int r, int grid) {
  p.validate();
  if (std::abs(p.omega) < 1e-300)
    throw Error(ErrorKind::Unsupported, "generic solver needs Omega != 0");
  const int n = p.n;
  r = ((r % n) + n) % n;
  const double P = 2 * kPi * r / n;
  if (2 * r == n)
    throw Error(ErrorKind::Unsupported, "generic route does not cover P = pi");
  const double lim = 4 * (std::abs(p.j1) + std::abs(p.j2)) + 2 * std::abs(p.delta) +
                     4 * std::abs(p.omega) + std::abs(p.u1_infinite ? 0.0 : p.u1) +
                     std::abs(p.u2_infinite ? 0.0 : p.u2) + std::abs(p.u3) + 1.0;
  const int m = grid > 0 ? grid : std::max(2000, static_cast<int>(200 * lim));

  auto sigma = [&](double eps) {
    try {
      auto comps = generic_components(p, P, eps);
      return span_solve(p, comps, eps).sigmas(0);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  std::vector<double> xs(m + 1), ys(m + 1);
  for (int i = 0; i <= m; ++i) {
    xs[i] = -lim + 2 * lim * i / m;
    ys[i] = sigma(xs[i]);
  }
  std::vector<AnalyticState> out;
  std::vector<double> found;
  const double g = 0.5 * (std::sqrt(5.0) - 1);
  for (int i = 1; i < m; ++i) {
    if (!(ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1]) || !std::isfinite(ys[i])) continue;
    double a = xs[i - 1], b = xs[i + 1];
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = sigma(c), fd = sigma(d);
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = sigma(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = sigma(d);
      }
    }
    double eps = fc < fd ? c : d;
    if (std::min(fc, fd) > 1e-6 * std::max(1.0, lim)) continue;
    // Rayleigh quotient of the span solution: error quadratic in the residual
    for (int it = 0; it < 6; ++it) {
      try {
        auto comps = generic_components(p, P, eps);
        auto sol = span_solve(p, comps, eps);
        TwoExcitationState s(n);
        for (size_t i = 0; i < comps.size(); ++i) s += sol.coeffs(i, 0) * sol.states[i];
        double next = weighted_inner(s, apply_hamiltonian(p, s)).real() / weighted_norm2(s);
        bool done = std::abs(next - eps) < 1e-15 * std::max(1.0, std::abs(eps));
        eps = next;
        if (done) break;
      } catch (const Error&) {
        break;
      }
    }
    bool seen = false;
    for (double f : found) seen = seen || std::abs(f - eps) < 1e-9;
    if (seen) continue;
    found.push_back(eps);
    std::vector<ChoyHaldaneComponent> comps;
    SpanSolve sol;
    try {
      comps = generic_components(p, P, eps);
      sol = span_solve(p, comps, eps);
    } catch (const Error&) {
      continue;
    }
    for (int j = 0; j < sol.sigmas.size(); ++j) {
      if (sol.sigmas(j) > 1e-6 * std::max(1.0, lim)) break;
      TwoExcitationState s(n);
      for (size_t i = 0; i < comps.size(); ++i) s += sol.coeffs(i, j) * sol.states[i];
      AnalyticState st;
      st.state = normalize_state(s);
      st.state.energy = eps;
      st.state.momentum_index = r;
      st.kind = StateKind::generic;
      st.components = comps;
      double nrm = std::sqrt(weighted_norm2(s));
      for (size_t i = 0; i < comps.size(); ++i) st.weights.push_back(sol.coeffs(i, j) / nrm);
      st.residual = residual_max(p, st.state, eps);
      if (st.residual < 1e-8) out.push_back(std::move(st));
    }
  }
  if (r == 0) {
    // parity-odd states at P = 0: A = C = 0, B antisymmetric plane wave
    for (int j = 1; 2 * j < n; ++j) {
      ChoyHaldaneComponent c;
      c.k = 2 * kPi * j / n;
      c.q = -c.k;
      c.s = 1.0;
      c.u_tilde = 0.0;
      c.symmetric = false;
      AnalyticState st;
      TwoExcitationState s(n);
      s.B = choy_haldane_matrix(n, c);
      double eps = p.delta - 2 * (p.j1 + p.j2) * std::cos(c.k.real());
      st.state = normalize_state(s);
      st.state.energy = eps;
      st.state.momentum_index = 0;
      st.kind = StateKind::type3;
      st.components = {c};
      st.weights = {1.0};
      st.residual = residual_max(p, st.state, eps);
      out.push_back(std::move(st));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const AnalyticState& x, const AnalyticState& y) {
    return *x.state.energy < *y.state.energy;
  });
  return out;
}

}  // namespace cbh
