#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cbh/dynamics.hpp"

using namespace cbh;

namespace {

std::vector<double> grid(double t0, double t1, double dt) {
  std::vector<double> t;
  for (int i = 0; t0 + i * dt <= t1 + 1e-9; ++i) t.push_back(t0 + i * dt);
  return t;
}

ModelParams quench(int n, double u, double omega, bool hc = false) {
  ModelParams p;
  p.n = n;
  p.u1 = p.u2 = u;
  p.omega = omega;
  p.u1_infinite = p.u2_infinite = hc;
  return p;
}

template <class F>
ErrorKind kind_of(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected error");
  return ErrorKind::BadParams;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("t = 0 returns the initial state") {
  auto p = quench(5, 3, 1.2);
  auto d = diagonalize(p);
  auto s0 = initial_state(p, "aa00");
  EvolveOptions opt;
  opt.store_states = true;
  auto tr = evolve(s0, p, {0.0, 1.0}, opt, &d);
  CHECK(max_abs_diff(tr.states[0], s0) == 0.0);
  opt.method = EvolveMethod::integrator;
  tr = evolve(s0, p, {0.0}, opt);
  CHECK(max_abs_diff(tr.states[0], s0) == 0.0);
}

TEST_CASE("spectral and integrator routes agree") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 3; ++i) {
    ModelParams p;
    p.n = 6;
    p.j1 = 1 + 0.5 * u(rng);
    p.j2 = u(rng);
    p.u1 = 3 * u(rng);
    p.u2 = 3 * u(rng);
    p.u3 = u(rng);
    p.omega = u(rng);
    p.delta = u(rng);
    auto d = diagonalize(p);
    EvolveOptions opt;
    opt.store_states = true;
    auto a = evolve(initial_state(p, "ab00"), p, {10.0}, opt, &d);
    opt.method = EvolveMethod::integrator;
    auto b = evolve(initial_state(p, "ab00"), p, {10.0}, opt);
    CHECK(max_abs_diff(a.states[0], b.states[0]) < 1e-6);
  }
}

TEST_CASE("norm and energy are conserved") {
  auto p = quench(6, 4, 2);
  p.j2 = 0.7;
  auto d = diagonalize(p);
  auto s0 = initial_state(p, "ab00");
  auto ts = grid(0, 400, 5);
  auto a = evolve(s0, p, ts, {}, &d);
  EvolveOptions opt;
  opt.method = EvolveMethod::integrator;
  auto b = evolve(s0, p, ts, opt);
  const double e0 = a.column("energy").front();
  for (size_t i = 0; i < ts.size(); ++i) {
    CHECK(std::abs(a.column("norm")[i] - 1) < 1e-10);
    CHECK(std::abs(a.column("energy")[i] - e0) < 1e-8);
    CHECK(std::abs(b.column("norm")[i] - 1) < 1e-6);
    CHECK(std::abs(b.column("energy")[i] - e0) < 1e-5);
  }
}

TEST_CASE("evolution errors") {
  auto p = quench(4, 2, 1);
  auto s0 = initial_state(p, "ab00");
  CHECK(kind_of([&] { evolve(s0, p, {1.0}); }) == ErrorKind::DiagonalizationMissing);
  EvolveOptions opt;
  opt.method = EvolveMethod::integrator;
  opt.dt = 0.5;
  CHECK(kind_of([&] { evolve(s0, p, {1.0}, opt); }) == ErrorKind::StepTooLarge);
  auto hc = quench(4, 0, 1, true);
  CHECK(kind_of([&] { initial_state(hc, "aa00"); }) == ErrorKind::BadParams);

  auto d = diagonalize(p);
  auto tr = evolve(s0, p, grid(0, 1, 0.2), {}, &d);
  CHECK(kind_of([&] { late_time_stats(tr, "n_db", 0, 1); }) == ErrorKind::EmptyWindow);
}

TEST_CASE("late-time statistics") {
  Trajectory tr;
  tr.times = grid(0, 5, 0.1);
  tr.series.emplace_back("x", std::vector<double>(tr.times.size(), 0.25));
  auto [m, s] = late_time_stats(tr, "x", 1, 4);
  CHECK(m == doctest::Approx(0.25));
  CHECK(s == 0.0);

  tr.series[0].second.clear();
  for (double t : tr.times) tr.series[0].second.push_back(std::sin(3 * t));
  CHECK(dominant_frequency(tr.times, tr.series[0].second, 0, 5) == doctest::Approx(3).epsilon(0.05));
}

TEST_CASE("strong coupling keeps a hard-core pair on its site") {
  auto p = quench(8, 0, 100, true);
  auto d = diagonalize(p);
  auto tr = evolve(initial_state(p, "ab00"), p, grid(0, 10, 0.5), {}, &d);
  for (double v : tr.column("n_db")) CHECK(v > 0.9);
}

TEST_CASE("large-time entropy and IPR move in opposite directions") {
  auto p = quench(10, 500, 10);
  auto d = diagonalize(p);
  auto tr = evolve(initial_state(p, "ab00"), p, grid(50, 400, 0.5), {}, &d);
  CHECK(pearson(tr.column("ipr"), tr.column("S")) < 0);
}

TEST_CASE("single-species pair mirrors the coupled entropy at U = -3U'") {
  auto c = quench(10, 500, 10);
  auto s = quench(10, -500.0 / 3, 0);
  auto ts = grid(0, 400, 0.02);
  auto dc = diagonalize(c), ds = diagonalize(s);
  auto a = evolve(initial_state(c, "ab00"), c, ts, {}, &dc);
  EvolveOptions opt;
  opt.entropy_mode = EntanglementMode::single_species;
  auto b = evolve(initial_state(s, "aa00"), s, ts, opt, &ds);
  const auto &x = a.column("S"), &y = b.column("S");

  // average over one period of the fast region-III/IV beat
  double w_fast = dominant_frequency(ts, x, 0, 2);
  const int half = static_cast<int>(std::round(kPi / w_fast / 0.02));
  std::vector<double> xs, ys;
  double raw = 0, smooth = 0, peak = 0;
  const int start = static_cast<int>(std::round(2 / 0.02));
  for (int i = start + half; i + half < static_cast<int>(ts.size()); ++i) {
    double mx = 0, my = 0;
    for (int j = -half; j <= half; ++j) mx += x[i + j], my += y[i + j];
    mx /= 2 * half + 1;
    my /= 2 * half + 1;
    xs.push_back(mx);
    ys.push_back(my);
    raw = std::max(raw, std::abs(x[i] - y[i]));
    smooth = std::max(smooth, std::abs(mx - my));
    peak = std::max(peak, mx);
  }
  MESSAGE("pointwise max |dS| = " << raw << ", smoothed max |dS| = " << smooth);
  CHECK(pearson(xs, ys) > 0.98);
  // the residual offset is the coupled model's initial buildup
  CHECK(smooth < 0.1 * peak);
}
