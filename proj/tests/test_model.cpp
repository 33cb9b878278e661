#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cbh/model.hpp"

using namespace cbh;

TEST_CASE("dispersion pair") {
  ModelParams p;
  auto [w, wp] = dispersion_pair(p, 0.0);
  CHECK(w == doctest::Approx(-2.0));
  CHECK(wp == doctest::Approx(-2.0));

  p.delta = 1;
  p.j1 = 0;
  std::tie(w, wp) = dispersion_pair(p, kPi);
  CHECK(w == doctest::Approx(1.0));
  CHECK(wp == doctest::Approx(2.0));

  p.delta = 0;
  p.j1 = 2;
  std::tie(w, wp) = dispersion_pair(p, kPi / 2);
  CHECK(std::abs(w) < 1e-15);
  CHECK(std::abs(wp) < 1e-15);
}

TEST_CASE("single excitation bands") {
  ModelParams p;
  p.omega = 0.7;
  auto s = single_excitation_solve(p, 0.3);
  CHECK(s.eps_minus == doctest::Approx(-2 * std::cos(0.3) - 0.7).epsilon(1e-13));
  CHECK(s.eps_plus == doctest::Approx(-2 * std::cos(0.3) + 0.7).epsilon(1e-13));

  p.omega = 0;
  p.delta = 1.5;
  s = single_excitation_solve(p, 1.0);
  CHECK(s.eps_minus == doctest::Approx(std::min(s.omega, s.omega_prime)));
  CHECK(s.eps_plus == doctest::Approx(std::max(s.omega, s.omega_prime)));

  // J1/2 = J2 = Omega
  p = ModelParams{};
  p.j1 = 2;
  p.omega = 1;
  s = single_excitation_solve(p, 0.0);
  CHECK(s.eps_minus == doctest::Approx(-3 - std::sqrt(2.0)).epsilon(1e-13));
  CHECK(s.eps_plus == doctest::Approx(-3 + std::sqrt(2.0)).epsilon(1e-13));
  Eigen::Matrix2d h;
  h << s.omega, p.omega, p.omega, s.omega_prime;
  CHECK((h * s.mix_plus - s.eps_plus * s.mix_plus).norm() < 1e-13);
}

TEST_CASE("band sum and product identities over random draws") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    ModelParams p;
    p.j1 = u(rng);
    p.j2 = u(rng);
    p.omega = u(rng);
    p.delta = u(rng);
    double k = u(rng);
    auto s = single_excitation_solve(p, k);
    CHECK(s.eps_minus <= s.eps_plus);
    CHECK(std::abs(s.eps_plus + s.eps_minus - s.omega - s.omega_prime) < 1e-12);
    CHECK(std::abs(s.eps_plus * s.eps_minus - (s.omega * s.omega_prime - p.omega * p.omega)) <
          1e-11);
    auto a = dispersion_pair(p, k);
    auto b = dispersion_pair(p, k + 2 * kPi);
    CHECK(std::abs(a.first - b.first) < 1e-13);
    CHECK(std::abs(a.second - b.second) < 1e-13);
  }
}

TEST_CASE("normalization") {
  TwoExcitationState s(3);
  s.B(0, 0) = 1;
  auto r = normalize_state(s);
  CHECK(std::abs(r.B(0, 0) - 1.0) < 1e-15);

  TwoExcitationState a(3);
  a.set_a(0, 0, 1.0);
  r = normalize_state(a);
  CHECK(std::abs(r.A(0, 0) - 1.0 / std::sqrt(2.0)) < 1e-15);

  CHECK_THROWS_AS(normalize_state(TwoExcitationState(3)), Error);

  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  TwoExcitationState x(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      x.set_a(i, j, {g(rng), g(rng)});
      x.B(i, j) = {g(rng), g(rng)};
      x.set_c(i, j, {g(rng), g(rng)});
    }
  auto once = normalize_state(x);
  auto twice = normalize_state(once);
  CHECK(std::abs(weighted_norm2(once) - 1) < 1e-14);
  CHECK(max_abs_diff(once, twice) < 1e-14);
  CHECK((once.A - once.A.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((once.b_sym() + once.b_anti() - once.B).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("params json round trip and validation") {
  ModelParams p;
  p.n = 7;
  p.u1 = 3;
  p.u2_infinite = true;
  nlohmann::json j = p;
  CHECK(j.size() == 10);
  ModelParams q = j.get<ModelParams>();
  CHECK(q.n == 7);
  CHECK(q.u1 == 3);
  CHECK(q.u2_infinite);

  nlohmann::json bad = {{"n", 4}, {"omgea", 1.0}};
  try {
    (void)bad.get<ModelParams>();
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("omgea") != std::string::npos);
  }
  ModelParams small;
  small.n = 1;
  CHECK_THROWS_AS(small.validate(), Error);
}

TEST_CASE("lattice momentum representative") {
  CHECK(lattice_momentum(0, 10) == 0.0);
  CHECK(lattice_momentum(5, 10) == doctest::Approx(kPi));
  CHECK(lattice_momentum(6, 10) == doctest::Approx(-0.8 * kPi));
  CHECK(lattice_momentum(-1, 10) == doctest::Approx(-0.2 * kPi));
}
