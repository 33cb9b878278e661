#include "cbh/model.hpp"

#include <cmath>
#include <algorithm>

namespace cbh {

const char* error_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::BadSize: return "BadSize";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::ZeroState: return "ZeroState";
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::SingularDenominator: return "SingularDenominator";
    case ErrorKind::RootCountMismatch: return "RootCountMismatch";
    case ErrorKind::NoRoots: return "NoRoots";
    case ErrorKind::NoNontrivialSolution: return "NoNontrivialSolution";
    case ErrorKind::InconsistentWeights: return "InconsistentWeights";
    case ErrorKind::BranchNotFound: return "BranchNotFound";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::PoleEncountered: return "PoleEncountered";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::WrongMode: return "WrongMode";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::DiagonalizationMissing: return "DiagonalizationMissing";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::Config: return "Config";
  }
  return "Error";
}

void ModelParams::validate() const {
  if (n < 2) throw Error(ErrorKind::BadSize, "N must be >= 2, got " + std::to_string(n));
  for (double v : {j1, j2, u1, u2, u3, omega, delta})
    if (!std::isfinite(v)) throw Error(ErrorKind::BadParams, "couplings must be finite");
}

bool ModelParams::symmetric(double tol) const {
  if (std::abs(j1 - j2) > tol || std::abs(delta) > tol) return false;
  if (u1_infinite != u2_infinite) return false;
  return u1_infinite || std::abs(u1 - u2) <= tol;
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"j1", p.j1},       {"j2", p.j2},
                     {"u1", p.u1},       {"u2", p.u2},
                     {"u3", p.u3},       {"omega", p.omega},
                     {"delta", p.delta}, {"n", p.n},
                     {"u1_infinite", p.u1_infinite}, {"u2_infinite", p.u2_infinite}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "params must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto& v = it.value();
    auto num = [&](double& dst) {
      if (!v.is_number()) throw Error(ErrorKind::Config, "key '" + key + "' must be a number");
      dst = v.get<double>();
    };
    auto flag = [&](bool& dst) {
      if (!v.is_boolean()) throw Error(ErrorKind::Config, "key '" + key + "' must be a boolean");
      dst = v.get<bool>();
    };
    if (key == "j1") num(p.j1);
    else if (key == "j2") num(p.j2);
    else if (key == "u1") num(p.u1);
    else if (key == "u2") num(p.u2);
    else if (key == "u3") num(p.u3);
    else if (key == "omega") num(p.omega);
    else if (key == "delta") num(p.delta);
    else if (key == "n") {
      if (!v.is_number_integer()) throw Error(ErrorKind::Config, "key 'n' must be an integer");
      p.n = v.get<int>();
    } else if (key == "u1_infinite") flag(p.u1_infinite);
    else if (key == "u2_infinite") flag(p.u2_infinite);
    else throw Error(ErrorKind::Config, "unknown key '" + key + "'");
  }
}

std::pair<double, double> dispersion_pair(const ModelParams& p, double k) {
  return {p.delta - 2.0 * p.j1 * std::cos(k), -2.0 * p.j2 * std::cos(k)};
}

SingleExcitationPair single_excitation_solve(const ModelParams& p, double k) {
  SingleExcitationPair r;
  r.k = k;
  std::tie(r.omega, r.omega_prime) = dispersion_pair(p, k);
  Eigen::Matrix2d h;
  h << r.omega, p.omega, p.omega, r.omega_prime;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
  r.eps_minus = es.eigenvalues()(0);
  r.eps_plus = es.eigenvalues()(1);
  r.mix_minus = es.eigenvectors().col(0);
  r.mix_plus = es.eigenvectors().col(1);
  return r;
}

TwoExcitationState::TwoExcitationState(int n)
    : A(CMat::Zero(n, n)), B(CMat::Zero(n, n)), C(CMat::Zero(n, n)) {}

TwoExcitationState& TwoExcitationState::operator+=(const TwoExcitationState& o) {
  A += o.A;
  B += o.B;
  C += o.C;
  return *this;
}

TwoExcitationState& TwoExcitationState::operator*=(cplx z) {
  A *= z;
  B *= z;
  C *= z;
  return *this;
}

TwoExcitationState operator+(TwoExcitationState a, const TwoExcitationState& b) { return a += b; }
TwoExcitationState operator-(TwoExcitationState a, const TwoExcitationState& b) {
  a.A -= b.A;
  a.B -= b.B;
  a.C -= b.C;
  return a;
}
TwoExcitationState operator*(cplx z, TwoExcitationState a) { return a *= z; }

double weighted_norm2(const TwoExcitationState& s) {
  return 2.0 * s.A.squaredNorm() + s.B.squaredNorm() + 2.0 * s.C.squaredNorm();
}

cplx weighted_inner(const TwoExcitationState& x, const TwoExcitationState& y) {
  cplx r = 2.0 * (x.A.array().conjugate() * y.A.array()).sum();
  r += (x.B.array().conjugate() * y.B.array()).sum();
  r += 2.0 * (x.C.array().conjugate() * y.C.array()).sum();
  return r;
}

double max_abs_diff(const TwoExcitationState& x, const TwoExcitationState& y) {
  double m = (x.A - y.A).cwiseAbs().maxCoeff();
  m = std::max(m, (x.B - y.B).cwiseAbs().maxCoeff());
  return std::max(m, (x.C - y.C).cwiseAbs().maxCoeff());
}

TwoExcitationState normalize_state(const TwoExcitationState& s) {
  double big = std::max({s.A.cwiseAbs().maxCoeff(), s.B.cwiseAbs().maxCoeff(),
                         s.C.cwiseAbs().maxCoeff()});
  if (!(big >= 1e-300)) throw Error(ErrorKind::ZeroState, "cannot normalize a zero state");
  // rescale first so tiny amplitudes do not underflow when squared
  TwoExcitationState r = s;
  r *= 1.0 / big;
  r *= 1.0 / std::sqrt(weighted_norm2(r));
  return r;
}

TwoExcitationState translate(const TwoExcitationState& s, int shift) {
  int n = s.sites();
  TwoExcitationState r(n);
  r.energy = s.energy;
  r.momentum_index = s.momentum_index;
  auto w = [n](int i) { return ((i % n) + n) % n; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r.A(w(i + shift), w(j + shift)) = s.A(i, j);
      r.B(w(i + shift), w(j + shift)) = s.B(i, j);
      r.C(w(i + shift), w(j + shift)) = s.C(i, j);
    }
  return r;
}

double lattice_momentum(int r, int n) {
  int rr = ((r % n) + n) % n;
  if (2 * rr > n) rr -= n;
  return 2.0 * kPi * rr / n;
}

}  // namespace cbh
