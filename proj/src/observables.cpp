#include "cbh/observables.hpp"

#include <cmath>

namespace cbh {

namespace {

void require_normalized(const TwoExcitationState& s) {
  double n2 = weighted_norm2(s);
  if (std::abs(n2 - 1) > kNormTolerance)
    throw Error(ErrorKind::NotNormalized, "weighted norm^2 = " + std::to_string(n2));
}

double xlogx(double x) { return x < 1e-14 ? 0.0 : -x * std::log(x); }

double entropy_of(const CMat& rho) {
  Eigen::SelfAdjointEigenSolver<CMat> es(rho, Eigen::EigenvaluesOnly);
  double s = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) s += xlogx(es.eigenvalues()(i));
  return s;
}

}  // namespace

double ipr(const TwoExcitationState& s) {
  require_normalized(s);
  auto q = [](const CMat& m) { return m.cwiseAbs2().cwiseAbs2().sum(); };
  return 4 * q(s.A) + q(s.B) + 4 * q(s.C);
}

double ipr_basis(const TwoExcitationState& s) {
  require_normalized(s);
  const int n = s.sites();
  double total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      total += std::pow(std::norm(s.B(i, j)), 2);
      if (i < j) {
        total += std::pow(4 * std::norm(s.A(i, j)), 2) + std::pow(4 * std::norm(s.C(i, j)), 2);
      } else if (i == j) {
        total += std::pow(2 * std::norm(s.A(i, i)), 2) + std::pow(2 * std::norm(s.C(i, i)), 2);
      }
    }
  return total;
}

EntanglementReport entanglement_entropy(const TwoExcitationState& s, EntanglementMode mode) {
  require_normalized(s);
  EntanglementReport r;
  r.lambda_a = 2 * s.A.squaredNorm();
  r.lambda_c = 2 * s.C.squaredNorm();
  if (mode == EntanglementMode::single_species) {
    if (s.B.cwiseAbs().maxCoeff() > 0 || s.C.cwiseAbs().maxCoeff() > 0)
      throw Error(ErrorKind::WrongMode, "single-species entropy needs B = C = 0");
    r.S_total = entropy_of(2.0 * s.A * s.A.adjoint());
    return r;
  }
  r.S0 = xlogx(r.lambda_a);
  r.S2 = xlogx(r.lambda_c);
  r.S1 = entropy_of(s.B * s.B.adjoint());
  r.S_total = r.S0 + r.S1 + r.S2;
  return r;
}

double n_db(const TwoExcitationState& s) {
  require_normalized(s);
  return s.B.diagonal().cwiseAbs2().cwiseAbs2().sum();
}

double n_db_plain(const TwoExcitationState& s) {
  require_normalized(s);
  return s.B.diagonal().cwiseAbs2().sum();
}

}  // namespace cbh
