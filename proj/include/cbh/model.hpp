// Coupled Bose-Hubbard chain: parameters, single-excitation bands and the
// (A, B, C) representation of two-excitation states.
#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <json.hpp>

namespace cbh {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  BadSize,
  BadParams,
  ZeroState,
  NonHermitian,
  SingularDenominator,
  RootCountMismatch,
  NoRoots,
  NoNontrivialSolution,
  InconsistentWeights,
  BranchNotFound,
  ConvergenceFailure,
  PoleEncountered,
  NotNormalized,
  WrongMode,
  StepTooLarge,
  DiagonalizationMissing,
  EmptyWindow,
  Unsupported,
  Config,
};

const char* error_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ModelParams {
  double j1 = 1.0, j2 = 1.0;
  double u1 = 0.0, u2 = 0.0, u3 = 0.0;
  double omega = 0.0;
  double delta = 0.0;
  int n = 2;
  // hard-core mode per species: doubly occupied aa (bb) states are removed
  bool u1_infinite = false, u2_infinite = false;

  void validate() const;
  bool hardcore() const { return u1_infinite && u2_infinite; }
  // J1=J2, U1=U2 (or both hard-core), Delta=0
  bool symmetric(double tol = 1e-14) const;
};

void to_json(nlohmann::json& j, const ModelParams& p);
// Throws Error(Config) naming the first unknown or mistyped key.
void from_json(const nlohmann::json& j, ModelParams& p);

// (omega_k, omega'_k)
std::pair<double, double> dispersion_pair(const ModelParams& p, double k);

struct SingleExcitationPair {
  double k = 0;
  double omega = 0, omega_prime = 0;
  double eps_minus = 0, eps_plus = 0;
  Eigen::Vector2d mix_minus, mix_plus;  // (A_k, B_k) per branch
};

SingleExcitationPair single_excitation_solve(const ModelParams& p, double k);

// psi = sum A_nm a+_n a+_m + B_nm a+_n b+_m + C_nm b+_n b+_m over all n, m.
struct TwoExcitationState {
  CMat A, B, C;
  std::optional<double> energy;
  std::optional<int> momentum_index;

  TwoExcitationState() = default;
  explicit TwoExcitationState(int n);

  int sites() const { return static_cast<int>(B.rows()); }
  void set_a(int i, int j, cplx v) { A(i, j) = v; A(j, i) = v; }
  void set_c(int i, int j, cplx v) { C(i, j) = v; C(j, i) = v; }
  CMat b_sym() const { return (B + B.transpose()) / 2.0; }
  CMat b_anti() const { return (B - B.transpose()) / 2.0; }

  TwoExcitationState& operator+=(const TwoExcitationState& o);
  TwoExcitationState& operator*=(cplx z);
};

TwoExcitationState operator+(TwoExcitationState a, const TwoExcitationState& b);
TwoExcitationState operator-(TwoExcitationState a, const TwoExcitationState& b);
TwoExcitationState operator*(cplx z, TwoExcitationState a);

// sum 2|A|^2 + |B|^2 + 2|C|^2
double weighted_norm2(const TwoExcitationState& s);
cplx weighted_inner(const TwoExcitationState& x, const TwoExcitationState& y);
double max_abs_diff(const TwoExcitationState& x, const TwoExcitationState& y);
TwoExcitationState normalize_state(const TwoExcitationState& s);

// Shift every amplitude by `shift` sites: psi(n+shift, m+shift) <- psi(n, m).
TwoExcitationState translate(const TwoExcitationState& s, int shift);

// Representative of 2 pi r / N in (-pi, pi].
double lattice_momentum(int r, int n);

}  // namespace cbh
