// Choy-Haldane / Bethe machinery for the two-excitation sector.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbh/model.hpp"

namespace cbh {

struct ChoyHaldaneComponent {
  cplx k, q;          // k + q = P
  cplx s;             // scattering factor, e^{-ikN} at finite N
  cplx u_tilde;       // fictitious interaction (energy units); infinite when s = -1
  bool symmetric = true;
  bool active = true;  // false for escaped or duplicate roots
};

// [2J(sin k - sin q) - iU] / [2J(sin k - sin q) + iU]
cplx scattering_factor(cplx k, cplx q, cplx u_tilde, double j);
inline constexpr double kHardCoreS = -1.0;
// U~ recovered from s: s = (x - iU)/(x + iU) with x = 2J(sin k - sin q)
cplx fictitious_interaction(cplx k, cplx q, cplx s, double j);

// HC: e^{ikn+iqm} + s e^{iqn+ikm} for n <= m, mirrored.
// HC': e^{ikn+iqm} - s e^{iqn+ikm} for n < m, zero diagonal, anti-mirrored.
CMat choy_haldane_matrix(int n, const ChoyHaldaneComponent& c);

// Component of energy e = omega_k + omega_q (J1 = J2 = J, Delta = 0) at momentum
// P = 2 pi r / N. Requires cos(P/2) != 0.
ChoyHaldaneComponent component_at_energy(double e, int r, int n, double j);

// Pole-free quantization pair (n, h): a component of energy e closes with
// fictitious interaction U~ iff U~ n = h; hard-core iff n = 0.
std::pair<double, double> quantization_pair(double e, int r, int n, double j);

struct SingleSpeciesRoot {
  double energy = 0;
  cplx k, s;
  double bethe_residual = 0;  // |e^{-ikN} - s_{k,P-k}|
  bool flat = false;          // P = pi sector where relative hopping vanishes
};

// Species a alone (J1, U1, Delta); Omega is ignored.
std::vector<SingleSpeciesRoot> solve_single_species(const ModelParams& p, int r);

enum class StateKind { type1, type2, type3, generic, flat };
enum class Region { none, I, II, III, IV, V };
const char* kind_name(StateKind k);
const char* region_name(Region r);

struct AnalyticState {
  TwoExcitationState state;  // normalized, energy and momentum set
  StateKind kind = StateKind::generic;
  std::vector<ChoyHaldaneComponent> components;
  std::vector<cplx> weights;  // coefficient of each component in A
  Region region = Region::none;
  bool overlap = false;  // both type-2 components inside the band
  double residual = 0;   // max |H psi - eps psi|
};

// Complete set of eigenstates in one momentum sector for the symmetric case
// (J1 = J2, U1 = U2 or both hard-core, Delta = 0). Throws RootCountMismatch.
std::vector<AnalyticState> solve_symmetric_sector(const ModelParams& p, int r);

// Hard-core type-2 states with their region label (I..V).
std::vector<AnalyticState> region_enumerate_infU(const ModelParams& p, int r);

// ---- generic parameters ----

struct EnergyRoots {
  std::vector<cplx> k;  // one representative per pair (k, P - k), Im k <= 0
  int escaped = 0;      // pairs lost to infinity (leading coefficient vanished)
  int duplicates = 0;   // degenerate pairs dropped
  double max_backsub = 0;
};

// Quasi-momenta with eps = eps_k^a + eps_{P-k}^b for some band pair (a, b).
EnergyRoots energy_roots(const ModelParams& p, double P, double eps);

struct WeightSolution {
  std::vector<cplx> lambdas, lambdas_prime, lambdas_dprime, kappas;
  std::vector<bool> active;
  double energy = 0;
  double sigma = 0;           // smallest residual over unit states in the span
  bool offset_used = false;   // a degenerate denominator was shifted by 1e-9
};

// Four components built from energy_roots (inactive slots flagged).
std::vector<ChoyHaldaneComponent> generic_components(const ModelParams& p, double P, double eps);

WeightSolution weight_system(const ModelParams& p, double P,
                             const std::vector<ChoyHaldaneComponent>& comps, double eps);

TwoExcitationState assemble_eigenstate(const ModelParams& p, double P,
                                       const std::vector<ChoyHaldaneComponent>& comps,
                                       const WeightSolution& w);

// Scans eps, refines minima of the weight-system residual and keeps states whose
// Hamiltonian residual is below 1e-8. Requires Omega != 0.
std::vector<AnalyticState> solve_generic_sector(const ModelParams& p, int r, int grid = 0);

// ---- thermodynamic limit ----

enum class BranchId { below, middle, above };
const char* branch_name(BranchId b);

struct DoublonBranch {
  BranchId branch_id = BranchId::middle;
  int ordinal = 0;  // several roots in the same gap
  std::vector<std::pair<double, double>> samples;  // (P, eps)
  std::vector<double> decay_constants;             // smallest K per sample
  std::vector<double> group_velocity;              // d eps / dP
  std::vector<double> missing;  // grid momenta where the branch is absent (BranchNotFound)
};

// Symmetric closed forms, U3 = 0. nullopt when the branch does not exist at P.
// The middle relation is U = 2 sqrt(-) sqrt(+) / (sqrt(-) - sqrt(+)).
std::optional<double> closed_form_branch(const ModelParams& p, BranchId b, double P);

struct MomentumKernel {
  double eta = 0;
  Eigen::Matrix2d M;
};

// Needs U3 = 0 and finite U1, U2. Throws PoleEncountered when a denominator is
// within 1e-12 of zero.
MomentumKernel momentum_kernel(const ModelParams& p, double P, double eps, double q);

// det((1/N) sum_p M(p) - 1) over lattice momenta
double finite_kernel_condition(const ModelParams& p, int r, double eps);
// det(int dp/2pi M(p) - 1), trapezoid rule refined until converged. A hard-core
// species has its column divided by U, so the condition stays finite.
double kernel_condition(const ModelParams& p, double P, double eps);

// Continuum intervals of eps_k^a + eps_{P-k}^b, merged.
std::vector<std::pair<double, double>> continuum_intervals(const ModelParams& p, double P);

// Roots of kernel_condition outside the continua.
std::vector<double> det_route_energies(const ModelParams& p, double P);

// Eigenvalues of the on-site (J = 0) block: aa, ab, bb doubly occupied.
std::vector<double> onsite_energies(const ModelParams& p);

// Closed forms in the symmetric case, determinant route otherwise. Needs U3 = 0.
std::vector<DoublonBranch> doublon_branches(const ModelParams& p, const std::vector<double>& P_grid);

}  // namespace cbh
