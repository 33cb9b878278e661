// Localization and species-entanglement diagnostics.
#pragma once

#include "cbh/model.hpp"

namespace cbh {

// Normalization tolerance shared by the observables (integrator drift stays below it).
inline constexpr double kNormTolerance = 1e-6;

// sum 4|A|^4 + |B|^4 + 4|C|^4 over all (n, m)
double ipr(const TwoExcitationState& s);
// sum |c|^4 over the orthonormal Fock basis; lies in [1/(2N^2+N), 1]
double ipr_basis(const TwoExcitationState& s);

enum class EntanglementMode { coupled, single_species };

struct EntanglementReport {
  double lambda_a = 0, lambda_c = 0;
  double S0 = 0, S1 = 0, S2 = 0, S_total = 0;  // nats
};

// Species cut. single_species needs B = C = 0, uses rho = 2 A A^dagger (unit trace)
// and reports only S_total.
EntanglementReport entanglement_entropy(const TwoExcitationState& s,
                                        EntanglementMode mode = EntanglementMode::coupled);

// sum_i |<a_i^dag b_i^dag a_i b_i>|^2 = sum |B_ii|^4
double n_db(const TwoExcitationState& s);
// sum |B_ii|^2
double n_db_plain(const TwoExcitationState& s);

}  // namespace cbh
