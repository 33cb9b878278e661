// Quench dynamics in the two-excitation sector.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbh/ed.hpp"
#include "cbh/observables.hpp"

namespace cbh {

// Column order of Trajectory::series and of the CSV export.
inline const std::vector<std::string> kSeriesNames = {"ipr",  "S0",   "S1",       "S2",   "S",
                                                      "n_db", "n_db_plain", "norm", "energy"};

struct Trajectory {
  std::vector<double> times;
  std::vector<TwoExcitationState> states;  // empty unless requested
  std::vector<std::pair<std::string, std::vector<double>>> series;

  const std::vector<double>& column(const std::string& name) const;
};

enum class EvolveMethod { spectral, integrator };

// Full spectrum of one Hamiltonian, needed by the spectral route.
struct Diagonalization {
  HamiltonianMatrix h;
  std::vector<EigenPair> pairs;
};
Diagonalization diagonalize(const ModelParams& p);

struct EvolveOptions {
  EvolveMethod method = EvolveMethod::spectral;
  double dt = 0;  // integrator step; 0 picks 0.01 / bound
  bool store_states = false;
  EntanglementMode entropy_mode = EntanglementMode::coupled;
};

// Spectral needs diag (DiagonalizationMissing otherwise). The integrator is classic
// RK4 with dt <= 0.01 / max|E| (StepTooLarge otherwise).
Trajectory evolve(const TwoExcitationState& initial, const ModelParams& p,
                  const std::vector<double>& times, const EvolveOptions& opt = {},
                  const Diagonalization* diag = nullptr);

// "ab00" = a_0^dag b_0^dag |0>, "aa00" = a_0^dag a_0^dag |0> / sqrt 2
TwoExcitationState initial_state(const ModelParams& p, const std::string& name);

// Mean and population standard deviation over t0 <= t <= t1 (at least 10 samples).
std::pair<double, double> late_time_stats(const Trajectory& traj, const std::string& series,
                                          double t0, double t1);

// Angular frequency of the largest Fourier peak of the mean-subtracted series on [t0, t1].
double dominant_frequency(const std::vector<double>& times, const std::vector<double>& values,
                          double t0, double t1);

}  // namespace cbh
