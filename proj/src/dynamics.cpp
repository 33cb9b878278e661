#include "cbh/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace cbh {

namespace {

void record(Trajectory& tr, const SparseC& h,
            const TwoExcitationBasis& basis, double t, const CVec& v, const EvolveOptions& opt) {
  auto s = from_vector(v, basis);
  tr.times.push_back(t);
  double norm = v.squaredNorm();
  double energy = v.dot(h * v).real() / norm;
  auto ent = entanglement_entropy(s, opt.entropy_mode);
  const double vals[] = {ipr(s),          ent.S0,  ent.S1,        ent.S2, ent.S_total,
                         n_db(s),         n_db_plain(s), norm,    energy};
  for (size_t i = 0; i < kSeriesNames.size(); ++i) tr.series[i].second.push_back(vals[i]);
  if (opt.store_states) tr.states.push_back(std::move(s));
}

double gershgorin(const SparseC& h) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(h.rows());
  for (int k = 0; k < h.outerSize(); ++k)
    for (SparseC::InnerIterator it(h, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

const std::vector<double>& Trajectory::column(const std::string& name) const {
  for (auto& [n, v] : series)
    if (n == name) return v;
  throw Error(ErrorKind::BadParams, "unknown series '" + name + "'");
}

Diagonalization diagonalize(const ModelParams& p) {
  Diagonalization d;
  d.h = build_hamiltonian(p);
  d.pairs = diagonalize_all(d.h);
  return d;
}

Trajectory evolve(const TwoExcitationState& initial, const ModelParams& p,
                  const std::vector<double>& times, const EvolveOptions& opt,
                  const Diagonalization* diag) {
  p.validate();
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw Error(ErrorKind::BadParams, "times must be strictly increasing");
  if (!times.empty() && times.front() < 0)
    throw Error(ErrorKind::BadParams, "times must be non-negative");
  if (std::abs(weighted_norm2(initial) - 1) > kNormTolerance)
    throw Error(ErrorKind::NotNormalized, "initial state is not normalized");

  Trajectory tr;
  for (auto& n : kSeriesNames) tr.series.emplace_back(n, std::vector<double>{});

  if (opt.method == EvolveMethod::spectral) {
    if (!diag || static_cast<int>(diag->pairs.size()) != diag->h.basis.dimension())
      throw Error(ErrorKind::DiagonalizationMissing, "spectral evolution needs the full spectrum");
    const auto& basis = diag->h.basis;
    const int dim = basis.dimension();
    CMat v(dim, dim);
    Eigen::VectorXd e(dim);
    for (int i = 0; i < dim; ++i) {
      v.col(i) = diag->pairs[i].vec;
      e(i) = diag->pairs[i].energy;
    }
    CVec v0 = to_vector(initial, basis);
    CVec c = v.adjoint() * v0;
    for (double t : times) {
      if (t == 0) {
        record(tr, diag->h.entries, basis, t, v0, opt);
        continue;
      }
      CVec ph(dim);
      for (int i = 0; i < dim; ++i) ph(i) = c(i) * std::polar(1.0, -e(i) * t);
      record(tr, diag->h.entries, basis, t, v * ph, opt);
    }
    return tr;
  }

  auto h = diag ? diag->h : build_hamiltonian(p);
  double bound = diag ? 0.0 : gershgorin(h.entries);
  if (diag)
    for (auto& pr : diag->pairs) bound = std::max(bound, std::abs(pr.energy));
  const double dt_max = bound > 0 ? 0.01 / bound : 0.01;
  const double dt = opt.dt > 0 ? opt.dt : dt_max;
  if (dt > dt_max * (1 + 1e-12))
    throw Error(ErrorKind::StepTooLarge,
                "dt = " + std::to_string(dt) + " exceeds 0.01/max|E| = " + std::to_string(dt_max));
  const cplx mi(0, -1);
  auto rhs = [&](const CVec& y) -> CVec { return mi * (h.entries * y); };
  CVec y = to_vector(initial, h.basis);
  double t = 0;
  for (double target : times) {
    int steps = static_cast<int>(std::ceil((target - t) / dt - 1e-9));
    if (steps > 0) {
      double step = (target - t) / steps;
      for (int i = 0; i < steps; ++i) {
        CVec k1 = rhs(y);
        CVec k2 = rhs(y + 0.5 * step * k1);
        CVec k3 = rhs(y + 0.5 * step * k2);
        CVec k4 = rhs(y + step * k3);
        y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    t = target;
    record(tr, h.entries, h.basis, t, y, opt);
  }
  return tr;
}

TwoExcitationState initial_state(const ModelParams& p, const std::string& name) {
  TwoExcitationState s(p.n);
  if (name == "ab00") {
    s.B(0, 0) = 1.0;
  } else if (name == "aa00") {
    if (p.u1_infinite) throw Error(ErrorKind::BadParams, "aa00 is excluded in hard-core mode");
    s.A(0, 0) = 1.0 / std::sqrt(2.0);
  } else {
    throw Error(ErrorKind::BadParams, "unknown initial state '" + name + "'");
  }
  return s;
}

std::pair<double, double> late_time_stats(const Trajectory& traj, const std::string& series,
                                          double t0, double t1) {
  const auto& v = traj.column(series);
  double sum = 0, sum2 = 0;
  int cnt = 0;
  for (size_t i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] >= t0 && traj.times[i] <= t1) {
      sum += v[i];
      ++cnt;
    }
  if (cnt < 10)
    throw Error(ErrorKind::EmptyWindow, "window holds " + std::to_string(cnt) + " samples");
  double mean = sum / cnt;
  for (size_t i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] >= t0 && traj.times[i] <= t1) sum2 += (v[i] - mean) * (v[i] - mean);
  return {mean, std::sqrt(sum2 / cnt)};
}

double dominant_frequency(const std::vector<double>& times, const std::vector<double>& values,
                          double t0, double t1) {
  std::vector<double> t, x;
  for (size_t i = 0; i < times.size(); ++i)
    if (times[i] >= t0 && times[i] <= t1) {
      t.push_back(times[i]);
      x.push_back(values[i]);
    }
  if (t.size() < 4) throw Error(ErrorKind::EmptyWindow, "too few samples for a spectrum");
  double mean = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  const double span = t.back() - t.front();
  const double nyquist = kPi * (t.size() - 1) / span;
  // 8x zero-padded frequency grid, direct sum handles uneven sampling
  const int m = 8 * static_cast<int>(t.size());
  double best = 0, best_w = 0;
  for (int j = 1; j <= m; ++j) {
    double w = nyquist * j / m;
    cplx acc = 0;
    for (size_t i = 0; i < t.size(); ++i) acc += (x[i] - mean) * std::polar(1.0, -w * t[i]);
    if (std::norm(acc) > best) {
      best = std::norm(acc);
      best_w = w;
    }
  }
  return best_w;
}

}  // namespace cbh
