#include "cbh/ed.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cbh {

namespace {

int slot(PairTag tag, int n, int i, int j) { return (static_cast<int>(tag) * n + i) * n + j; }

// Two-boson Fock state as a sorted pair of modes; mode = species * N + site.
struct Fock {
  int x, y;
};

Fock label_to_fock(const BasisLabel& l, int n) {
  switch (l.tag) {
    case PairTag::aa: return {l.n, l.m};
    case PairTag::ab: return {l.n, n + l.m};
    case PairTag::bb: return {n + l.n, n + l.m};
  }
  return {0, 0};
}

int fock_to_index(Fock f, const TwoExcitationBasis& b) {
  int n = b.n;
  int x = std::min(f.x, f.y), y = std::max(f.x, f.y);
  if (y < n) return b.index(PairTag::aa, x, y);
  if (x >= n) return b.index(PairTag::bb, x - n, y - n);
  return b.index(PairTag::ab, x, y - n);
}

// c+_to c_from |f>, appended to out as (amplitude, state)
void hop(int to, int from, Fock f, double amp, std::vector<std::pair<double, Fock>>& out) {
  int nfrom = (f.x == from) + (f.y == from);
  if (nfrom == 0) return;
  // remove one particle from `from`
  int rest = (f.x == from) ? f.y : f.x;
  double a = std::sqrt(static_cast<double>(nfrom));
  int nto = (rest == to) ? 1 : 0;
  a *= std::sqrt(static_cast<double>(nto + 1));
  out.push_back({amp * a, Fock{std::min(rest, to), std::max(rest, to)}});
}

template <class Shift>
std::vector<SparseColumn> orbit_columns(int count, int n, int r, Shift shift,
                                        const std::vector<bool>& allowed) {
  std::vector<SparseColumn> cols;
  std::vector<bool> seen(count, false);
  double P = 2.0 * kPi * r / n;
  for (int key = 0; key < count; ++key) {
    if (seen[key] || !allowed[key]) continue;
    std::map<int, cplx> coef;
    int cur = key;
    double sign = 1.0;
    for (int j = 0; j < n; ++j) {
      coef[cur] += sign * std::polar(1.0, P * j);
      seen[cur] = true;
      auto [next, s] = shift(cur);
      cur = next;
      sign *= s;
    }
    double norm2 = 0;
    for (auto& [k, v] : coef) norm2 += std::norm(v);
    if (norm2 < 1e-16) continue;
    SparseColumn col;
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& [k, v] : coef)
      if (std::abs(v) > 1e-12) col.push_back({k, v * inv});
    cols.push_back(std::move(col));
  }
  return cols;
}

}  // namespace

int TwoExcitationBasis::index(PairTag tag, int i, int j) const {
  if (tag != PairTag::ab && i > j) std::swap(i, j);
  return lookup[slot(tag, n, i, j)];
}

TwoExcitationBasis build_basis(int n) { return build_basis(n, false, false); }

TwoExcitationBasis build_basis(int n, bool hard_a, bool hard_b) {
  if (n < 2) throw Error(ErrorKind::BadSize, "basis needs N >= 2");
  TwoExcitationBasis b;
  b.n = n;
  b.hard_a = hard_a;
  b.hard_b = hard_b;
  b.lookup.assign(3 * n * n, -1);
  auto add = [&](PairTag t, int i, int j) {
    b.lookup[slot(t, n, i, j)] = b.dimension();
    b.entries.push_back({t, i, j});
  };
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (!(hard_a && i == j)) add(PairTag::aa, i, j);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) add(PairTag::ab, i, j);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (!(hard_b && i == j)) add(PairTag::bb, i, j);
  return b;
}

TwoExcitationBasis build_basis(const ModelParams& p) {
  p.validate();
  return build_basis(p.n, p.u1_infinite, p.u2_infinite);
}

CVec to_vector(const TwoExcitationState& s, const TwoExcitationBasis& basis) {
  CVec v(basis.dimension());
  const double r2 = std::sqrt(2.0);
  for (int k = 0; k < basis.dimension(); ++k) {
    const auto& l = basis.entries[k];
    switch (l.tag) {
      case PairTag::aa: v(k) = l.n == l.m ? r2 * s.A(l.n, l.n) : 2.0 * s.A(l.n, l.m); break;
      case PairTag::ab: v(k) = s.B(l.n, l.m); break;
      case PairTag::bb: v(k) = l.n == l.m ? r2 * s.C(l.n, l.n) : 2.0 * s.C(l.n, l.m); break;
    }
  }
  return v;
}

TwoExcitationState from_vector(const CVec& v, const TwoExcitationBasis& basis) {
  TwoExcitationState s(basis.n);
  const double r2 = std::sqrt(2.0);
  for (int k = 0; k < basis.dimension(); ++k) {
    const auto& l = basis.entries[k];
    switch (l.tag) {
      case PairTag::aa: s.set_a(l.n, l.m, l.n == l.m ? v(k) / r2 : v(k) / 2.0); break;
      case PairTag::ab: s.B(l.n, l.m) = v(k); break;
      case PairTag::bb: s.set_c(l.n, l.m, l.n == l.m ? v(k) / r2 : v(k) / 2.0); break;
    }
  }
  return s;
}

HamiltonianMatrix build_hamiltonian(const ModelParams& p) {
  HamiltonianMatrix h;
  h.params = p;
  h.basis = build_basis(p);
  const int n = p.n, dim = h.basis.dimension();
  std::vector<Eigen::Triplet<cplx>> trip;
  std::vector<std::pair<double, Fock>> out;
  for (int col = 0; col < dim; ++col) {
    Fock f = label_to_fock(h.basis.entries[col], n);
    out.clear();
    for (int i = 0; i < n; ++i) {
      int ip = (i + 1) % n;
      // -J sum_i (c+_{i+1} c_i + h.c.) for each species
      hop(ip, i, f, -p.j1, out);
      hop(i, ip, f, -p.j1, out);
      hop(n + ip, n + i, f, -p.j2, out);
      hop(n + i, n + ip, f, -p.j2, out);
      // Omega (a+_i b_i + b+_i a_i)
      hop(i, n + i, f, p.omega, out);
      hop(n + i, i, f, p.omega, out);
    }
    // on-site terms are diagonal in the Fock basis
    int na_same = 0, nb_same = 0, nab = 0, na = 0;
    for (int x : {f.x, f.y}) na += x < n;
    if (f.x == f.y) (f.x < n ? na_same : nb_same) = 1;
    if (f.x < n && f.y >= n && f.y - n == f.x) nab = 1;
    double diag = p.delta * na;
    if (!p.u1_infinite) diag += p.u1 * na_same;
    if (!p.u2_infinite) diag += p.u2 * nb_same;
    diag += p.u3 * nab;
    if (diag != 0.0) trip.emplace_back(col, col, diag);
    for (auto& [amp, g] : out) {
      int row = fock_to_index(g, h.basis);
      if (row >= 0 && amp != 0.0) trip.emplace_back(row, col, amp);
    }
  }
  h.entries.resize(dim, dim);
  h.entries.setFromTriplets(trip.begin(), trip.end());
  return h;
}

TwoExcitationState apply_hamiltonian(const ModelParams& p, const TwoExcitationState& s) {
  const int n = s.sites();
  CMat T = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    T(i, (i + 1) % n) += 1.0;
    T(i, (i + n - 1) % n) += 1.0;
  }
  CMat A = s.A, C = s.C;
  if (p.u1_infinite) A.diagonal().setZero();
  if (p.u2_infinite) C.diagonal().setZero();
  CMat bs = s.b_sym();
  TwoExcitationState r(n);
  r.A = 2.0 * p.delta * A - p.j1 * (T * A + A * T) + p.omega * bs;
  r.B = p.delta * s.B - p.j1 * (T * s.B) - p.j2 * (s.B * T) + 2.0 * p.omega * (A + C);
  r.C = -p.j2 * (T * C + C * T) + p.omega * bs;
  for (int i = 0; i < n; ++i) {
    r.A(i, i) += p.u1_infinite ? -r.A(i, i) : p.u1 * A(i, i);
    r.C(i, i) += p.u2_infinite ? -r.C(i, i) : p.u2 * C(i, i);
    r.B(i, i) += p.u3 * s.B(i, i);
  }
  return r;
}

double residual_max(const ModelParams& p, const TwoExcitationState& s, double eps) {
  TwoExcitationState x = s;
  if (p.u1_infinite) x.A.diagonal().setZero();
  if (p.u2_infinite) x.C.diagonal().setZero();
  TwoExcitationState hx = apply_hamiltonian(p, x);
  return max_abs_diff(hx, cplx(eps) * x);
}

double hermiticity_error(const SparseC& h) {
  SparseC d = h - SparseC(h.adjoint());
  double m = 0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseC::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

namespace {

int shifted_index(const TwoExcitationBasis& b, int k) {
  const auto& l = b.entries[k];
  int n = b.n;
  return b.index(l.tag, (l.n + 1) % n, (l.m + 1) % n);
}

}  // namespace

SparseC translation_matrix(const TwoExcitationBasis& basis) {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int k = 0; k < basis.dimension(); ++k) trip.emplace_back(shifted_index(basis, k), k, 1.0);
  SparseC t(basis.dimension(), basis.dimension());
  t.setFromTriplets(trip.begin(), trip.end());
  return t;
}

std::vector<SparseColumn> momentum_columns(const TwoExcitationBasis& basis, int r) {
  std::vector<bool> all(basis.dimension(), true);
  return orbit_columns(
      basis.dimension(), basis.n, r,
      [&](int k) { return std::pair<int, double>{shifted_index(basis, k), 1.0}; }, all);
}

CMat sector_matrix(const HamiltonianMatrix& h, int r) {
  auto cols = momentum_columns(h.basis, r);
  const int d = static_cast<int>(cols.size());
  const int dim = h.basis.dimension();
  std::vector<int> owner(dim, -1);
  std::vector<cplx> weight(dim);
  for (int a = 0; a < d; ++a)
    for (auto& [k, v] : cols[a]) {
      owner[k] = a;
      weight[k] = v;
    }
  CMat hr = CMat::Zero(d, d);
  for (int b = 0; b < d; ++b)
    for (auto& [k, v] : cols[b])
      for (SparseC::InnerIterator it(h.entries, k); it; ++it) {
        int row = static_cast<int>(it.row());
        if (owner[row] >= 0) hr(owner[row], b) += std::conj(weight[row]) * it.value() * v;
      }
  return hr;
}

std::vector<EigenPair> diagonalize_sector(const HamiltonianMatrix& h, int r) {
  const int n = h.basis.n;
  r = ((r % n) + n) % n;
  CMat hr = sector_matrix(h, r);
  double herr = (hr - hr.adjoint()).cwiseAbs().maxCoeff();
  if (herr > 1e-12 * std::max(1.0, hr.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::NonHermitian, "sector matrix deviates by " + std::to_string(herr));
  Eigen::SelfAdjointEigenSolver<CMat> es(hr);
  auto cols = momentum_columns(h.basis, r);
  std::vector<EigenPair> out;
  for (int i = 0; i < hr.rows(); ++i) {
    EigenPair e;
    e.energy = es.eigenvalues()(i);
    e.momentum_index = r;
    e.vec = CVec::Zero(h.basis.dimension());
    for (int a = 0; a < hr.rows(); ++a)
      for (auto& [k, v] : cols[a]) e.vec(k) += es.eigenvectors()(a, i) * v;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<EigenPair> diagonalize_all(const HamiltonianMatrix& h) {
  if (hermiticity_error(h.entries) > 1e-12)
    throw Error(ErrorKind::NonHermitian, "Hamiltonian is not Hermitian");
  std::vector<EigenPair> all;
  for (int r = 0; r < h.basis.n; ++r) {
    auto s = diagonalize_sector(h, r);
    std::move(s.begin(), s.end(), std::back_inserter(all));
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const EigenPair& a, const EigenPair& b) { return a.energy < b.energy; });
  return all;
}

TwoExcitationState eigenstate(const EigenPair& e, const TwoExcitationBasis& basis) {
  TwoExcitationState s = from_vector(e.vec, basis);
  s.energy = e.energy;
  s.momentum_index = e.momentum_index;
  return s;
}

SectorClassDims sector_class_dims(int n, int r) {
  r = ((r % n) + n) % n;
  // keys: ordered pairs (i, j) -> i * n + j
  auto shift_sym = [n](int key) {
    int i = key / n, j = key % n;
    int a = (i + 1) % n, b = (j + 1) % n;
    return std::pair<int, double>{std::min(a, b) * n + std::max(a, b), 1.0};
  };
  auto shift_anti = [n](int key) {
    int i = key / n, j = key % n;
    int a = (i + 1) % n, b = (j + 1) % n;
    return std::pair<int, double>{std::min(a, b) * n + std::max(a, b), a < b ? 1.0 : -1.0};
  };
  std::vector<bool> full(n * n, false), off(n * n, false);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      full[i * n + j] = true;
      off[i * n + j] = i < j;
    }
  SectorClassDims d;
  d.sym_full = static_cast<int>(orbit_columns(n * n, n, r, shift_sym, full).size());
  d.sym_hc = static_cast<int>(orbit_columns(n * n, n, r, shift_sym, off).size());
  d.anti = static_cast<int>(orbit_columns(n * n, n, r, shift_anti, off).size());
  return d;
}

}  // namespace cbh
