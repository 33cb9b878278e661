// Exact diagonalization of the two-excitation sector.
#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "cbh/model.hpp"

namespace cbh {

enum class PairTag { aa, ab, bb };

struct BasisLabel {
  PairTag tag;
  int n, m;  // n <= m for aa and bb
};

struct TwoExcitationBasis {
  int n = 0;
  bool hard_a = false, hard_b = false;
  std::vector<BasisLabel> entries;
  std::vector<int> lookup;  // 3*n*n slots, -1 when absent

  int dimension() const { return static_cast<int>(entries.size()); }
  // aa/bb pairs are looked up order-independently; -1 if removed by hard-core
  int index(PairTag tag, int i, int j) const;
};

TwoExcitationBasis build_basis(int n);
TwoExcitationBasis build_basis(int n, bool hard_a, bool hard_b);
TwoExcitationBasis build_basis(const ModelParams& p);

// Orthonormal Fock coordinates: 2A_nm (n<m), sqrt2 A_nn, B_nm, same for C.
CVec to_vector(const TwoExcitationState& s, const TwoExcitationBasis& basis);
TwoExcitationState from_vector(const CVec& v, const TwoExcitationBasis& basis);

using SparseC = Eigen::SparseMatrix<cplx>;

struct HamiltonianMatrix {
  SparseC entries;
  ModelParams params;
  TwoExcitationBasis basis;

  CMat dense() const { return CMat(entries); }
};

// Built term by term from the second-quantized Hamiltonian.
HamiltonianMatrix build_hamiltonian(const ModelParams& p);

// Matrix-equation form of H acting on (A, B, C); hard-core diagonals projected out.
TwoExcitationState apply_hamiltonian(const ModelParams& p, const TwoExcitationState& s);
double residual_max(const ModelParams& p, const TwoExcitationState& s, double eps);

double hermiticity_error(const SparseC& h);
SparseC translation_matrix(const TwoExcitationBasis& basis);

// Orthonormal columns spanning total momentum P = 2 pi r / N, psi(n+1,m+1) = e^{iP} psi(n,m).
using SparseColumn = std::vector<std::pair<int, cplx>>;
std::vector<SparseColumn> momentum_columns(const TwoExcitationBasis& basis, int r);

struct EigenPair {
  double energy = 0;
  int momentum_index = -1;
  CVec vec;
};

std::vector<EigenPair> diagonalize_sector(const HamiltonianMatrix& h, int r);
// All sectors merged and sorted; each vector is still a translation eigenvector.
std::vector<EigenPair> diagonalize_all(const HamiltonianMatrix& h);
CMat sector_matrix(const HamiltonianMatrix& h, int r);

TwoExcitationState eigenstate(const EigenPair& e, const TwoExcitationBasis& basis);

// Orbit counts within one momentum sector, used as completeness targets:
// symmetric matrices with and without diagonal, and antisymmetric matrices.
struct SectorClassDims {
  int sym_full = 0, sym_hc = 0, anti = 0;
};
SectorClassDims sector_class_dims(int n, int r);

}  // namespace cbh
