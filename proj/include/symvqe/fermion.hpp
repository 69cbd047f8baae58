#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symvqe/pauli.hpp"

namespace symvqe {

//=============================================================================
// Molecular integrals
//=============================================================================

/// One- and two-electron integrals over spatial orbitals (Hartree), plus the
/// nuclear repulsion energy. The two-electron tensor g is stored in chemists'
/// notation: g(i,j,k,l) = (ij|kl).
struct FermionIntegrals {
  int n_spatial = 0;
  Eigen::MatrixXd h;
  std::vector<double> g_data;
  double e_nuc = 0.0;
  std::string geometry_tag;

  double g(int i, int j, int k, int l) const {
    const int m = n_spatial;
    return g_data[((static_cast<std::size_t>(i) * m + j) * m + k) * m + l];
  }
  double& g(int i, int j, int k, int l) {
    const int m = n_spatial;
    return g_data[((static_cast<std::size_t>(i) * m + j) * m + k) * m + l];
  }
};

/// Read an FCIDUMP-style file: a namelist header carrying NORB and NELEC,
/// then "value i j k l" records with 1-based indices. Records with k = l = 0
/// are one-electron integrals, the all-zero record is the nuclear repulsion
/// energy, and two-electron records use chemists' index order. The 8-fold
/// permutation symmetry is expanded on load; explicitly conflicting records
/// beyond `tol` raise an error, as does a missing e_nuc record.
FermionIntegrals load_fcidump(const std::string& path, double tol = 1e-10);

//=============================================================================
// Second quantization
//=============================================================================

enum class Ladder { Create, Annihilate };

struct LadderOp {
  int mode = 0;
  Ladder kind = Ladder::Create;
};

struct FermionTerm {
  double coeff = 0.0;
  std::vector<LadderOp> ops;
};

/// Linear combination of ladder-operator products over spin orbitals.
/// Mode ordering is blocked: modes 0..n_spatial-1 are spin-up, the rest
/// spin-down.
struct FermionOperator {
  int n_modes = 0;
  std::vector<FermionTerm> terms;
};

/// True when every term's conjugate transpose appears with equal coefficient.
bool is_hermitian(const FermionOperator& op, double tol = 1e-10);

/// Expand the spatial integrals into the spin-orbital Hamiltonian
///   H = sum_ij h_ij a+_i a_j + sum_ijkl g_ijkl a+_i a+_j a_k a_l,
/// applying spin selection rules. The nuclear repulsion energy is not
/// folded in; it is carried separately to reported energies.
FermionOperator second_quantized(const FermionIntegrals& ints);

/// Map ladder operators to qubit operators with the standard Z string on
/// lower-index qubits, returning the simplified Pauli sum. Throws if the
/// input is not Hermitian (the result would have complex weights).
PauliSum jordan_wigner(const FermionOperator& op, double tol = 1e-10);

//=============================================================================
// Anticommutation oracle
//=============================================================================

struct AnticommutationReport {
  bool ok = false;
  double max_deviation = 0.0;
};

/// Verify {a_p, a+_q} = delta_pq I and {a_p, a_q} = 0 for all mode pairs by
/// mapping single ladder operators through the JW encoding and multiplying
/// dense matrices. Oracle scale: n_modes <= 6.
AnticommutationReport anticommutation_check(int n_modes);

}  // namespace symvqe
