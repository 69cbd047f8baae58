#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace symvqe {

using Complex = std::complex<double>;

//=============================================================================
// Pauli strings
//=============================================================================

/// Tensor product of single-qubit Pauli operators stored as X/Z bit masks.
///
/// Qubit 0 is the least-significant bit of both masks and the rightmost
/// character of the textual form, so "IXZ" acts with Z on qubit 0, X on
/// qubit 1 and identity on qubit 2. Per-qubit letter encoding is
/// I = (x 0, z 0), X = (1, 0), Z = (0, 1), Y = (1, 1).
struct PauliString {
  int n_qubits = 0;
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  static constexpr int kMaxQubits = 64;

  PauliString() = default;
  PauliString(int n, std::uint64_t x_mask, std::uint64_t z_mask);

  static PauliString identity(int n_qubits);
  static PauliString single(int n_qubits, int qubit, char letter);
  /// Inverse of render(); throws std::invalid_argument on bad letters.
  static PauliString parse(const std::string& text);

  char letter(int qubit) const;
  std::string render() const;

  bool is_identity() const { return x == 0 && z == 0; }
  /// Qubits on which the string acts non-trivially.
  std::uint64_t support() const { return x | z; }
  int weight() const;

  bool operator==(const PauliString&) const = default;
};

/// Order on the textual form; the identity string sorts first.
bool lexicographic_less(const PauliString& a, const PauliString& b);

/// True when the letters agree or at least one is I at every qubit.
bool qubitwise_compatible(const PauliString& a, const PauliString& b);

/// a * b as a Pauli string together with the power k of the phase i^k
/// (k in 0..3) produced by the per-qubit products.
std::pair<PauliString, int> multiply_with_phase(const PauliString& a,
                                                const PauliString& b);

//=============================================================================
// Pauli sums
//=============================================================================

struct PauliTerm {
  double coeff = 0.0;
  PauliString string;
};

/// Hermitian operator as a weighted sum of Pauli strings. Coefficients are
/// real; simplify() merges duplicates and drops near-zero terms.
struct PauliSum {
  int n_qubits = 0;
  std::vector<PauliTerm> terms;

  PauliSum() = default;
  explicit PauliSum(int n) : n_qubits(n) {}

  PauliSum& add(double coeff, const PauliString& s);
  PauliSum& add(double coeff, const std::string& text);

  /// Coefficient of the all-identity string (0 if absent).
  double identity_coefficient() const;
};

/// Merge terms with identical strings, drop |coeff| < tol, and order the
/// result lexicographically by textual form.
PauliSum simplify(const PauliSum& sum, double tol = 1e-12);

//=============================================================================
// Dense matrix oracle
//=============================================================================

/// Dense 2^n x 2^n matrix with qubit 0 as the last Kronecker factor
/// (basis index b has the qubit-q bit at position q). Limited to
/// n_qubits <= 12.
Eigen::MatrixXcd pauli_to_matrix(const PauliString& p);
Eigen::MatrixXcd pauli_to_matrix(const PauliSum& sum);

//=============================================================================
// Symmetry operators
//=============================================================================

/// Total particle number N = sum_p (I - Z_p)/2.
PauliSum number_operator(int n_qubits);

/// Spin projection S_z = (N_up - N_down)/2 with qubits 0..n/2-1 forming the
/// spin-up block and n/2..n-1 the spin-down block. Requires even n_qubits.
PauliSum sz_operator(int n_qubits);

//=============================================================================
// Measurement grouping
//=============================================================================

struct MeasurementGroup {
  std::vector<std::size_t> members;  ///< indices into the parent PauliSum
  PauliString shared_basis;
  bool z_only = false;
};

/// Greedy first-fit partition of a simplified sum into qubit-wise commuting
/// groups. Terms are visited in the sum's (lexicographic) order and placed
/// into the first group whose shared basis they are compatible with.
std::vector<MeasurementGroup> group_qubitwise_commuting(const PauliSum& sum);

//=============================================================================
// Serialization
//=============================================================================

/// JSON array of {"coeff": c, "pauli": "IXYZ"} records.
std::string pauli_sum_to_json(const PauliSum& sum);
PauliSum pauli_sum_from_json(const std::string& text);

}  // namespace symvqe
