#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symvqe/pauli.hpp"

namespace symvqe {

//=============================================================================
// Gates and circuits
//=============================================================================

enum class GateKind { X, RY, RZ, H, Sdg, CZ, CNOT, A, PSWAP };

const char* gate_kind_name(GateKind kind);
GateKind gate_kind_from_name(const std::string& name);
int gate_arity(GateKind kind);   ///< number of qubits (1 or 2)
int gate_n_params(GateKind kind);

/// A parameter slot: either bound to a value in radians or referring to a
/// free parameter index of the enclosing circuit.
struct GateParam {
  bool is_bound = true;
  double value = 0.0;
  int index = -1;

  static GateParam bound(double v) { return {true, v, -1}; }
  static GateParam free_index(int i) { return {false, 0.0, i}; }
};

/// For two-qubit gates the first listed qubit is the least significant bit
/// of the 4x4 matrix basis |00>,|01>,|10>,|11>. For CNOT, qubits[0] is the
/// control and qubits[1] the target.
struct Gate {
  GateKind kind = GateKind::X;
  std::array<int, 2> qubits = {0, 0};
  std::array<GateParam, 2> params = {GateParam::bound(0), GateParam::bound(0)};

  static Gate x(int q) { return {GateKind::X, {q, 0}, {}}; }
  static Gate h(int q) { return {GateKind::H, {q, 0}, {}}; }
  static Gate sdg(int q) { return {GateKind::Sdg, {q, 0}, {}}; }
  static Gate ry(int q, GateParam p) { return {GateKind::RY, {q, 0}, {p}}; }
  static Gate rz(int q, GateParam p) { return {GateKind::RZ, {q, 0}, {p}}; }
  static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, {}}; }
  static Gate cnot(int control, int target) {
    return {GateKind::CNOT, {control, target}, {}};
  }
  static Gate a(int p, int q, GateParam theta, GateParam phi) {
    return {GateKind::A, {p, q}, {theta, phi}};
  }
  static Gate pswap(int p, int q, GateParam theta) {
    return {GateKind::PSWAP, {p, q}, {theta}};
  }
};

struct Circuit {
  int n_qubits = 0;
  std::vector<Gate> gates;
  int n_free_params = 0;

  Circuit() = default;
  explicit Circuit(int n) : n_qubits(n) {}

  bool fully_bound() const;
  /// Throws unless qubit indices are in range and free parameter indices are
  /// exactly 0..n_free_params-1.
  void validate() const;
};

/// Every free slot replaced by its value; gate order unchanged. Throws on a
/// length mismatch.
Circuit bind_parameters(const Circuit& c, const Eigen::VectorXd& values);

/// Replace each CNOT by `fold` consecutive identical CNOTs (fold odd, >= 1);
/// the noiseless unitary is unchanged.
Circuit fold_cnots(const Circuit& c, int fold);

/// Rewrite A, CZ and PSWAP gates over {X, RY, RZ, H, Sdg, CNOT} so the
/// circuit can run against per-gate device calibrations and be CNOT-folded.
Circuit lower_to_native(const Circuit& c);

//=============================================================================
// Symmetry sectors
//=============================================================================

/// Target (particle number, spin projection) subspace. Qubits 0..n/2-1 hold
/// spin-up orbitals and n/2..n-1 spin-down, so m_up = m/2 + sz and
/// m_down = m/2 - sz must be non-negative integers at most n/2.
struct SectorSpec {
  int n_qubits = 0;
  int n_particles = 0;
  double sz = 0.0;
  std::optional<double> total_spin;  ///< only used by parameter_count

  int m_up() const;
  int m_down() const;
  void validate() const;
  /// Dimension of the sector as a product of per-block binomials.
  long dimension() const;
};

//=============================================================================
// Gate matrices and decompositions
//=============================================================================

/// The two-qubit particle-conserving gate
///   [[1, 0,                0,               0],
///    [0, cos t,            e^{i f} sin t,   0],
///    [0, e^{-i f} sin t,  -cos t,           0],
///    [0, 0,                0,               1]].
Eigen::Matrix4cd a_gate_matrix(double theta, double phi);

/// Parameterized-swap block rotation exp(-i theta (XX + YY)/4).
Eigen::Matrix4cd pswap_matrix(double theta);

/// Exact sequence over {RY, RZ, CNOT} on qubits (p, q) with exactly three
/// CNOTs whose product equals a_gate_matrix(theta, phi) up to global phase.
std::vector<Gate> decompose_a_gate(double theta, double phi, int p = 0,
                                   int q = 1);

//=============================================================================
// Ansatz construction
//=============================================================================

/// Particle- and spin-projection-conserving ansatz: X gates place the
/// register in the target sector (lowest-index qubits of each spin block),
/// then A gates tile each block in a brick pattern for the given number of
/// layers. Gates joining the two blocks are omitted, and one phase parameter
/// is frozen to zero to remove the global-phase redundancy. Blocks whose
/// sub-sector holds a single state receive no A gates.
Circuit build_aswap(const SectorSpec& sector, int layers = 1);

enum class AdhocKind { RY, RYRZ, SwapRZ };
enum class Entanglement { Full, Linear };

/// Hardware-agnostic layered ansatze: RY (RYRZ) interleaves single-qubit
/// rotation layers with CZ entanglers; SwapRZ interleaves RZ layers with
/// parameterized swaps along the entanglement map.
Circuit build_adhoc(AdhocKind kind, int n_qubits, int depth,
                    Entanglement entanglement);

//=============================================================================
// Resource accounting
//=============================================================================

struct ResourceReport {
  int n_free_params = 0;
  int n_cnots = 0;  ///< after decomposition: A = 3, CZ = 1, PSWAP = 2
  int depth = 0;    ///< greedy circuit layering
};

ResourceReport resources(const Circuit& c);

//=============================================================================
// Parameter-count formulas
//=============================================================================

enum class CountMode { FullHilbert, FixedN, FixedNSSz };

/// Minimal real-state parameter counts: 2(2^n - 1) for the full Hilbert
/// space, 2(C(n,m) - 1) at fixed particle number, and the fixed-(N, S, Sz)
/// sum
///   sum_{k=0}^{m/2-s} C(n/2,k) C(n/2-k,m-2k)
///                     (2s+1)(m-2k)! / [(m/2-k-s)! (m/2-k+s+1)!].
/// `s` is ignored except in FixedNSSz mode. Throws on invalid (n, m, s).
long parameter_count(CountMode mode, int n, int m = 0, double s = 0.0);

//=============================================================================
// Serialization
//=============================================================================

std::string circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const std::string& text);
std::string circuit_pretty(const Circuit& c);

}  // namespace symvqe
