#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symvqe/circuit.hpp"
#include "symvqe/pauli.hpp"

namespace symvqe {

//=============================================================================
// States
//=============================================================================

/// Pure state; basis index b carries the qubit-q bit at position q.
struct Statevector {
  int n_qubits = 0;
  Eigen::VectorXcd amps;

  static Statevector zero_state(int n_qubits);
  static Statevector basis_state(int n_qubits, std::uint64_t index);
  double norm() const { return amps.norm(); }
};

struct DensityMatrix {
  int n_qubits = 0;
  Eigen::MatrixXcd rho;

  static DensityMatrix zero_state(int n_qubits);
  static DensityMatrix pure(const Statevector& psi);
  double trace_real() const { return rho.trace().real(); }
};

/// Completely positive trace-preserving map given by Kraus operators.
struct KrausChannel {
  std::vector<Eigen::MatrixXcd> ops;

  /// max |sum K+K - I| entry; 0 for an exactly CPTP channel.
  double cptp_deviation() const;
};

//=============================================================================
// Device models
//=============================================================================

struct ReadoutError {
  double p1_given0 = 0.0;
  double p0_given1 = 0.0;
};

struct DeviceQubit {
  double t1_us = 0.0;
  double t2_us = 0.0;
  ReadoutError readout;
};

struct DeviceGateInfo {
  double error_rate = 0.0;
  double duration_ns = 0.0;
};

/// Calibration snapshot of a processor: per-qubit relaxation times and
/// readout confusion, per-gate-kind error rates and durations, and a
/// uniform stretch factor applied to all T1/T2 times.
struct DeviceModel {
  std::string name;
  std::vector<DeviceQubit> qubits;
  std::map<std::string, DeviceGateInfo> gates;
  double stretch = 1.0;

  double effective_t1_us(int qubit) const;
  double effective_t2_us(int qubit) const;
  const DeviceGateInfo& gate_info(GateKind kind) const;
  /// Throws when probabilities, durations, or stretched T1/T2 are invalid.
  void validate() const;
};

DeviceModel device_from_json(const std::string& text);
std::string device_to_json(const DeviceModel& dev);
DeviceModel load_device(const std::string& path);

/// Copy of the model with T1 and T2 uniformly multiplied by `factor`
/// (factor > 0); everything else unchanged.
DeviceModel stretch_device(const DeviceModel& dev, double factor);

//=============================================================================
// Gate matrices and state evolution
//=============================================================================

/// Dense matrix of a fully bound gate (2x2 or 4x4; the first listed qubit is
/// the least significant bit of the two-qubit basis).
Eigen::MatrixXcd gate_matrix(const Gate& g);

void apply_gate(Statevector& psi, const Gate& g);

/// |psi> = U(theta) |0...0>, applying gates in order. All parameters must be
/// bound.
Statevector sv_run(const Circuit& c);

/// Exact <psi|H|psi>; throws on a qubit-count mismatch.
double sv_expectation(const Statevector& psi, const PauliSum& h);

//=============================================================================
// Noise channels
//=============================================================================

/// Zero-temperature amplitude damping for `duration` composed with the pure
/// dephasing that brings the total coherence decay to exp(-duration/t2).
/// All three arguments share one time unit; requires t2 <= 2 t1.
KrausChannel thermal_relaxation_channel(double t1, double t2, double duration);

/// rho -> (1-p) rho + p I/2^n as uniformly weighted Pauli Kraus operators,
/// for n_qubits in {1, 2}.
KrausChannel depolarizing_channel(double p, int n_qubits);

//=============================================================================
// Density-matrix backend
//=============================================================================

void apply_unitary(DensityMatrix& rho, const Eigen::MatrixXcd& u,
                   const std::vector<int>& qubits);
void apply_channel(DensityMatrix& rho, const KrausChannel& channel,
                   const std::vector<int>& qubits);

/// Evolve |0..0><0..0| through the circuit: each gate applies its ideal
/// unitary, then thermal relaxation for the gate's duration on every
/// participating qubit, then a depolarizing channel at the gate's error
/// rate. Readout error is not applied here; it belongs to sampling.
DensityMatrix dm_run(const Circuit& c, const DeviceModel& dev);

/// Tr(rho H).
double dm_expectation(const DensityMatrix& rho, const PauliSum& h);

}  // namespace symvqe
