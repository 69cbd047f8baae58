// Brute-force dense oracles, built independently of the library's Kronecker
// and gate-application code paths so the tests can cross-check them.
#pragma once

#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symvqe/circuit.hpp"

namespace oracle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat pauli1(char letter) {
  Mat m(2, 2);
  switch (letter) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("bad letter");
  }
  return m;
}

/// Dense matrix of a textual Pauli string (leftmost letter = highest qubit),
/// assembled purely with Kronecker products.
inline Mat dense_pauli(const std::string& text) {
  Mat m = pauli1(text[0]);
  for (std::size_t i = 1; i < text.size(); ++i) m = kron(m, pauli1(text[i]));
  return m;
}

/// Embed a single-qubit operator on qubit q of an n-qubit register.
inline Mat embed1(const Mat& op, int q, int n) {
  Mat m = Mat::Identity(1, 1);
  for (int k = n - 1; k >= 0; --k)
    m = kron(m, k == q ? op : Mat::Identity(2, 2));
  return m;
}

inline Mat proj(int bit) {
  Mat m = Mat::Zero(2, 2);
  m(bit, bit) = 1;
  return m;
}

inline Mat flip(int to) {  // |to><1-to|
  Mat m = Mat::Zero(2, 2);
  m(to, 1 - to) = 1;
  return m;
}

/// Full-register unitary of one gate, built from operator-level tensor
/// decompositions rather than index arithmetic.
inline Mat dense_gate(const symvqe::Gate& g, int n) {
  using symvqe::GateKind;
  const double t = g.params[0].value, f = g.params[1].value;
  const int a = g.qubits[0], b = g.qubits[1];
  switch (g.kind) {
    case GateKind::X: return embed1(pauli1('X'), a, n);
    case GateKind::H: {
      Mat h(2, 2);
      h << 1, 1, 1, -1;
      return embed1(h / std::sqrt(2.0), a, n);
    }
    case GateKind::Sdg: {
      Mat m = Mat::Identity(2, 2);
      m(1, 1) = Complex(0, -1);
      return embed1(m, a, n);
    }
    case GateKind::RY: {
      Mat m(2, 2);
      m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
      return embed1(m, a, n);
    }
    case GateKind::RZ: {
      Mat m = Mat::Zero(2, 2);
      m(0, 0) = std::exp(Complex(0, -t / 2));
      m(1, 1) = std::exp(Complex(0, t / 2));
      return embed1(m, a, n);
    }
    case GateKind::CNOT:
      return embed1(proj(0), a, n) +
             embed1(proj(1), a, n) * embed1(pauli1('X'), b, n);
    case GateKind::CZ:
      return embed1(proj(0), a, n) +
             embed1(proj(1), a, n) * embed1(pauli1('Z'), b, n);
    case GateKind::A: {
      const Complex ep = std::exp(Complex(0, f));
      return embed1(proj(0), a, n) * embed1(proj(0), b, n) +
             embed1(proj(1), a, n) * embed1(proj(1), b, n) +
             std::cos(t) * (embed1(proj(1), a, n) * embed1(proj(0), b, n)) -
             std::cos(t) * (embed1(proj(0), a, n) * embed1(proj(1), b, n)) +
             std::conj(ep) * std::sin(t) *
                 (embed1(flip(0), a, n) * embed1(flip(1), b, n)) +
             ep * std::sin(t) *
                 (embed1(flip(1), a, n) * embed1(flip(0), b, n));
    }
    case GateKind::PSWAP: {
      const Complex ms(0, -std::sin(t / 2));
      return embed1(proj(0), a, n) * embed1(proj(0), b, n) +
             embed1(proj(1), a, n) * embed1(proj(1), b, n) +
             std::cos(t / 2) * (embed1(proj(1), a, n) * embed1(proj(0), b, n) +
                                embed1(proj(0), a, n) * embed1(proj(1), b, n)) +
             ms * (embed1(flip(0), a, n) * embed1(flip(1), b, n) +
                   embed1(flip(1), a, n) * embed1(flip(0), b, n));
    }
  }
  throw std::invalid_argument("bad gate");
}

inline Mat dense_circuit(const symvqe::Circuit& c) {
  Mat u = Mat::Identity(1ll << c.n_qubits, 1ll << c.n_qubits);
  for (const auto& g : c.gates) u = dense_gate(g, c.n_qubits) * u;
  return u;
}

/// Random bound circuit over the native gate set.
inline symvqe::Circuit random_circuit(int n_qubits, int n_gates,
                                      std::mt19937_64& rng) {
  using symvqe::Gate;
  using symvqe::GateParam;
  symvqe::Circuit c(n_qubits);
  std::uniform_int_distribution<int> kind(0, 6);
  std::uniform_int_distribution<int> qubit(0, n_qubits - 1);
  std::uniform_real_distribution<double> angle(-3.14, 3.14);
  for (int i = 0; i < n_gates; ++i) {
    const int q = qubit(rng);
    int q2 = qubit(rng);
    while (q2 == q) q2 = qubit(rng);
    switch (kind(rng)) {
      case 0: c.gates.push_back(Gate::x(q)); break;
      case 1: c.gates.push_back(Gate::h(q)); break;
      case 2: c.gates.push_back(Gate::sdg(q)); break;
      case 3: c.gates.push_back(Gate::ry(q, GateParam::bound(angle(rng)))); break;
      case 4: c.gates.push_back(Gate::rz(q, GateParam::bound(angle(rng)))); break;
      case 5: c.gates.push_back(Gate::cnot(q, q2)); break;
      case 6: c.gates.push_back(Gate::cz(q, q2)); break;
    }
  }
  return c;
}

}  // namespace oracle
