#include "symvqe/backend.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace symvqe {

//=============================================================================
// States
//=============================================================================

Statevector Statevector::zero_state(int n_qubits) {
  return basis_state(n_qubits, 0);
}

Statevector Statevector::basis_state(int n_qubits, std::uint64_t index) {
  Statevector psi;
  psi.n_qubits = n_qubits;
  psi.amps = Eigen::VectorXcd::Zero(1ll << n_qubits);
  psi.amps[static_cast<Eigen::Index>(index)] = 1.0;
  return psi;
}

DensityMatrix DensityMatrix::zero_state(int n_qubits) {
  return pure(Statevector::zero_state(n_qubits));
}

DensityMatrix DensityMatrix::pure(const Statevector& psi) {
  DensityMatrix rho;
  rho.n_qubits = psi.n_qubits;
  rho.rho = psi.amps * psi.amps.adjoint();
  return rho;
}

double KrausChannel::cptp_deviation() const {
  if (ops.empty()) return 1.0;
  const Eigen::Index dim = ops.front().rows();
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& k : ops) sum += k.adjoint() * k;
  return (sum - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
}

//=============================================================================
// Device models
//=============================================================================

double DeviceModel::effective_t1_us(int qubit) const {
  return qubits.at(qubit).t1_us * stretch;
}

double DeviceModel::effective_t2_us(int qubit) const {
  return qubits.at(qubit).t2_us * stretch;
}

const DeviceGateInfo& DeviceModel::gate_info(GateKind kind) const {
  const auto it = gates.find(gate_kind_name(kind));
  if (it == gates.end())
    throw std::runtime_error(std::string("device '") + name +
                             "' has no calibration entry for gate kind '" +
                             gate_kind_name(kind) + "'");
  return it->second;
}

void DeviceModel::validate() const {
  if (stretch <= 0) throw std::invalid_argument("stretch must be positive");
  for (std::size_t q = 0; q < qubits.size(); ++q) {
    const double t1 = effective_t1_us(static_cast<int>(q));
    const double t2 = effective_t2_us(static_cast<int>(q));
    if (!(t2 > 0) || !(t1 > 0) || t2 > 2 * t1 + 1e-9)
      throw std::invalid_argument("device qubit violates 0 < t2 <= 2 t1");
    for (const double p : {qubits[q].readout.p1_given0,
                           qubits[q].readout.p0_given1})
      if (p < 0 || p > 1)
        throw std::invalid_argument("readout probability out of range");
  }
  for (const auto& [kind, info] : gates) {
    if (info.error_rate < 0 || info.error_rate > 1)
      throw std::invalid_argument("gate error rate out of range");
    if (info.duration_ns < 0)
      throw std::invalid_argument("gate duration must be non-negative");
  }
}

DeviceModel device_from_json(const std::string& text) {
  const auto root = nlohmann::json::parse(text);
  DeviceModel dev;
  dev.name = root.at("name").get<std::string>();
  for (const auto& q : root.at("qubits")) {
    DeviceQubit dq;
    dq.t1_us = q.at("t1_us").get<double>();
    dq.t2_us = q.at("t2_us").get<double>();
    dq.readout.p1_given0 = q.at("readout").at("p1_given0").get<double>();
    dq.readout.p0_given1 = q.at("readout").at("p0_given1").get<double>();
    dev.qubits.push_back(dq);
  }
  for (const auto& g : root.at("gates"))
    dev.gates[g.at("kind").get<std::string>()] = {
        g.at("error_rate").get<double>(), g.at("duration_ns").get<double>()};
  dev.stretch = root.value("stretch", 1.0);
  dev.validate();
  return dev;
}

std::string device_to_json(const DeviceModel& dev) {
  nlohmann::json qubits = nlohmann::json::array();
  for (const auto& q : dev.qubits)
    qubits.push_back({{"t1_us", q.t1_us},
                      {"t2_us", q.t2_us},
                      {"readout",
                       {{"p1_given0", q.readout.p1_given0},
                        {"p0_given1", q.readout.p0_given1}}}});
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& [kind, info] : dev.gates)
    gates.push_back({{"kind", kind},
                     {"error_rate", info.error_rate},
                     {"duration_ns", info.duration_ns}});
  nlohmann::json root = {{"name", dev.name},
                         {"qubits", qubits},
                         {"gates", gates},
                         {"stretch", dev.stretch}};
  return root.dump(2);
}

DeviceModel load_device(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open device file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return device_from_json(buf.str());
}

DeviceModel stretch_device(const DeviceModel& dev, double factor) {
  if (!(factor > 0)) throw std::invalid_argument("stretch factor must be > 0");
  DeviceModel out = dev;
  out.stretch = dev.stretch * factor;
  out.validate();
  return out;
}

//=============================================================================
// Gate matrices
//=============================================================================

Eigen::MatrixXcd gate_matrix(const Gate& g) {
  for (int i = 0; i < gate_n_params(g.kind); ++i)
    if (!g.params[i].is_bound)
      throw std::invalid_argument("gate_matrix requires bound parameters");
  const double p0 = g.params[0].value, p1 = g.params[1].value;
  switch (g.kind) {
    case GateKind::X: {
      Eigen::Matrix2cd m;
      m << 0, 1, 1, 0;
      return m;
    }
    case GateKind::H: {
      Eigen::Matrix2cd m;
      const double r = 1.0 / std::sqrt(2.0);
      m << r, r, r, -r;
      return m;
    }
    case GateKind::Sdg: {
      Eigen::Matrix2cd m;
      m << 1, 0, 0, Complex(0, -1);
      return m;
    }
    case GateKind::RY: {
      Eigen::Matrix2cd m;
      const double c = std::cos(p0 / 2), s = std::sin(p0 / 2);
      m << c, -s, s, c;
      return m;
    }
    case GateKind::RZ: {
      Eigen::Matrix2cd m;
      m << Complex(std::cos(p0 / 2), -std::sin(p0 / 2)), 0, 0,
          Complex(std::cos(p0 / 2), std::sin(p0 / 2));
      return m;
    }
    case GateKind::CZ: {
      Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
      m(3, 3) = -1;
      return m;
    }
    case GateKind::CNOT: {
      // qubits[0] (bit 0 of the basis index) is the control.
      Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
      m(0, 0) = 1;
      m(2, 2) = 1;
      m(3, 1) = 1;
      m(1, 3) = 1;
      return m;
    }
    case GateKind::A:
      return a_gate_matrix(p0, p1);
    case GateKind::PSWAP:
      return pswap_matrix(p0);
  }
  throw std::invalid_argument("unknown gate kind");
}

//=============================================================================
// Statevector backend
//=============================================================================

namespace {

void apply_1q(Eigen::VectorXcd& v, const Eigen::MatrixXcd& u, int q) {
  const std::int64_t dim = v.size();
  const std::int64_t bit = 1ll << q;
  for (std::int64_t i = 0; i < dim; ++i) {
    if (i & bit) continue;
    const Complex a0 = v[i], a1 = v[i | bit];
    v[i] = u(0, 0) * a0 + u(0, 1) * a1;
    v[i | bit] = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

void apply_2q(Eigen::VectorXcd& v, const Eigen::MatrixXcd& u, int p, int q) {
  const std::int64_t dim = v.size();
  const std::int64_t bp = 1ll << p, bq = 1ll << q;
  for (std::int64_t i = 0; i < dim; ++i) {
    if ((i & bp) || (i & bq)) continue;
    const std::int64_t idx[4] = {i, i | bp, i | bq, i | bp | bq};
    Complex in[4], out[4];
    for (int k = 0; k < 4; ++k) in[k] = v[idx[k]];
    for (int r = 0; r < 4; ++r) {
      out[r] = 0;
      for (int k = 0; k < 4; ++k) out[r] += u(r, k) * in[k];
    }
    for (int k = 0; k < 4; ++k) v[idx[k]] = out[k];
  }
}

void apply_local(Eigen::VectorXcd& v, const Eigen::MatrixXcd& u,
                 const std::vector<int>& qubits) {
  if (qubits.size() == 1)
    apply_1q(v, u, qubits[0]);
  else
    apply_2q(v, u, qubits[0], qubits[1]);
}

std::vector<int> gate_qubits(const Gate& g) {
  std::vector<int> qs = {g.qubits[0]};
  if (gate_arity(g.kind) == 2) qs.push_back(g.qubits[1]);
  return qs;
}

}  // namespace

void apply_gate(Statevector& psi, const Gate& g) {
  apply_local(psi.amps, gate_matrix(g), gate_qubits(g));
}

Statevector sv_run(const Circuit& c) {
  if (!c.fully_bound())
    throw std::invalid_argument("sv_run requires a fully bound circuit");
  c.validate();
  Statevector psi = Statevector::zero_state(c.n_qubits);
  for (const auto& g : c.gates) apply_gate(psi, g);
  return psi;
}

double sv_expectation(const Statevector& psi, const PauliSum& h) {
  if (psi.n_qubits != h.n_qubits)
    throw std::invalid_argument("state/operator qubit count mismatch");
  static const Complex kI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::int64_t dim = psi.amps.size();
  double total = 0.0;
  for (const auto& term : h.terms) {
    const std::uint64_t x = term.string.x, z = term.string.z;
    const Complex base = kI[std::popcount(x & z) & 3];
    Complex val = 0.0;
    // <psi|P|psi> with P|b> = base (-1)^{|z&b|} |b ^ x>.
    for (std::int64_t b = 0; b < dim; ++b) {
      const double sign =
          (std::popcount(z & static_cast<std::uint64_t>(b)) & 1) ? -1.0 : 1.0;
      val += std::conj(psi.amps[b ^ static_cast<std::int64_t>(x)]) * base *
             sign * psi.amps[b];
    }
    total += term.coeff * val.real();
  }
  return total;
}

//=============================================================================
// Channels
//=============================================================================

KrausChannel thermal_relaxation_channel(double t1, double t2,
                                        double duration) {
  if (duration < 0) throw std::invalid_argument("negative duration");
  if (!(t1 > 0) || !(t2 > 0) || t2 > 2 * t1 + 1e-9)
    throw std::invalid_argument("thermal relaxation requires 0 < t2 <= 2 t1");

  const double gamma = 1.0 - std::exp(-duration / t1);
  // Damping alone decays coherence by exp(-d/2t1); pure dephasing supplies
  // the remainder of the exp(-d/t2) target.
  const double residual = std::exp(-duration / t2 + duration / (2.0 * t1));
  const double pz = std::clamp((1.0 - residual) / 2.0, 0.0, 1.0);

  Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Zero();
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  Eigen::Matrix2cd k1 = Eigen::Matrix2cd::Zero();
  k1(0, 1) = std::sqrt(gamma);
  Eigen::Matrix2cd zmat = Eigen::Matrix2cd::Identity();
  zmat(1, 1) = -1.0;

  KrausChannel ch;
  ch.ops.push_back(std::sqrt(1.0 - pz) * k0);
  if (gamma > 0) ch.ops.push_back(std::sqrt(1.0 - pz) * k1);
  if (pz > 0) {
    ch.ops.push_back(std::sqrt(pz) * (zmat * k0));
    if (gamma > 0) ch.ops.push_back(std::sqrt(pz) * (zmat * k1));
  }
  return ch;
}

KrausChannel depolarizing_channel(double p, int n_qubits) {
  if (p < 0 || p > 1) throw std::invalid_argument("probability out of range");
  if (n_qubits != 1 && n_qubits != 2)
    throw std::invalid_argument("depolarizing channel supports 1 or 2 qubits");

  const int n_paulis = n_qubits == 1 ? 4 : 16;
  const double dim_sq = static_cast<double>(n_paulis);
  KrausChannel ch;
  for (int code = 0; code < n_paulis; ++code) {
    const double w = code == 0 ? 1.0 - p * (n_paulis - 1) / dim_sq
                               : p / dim_sq;
    if (w <= 0) continue;
    std::uint64_t x = 0, z = 0;
    for (int q = 0; q < n_qubits; ++q) {
      const int letter = (code >> (2 * q)) & 3;
      if (letter & 1) x |= 1ull << q;
      if (letter & 2) z |= 1ull << q;
    }
    ch.ops.push_back(std::sqrt(w) *
                     pauli_to_matrix(PauliString(n_qubits, x, z)));
  }
  return ch;
}

//=============================================================================
// Density-matrix backend
//=============================================================================

namespace {

/// rho <- M rho (columns) or rho <- rho M+ (rows, using conj(M)).
void apply_left(Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& m,
                const std::vector<int>& qubits) {
  Eigen::VectorXcd col(rho.rows());
  for (Eigen::Index c = 0; c < rho.cols(); ++c) {
    col = rho.col(c);
    apply_local(col, m, qubits);
    rho.col(c) = col;
  }
}

void apply_right_dagger(Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& m,
                        const std::vector<int>& qubits) {
  const Eigen::MatrixXcd mc = m.conjugate();
  Eigen::VectorXcd row(rho.cols());
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    row = rho.row(r).transpose();
    apply_local(row, mc, qubits);
    rho.row(r) = row.transpose();
  }
}

}  // namespace

void apply_unitary(DensityMatrix& rho, const Eigen::MatrixXcd& u,
                   const std::vector<int>& qubits) {
  apply_left(rho.rho, u, qubits);
  apply_right_dagger(rho.rho, u, qubits);
}

void apply_channel(DensityMatrix& rho, const KrausChannel& channel,
                   const std::vector<int>& qubits) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rho.rho.rows(),
                                                rho.rho.cols());
  for (const auto& k : channel.ops) {
    Eigen::MatrixXcd branch = rho.rho;
    apply_left(branch, k, qubits);
    apply_right_dagger(branch, k, qubits);
    acc += branch;
  }
  rho.rho = std::move(acc);
}

DensityMatrix dm_run(const Circuit& c, const DeviceModel& dev) {
  if (!c.fully_bound())
    throw std::invalid_argument("dm_run requires a fully bound circuit");
  c.validate();
  dev.validate();
  if (static_cast<int>(dev.qubits.size()) < c.n_qubits)
    throw std::runtime_error("device has fewer qubits than the circuit");

  DensityMatrix rho = DensityMatrix::zero_state(c.n_qubits);
  for (const auto& g : c.gates) {
    const std::vector<int> qs = gate_qubits(g);
    apply_unitary(rho, gate_matrix(g), qs);

    const DeviceGateInfo& info = dev.gate_info(g.kind);
    if (info.duration_ns > 0) {
      for (const int q : qs) {
        const auto ch = thermal_relaxation_channel(
            dev.effective_t1_us(q) * 1e3, dev.effective_t2_us(q) * 1e3,
            info.duration_ns);
        apply_channel(rho, ch, {q});
      }
    }
    if (info.error_rate > 0)
      apply_channel(rho, depolarizing_channel(info.error_rate,
                                              static_cast<int>(qs.size())),
                    qs);
  }
  return rho;
}

double dm_expectation(const DensityMatrix& rho, const PauliSum& h) {
  if (rho.n_qubits != h.n_qubits)
    throw std::invalid_argument("state/operator qubit count mismatch");
  static const Complex kI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::int64_t dim = rho.rho.rows();
  double total = 0.0;
  for (const auto& term : h.terms) {
    const std::uint64_t x = term.string.x, z = term.string.z;
    const Complex base = kI[std::popcount(x & z) & 3];
    Complex val = 0.0;
    // Tr(rho P) = sum_b rho[b, b^x] * P[b^x... with P[c, b] supported on
    // c = b ^ x only.
    for (std::int64_t b = 0; b < dim; ++b) {
      const double sign =
          (std::popcount(z & static_cast<std::uint64_t>(b)) & 1) ? -1.0 : 1.0;
      val += rho.rho(b, b ^ static_cast<std::int64_t>(x)) * base * sign;
    }
    total += term.coeff * val.real();
  }
  return total;
}

}  // namespace symvqe
