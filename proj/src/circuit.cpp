#include "symvqe/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace symvqe {

namespace {
constexpr double kPi = std::numbers::pi;
}

//=============================================================================
// Gate metadata
//=============================================================================

const char* gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::X: return "x";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::H: return "h";
    case GateKind::Sdg: return "sdg";
    case GateKind::CZ: return "cz";
    case GateKind::CNOT: return "cnot";
    case GateKind::A: return "a";
    case GateKind::PSWAP: return "pswap";
  }
  return "?";
}

GateKind gate_kind_from_name(const std::string& name) {
  static const std::vector<GateKind> kAll = {
      GateKind::X,  GateKind::RY,   GateKind::RZ, GateKind::H, GateKind::Sdg,
      GateKind::CZ, GateKind::CNOT, GateKind::A,  GateKind::PSWAP};
  for (const GateKind k : kAll)
    if (name == gate_kind_name(k)) return k;
  throw std::invalid_argument("unknown gate kind: " + name);
}

int gate_arity(GateKind kind) {
  switch (kind) {
    case GateKind::CZ:
    case GateKind::CNOT:
    case GateKind::A:
    case GateKind::PSWAP:
      return 2;
    default:
      return 1;
  }
}

int gate_n_params(GateKind kind) {
  switch (kind) {
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::PSWAP:
      return 1;
    case GateKind::A:
      return 2;
    default:
      return 0;
  }
}

//=============================================================================
// Circuits
//=============================================================================

bool Circuit::fully_bound() const {
  for (const auto& g : gates)
    for (int i = 0; i < gate_n_params(g.kind); ++i)
      if (!g.params[i].is_bound) return false;
  return true;
}

void Circuit::validate() const {
  std::vector<char> seen(n_free_params, 0);
  for (const auto& g : gates) {
    const int arity = gate_arity(g.kind);
    for (int i = 0; i < arity; ++i)
      if (g.qubits[i] < 0 || g.qubits[i] >= n_qubits)
        throw std::invalid_argument("gate qubit index out of range");
    if (arity == 2 && g.qubits[0] == g.qubits[1])
      throw std::invalid_argument("two-qubit gate with repeated qubit");
    for (int i = 0; i < gate_n_params(g.kind); ++i) {
      const GateParam& p = g.params[i];
      if (p.is_bound) continue;
      if (p.index < 0 || p.index >= n_free_params)
        throw std::invalid_argument("free parameter index out of range");
      seen[p.index] = 1;
    }
  }
  for (const char used : seen)
    if (!used) throw std::invalid_argument("unused free parameter index");
}

Circuit bind_parameters(const Circuit& c, const Eigen::VectorXd& values) {
  if (values.size() != c.n_free_params)
    throw std::invalid_argument("parameter vector length mismatch");
  Circuit out = c;
  for (auto& g : out.gates)
    for (int i = 0; i < gate_n_params(g.kind); ++i)
      if (!g.params[i].is_bound)
        g.params[i] = GateParam::bound(values[g.params[i].index]);
  out.n_free_params = 0;
  return out;
}

Circuit fold_cnots(const Circuit& c, int fold) {
  if (fold < 1 || fold % 2 == 0)
    throw std::invalid_argument("fold factor must be odd and positive");
  Circuit out(c.n_qubits);
  out.n_free_params = c.n_free_params;
  for (const auto& g : c.gates) {
    const int copies = g.kind == GateKind::CNOT ? fold : 1;
    for (int i = 0; i < copies; ++i) out.gates.push_back(g);
  }
  return out;
}

//=============================================================================
// Sectors
//=============================================================================

namespace {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < std::min(k, n - k); ++i) r = r * (n - i) / (i + 1);
  return r;
}

int half_integer_sum(double a, double b, const char* what) {
  const double v = a + b;
  const double rounded = std::round(v);
  if (std::abs(v - rounded) > 1e-9)
    throw std::invalid_argument(std::string(what) + " is not an integer");
  return static_cast<int>(rounded);
}

}  // namespace

int SectorSpec::m_up() const {
  return half_integer_sum(n_particles / 2.0, sz, "m/2 + sz");
}

int SectorSpec::m_down() const {
  return half_integer_sum(n_particles / 2.0, -sz, "m/2 - sz");
}

void SectorSpec::validate() const {
  if (n_qubits < 2 || n_qubits % 2 != 0)
    throw std::invalid_argument("sector requires an even qubit count");
  if (n_particles < 0 || n_particles > n_qubits)
    throw std::invalid_argument("particle number out of range");
  const int up = m_up(), down = m_down();
  if (up < 0 || down < 0 || up > n_qubits / 2 || down > n_qubits / 2)
    throw std::invalid_argument("spin projection incompatible with sector");
}

long SectorSpec::dimension() const {
  validate();
  return binomial(n_qubits / 2, m_up()) * binomial(n_qubits / 2, m_down());
}

//=============================================================================
// Gate matrices
//=============================================================================

Eigen::Matrix4cd a_gate_matrix(double theta, double phi) {
  const double c = std::cos(theta), s = std::sin(theta);
  const Complex ep(std::cos(phi), std::sin(phi));
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = c;
  m(1, 2) = ep * s;
  m(2, 1) = std::conj(ep) * s;
  m(2, 2) = -c;
  m(3, 3) = 1.0;
  return m;
}

Eigen::Matrix4cd pswap_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = c;
  m(1, 2) = Complex(0, -s);
  m(2, 1) = Complex(0, -s);
  m(2, 2) = c;
  m(3, 3) = 1.0;
  return m;
}

std::vector<Gate> decompose_a_gate(double theta, double phi, int p, int q) {
  // Conjugating A by CNOT(p->q) leaves a gate controlled on q whose target
  // action is the Hermitian reflection n.sigma with axis
  // n = (sin t cos f, sin t sin f, -cos t), i.e. V Z V+ for
  // V = Rz(f) Ry(pi - t). The controlled part is then V CZ V+, and each of
  // the two H gates hidden in the CZ lowering becomes RZ(pi) RY(pi/2); the
  // overall product matches A up to a global phase.
  auto b = [](double v) { return GateParam::bound(v); };
  std::vector<Gate> seq;
  seq.push_back(Gate::cnot(p, q));
  seq.push_back(Gate::rz(p, b(-phi)));
  seq.push_back(Gate::ry(p, b(theta - kPi)));
  seq.push_back(Gate::rz(p, b(kPi)));       // H on p, expanded
  seq.push_back(Gate::ry(p, b(kPi / 2)));
  seq.push_back(Gate::cnot(q, p));
  seq.push_back(Gate::rz(p, b(kPi)));       // H on p, expanded
  seq.push_back(Gate::ry(p, b(kPi / 2)));
  seq.push_back(Gate::ry(p, b(kPi - theta)));
  seq.push_back(Gate::rz(p, b(phi)));
  seq.push_back(Gate::cnot(p, q));
  return seq;
}

namespace {

/// PSWAP(t) = Zpair(-pi/4) G0(t/2) Zpair(pi/4) with G0 the real rotation in
/// the {|01>, |10>} plane, itself CNOT(p->q) [Ry_p(a) CZ Ry_p(-a) CZ]
/// CNOT(p->q).
std::vector<Gate> decompose_pswap(double theta, int p, int q) {
  auto b = [](double v) { return GateParam::bound(v); };
  const double alpha = theta / 2.0;
  std::vector<Gate> seq;
  seq.push_back(Gate::rz(p, b(kPi / 4)));
  seq.push_back(Gate::rz(q, b(-kPi / 4)));
  seq.push_back(Gate::cnot(p, q));
  seq.push_back(Gate::cz(p, q));
  seq.push_back(Gate::ry(p, b(-alpha)));
  seq.push_back(Gate::cz(p, q));
  seq.push_back(Gate::ry(p, b(alpha)));
  seq.push_back(Gate::cnot(p, q));
  seq.push_back(Gate::rz(p, b(-kPi / 4)));
  seq.push_back(Gate::rz(q, b(kPi / 4)));
  return seq;
}

}  // namespace

Circuit lower_to_native(const Circuit& c) {
  Circuit out(c.n_qubits);
  out.n_free_params = c.n_free_params;
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case GateKind::A: {
        if (!g.params[0].is_bound || !g.params[1].is_bound)
          throw std::invalid_argument("cannot lower an unbound A gate");
        for (const auto& native :
             decompose_a_gate(g.params[0].value, g.params[1].value,
                              g.qubits[0], g.qubits[1]))
          out.gates.push_back(native);
        break;
      }
      case GateKind::PSWAP: {
        if (!g.params[0].is_bound)
          throw std::invalid_argument("cannot lower an unbound PSWAP gate");
        for (const auto& native :
             decompose_pswap(g.params[0].value, g.qubits[0], g.qubits[1]))
          out.gates.push_back(native);
        break;
      }
      case GateKind::CZ:
        out.gates.push_back(Gate::h(g.qubits[1]));
        out.gates.push_back(Gate::cnot(g.qubits[0], g.qubits[1]));
        out.gates.push_back(Gate::h(g.qubits[1]));
        break;
      default:
        out.gates.push_back(g);
    }
  }
  // A second pass expands the CZ gates introduced by the PSWAP lowering.
  bool has_cz = false;
  for (const auto& g : out.gates) has_cz |= g.kind == GateKind::CZ;
  return has_cz ? lower_to_native(out) : out;
}

//=============================================================================
// Ansatz construction
//=============================================================================

Circuit build_aswap(const SectorSpec& sector, int layers) {
  sector.validate();
  if (layers < 0) throw std::invalid_argument("layers must be non-negative");
  const int n = sector.n_qubits, half = n / 2;
  const std::array<int, 2> block_start = {0, half};
  const std::array<int, 2> block_m = {sector.m_up(), sector.m_down()};
  // A block whose sub-sector is a single basis state gains nothing from
  // A gates, which act trivially on it.
  const std::array<bool, 2> block_active = {
      block_m[0] > 0 && block_m[0] < half,
      block_m[1] > 0 && block_m[1] < half};

  Circuit c(n);
  for (int bl = 0; bl < 2; ++bl)
    for (int i = 0; i < block_m[bl]; ++i)
      c.gates.push_back(Gate::x(block_start[bl] + i));

  int next_param = 0;
  bool phase_frozen = false;
  for (int layer = 0; layer < layers; ++layer) {
    // The tiling's block-joining A gates carry parameters pinned to zero,
    // i.e. the fixed diagonal diag(1,1,-1,1) = Z CZ on the boundary pair.
    // One brick layer alone reaches only block-product amplitudes, so the
    // coupler goes between consecutive layers.
    if (layer > 0 && block_active[0] && block_active[1]) {
      c.gates.push_back(Gate::rz(half, GateParam::bound(kPi)));
      c.gates.push_back(Gate::cz(half - 1, half));
    }
    for (int bl = 0; bl < 2; ++bl) {
      if (!block_active[bl]) continue;
      const int lo = block_start[bl];
      for (int parity = 0; parity < 2; ++parity)
        for (int a = lo + parity; a + 1 < lo + half; a += 2) {
          GateParam theta = GateParam::free_index(next_param++);
          GateParam phi = phase_frozen
                              ? GateParam::free_index(next_param++)
                              : GateParam::bound(0.0);
          phase_frozen = true;
          c.gates.push_back(Gate::a(a, a + 1, theta, phi));
        }
    }
  }
  c.n_free_params = next_param;
  c.validate();
  return c;
}

namespace {

std::vector<std::pair<int, int>> entangler_pairs(int n, Entanglement ent) {
  std::vector<std::pair<int, int>> pairs;
  if (ent == Entanglement::Full) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
  }
  return pairs;
}

}  // namespace

Circuit build_adhoc(AdhocKind kind, int n_qubits, int depth,
                    Entanglement entanglement) {
  if (n_qubits < 1) throw std::invalid_argument("need at least one qubit");
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");

  Circuit c(n_qubits);
  int next = 0;
  const auto pairs = entangler_pairs(n_qubits, entanglement);

  auto rotation_layer = [&]() {
    for (int q = 0; q < n_qubits; ++q)
      c.gates.push_back(Gate::ry(q, GateParam::free_index(next++)));
    if (kind == AdhocKind::RYRZ)
      for (int q = 0; q < n_qubits; ++q)
        c.gates.push_back(Gate::rz(q, GateParam::free_index(next++)));
  };
  auto rz_layer = [&]() {
    for (int q = 0; q < n_qubits; ++q)
      c.gates.push_back(Gate::rz(q, GateParam::free_index(next++)));
  };

  if (kind == AdhocKind::SwapRZ) {
    rz_layer();
    for (int d = 0; d < depth; ++d) {
      for (const auto& [a, b] : pairs)
        c.gates.push_back(Gate::pswap(a, b, GateParam::free_index(next++)));
      rz_layer();
    }
  } else {
    rotation_layer();
    for (int d = 0; d < depth; ++d) {
      for (const auto& [a, b] : pairs) c.gates.push_back(Gate::cz(a, b));
      rotation_layer();
    }
  }
  c.n_free_params = next;
  c.validate();
  return c;
}

//=============================================================================
// Resources
//=============================================================================

ResourceReport resources(const Circuit& c) {
  ResourceReport r;
  r.n_free_params = c.n_free_params;
  std::vector<int> frontier(std::max(c.n_qubits, 1), 0);
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case GateKind::CNOT:
      case GateKind::CZ:
        r.n_cnots += 1;
        break;
      case GateKind::A:
        r.n_cnots += 3;
        break;
      case GateKind::PSWAP:
        r.n_cnots += 2;
        break;
      default:
        break;
    }
    const int arity = gate_arity(g.kind);
    int layer = 0;
    for (int i = 0; i < arity; ++i)
      layer = std::max(layer, frontier[g.qubits[i]]);
    for (int i = 0; i < arity; ++i) frontier[g.qubits[i]] = layer + 1;
    r.depth = std::max(r.depth, layer + 1);
  }
  return r;
}

//=============================================================================
// Parameter-count formulas
//=============================================================================

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

long parameter_count(CountMode mode, int n, int m, double s) {
  if (n < 1) throw std::invalid_argument("invalid qubit count");
  switch (mode) {
    case CountMode::FullHilbert:
      return 2 * ((1l << n) - 1);
    case CountMode::FixedN:
      if (m < 0 || m > n) throw std::invalid_argument("invalid (n, m)");
      return 2 * (binomial(n, m) - 1);
    case CountMode::FixedNSSz: {
      if (n % 2 != 0 || m < 0 || m > n)
        throw std::invalid_argument("invalid (n, m)");
      if (s < 0 || s > m / 2.0 + 1e-12)
        throw std::invalid_argument("invalid total spin s");
      const double kmax_real = m / 2.0 - s;
      const int kmax = static_cast<int>(std::round(kmax_real));
      if (std::abs(kmax_real - kmax) > 1e-9)
        throw std::invalid_argument("s incompatible with particle parity");
      const int two_s = static_cast<int>(std::round(2 * s));
      double total = 0.0;
      for (int k = 0; k <= kmax; ++k) {
        const double blocks = static_cast<double>(binomial(n / 2, k)) *
                              static_cast<double>(binomial(n / 2 - k, m - 2 * k));
        if (blocks == 0.0) continue;
        // (2s+1)(m-2k)! / [(m/2-k-s)! (m/2-k+s+1)!] with integer factorials
        const int lo = kmax - k;             // m/2 - k - s
        const int hi = lo + two_s + 1;       // m/2 - k + s + 1
        total += blocks * (two_s + 1) * factorial(m - 2 * k) /
                 (factorial(lo) * factorial(hi));
      }
      return static_cast<long>(std::llround(total));
    }
  }
  throw std::invalid_argument("unknown count mode");
}

//=============================================================================
// Serialization
//=============================================================================

std::string circuit_to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& g : c.gates) {
    nlohmann::json rec;
    rec["kind"] = gate_kind_name(g.kind);
    rec["qubits"] = std::vector<int>(g.qubits.begin(),
                                     g.qubits.begin() + gate_arity(g.kind));
    nlohmann::json params = nlohmann::json::array();
    for (int i = 0; i < gate_n_params(g.kind); ++i) {
      if (g.params[i].is_bound)
        params.push_back({{"value", g.params[i].value}});
      else
        params.push_back({{"free", g.params[i].index}});
    }
    rec["params"] = params;
    gates.push_back(rec);
  }
  nlohmann::json root = {{"n_qubits", c.n_qubits},
                         {"n_free_params", c.n_free_params},
                         {"gates", gates}};
  return root.dump(2);
}

Circuit circuit_from_json(const std::string& text) {
  const auto root = nlohmann::json::parse(text);
  Circuit c(root.at("n_qubits").get<int>());
  c.n_free_params = root.at("n_free_params").get<int>();
  for (const auto& rec : root.at("gates")) {
    Gate g;
    g.kind = gate_kind_from_name(rec.at("kind").get<std::string>());
    const auto qubits = rec.at("qubits").get<std::vector<int>>();
    for (std::size_t i = 0; i < qubits.size() && i < 2; ++i)
      g.qubits[i] = qubits[i];
    const auto& params = rec.at("params");
    for (int i = 0; i < gate_n_params(g.kind); ++i) {
      const auto& p = params.at(i);
      g.params[i] = p.contains("value")
                        ? GateParam::bound(p.at("value").get<double>())
                        : GateParam::free_index(p.at("free").get<int>());
    }
    c.gates.push_back(g);
  }
  c.validate();
  return c;
}

std::string circuit_pretty(const Circuit& c) {
  std::ostringstream out;
  out << c.n_qubits << " qubits, " << c.n_free_params << " free parameters\n";
  for (const auto& g : c.gates) {
    out << gate_kind_name(g.kind) << " q" << g.qubits[0];
    if (gate_arity(g.kind) == 2) out << ",q" << g.qubits[1];
    for (int i = 0; i < gate_n_params(g.kind); ++i) {
      if (g.params[i].is_bound)
        out << " " << g.params[i].value;
      else
        out << " p" << g.params[i].index;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace symvqe
