#include "symvqe/pauli.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace symvqe {

namespace {

int letter_code(char c) {
  switch (c) {
    case 'I': return 0;
    case 'X': return 1;
    case 'Z': return 2;
    case 'Y': return 3;
    default:
      throw std::invalid_argument("invalid Pauli letter: " +
                                  std::string(1, c));
  }
}

char code_letter(int code) {
  static constexpr char kLetters[4] = {'I', 'X', 'Z', 'Y'};
  return kLetters[code];
}

// Phase exponent k (of i^k) for the single-qubit product row * col,
// indexed by the (x + 2z) letter codes above. X*Y = iZ, Y*Z = iX,
// Z*X = iY and the reversed orders pick up i^3.
constexpr int kPhase[4][4] = {
    {0, 0, 0, 0},   // I * {I,X,Z,Y}
    {0, 0, 3, 1},   // X * {I,X,Z,Y}
    {0, 1, 0, 3},   // Z * {I,X,Z,Y}
    {0, 3, 1, 0},   // Y * {I,X,Z,Y}
};

void check_qubit_count(int n) {
  if (n < 0 || n > PauliString::kMaxQubits)
    throw std::invalid_argument("qubit count out of range");
}

}  // namespace

PauliString::PauliString(int n, std::uint64_t x_mask, std::uint64_t z_mask)
    : n_qubits(n), x(x_mask), z(z_mask) {
  check_qubit_count(n);
  const std::uint64_t valid = n == 64 ? ~0ull : (1ull << n) - 1;
  if ((x & ~valid) || (z & ~valid))
    throw std::invalid_argument("Pauli mask exceeds qubit count");
}

PauliString PauliString::identity(int n_qubits) {
  return PauliString(n_qubits, 0, 0);
}

PauliString PauliString::single(int n_qubits, int qubit, char letter) {
  if (qubit < 0 || qubit >= n_qubits)
    throw std::invalid_argument("qubit index out of range");
  const int code = letter_code(letter);
  std::uint64_t x = (code & 1) ? (1ull << qubit) : 0;
  std::uint64_t z = (code & 2) ? (1ull << qubit) : 0;
  return PauliString(n_qubits, x, z);
}

PauliString PauliString::parse(const std::string& text) {
  const int n = static_cast<int>(text.size());
  check_qubit_count(n);
  PauliString p(n, 0, 0);
  for (int q = 0; q < n; ++q) {
    const int code = letter_code(text[n - 1 - q]);
    if (code & 1) p.x |= 1ull << q;
    if (code & 2) p.z |= 1ull << q;
  }
  return p;
}

char PauliString::letter(int qubit) const {
  const int code = static_cast<int>((x >> qubit) & 1) |
                   (static_cast<int>((z >> qubit) & 1) << 1);
  return code_letter(code);
}

std::string PauliString::render() const {
  std::string out(n_qubits, 'I');
  for (int q = 0; q < n_qubits; ++q) out[n_qubits - 1 - q] = letter(q);
  return out;
}

int PauliString::weight() const {
  return std::popcount(support());
}

bool lexicographic_less(const PauliString& a, const PauliString& b) {
  if (a.n_qubits != b.n_qubits) return a.n_qubits < b.n_qubits;
  for (int q = a.n_qubits - 1; q >= 0; --q) {
    const char la = a.letter(q), lb = b.letter(q);
    if (la != lb) return la < lb;
  }
  return false;
}

bool qubitwise_compatible(const PauliString& a, const PauliString& b) {
  // Letters clash exactly where both act and the (x, z) bits differ.
  const std::uint64_t both = a.support() & b.support();
  return ((a.x ^ b.x) & both) == 0 && ((a.z ^ b.z) & both) == 0;
}

std::pair<PauliString, int> multiply_with_phase(const PauliString& a,
                                                const PauliString& b) {
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("Pauli string size mismatch");
  PauliString out(a.n_qubits, a.x ^ b.x, a.z ^ b.z);
  int k = 0;
  std::uint64_t active = (a.support()) & (b.support());
  while (active) {
    const int q = std::countr_zero(active);
    active &= active - 1;
    const int ca = static_cast<int>((a.x >> q) & 1) |
                   (static_cast<int>((a.z >> q) & 1) << 1);
    const int cb = static_cast<int>((b.x >> q) & 1) |
                   (static_cast<int>((b.z >> q) & 1) << 1);
    k += kPhase[ca][cb];
  }
  return {out, k & 3};
}

PauliSum& PauliSum::add(double coeff, const PauliString& s) {
  if (s.n_qubits != n_qubits)
    throw std::invalid_argument("Pauli string size mismatch");
  terms.push_back({coeff, s});
  return *this;
}

PauliSum& PauliSum::add(double coeff, const std::string& text) {
  return add(coeff, PauliString::parse(text));
}

double PauliSum::identity_coefficient() const {
  double c = 0.0;
  for (const auto& t : terms)
    if (t.string.is_identity()) c += t.coeff;
  return c;
}

PauliSum simplify(const PauliSum& sum, double tol) {
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> merged;
  for (const auto& t : sum.terms) merged[{t.string.x, t.string.z}] += t.coeff;

  PauliSum out(sum.n_qubits);
  for (const auto& [masks, coeff] : merged) {
    if (std::abs(coeff) < tol) continue;
    out.terms.push_back({coeff, PauliString(sum.n_qubits, masks.first,
                                            masks.second)});
  }
  std::sort(out.terms.begin(), out.terms.end(),
            [](const PauliTerm& a, const PauliTerm& b) {
              return lexicographic_less(a.string, b.string);
            });
  return out;
}

Eigen::MatrixXcd pauli_to_matrix(const PauliString& p) {
  if (p.n_qubits > 12)
    throw std::invalid_argument("dense Pauli oracle limited to 12 qubits");
  const std::int64_t dim = 1ll << p.n_qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  // P|b> = i^{|x&z|} (-1)^{|z&b|} |b ^ x>, one entry per column.
  static const Complex kI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Complex base = kI[std::popcount(p.x & p.z) & 3];
  for (std::int64_t b = 0; b < dim; ++b) {
    const double sign = (std::popcount(p.z & static_cast<std::uint64_t>(b)) & 1)
                            ? -1.0
                            : 1.0;
    m(b ^ static_cast<std::int64_t>(p.x), b) = base * sign;
  }
  return m;
}

Eigen::MatrixXcd pauli_to_matrix(const PauliSum& sum) {
  if (sum.n_qubits > 12)
    throw std::invalid_argument("dense Pauli oracle limited to 12 qubits");
  const std::int64_t dim = 1ll << sum.n_qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : sum.terms) m += t.coeff * pauli_to_matrix(t.string);
  return m;
}

PauliSum number_operator(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("need at least one qubit");
  PauliSum sum(n_qubits);
  sum.add(0.5 * n_qubits, PauliString::identity(n_qubits));
  for (int q = 0; q < n_qubits; ++q)
    sum.add(-0.5, PauliString::single(n_qubits, q, 'Z'));
  return simplify(sum);
}

PauliSum sz_operator(int n_qubits) {
  if (n_qubits < 2 || n_qubits % 2 != 0)
    throw std::invalid_argument("sz_operator requires an even qubit count");
  PauliSum sum(n_qubits);
  for (int q = 0; q < n_qubits / 2; ++q)
    sum.add(-0.25, PauliString::single(n_qubits, q, 'Z'));
  for (int q = n_qubits / 2; q < n_qubits; ++q)
    sum.add(0.25, PauliString::single(n_qubits, q, 'Z'));
  return simplify(sum);
}

std::vector<MeasurementGroup> group_qubitwise_commuting(const PauliSum& sum) {
  std::vector<MeasurementGroup> groups;
  for (std::size_t idx = 0; idx < sum.terms.size(); ++idx) {
    const PauliString& s = sum.terms[idx].string;
    bool placed = false;
    for (auto& g : groups) {
      if (!qubitwise_compatible(s, g.shared_basis)) continue;
      g.members.push_back(idx);
      g.shared_basis.x |= s.x;
      g.shared_basis.z |= s.z;
      placed = true;
      break;
    }
    if (!placed) {
      MeasurementGroup g;
      g.members.push_back(idx);
      g.shared_basis = s;
      groups.push_back(std::move(g));
    }
  }
  for (auto& g : groups) g.z_only = (g.shared_basis.x == 0);
  return groups;
}

std::string pauli_sum_to_json(const PauliSum& sum) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : sum.terms)
    arr.push_back({{"coeff", t.coeff}, {"pauli", t.string.render()}});
  return arr.dump(2);
}

PauliSum pauli_sum_from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::runtime_error("expected a JSON array");
  PauliSum sum;
  bool first = true;
  for (const auto& rec : arr) {
    const PauliString s = PauliString::parse(rec.at("pauli").get<std::string>());
    if (first) {
      sum.n_qubits = s.n_qubits;
      first = false;
    }
    sum.add(rec.at("coeff").get<double>(), s);
  }
  return sum;
}

}  // namespace symvqe
