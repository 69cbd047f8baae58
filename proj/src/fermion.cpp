#include "symvqe/fermion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace symvqe {

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(c));
  return s;
}

/// Extract the integer following "KEY=" in a namelist header.
std::optional<long> header_value(const std::string& header,
                                 const std::string& key) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos) return std::nullopt;
  const char* p = header.c_str() + pos + key.size() + 1;
  char* end = nullptr;
  const long v = std::strtol(p, &end, 10);
  if (end == p) return std::nullopt;
  return v;
}

struct RawRecord {
  double value;
  int i, j, k, l;
};

}  // namespace

FermionIntegrals load_fcidump(const std::string& path, double tol) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open integral file: " + path);

  // Header: everything up to &END (or a bare / terminator).
  std::string header, line;
  bool header_done = false;
  std::vector<RawRecord> records;
  while (std::getline(in, line)) {
    if (!header_done) {
      header += upper(line) + " ";
      if (header.find("&END") != std::string::npos ||
          header.find("/") != std::string::npos)
        header_done = true;
      continue;
    }
    std::istringstream ls(line);
    RawRecord r{};
    if (ls >> r.value >> r.i >> r.j >> r.k >> r.l) records.push_back(r);
  }
  if (!header_done)
    throw std::runtime_error("integral file has no namelist header: " + path);
  if (records.empty())
    throw std::runtime_error("integral file has no records: " + path);

  const auto norb = header_value(header, "NORB");
  if (!norb || *norb < 1)
    throw std::runtime_error("missing or invalid NORB in header: " + path);

  FermionIntegrals ints;
  ints.n_spatial = static_cast<int>(*norb);
  const int m = ints.n_spatial;
  ints.h = Eigen::MatrixXd::Zero(m, m);
  ints.g_data.assign(static_cast<std::size_t>(m) * m * m * m, 0.0);
  ints.geometry_tag = std::filesystem::path(path).stem().string();

  // Track explicitly assigned entries so symmetry-conflicting duplicates
  // are rejected rather than silently overwritten.
  Eigen::MatrixXd h_set = Eigen::MatrixXd::Zero(m, m);
  std::map<std::array<int, 4>, double> g_seen;
  bool have_e_nuc = false;

  auto check_index = [&](int idx) {
    if (idx < 1 || idx > m)
      throw std::runtime_error("orbital index out of range in " + path);
  };

  for (const auto& r : records) {
    if (r.i == 0 && r.j == 0 && r.k == 0 && r.l == 0) {
      ints.e_nuc = r.value;
      have_e_nuc = true;
    } else if (r.k == 0 && r.l == 0) {
      check_index(r.i);
      check_index(r.j);
      const int i = r.i - 1, j = r.j - 1;
      for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
        if (h_set(a, b) != 0.0 && std::abs(ints.h(a, b) - r.value) > tol)
          throw std::runtime_error("one-electron symmetry violation in " +
                                   path);
        ints.h(a, b) = r.value;
        h_set(a, b) = 1.0;
      }
    } else {
      check_index(r.i);
      check_index(r.j);
      check_index(r.k);
      check_index(r.l);
      const int i = r.i - 1, j = r.j - 1, k = r.k - 1, l = r.l - 1;
      const std::array<std::array<int, 4>, 8> images = {{
          {i, j, k, l}, {j, i, k, l}, {i, j, l, k}, {j, i, l, k},
          {k, l, i, j}, {l, k, i, j}, {k, l, j, i}, {l, k, j, i},
      }};
      for (const auto& im : images) {
        const auto it = g_seen.find(im);
        if (it != g_seen.end() && std::abs(it->second - r.value) > tol)
          throw std::runtime_error("two-electron symmetry violation in " +
                                   path);
        g_seen[im] = r.value;
        ints.g(im[0], im[1], im[2], im[3]) = r.value;
      }
    }
  }

  if (!have_e_nuc)
    throw std::runtime_error("missing nuclear repulsion record in " + path);
  if (!ints.h.isApprox(ints.h.transpose(), tol))
    throw std::runtime_error("one-electron matrix not symmetric in " + path);
  return ints;
}

bool is_hermitian(const FermionOperator& op, double tol) {
  std::map<std::vector<std::pair<int, int>>, double> table;
  auto key_of = [](const FermionTerm& t) {
    std::vector<std::pair<int, int>> key;
    key.reserve(t.ops.size());
    for (const auto& o : t.ops)
      key.emplace_back(o.mode, o.kind == Ladder::Create ? 1 : 0);
    return key;
  };
  for (const auto& t : op.terms) table[key_of(t)] += t.coeff;
  for (const auto& [key, coeff] : table) {
    std::vector<std::pair<int, int>> dag(key.rbegin(), key.rend());
    for (auto& [mode, create] : dag) create = 1 - create;
    const auto it = table.find(dag);
    const double other = it == table.end() ? 0.0 : it->second;
    if (std::abs(coeff - other) > tol) return false;
  }
  return true;
}

FermionOperator second_quantized(const FermionIntegrals& ints) {
  const int m = ints.n_spatial;
  FermionOperator op;
  op.n_modes = 2 * m;

  auto mode = [m](int spatial, int spin) { return spatial + spin * m; };

  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      if (ints.h(p, q) == 0.0) continue;
      for (int spin = 0; spin < 2; ++spin)
        op.terms.push_back({ints.h(p, q),
                            {{mode(p, spin), Ladder::Create},
                             {mode(q, spin), Ladder::Annihilate}}});
    }

  // 1/2 sum_{pqrs,st} (pq|rs) a+_{p,s} a+_{r,t} a_{s,t} a_{q,s} with the
  // chemists' tensor; terms with a repeated creator or annihilator vanish.
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) {
          const double v = 0.5 * ints.g(p, q, r, s);
          if (v == 0.0) continue;
          for (int sig = 0; sig < 2; ++sig)
            for (int tau = 0; tau < 2; ++tau) {
              const int c1 = mode(p, sig), c2 = mode(r, tau);
              const int a1 = mode(s, tau), a2 = mode(q, sig);
              if (c1 == c2 || a1 == a2) continue;
              op.terms.push_back({v,
                                  {{c1, Ladder::Create},
                                   {c2, Ladder::Create},
                                   {a1, Ladder::Annihilate},
                                   {a2, Ladder::Annihilate}}});
            }
        }
  return op;
}

PauliSum jordan_wigner(const FermionOperator& op, double tol) {
  if (!is_hermitian(op, tol))
    throw std::invalid_argument("jordan_wigner requires a Hermitian operator");

  const int n = op.n_modes;
  std::map<std::pair<std::uint64_t, std::uint64_t>, Complex> acc;
  static const Complex kI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

  for (const auto& term : op.terms) {
    // Running product of phased Pauli strings, folded left to right so the
    // ladder sequence order matches matrix-product order.
    std::vector<std::pair<Complex, PauliString>> prod = {
        {Complex(term.coeff, 0.0), PauliString::identity(n)}};
    for (const auto& lop : term.ops) {
      const std::uint64_t zstring =
          lop.mode == 0 ? 0 : ((1ull << lop.mode) - 1);
      // a = (X + iY)/2 . Z_string, a+ = (X - iY)/2 . Z_string
      const PauliString px(n, 1ull << lop.mode, zstring);
      const PauliString py(n, 1ull << lop.mode, zstring | (1ull << lop.mode));
      const Complex cy = lop.kind == Ladder::Annihilate ? Complex(0.0, 0.5)
                                                        : Complex(0.0, -0.5);
      std::vector<std::pair<Complex, PauliString>> next;
      next.reserve(prod.size() * 2);
      for (const auto& [c, s] : prod) {
        auto [sx, kx] = multiply_with_phase(s, px);
        next.emplace_back(c * 0.5 * kI[kx], sx);
        auto [sy, ky] = multiply_with_phase(s, py);
        next.emplace_back(c * cy * kI[ky], sy);
      }
      prod = std::move(next);
    }
    for (const auto& [c, s] : prod) acc[{s.x, s.z}] += c;
  }

  PauliSum sum(n);
  for (const auto& [masks, c] : acc) {
    if (std::abs(c.imag()) > tol)
      throw std::runtime_error("JW output has a complex weight");
    sum.terms.push_back(
        {c.real(), PauliString(n, masks.first, masks.second)});
  }
  return simplify(sum);
}

AnticommutationReport anticommutation_check(int n_modes) {
  if (n_modes < 1 || n_modes > 6)
    throw std::invalid_argument("anticommutation oracle limited to 6 modes");

  const std::int64_t dim = 1ll << n_modes;
  std::vector<Eigen::MatrixXcd> lower(n_modes);
  for (int p = 0; p < n_modes; ++p) {
    const std::uint64_t zstring = p == 0 ? 0 : ((1ull << p) - 1);
    const PauliString px(n_modes, 1ull << p, zstring);
    const PauliString py(n_modes, 1ull << p, zstring | (1ull << p));
    lower[p] = 0.5 * pauli_to_matrix(px) +
               Complex(0.0, 0.5) * pauli_to_matrix(py);
  }

  AnticommutationReport report;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  for (int p = 0; p < n_modes; ++p)
    for (int q = 0; q < n_modes; ++q) {
      const Eigen::MatrixXcd adag = lower[q].adjoint();
      const Eigen::MatrixXcd mixed =
          lower[p] * adag + adag * lower[p] - (p == q ? id : 0.0 * id);
      const Eigen::MatrixXcd same =
          lower[p] * lower[q] + lower[q] * lower[p];
      report.max_deviation = std::max({report.max_deviation,
                                       mixed.cwiseAbs().maxCoeff(),
                                       same.cwiseAbs().maxCoeff()});
    }
  report.ok = report.max_deviation < 1e-12;
  return report;
}

}  // namespace symvqe
