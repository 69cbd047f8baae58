#include "symvqe/measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace symvqe {

//=============================================================================
// Seeds
//=============================================================================

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x51ull));
}

//=============================================================================
// Counts
//=============================================================================

std::string index_to_bitstring(std::uint64_t index, int n_qubits) {
  std::string s(n_qubits, '0');
  for (int q = 0; q < n_qubits; ++q)
    if (index & (1ull << q)) s[n_qubits - 1 - q] = '1';
  return s;
}

std::uint64_t bitstring_to_index(const std::string& bits) {
  std::uint64_t idx = 0;
  const int n = static_cast<int>(bits.size());
  for (int q = 0; q < n; ++q) {
    const char c = bits[n - 1 - q];
    if (c != '0' && c != '1')
      throw std::invalid_argument("invalid bitstring: " + bits);
    if (c == '1') idx |= 1ull << q;
  }
  return idx;
}

Eigen::VectorXd Counts::to_vector() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(1ll << n_qubits);
  for (const auto& [bits, count] : table)
    v[static_cast<Eigen::Index>(bitstring_to_index(bits))] += count;
  return v;
}

Counts Counts::from_vector(int n_qubits, const Eigen::VectorXd& v) {
  Counts c;
  c.n_qubits = n_qubits;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const long count = std::lround(v[i]);
    if (count == 0) continue;
    c.table[index_to_bitstring(static_cast<std::uint64_t>(i), n_qubits)] =
        count;
    c.shots += count;
  }
  return c;
}

std::string counts_to_json(const Counts& counts) {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [bits, count] : counts.table) table[bits] = count;
  nlohmann::json root = {{"shots", counts.shots}, {"table", table}};
  return root.dump(2);
}

Counts counts_from_json(const std::string& text) {
  const auto root = nlohmann::json::parse(text);
  Counts c;
  c.shots = root.at("shots").get<long>();
  long total = 0;
  for (const auto& [bits, count] : root.at("table").items()) {
    c.n_qubits = static_cast<int>(bits.size());
    c.table[bits] = count.get<long>();
    total += count.get<long>();
  }
  if (total != c.shots)
    throw std::runtime_error("counts table does not sum to shots");
  return c;
}

//=============================================================================
// Sampling
//=============================================================================

namespace {

double canonical_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Counts sample_from_probabilities(const Eigen::VectorXd& probs, int n_qubits,
                                 long shots,
                                 const std::vector<ReadoutError>& readout,
                                 std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  if (!readout.empty() && static_cast<int>(readout.size()) < n_qubits)
    throw std::invalid_argument("readout model smaller than register");

  Eigen::VectorXd cdf(probs.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += std::max(probs[i], 0.0);
    cdf[i] = acc;
  }
  if (acc <= 0) throw std::runtime_error("state has no probability mass");

  std::mt19937_64 rng(seed);
  std::map<std::uint64_t, long> hist;
  for (long s = 0; s < shots; ++s) {
    const double u = canonical_double(rng) * acc;
    const auto it = std::upper_bound(cdf.data(), cdf.data() + cdf.size(), u);
    std::uint64_t outcome = static_cast<std::uint64_t>(
        std::min<std::ptrdiff_t>(it - cdf.data(), cdf.size() - 1));
    for (int q = 0; q < n_qubits && !readout.empty(); ++q) {
      const bool one = outcome & (1ull << q);
      const double flip =
          one ? readout[q].p0_given1 : readout[q].p1_given0;
      if (flip > 0 && canonical_double(rng) < flip) outcome ^= 1ull << q;
    }
    ++hist[outcome];
  }

  Counts counts;
  counts.n_qubits = n_qubits;
  counts.shots = shots;
  for (const auto& [idx, count] : hist)
    counts.table[index_to_bitstring(idx, n_qubits)] = count;
  return counts;
}

}  // namespace

Counts sample_counts(const Statevector& psi, long shots,
                     const std::vector<ReadoutError>& readout,
                     std::uint64_t seed) {
  return sample_from_probabilities(psi.amps.cwiseAbs2(), psi.n_qubits, shots,
                                   readout, seed);
}

Counts sample_counts(const DensityMatrix& rho, long shots,
                     const std::vector<ReadoutError>& readout,
                     std::uint64_t seed) {
  return sample_from_probabilities(rho.rho.diagonal().real(), rho.n_qubits,
                                   shots, readout, seed);
}

//=============================================================================
// Grouped expectation estimation
//=============================================================================

std::vector<Gate> measurement_circuit(const MeasurementGroup& group) {
  std::vector<Gate> gates;
  const PauliString& basis = group.shared_basis;
  for (int q = 0; q < basis.n_qubits; ++q) {
    switch (basis.letter(q)) {
      case 'X':
        gates.push_back(Gate::h(q));
        break;
      case 'Y':
        gates.push_back(Gate::sdg(q));
        gates.push_back(Gate::h(q));
        break;
      default:
        break;
    }
  }
  return gates;
}

std::vector<MemberEstimate> estimate_expectations(
    const Eigen::VectorXd& weights, double shots, const PauliSum& sum,
    const MeasurementGroup& group) {
  const double total = weights.sum();
  if (total <= 0) throw std::invalid_argument("empty counts");
  std::vector<MemberEstimate> out;
  out.reserve(group.members.size());
  for (const std::size_t idx : group.members) {
    const std::uint64_t support = sum.terms.at(idx).string.support();
    double acc = 0.0;
    for (Eigen::Index b = 0; b < weights.size(); ++b) {
      if (weights[b] == 0.0) continue;
      const int parity =
          std::popcount(static_cast<std::uint64_t>(b) & support) & 1;
      acc += parity ? -weights[b] : weights[b];
    }
    MemberEstimate est;
    est.value = acc / total;
    est.std_error =
        std::sqrt(std::max(0.0, 1.0 - est.value * est.value) / shots);
    out.push_back(est);
  }
  return out;
}

std::vector<MemberEstimate> estimate_expectations(const Counts& counts,
                                                  const PauliSum& sum,
                                                  const MeasurementGroup& group) {
  return estimate_expectations(counts.to_vector(),
                               static_cast<double>(counts.shots), sum, group);
}

//=============================================================================
// Partial symmetry enforcement
//=============================================================================

std::optional<Eigen::VectorXd> symmetry_postselect(
    const Eigen::VectorXd& weights, int n_qubits, int m) {
  Eigen::VectorXd kept = Eigen::VectorXd::Zero(weights.size());
  double total = 0.0;
  for (Eigen::Index b = 0; b < weights.size(); ++b) {
    if (std::popcount(static_cast<std::uint64_t>(b)) != m) continue;
    kept[b] = weights[b];
    total += weights[b];
  }
  (void)n_qubits;
  if (total <= 0) return std::nullopt;
  return kept;
}

std::optional<Counts> symmetry_postselect(const Counts& counts, int m) {
  const auto kept =
      symmetry_postselect(counts.to_vector(), counts.n_qubits, m);
  if (!kept) return std::nullopt;
  return Counts::from_vector(counts.n_qubits, *kept);
}

//=============================================================================
// SPAM calibration
//=============================================================================

std::string calibration_to_json(const CalibrationMatrix& cal) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < cal.t.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < cal.t.cols(); ++c) row.push_back(cal.t(r, c));
    rows.push_back(row);
  }
  nlohmann::json root = {{"n_qubits", cal.n_qubits}, {"matrix", rows}};
  return root.dump();
}

CalibrationMatrix calibration_from_json(const std::string& text) {
  const auto root = nlohmann::json::parse(text);
  CalibrationMatrix cal;
  cal.n_qubits = root.at("n_qubits").get<int>();
  const auto& rows = root.at("matrix");
  const Eigen::Index dim = 1ll << cal.n_qubits;
  if (static_cast<Eigen::Index>(rows.size()) != dim)
    throw std::runtime_error("calibration matrix has wrong dimension");
  cal.t.resize(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      cal.t(r, c) = rows.at(r).at(c).get<double>();
  return cal;
}

CalibrationMatrix build_spam_matrix(const DeviceModel& dev, int n_qubits,
                                    long shots_per_state, std::uint64_t seed) {
  if (shots_per_state < 1)
    throw std::invalid_argument("shots_per_state must be at least 1");
  std::vector<ReadoutError> readout;
  for (int q = 0; q < n_qubits; ++q) readout.push_back(dev.qubits.at(q).readout);

  const Eigen::Index dim = 1ll << n_qubits;
  CalibrationMatrix cal;
  cal.n_qubits = n_qubits;
  cal.t.resize(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    // X gates on the set bits of j prepare |j> exactly; only readout noise
    // acts on the measurement.
    const Statevector psi =
        Statevector::basis_state(n_qubits, static_cast<std::uint64_t>(j));
    const Counts counts = sample_counts(
        psi, shots_per_state, readout,
        derive_seed(seed, static_cast<std::uint64_t>(j)));
    cal.t.col(j) = counts.to_vector() / static_cast<double>(shots_per_state);
  }
  return cal;
}

SpamCorrected apply_spam_correction(const Eigen::VectorXd& observed,
                                    const CalibrationMatrix& cal) {
  if (observed.size() != cal.t.rows())
    throw std::invalid_argument("counts/calibration dimension mismatch");
  SpamCorrected out;
  out.weights = observed;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      cal.t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  out.condition = smin > 0 ? svd.singularValues().maxCoeff() / smin
                           : std::numeric_limits<double>::infinity();
  if (!(out.condition < 1e8)) {
    out.skipped = true;
    return out;
  }

  Eigen::VectorXd x = svd.solve(observed);
  x = x.cwiseMax(0.0);
  const double total = x.sum(), shots = observed.sum();
  if (total <= 0) {
    out.skipped = true;
    return out;
  }
  out.weights = x * (shots / total);
  return out;
}

//=============================================================================
// Richardson extrapolation
//=============================================================================

EnergyEstimate richardson_extrapolate(const std::vector<RichardsonPoint>& points,
                                      int degree) {
  const int n = static_cast<int>(points.size());
  if (degree < 1 || n < degree + 1)
    throw std::invalid_argument("underdetermined Richardson fit");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (points[i].fold_factor == points[j].fold_factor)
        throw std::invalid_argument("fold factors must be distinct");

  Eigen::MatrixXd v(n, degree + 1);
  Eigen::VectorXd e(n);
  for (int i = 0; i < n; ++i) {
    double pw = 1.0;
    for (int k = 0; k <= degree; ++k) {
      v(i, k) = pw;
      pw *= points[i].fold_factor;
    }
    e[i] = points[i].energy;
  }
  // Intercept weights from the pseudo-inverse row for the constant term.
  const Eigen::MatrixXd pinv =
      (v.transpose() * v).ldlt().solve(v.transpose());
  const Eigen::VectorXd coeff = pinv * e;
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = pinv(0, i) * points[i].std_error;
    var += w * w;
  }

  EnergyEstimate est;
  est.value = coeff[0];
  est.std_error = std::sqrt(var);
  est.mitigation_tags.insert(Mitigation::Richardson);
  return est;
}

//=============================================================================
// Mitigated grouped energy estimation
//=============================================================================

void MitigationConfig::validate() const {
  if (!richardson) return;
  if (folds.empty() || folds.front() != 1)
    throw std::invalid_argument("fold factors must start at 1");
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if (folds[i] % 2 == 0 || folds[i] < 1)
      throw std::invalid_argument("fold factors must be odd");
    if (i > 0 && folds[i] <= folds[i - 1])
      throw std::invalid_argument("fold factors must be strictly increasing");
  }
  if (fit_degree < 1 ||
      static_cast<std::size_t>(fit_degree) + 1 > folds.size())
    throw std::invalid_argument("fit degree incompatible with fold count");
}

namespace {

struct FoldEstimate {
  double value = 0.0;
  double variance = 0.0;
};

}  // namespace

EnergyEstimate energy_from_groups(const PauliSum& sum,
                                  const std::vector<MeasurementGroup>& groups,
                                  const EstimatorBackend& backend,
                                  const Circuit& circuit,
                                  const Eigen::VectorXd& params, long shots,
                                  const MitigationConfig& mitigation,
                                  double e_offset, std::uint64_t seed,
                                  const CalibrationMatrix* spam_cal) {
  mitigation.validate();
  const Circuit bound = circuit.n_free_params > 0
                            ? bind_parameters(circuit, params)
                            : circuit;

  if (backend.kind == EstimatorBackend::Kind::SvExact) {
    EnergyEstimate est;
    est.value = sv_expectation(sv_run(bound), sum) + e_offset;
    return est;
  }
  if (backend.kind == EstimatorBackend::Kind::NoisyDm && !backend.device)
    throw std::invalid_argument("noisy backend requires a device model");

  const Circuit native = lower_to_native(bound);
  std::vector<ReadoutError> readout;
  if (backend.kind == EstimatorBackend::Kind::NoisyDm)
    for (int q = 0; q < native.n_qubits; ++q)
      readout.push_back(backend.device->qubits.at(q).readout);

  const bool use_spam = mitigation.spam && spam_cal != nullptr;
  const std::vector<int> folds =
      mitigation.richardson ? mitigation.folds : std::vector<int>{1};

  std::vector<RichardsonPoint> fold_points;
  long shots_used = 0;
  bool spam_applied = false, symmetry_applied = false;

  for (std::size_t fi = 0; fi < folds.size(); ++fi) {
    const Circuit folded = fold_cnots(native, folds[fi]);
    double value = e_offset, variance = 0.0;

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      Circuit experiment = folded;
      for (const auto& g : measurement_circuit(groups[gi]))
        experiment.gates.push_back(g);

      const std::uint64_t exp_seed =
          derive_seed(seed, fi * 4096 + gi);
      Counts counts;
      if (backend.kind == EstimatorBackend::Kind::SvSampled)
        counts = sample_counts(sv_run(experiment), shots, {}, exp_seed);
      else
        counts = sample_counts(dm_run(experiment, *backend.device), shots,
                               readout, exp_seed);
      shots_used += shots;

      Eigen::VectorXd weights = counts.to_vector();
      double effective_shots = static_cast<double>(shots);
      if (use_spam) {
        const SpamCorrected corrected =
            apply_spam_correction(weights, *spam_cal);
        if (!corrected.skipped) {
          weights = corrected.weights;
          spam_applied = true;
        }
      }
      if (mitigation.symmetry && groups[gi].z_only) {
        const auto kept = symmetry_postselect(weights, native.n_qubits,
                                              mitigation.particle_number);
        if (kept) {
          effective_shots = kept->sum();
          weights = *kept;
          symmetry_applied = true;
        }
        // An empty post-selection falls back to the unfiltered counts.
      }

      const auto members =
          estimate_expectations(weights, effective_shots, sum, groups[gi]);
      for (std::size_t k = 0; k < members.size(); ++k) {
        const double alpha = sum.terms.at(groups[gi].members[k]).coeff;
        value += alpha * members[k].value;
        variance += alpha * alpha * members[k].std_error * members[k].std_error;
      }
    }
    fold_points.push_back({folds[fi], value, std::sqrt(variance)});
  }

  EnergyEstimate est;
  if (mitigation.richardson) {
    est = richardson_extrapolate(fold_points, mitigation.fit_degree);
  } else {
    est.value = fold_points.front().energy;
    est.std_error = fold_points.front().std_error;
  }
  est.shots_used = shots_used;
  if (spam_applied) est.mitigation_tags.insert(Mitigation::Spam);
  if (symmetry_applied) est.mitigation_tags.insert(Mitigation::Symmetry);
  return est;
}

}  // namespace symvqe
