#include "qxot/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace qxot {

namespace {

Tolerances g_tolerances;

constexpr double kInvSqrt2 = 0.70710678118654752440;
// Branches lighter than this are numerically empty.
constexpr double kBranchFloor = 1e-14;

int log2_exact(Eigen::Index dim) {
  if (dim <= 0 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("dimension is not a power of two");
  }
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

inline int bit_of(std::size_t index, int qubit, int num_qubits) {
  return static_cast<int>((index >> (num_qubits - 1 - qubit)) & 1U);
}

inline std::size_t qubit_mask(int qubit, int num_qubits) {
  return std::size_t{1} << (num_qubits - 1 - qubit);
}

void check_targets(std::span<const int> targets, int num_qubits) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= num_qubits) {
      throw std::out_of_range("qubit index " + std::to_string(targets[i]) + " out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) throw std::invalid_argument("duplicate qubit index");
    }
  }
}

// Gates that rotate the eigenbasis of `basis` onto the computational basis.
std::vector<GateSpec> to_computational(Basis basis, int q) {
  switch (basis) {
    case Basis::Z: return {};
    case Basis::X: return {GateSpec::single(GateKind::H, q)};
    case Basis::Y: return {GateSpec::single(GateKind::Pdag, q), GateSpec::single(GateKind::H, q)};
  }
  return {};
}

std::vector<GateSpec> from_computational(Basis basis, int q) {
  switch (basis) {
    case Basis::Z: return {};
    case Basis::X: return {GateSpec::single(GateKind::H, q)};
    case Basis::Y: return {GateSpec::single(GateKind::H, q), GateSpec::single(GateKind::P, q)};
  }
  return {};
}

// Eigenvalues of a Hermitian matrix.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double entropy_of_spectrum(const Eigen::VectorXd& spectrum) {
  const double cutoff = g_tolerances.entropy_cutoff;
  double h = 0.0;
  for (double lambda : spectrum) {
    if (lambda > cutoff) h -= lambda * std::log2(lambda);
  }
  return h;
}

}  // namespace

const Tolerances& tolerances() { return g_tolerances; }
void set_tolerances(const Tolerances& t) { g_tolerances = t; }

Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x71786f74U};
  return Rng(seq);
}

int random_bit(Rng& rng) { return static_cast<int>(rng() >> 63); }

// ---------------------------------------------------------------------------
// Ket / DensityOperator

Ket Ket::from_amplitudes(Eigen::VectorXcd amplitudes) {
  const int n = log2_exact(amplitudes.size());
  const double norm = amplitudes.squaredNorm();
  if (std::abs(norm - 1.0) > g_tolerances.norm) {
    throw std::invalid_argument("ket is not normalized (norm^2 = " + std::to_string(norm) + ")");
  }
  return Ket(n, std::move(amplitudes));
}

Ket Ket::basis_state(int num_qubits, std::size_t index) {
  if (num_qubits < 0 || num_qubits > 30) throw std::invalid_argument("unsupported qubit count");
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(Eigen::Index{1} << num_qubits);
  if (index >= static_cast<std::size_t>(a.size())) throw std::out_of_range("basis index out of range");
  a[static_cast<Eigen::Index>(index)] = 1.0;
  return Ket(num_qubits, std::move(a));
}

Ket Ket::eigenstate(Basis basis, int bit) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("bit must be 0 or 1");
  Eigen::VectorXcd a(2);
  const double sign = bit == 0 ? 1.0 : -1.0;
  switch (basis) {
    case Basis::Z: a << (bit == 0 ? 1.0 : 0.0), (bit == 0 ? 0.0 : 1.0); break;
    case Basis::X: a << kInvSqrt2, sign * kInvSqrt2; break;
    case Basis::Y: a << kInvSqrt2, Complex(0.0, sign * kInvSqrt2); break;
  }
  return Ket(1, std::move(a));
}

DensityOperator DensityOperator::from_matrix(Eigen::MatrixXcd matrix) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("density matrix must be square");
  const int n = log2_exact(matrix.rows());
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm > g_tolerances.hermitian) throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(matrix.trace() - Complex(1.0)) > g_tolerances.trace) {
    throw std::invalid_argument("density matrix trace is not 1");
  }
  const Eigen::MatrixXcd h = 0.5 * (matrix + matrix.adjoint());
  if (hermitian_eigenvalues(h).minCoeff() < -g_tolerances.eigenvalue_floor) {
    throw std::invalid_argument("density matrix has a negative eigenvalue");
  }
  return DensityOperator(n, h);
}

DensityOperator DensityOperator::trusted(Eigen::MatrixXcd matrix) {
  const int n = log2_exact(matrix.rows());
  return DensityOperator(n, std::move(matrix));
}

DensityOperator DensityOperator::pure(const Ket& ket) {
  return DensityOperator(ket.num_qubits(), ket.amplitudes() * ket.amplitudes().adjoint());
}

DensityOperator DensityOperator::maximally_mixed(int num_qubits) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  return DensityOperator(num_qubits, Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));
}

DensityOperator DensityOperator::mixture(std::span<const double> weights,
                                         std::span<const DensityOperator> states) {
  if (weights.size() != states.size() || states.empty()) {
    throw std::invalid_argument("mixture needs one weight per state");
  }
  double total = 0.0;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(states[0].dim(), states[0].dim());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("negative mixture weight");
    if (states[i].dim() != m.rows()) throw std::invalid_argument("mixture dimension mismatch");
    m += weights[i] * states[i].matrix();
    total += weights[i];
  }
  if (std::abs(total - 1.0) > g_tolerances.probability_sum) {
    throw std::invalid_argument("mixture weights do not sum to 1");
  }
  return DensityOperator(states[0].num_qubits(), std::move(m));
}

// ---------------------------------------------------------------------------
// Gates

int arity(GateKind kind) {
  return (kind == GateKind::CNOT || kind == GateKind::CZ) ? 2 : 1;
}

bool is_clifford(GateKind kind) {
  switch (kind) {
    case GateKind::T:
    case GateKind::Tdag:
    case GateKind::Rz: return false;
    default: return true;
  }
}

std::string gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::I: return "I";
    case GateKind::X: return "X";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::P: return "P";
    case GateKind::Pdag: return "Pdag";
    case GateKind::T: return "T";
    case GateKind::Tdag: return "Tdag";
    case GateKind::Rz: return "Rz";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
  }
  return "?";
}

GateKind parse_gate_kind(const std::string& name) {
  for (GateKind k : {GateKind::I, GateKind::X, GateKind::Z, GateKind::H, GateKind::P, GateKind::Pdag,
                     GateKind::T, GateKind::Tdag, GateKind::Rz, GateKind::CNOT, GateKind::CZ}) {
    if (gate_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown gate '" + name + "'");
}

Eigen::MatrixXcd gate_matrix(const GateSpec& gate) {
  using std::numbers::pi;
  const Complex i(0.0, 1.0);
  Eigen::MatrixXcd u;
  switch (gate.kind) {
    case GateKind::I: u = Eigen::MatrixXcd::Identity(2, 2); break;
    case GateKind::X: u.resize(2, 2); u << 0, 1, 1, 0; break;
    case GateKind::Z: u.resize(2, 2); u << 1, 0, 0, -1; break;
    case GateKind::H: u.resize(2, 2); u << kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2; break;
    case GateKind::P: u.resize(2, 2); u << 1, 0, 0, i; break;
    case GateKind::Pdag: u.resize(2, 2); u << 1, 0, 0, -i; break;
    case GateKind::T: u.resize(2, 2); u << 1, 0, 0, std::polar(1.0, pi / 4); break;
    case GateKind::Tdag: u.resize(2, 2); u << 1, 0, 0, std::polar(1.0, -pi / 4); break;
    case GateKind::Rz:
      if (!std::isfinite(gate.angle)) throw std::invalid_argument("Rz angle must be finite");
      u.resize(2, 2);
      u << 1, 0, 0, std::polar(1.0, gate.angle);
      break;
    case GateKind::CNOT:
      u = Eigen::MatrixXcd::Zero(4, 4);
      u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
      break;
    case GateKind::CZ:
      u = Eigen::MatrixXcd::Identity(4, 4);
      u(3, 3) = -1.0;
      break;
  }
  return u;
}

void validate_gate(const GateSpec& gate, int num_qubits) {
  if (static_cast<int>(gate.targets.size()) != arity(gate.kind)) {
    throw std::invalid_argument(gate_name(gate.kind) + " expects " + std::to_string(arity(gate.kind)) +
                                " target(s)");
  }
  if (gate.kind == GateKind::Rz && !std::isfinite(gate.angle)) {
    throw std::invalid_argument("Rz angle must be finite");
  }
  check_targets(gate.targets, num_qubits);
}

void apply_unitary(Eigen::VectorXcd& amplitudes, int num_qubits, const Eigen::MatrixXcd& unitary,
                   std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const std::size_t local_dim = std::size_t{1} << k;
  if (static_cast<std::size_t>(unitary.rows()) != local_dim) {
    throw std::invalid_argument("unitary size does not match target count");
  }
  check_targets(targets, num_qubits);

  std::vector<std::size_t> offsets(local_dim, 0);
  std::size_t target_bits = 0;
  for (std::size_t m = 0; m < local_dim; ++m) {
    for (int j = 0; j < k; ++j) {
      if ((m >> (k - 1 - j)) & 1U) offsets[m] |= qubit_mask(targets[j], num_qubits);
    }
  }
  for (int j = 0; j < k; ++j) target_bits |= qubit_mask(targets[j], num_qubits);

  Eigen::VectorXcd local(static_cast<Eigen::Index>(local_dim));
  Eigen::VectorXcd out(static_cast<Eigen::Index>(local_dim));
  const std::size_t dim = static_cast<std::size_t>(amplitudes.size());
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & target_bits) continue;
    for (std::size_t m = 0; m < local_dim; ++m) local[m] = amplitudes[base | offsets[m]];
    out.noalias() = unitary * local;
    for (std::size_t m = 0; m < local_dim; ++m) amplitudes[base | offsets[m]] = out[m];
  }
}

Ket apply_gate(const Ket& state, const GateSpec& gate) {
  validate_gate(gate, state.num_qubits());
  Eigen::VectorXcd a = state.amplitudes();
  apply_unitary(a, state.num_qubits(), gate_matrix(gate), gate.targets);
  return Ket::from_amplitudes(std::move(a));
}

Ket apply_gates(Ket state, std::span<const GateSpec> gates) {
  Eigen::VectorXcd a = state.amplitudes();
  for (const GateSpec& g : gates) {
    validate_gate(g, state.num_qubits());
    apply_unitary(a, state.num_qubits(), gate_matrix(g), g.targets);
  }
  return Ket::from_amplitudes(std::move(a));
}

DensityOperator apply_gate(const DensityOperator& state, const GateSpec& gate) {
  const int n = state.num_qubits();
  validate_gate(gate, n);
  const Eigen::MatrixXcd u = gate_matrix(gate);
  // U rho U^dagger: U on every column, then conj(U) on every row.
  Eigen::MatrixXcd m = state.matrix();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::VectorXcd col = m.col(c);
    apply_unitary(col, n, u, gate.targets);
    m.col(c) = col;
  }
  const Eigen::MatrixXcd uc = u.conjugate();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::VectorXcd row = m.row(r).transpose();
    apply_unitary(row, n, uc, gate.targets);
    m.row(r) = row.transpose();
  }
  return DensityOperator::trusted(std::move(m));
}

Ket tensor(const Ket& a, const Ket& b) {
  Eigen::VectorXcd v = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
  return Ket::from_amplitudes(std::move(v));
}

Complex inner(const Ket& a, const Ket& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inner product dimension mismatch");
  return a.amplitudes().dot(b.amplitudes());
}

double fidelity(const Ket& a, const Ket& b) { return std::norm(inner(a, b)); }

Ket permute_qubits(const Ket& state, std::span<const int> order) {
  const int n = state.num_qubits();
  if (static_cast<int>(order.size()) != n) throw std::invalid_argument("permutation size mismatch");
  check_targets(order, n);
  Eigen::VectorXcd out(state.dim());
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.dim()); ++i) {
    std::size_t j = 0;
    for (int q = 0; q < n; ++q) {
      if (bit_of(i, order[q], n)) j |= qubit_mask(q, n);
    }
    out[static_cast<Eigen::Index>(j)] = state[static_cast<Eigen::Index>(i)];
  }
  return Ket::from_amplitudes(std::move(out));
}

Ket bell_state(int s1, int s2) {
  if ((s1 != 0 && s1 != 1) || (s2 != 0 && s2 != 1)) throw std::invalid_argument("key bits must be 0 or 1");
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(4);
  const double sign = s2 == 0 ? 1.0 : -1.0;
  if (s1 == 0) {
    a[1] = kInvSqrt2;
    a[2] = sign * kInvSqrt2;
  } else {
    a[0] = kInvSqrt2;
    a[3] = sign * kInvSqrt2;
  }
  return Ket::from_amplitudes(std::move(a));
}

// ---------------------------------------------------------------------------
// Measurement

double BranchSet::total_probability() const {
  double t = 0.0;
  for (const Branch& b : branches) t += b.probability;
  return t;
}

BranchSet measure_branches(const Ket& state, std::span<const int> targets, Basis basis) {
  std::vector<QubitMeasurement> ms;
  ms.reserve(targets.size());
  for (int q : targets) ms.push_back({q, basis});
  return measure_branches(state, ms);
}

BranchSet measure_branches(const Ket& state, std::span<const QubitMeasurement> measurements) {
  if (measurements.empty()) throw std::invalid_argument("measurement needs at least one target");
  const int n = state.num_qubits();
  std::vector<int> targets;
  for (const auto& m : measurements) targets.push_back(m.qubit);
  check_targets(targets, n);

  Eigen::VectorXcd rotated = state.amplitudes();
  for (const auto& m : measurements) {
    for (const GateSpec& g : to_computational(m.basis, m.qubit)) {
      apply_unitary(rotated, n, gate_matrix(g), g.targets);
    }
  }

  const int k = static_cast<int>(targets.size());
  BranchSet out;
  for (std::size_t outcome = 0; outcome < (std::size_t{1} << k); ++outcome) {
    Eigen::VectorXcd projected = Eigen::VectorXcd::Zero(rotated.size());
    for (std::size_t i = 0; i < static_cast<std::size_t>(rotated.size()); ++i) {
      bool match = true;
      for (int j = 0; j < k && match; ++j) {
        match = bit_of(i, targets[j], n) == static_cast<int>((outcome >> (k - 1 - j)) & 1U);
      }
      if (match) projected[static_cast<Eigen::Index>(i)] = rotated[static_cast<Eigen::Index>(i)];
    }
    const double p = projected.squaredNorm();
    if (p <= kBranchFloor) continue;
    projected /= std::sqrt(p);
    for (const auto& m : measurements) {
      for (const GateSpec& g : from_computational(m.basis, m.qubit)) {
        apply_unitary(projected, n, gate_matrix(g), g.targets);
      }
    }
    Bits bits(k);
    for (int j = 0; j < k; ++j) bits[j] = static_cast<int>((outcome >> (k - 1 - j)) & 1U);
    out.branches.push_back({std::move(bits), p, Ket::from_amplitudes(std::move(projected))});
  }
  return out;
}

const Branch& sample_branch(const BranchSet& set, Rng& rng) {
  if (set.branches.empty()) throw std::invalid_argument("cannot sample an empty branch set");
  std::vector<double> w;
  w.reserve(set.branches.size());
  for (const Branch& b : set.branches) w.push_back(b.probability);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  return set.branches[pick(rng)];
}

Ket drop_qubits(const Ket& state, std::span<const int> qubits, std::span<const int> values) {
  const int n = state.num_qubits();
  if (qubits.size() != values.size()) throw std::invalid_argument("one value per dropped qubit");
  check_targets(qubits, n);
  const int kept = n - static_cast<int>(qubits.size());
  std::vector<int> keep;
  for (int q = 0; q < n; ++q) {
    if (std::find(qubits.begin(), qubits.end(), q) == qubits.end()) keep.push_back(q);
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(Eigen::Index{1} << kept);
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.dim()); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < qubits.size() && match; ++j) match = bit_of(i, qubits[j], n) == values[j];
    if (!match) continue;
    std::size_t r = 0;
    for (int j = 0; j < kept; ++j) {
      if (bit_of(i, keep[j], n)) r |= qubit_mask(j, kept);
    }
    out[static_cast<Eigen::Index>(r)] = state[static_cast<Eigen::Index>(i)];
  }
  if (std::abs(out.squaredNorm() - 1.0) > 1e-9) {
    throw std::invalid_argument("dropped qubits are not in the stated basis state");
  }
  out.normalize();
  return Ket::from_amplitudes(std::move(out));
}

// ---------------------------------------------------------------------------
// Partial trace and distances

DensityOperator reduce(const Ket& state, std::span<const int> keep) {
  const int n = state.num_qubits();
  if (keep.empty()) throw std::invalid_argument("reduce needs at least one kept qubit");
  check_targets(keep, n);
  std::vector<int> rest;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) rest.push_back(q);
  }
  const int nk = static_cast<int>(keep.size());
  const int nr = static_cast<int>(rest.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(Eigen::Index{1} << nk, Eigen::Index{1} << nr);
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.dim()); ++i) {
    std::size_t ki = 0;
    std::size_t ri = 0;
    for (int j = 0; j < nk; ++j) {
      if (bit_of(i, keep[j], n)) ki |= qubit_mask(j, nk);
    }
    for (int j = 0; j < nr; ++j) {
      if (bit_of(i, rest[j], n)) ri |= qubit_mask(j, nr);
    }
    m(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(ri)) = state[static_cast<Eigen::Index>(i)];
  }
  return DensityOperator::trusted(m * m.adjoint());
}

DensityOperator reduce(const DensityOperator& state, std::span<const int> keep) {
  const int n = state.num_qubits();
  if (keep.empty()) throw std::invalid_argument("reduce needs at least one kept qubit");
  check_targets(keep, n);
  std::vector<int> rest;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) rest.push_back(q);
  }
  const int nk = static_cast<int>(keep.size());
  const int nr = static_cast<int>(rest.size());
  const std::size_t dim = static_cast<std::size_t>(state.dim());
  std::vector<std::size_t> kidx(dim);
  std::vector<std::size_t> ridx(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t ki = 0;
    std::size_t ri = 0;
    for (int j = 0; j < nk; ++j) {
      if (bit_of(i, keep[j], n)) ki |= qubit_mask(j, nk);
    }
    for (int j = 0; j < nr; ++j) {
      if (bit_of(i, rest[j], n)) ri |= qubit_mask(j, nr);
    }
    kidx[i] = ki;
    ridx[i] = ri;
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(Eigen::Index{1} << nk, Eigen::Index{1} << nk);
  const Eigen::MatrixXcd& m = state.matrix();
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (ridx[i] == ridx[j]) {
        out(static_cast<Eigen::Index>(kidx[i]), static_cast<Eigen::Index>(kidx[j])) +=
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return DensityOperator::trusted(std::move(out));
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace distance dimension mismatch");
  const Eigen::MatrixXcd diff = a.matrix() - b.matrix();
  return 0.5 * hermitian_eigenvalues(0.5 * (diff + diff.adjoint())).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Entropies and information

double shannon_entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution) {
    if (p > g_tolerances.entropy_cutoff) h -= p * std::log2(p);
  }
  return h;
}

double von_neumann_entropy(const DensityOperator& state) {
  // Diagonal operators are common (classical views); skip the eigensolver.
  const Eigen::MatrixXcd& m = state.matrix();
  const Eigen::VectorXcd d = m.diagonal();
  if ((m - Eigen::MatrixXcd(d.asDiagonal())).cwiseAbs().maxCoeff() == 0.0) {
    return entropy_of_spectrum(d.real());
  }
  return entropy_of_spectrum(hermitian_eigenvalues(0.5 * (m + m.adjoint())));
}

DensityOperator CqOperator::to_dense() const {
  if (blocks.empty() || weights.size() != blocks.size()) throw std::invalid_argument("malformed cq operator");
  const Eigen::Index d = blocks[0].dim();
  const Eigen::Index total = d * static_cast<Eigen::Index>(blocks.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(total, total);
  for (std::size_t o = 0; o < blocks.size(); ++o) {
    m.block(static_cast<Eigen::Index>(o) * d, static_cast<Eigen::Index>(o) * d, d, d) =
        weights[o] * blocks[o].matrix();
  }
  return DensityOperator::trusted(std::move(m));
}

double entropy(const CqOperator& state) {
  double h = shannon_entropy(state.weights);
  for (std::size_t o = 0; o < state.blocks.size(); ++o) {
    if (state.weights[o] > g_tolerances.entropy_cutoff) h += state.weights[o] * von_neumann_entropy(state.blocks[o]);
  }
  return h;
}

namespace {

template <class State>
void validate_priors(const Ensemble<State>& ensemble) {
  if (ensemble.entries.empty()) throw std::invalid_argument("empty ensemble");
  double total = 0.0;
  for (const auto& e : ensemble.entries) {
    if (e.prior < 0.0) throw std::invalid_argument("negative prior");
    total += e.prior;
  }
  if (std::abs(total - 1.0) > g_tolerances.probability_sum) {
    throw std::invalid_argument("ensemble priors do not sum to 1");
  }
}

}  // namespace

void validate(const StateEnsemble& ensemble) {
  validate_priors(ensemble);
  const Eigen::Index d = ensemble.entries.front().state.dim();
  for (const auto& e : ensemble.entries) {
    if (e.state.dim() != d) throw std::invalid_argument("ensemble states differ in dimension");
  }
}

void validate(const CqEnsemble& ensemble) {
  validate_priors(ensemble);
  const auto& first = ensemble.entries.front().state;
  for (const auto& e : ensemble.entries) {
    if (e.state.blocks.size() != first.blocks.size() || e.state.weights.size() != e.state.blocks.size()) {
      throw std::invalid_argument("ensemble classical registers differ in size");
    }
    for (std::size_t o = 0; o < e.state.blocks.size(); ++o) {
      if (e.state.blocks[o].dim() != first.blocks[o].dim()) {
        throw std::invalid_argument("ensemble blocks differ in dimension");
      }
    }
  }
}

DensityOperator average_state(const StateEnsemble& ensemble) {
  validate(ensemble);
  const Eigen::Index d = ensemble.entries.front().state.dim();
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& e : ensemble.entries) {
    if (e.prior > 0.0) avg += e.prior * e.state.matrix();
  }
  return DensityOperator::trusted(std::move(avg));
}

double holevo_information(const StateEnsemble& ensemble) {
  const DensityOperator avg = average_state(ensemble);
  double conditional = 0.0;
  for (const auto& e : ensemble.entries) {
    if (e.prior > 0.0) conditional += e.prior * von_neumann_entropy(e.state);
  }
  return std::max(0.0, von_neumann_entropy(avg) - conditional);
}

double holevo_information(const CqEnsemble& ensemble) {
  validate(ensemble);
  const auto& first = ensemble.entries.front().state;
  CqOperator avg;
  for (std::size_t o = 0; o < first.blocks.size(); ++o) {
    double w = 0.0;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(first.blocks[o].dim(), first.blocks[o].dim());
    for (const auto& e : ensemble.entries) {
      const double pw = e.prior * e.state.weights[o];
      if (pw > 0.0) {
        w += pw;
        m += pw * e.state.blocks[o].matrix();
      }
    }
    if (w > 0.0) m /= w;
    else m = DensityOperator::maximally_mixed(first.blocks[o].num_qubits()).matrix();
    avg.weights.push_back(w);
    avg.blocks.push_back(DensityOperator::trusted(std::move(m)));
  }
  double conditional = 0.0;
  for (const auto& e : ensemble.entries) {
    if (e.prior > 0.0) conditional += e.prior * entropy(e.state);
  }
  return std::max(0.0, entropy(avg) - conditional);
}

double mutual_information(std::span<const double> prior, const std::vector<std::vector<double>>& conditional) {
  if (prior.size() != conditional.size() || prior.empty()) {
    throw std::invalid_argument("one conditional row per prior entry");
  }
  const std::size_t outcomes = conditional.front().size();
  std::vector<double> marginal(outcomes, 0.0);
  double h_cond = 0.0;
  for (std::size_t x = 0; x < prior.size(); ++x) {
    if (conditional[x].size() != outcomes) throw std::invalid_argument("ragged conditional table");
    if (prior[x] <= 0.0) continue;
    for (std::size_t o = 0; o < outcomes; ++o) marginal[o] += prior[x] * conditional[x][o];
    h_cond += prior[x] * shannon_entropy(conditional[x]);
  }
  return std::max(0.0, shannon_entropy(marginal) - h_cond);
}

double measured_mutual_information(const StateEnsemble& ensemble, std::span<const Eigen::MatrixXcd> povm) {
  validate(ensemble);
  if (povm.empty()) throw std::invalid_argument("empty POVM");
  const Eigen::Index d = ensemble.entries.front().state.dim();
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& effect : povm) {
    if (effect.rows() != d || effect.cols() != d) throw std::invalid_argument("POVM effect dimension mismatch");
    if ((effect - effect.adjoint()).cwiseAbs().maxCoeff() > g_tolerances.povm) {
      throw std::invalid_argument("POVM effect is not Hermitian");
    }
    if (hermitian_eigenvalues(0.5 * (effect + effect.adjoint())).minCoeff() < -g_tolerances.povm) {
      throw std::invalid_argument("POVM effect is not positive");
    }
    sum += effect;
  }
  if ((sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() > g_tolerances.povm) {
    throw std::invalid_argument("POVM effects do not sum to identity");
  }

  std::vector<double> prior;
  std::vector<std::vector<double>> cond;
  for (const auto& e : ensemble.entries) {
    prior.push_back(e.prior);
    std::vector<double> row;
    row.reserve(povm.size());
    for (const auto& effect : povm) {
      // tr(E rho) = sum_ij E_ij rho_ji
      const double p = (effect.cwiseProduct(e.state.matrix().transpose())).sum().real();
      row.push_back(std::max(0.0, p));
    }
    cond.push_back(std::move(row));
  }
  return mutual_information(prior, cond);
}

double computational_basis_information(const StateEnsemble& ensemble) {
  validate(ensemble);
  std::vector<double> prior;
  std::vector<std::vector<double>> cond;
  for (const auto& e : ensemble.entries) {
    prior.push_back(e.prior);
    const Eigen::VectorXd diag = e.state.matrix().diagonal().real();
    std::vector<double> row(diag.size());
    for (Eigen::Index i = 0; i < diag.size(); ++i) row[static_cast<std::size_t>(i)] = std::max(0.0, diag[i]);
    cond.push_back(std::move(row));
  }
  return mutual_information(prior, cond);
}

StateEnsemble rotate(const StateEnsemble& ensemble, std::span<const GateSpec> gates) {
  StateEnsemble out = ensemble;
  for (auto& e : out.entries) {
    for (const GateSpec& g : gates) e.state = apply_gate(e.state, g);
  }
  return out;
}

std::vector<Eigen::MatrixXcd> computational_povm(int num_qubits) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  std::vector<Eigen::MatrixXcd> povm;
  povm.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d);
    e(i, i) = 1.0;
    povm.push_back(std::move(e));
  }
  return povm;
}

}  // namespace qxot
