#pragma once

// Random states for property tests.

#include <random>

#include "qxot/qsim.hpp"

namespace qxot::testing {

inline Ket random_ket(int num_qubits, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd a(Eigen::Index{1} << num_qubits);
  for (auto& c : a) c = Complex(g(rng), g(rng));
  a.normalize();
  return Ket::from_amplitudes(a);
}

/// Random mixture of `rank` random pure states.
inline DensityOperator random_density(int num_qubits, std::uint64_t rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double total = 0.0;
  std::vector<double> w(rank);
  for (auto& x : w) total += (x = u(rng));
  for (std::uint64_t r = 0; r < rank; ++r) {
    const Ket k = random_ket(num_qubits, rng());
    m += (w[r] / total) * k.amplitudes() * k.amplitudes().adjoint();
  }
  return DensityOperator::from_matrix(0.5 * (m + m.adjoint()));
}

}  // namespace qxot::testing
