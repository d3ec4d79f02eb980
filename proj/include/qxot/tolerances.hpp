#pragma once

namespace qxot {

// Numerical thresholds shared by every module. The CLI may override them
// once at startup through set_tolerances().
struct Tolerances {
  double norm = 1e-12;            // |<psi|psi> - 1|
  double hermitian = 1e-12;       // max |rho - rho^dagger|
  double trace = 1e-12;           // |tr rho - 1|
  double eigenvalue_floor = 1e-10;  // eigenvalues must be >= -floor
  double probability_sum = 1e-10;   // branch / prior normalization
  double entropy_cutoff = 1e-12;    // eigenvalues below count as zero
  double povm = 1e-10;              // PSD and completeness of effects
  double subspace_leak = 1e-10;     // weight outside an honest subspace
  double unitary = 1e-12;
};

const Tolerances& tolerances();
void set_tolerances(const Tolerances& t);

}  // namespace qxot
