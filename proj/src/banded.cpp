#include "curveflow/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <string>

#include "curveflow/errors.hpp"

namespace curveflow {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(static_cast<std::size_t>(ldab_) * n, 0.0) {
  if (n <= 0 || kl < 0 || ku < 0) throw InvalidArgument("bad band dimensions");
}

void BandedMatrix::add(int i, int j, double v) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_)
    throw InvalidArgument("entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside band");
  ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ldab_] += v;
}

void BandedMatrix::solve(std::vector<double>& b, int nrhs) const {
  if (static_cast<int>(b.size()) != n_ * nrhs) throw InvalidArgument("rhs size mismatch");
  std::vector<double> ab = ab_;
  std::vector<lapack_int> ipiv(n_);
  lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n_, kl_, ku_, nrhs, ab.data(), ldab_, ipiv.data(), b.data(), n_);
  if (info > 0) throw LinearSolveFailure("singular banded system at pivot " + std::to_string(info));
  if (info < 0) throw LinearSolveFailure("dgbsv rejected argument " + std::to_string(-info));
}

std::vector<double> BandedMatrix::apply(const std::vector<double>& x) const {
  std::vector<double> y(n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    int lo = std::max(0, j - ku_), hi = std::min(n_ - 1, j + kl_);
    for (int i = lo; i <= hi; ++i)
      y[i] += ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ldab_] * x[j];
  }
  return y;
}

}  // namespace curveflow
