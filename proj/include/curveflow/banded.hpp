#pragma once
#include <vector>

namespace curveflow {

// General banded matrix, LAPACK band storage, solved with dgbsv.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);
  void add(int row, int col, double v);
  int size() const { return n_; }
  // Solves A X = B for nrhs columns stored column-major in b (length n*nrhs).
  // Throws LinearSolveFailure if the factorization hits a zero pivot.
  void solve(std::vector<double>& b, int nrhs = 1) const;
  // y = A x, for residual checks
  std::vector<double> apply(const std::vector<double>& x) const;

 private:
  int n_, kl_, ku_, ldab_;
  std::vector<double> ab_;
};

}  // namespace curveflow
