#pragma once
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "curveflow/seeds.hpp"

namespace testsupport {

using curveflow::Point;
using curveflow::SampledCurve;
using std::numbers::pi;

// Cap at a random angle, radius factor 1 + sum_k a_k sin^2(k pi sigma): keeps the contact angle.
struct RandomCap {
  double alpha;
  std::vector<double> amp;
  SampledCurve curve(int n) const {
    auto a = amp;
    return curveflow::seeds::cap(alpha, n, 1.0, [a](double s) {
      double r = 1.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        double q = std::sin(pi * (k + 1) * s);
        r += a[k] * q * q;
      }
      return r;
    });
  }
};

inline RandomCap random_cap(std::mt19937_64& rng, double amp_scale = 0.05) {
  std::uniform_real_distribution<double> ua(0.3, pi - 0.3), uamp(-1.0, 1.0);
  RandomCap c;
  c.alpha = ua(rng);
  int modes = 1 + static_cast<int>(rng() % 4);
  for (int k = 0; k < modes; ++k) c.amp.push_back(amp_scale * uamp(rng) / (k + 1));
  return c;
}

}  // namespace testsupport
