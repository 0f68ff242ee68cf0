#pragma once

// Shared dataset builders and seeded random draws for the tests.

#include <cstdint>
#include <vector>

#include "drate/dataset.hpp"
#include "drate/rng.hpp"

namespace helpers {

inline drate::Dataset tiny_dataset(std::vector<double> y, std::vector<int> t,
                                   std::vector<double> x_flat, int d) {
  return drate::make_dataset(std::move(y), std::move(t), std::move(x_flat), d);
}

// A mixed-treatment dataset with Gaussian covariates and outcome noise.
inline drate::Dataset random_dataset(int n, int d, std::uint64_t seed,
                                     double noise_sd = 0.5) {
  drate::rng::SplitMix64 g(seed);
  std::vector<double> y(n), x(static_cast<std::size_t>(n) * d);
  std::vector<int> t(n);
  int treated = 0;
  for (int i = 0; i < n; ++i) {
    t[i] = drate::rng::bernoulli(g, 0.4);
    treated += t[i];
  }
  // Force both groups nonempty.
  if (treated == 0) t[0] = 1;
  if (treated == n) t[0] = 0;
  for (int i = 0; i < n; ++i) {
    double lin = 0.0;
    for (int j = 0; j < d; ++j) {
      const double xv = 1.0 + drate::rng::normal(g);
      x[static_cast<std::size_t>(i) * d + j] = xv;
      lin += (j + 1) * 0.5 * xv;
    }
    y[i] = 2.0 + lin + 3.0 * t[i] + noise_sd * drate::rng::normal(g);
  }
  return drate::make_dataset(std::move(y), std::move(t), std::move(x), d);
}

}  // namespace helpers
