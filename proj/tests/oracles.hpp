// Direct-formula metric implementations used as test oracles.
#pragma once

#include <vector>

namespace testing_support {

inline double naive_mse(const std::vector<float>& a, const std::vector<float>& b) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const long double d = static_cast<long double>(a[k]) - b[k];
    acc += d * d;
  }
  return static_cast<double>(acc / a.size());
}

// Window-by-window SSIM straight from the definition.
inline double naive_ssim(const std::vector<float>& a, const std::vector<float>& b, int rows, int cols,
                  int w = 7, double k1 = 0.01, double k2 = 0.03, double range = 1.0) {
  const double c1 = (k1 * range) * (k1 * range), c2 = (k2 * range) * (k2 * range);
  const int np = w * w;
  double total = 0.0;
  int count = 0;
  for (int r0 = 0; r0 + w <= rows; ++r0)
    for (int q0 = 0; q0 + w <= cols; ++q0) {
      double ma = 0, mb = 0;
      for (int r = r0; r < r0 + w; ++r)
        for (int q = q0; q < q0 + w; ++q) {
          ma += a[r * cols + q];
          mb += b[r * cols + q];
        }
      ma /= np;
      mb /= np;
      double va = 0, vb = 0, cov = 0;
      for (int r = r0; r < r0 + w; ++r)
        for (int q = q0; q < q0 + w; ++q) {
          const double da = a[r * cols + q] - ma, db = b[r * cols + q] - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      va /= np - 1;
      vb /= np - 1;
      cov /= np - 1;
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

}  // namespace testing_support
