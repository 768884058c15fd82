#ifndef MSF_SOFTMAX_DETAIL_HPP
#define MSF_SOFTMAX_DETAIL_HPP

#include <algorithm>
#include <cmath>

namespace msf::detail {

// Multinomial-logit row: logits eta_0..eta_{K-2}, reference category K-1
// pinned at 0. Shift by the max logit before exponentiating.
inline void softmax_row(const double* eta, int K, double* q) {
  if (K == 1) {
    q[0] = 1.0;
    return;
  }
  double mx = 0.0;
  for (int j = 0; j < K - 1; ++j) mx = std::max(mx, eta[j]);
  double z = std::exp(-mx);  // reference category
  for (int j = 0; j < K - 1; ++j) {
    q[j] = std::exp(eta[j] - mx);
    z += q[j];
  }
  for (int j = 0; j < K - 1; ++j) q[j] /= z;
  q[K - 1] = std::exp(-mx) / z;
}

}  // namespace msf::detail

#endif
