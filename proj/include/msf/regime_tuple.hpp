#ifndef MSF_REGIME_TUPLE_HPP
#define MSF_REGIME_TUPLE_HPP

#include <cstdint>
#include <vector>

// Regime tuples (S_t, S_{t-1}, ..., S_{t-p+1}) are encoded base K with S_t
// as the most significant digit, giving codes in [0, K^p). Regimes are 0
// based internally; the CLI and reports use 1-based labels.

namespace msf {

inline std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Digits ordered most recent first: out[0] = S_t, out[p-1] = S_{t-p+1}.
inline void decode_tuple(int code, int K, int p, int* out) {
  for (int i = p - 1; i >= 0; --i) {
    out[i] = code % K;
    code /= K;
  }
}

inline int encode_tuple(const int* digits, int K, int p) {
  int code = 0;
  for (int i = 0; i < p; ++i) code = code * K + digits[i];
  return code;
}

// Code of (S_t, S_{t-1}, ..., S_{t-p+1}) given the code of
// (S_{t-1}, ..., S_{t-p}): push the new head, drop the oldest digit.
inline int shift_tuple(int prev_code, int new_head, int K, int p) {
  return new_head * static_cast<int>(ipow(K, p - 1)) + prev_code / K;
}

// Index into a period-evaluation table for the (p+1)-tuple
// (S_t, S_{t-1}, ..., S_{t-p}).
inline int period_index(int s_t, int prev_code, int num_tuples) {
  return s_t * num_tuples + prev_code;
}

}  // namespace msf

#endif
