#include "doctest.h"
#include "msf/regime_tuple.hpp"

using namespace msf;

TEST_CASE("encode/decode round trip") {
  for (int K : {1, 2, 3, 4}) {
    for (int p : {1, 2, 3}) {
      const int M = (int)ipow(K, p);
      int digs[8];
      for (int code = 0; code < M; ++code) {
        decode_tuple(code, K, p, digs);
        CHECK(encode_tuple(digs, K, p) == code);
      }
    }
  }
}

TEST_CASE("shift pushes the new head and drops the oldest digit") {
  const int K = 3, p = 2;
  int digs[2] = {2, 1};  // (S_{t-1}=2, S_{t-2}=1)
  const int prev = encode_tuple(digs, K, p);
  const int next = shift_tuple(prev, 0, K, p);  // S_t = 0
  int out[2];
  decode_tuple(next, K, p, out);
  CHECK(out[0] == 0);
  CHECK(out[1] == 2);
}

TEST_CASE("period index is a bijection over (S_t, prev)") {
  const int K = 2, p = 2, M = 4;
  std::vector<int> seen(K * M, 0);
  for (int s = 0; s < K; ++s)
    for (int prev = 0; prev < M; ++prev) ++seen[period_index(s, prev, M)];
  for (int v : seen) CHECK(v == 1);
}
