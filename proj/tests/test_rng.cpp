#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "dsa/rng.hpp"

using dsa::RngStream;

TEST_CASE("philox known answers") {
  // Reference blocks from numpy's Philox4x64-10 with the same key and counter.
  const auto a = RngStream::philox({0, 0, 0, 0}, {0, 0});
  CHECK(a == RngStream::Block{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL,
                              0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  const auto b = RngStream::philox({1, 0, 0, 0}, {0, 0});
  CHECK(b == RngStream::Block{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL,
                              0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL});
  const auto c = RngStream::philox({1, 0, 0, 0}, {7, 3});
  CHECK(c == RngStream::Block{0x7b6cc7b1862cc5f2ULL, 0xb960f2ea4b3f8d9fULL,
                              0x0cdd72e015deb1a6ULL, 0x50edb0d22a6a6fd5ULL});
}

TEST_CASE("stream words follow block order") {
  RngStream s(0, 0);
  const auto first = RngStream::philox({0, 0, 0, 0}, {0, 0});
  const auto second = RngStream::philox({1, 0, 0, 0}, {0, 0});
  for (auto w : first) CHECK(s.next_u64() == w);
  for (auto w : second) CHECK(s.next_u64() == w);
  CHECK(s.draws() == 8);
}

TEST_CASE("equal keys replay, distinct keys diverge") {
  RngStream a(42, 5), b(42, 5), c(42, 6), d(43, 5);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
  }
  CHECK(a == b);
}

TEST_CASE("uniform stays in [0,1) with the right mean") {
  RngStream s(1, 1);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(s.draws() == static_cast<std::uint64_t>(n));
}

TEST_CASE("uniform_index covers every bucket evenly") {
  RngStream s(9, 2);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[s.uniform_index(7)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  // 6 degrees of freedom; 22.46 is the 0.999 quantile.
  CHECK(chi2 < 22.46);
  CHECK(s.uniform_index(1) == 0);
  CHECK(s.uniform_index(0) == 0);
}

TEST_CASE("gaussian uses two words and has unit variance") {
  RngStream s(3, 4);
  double sum = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = s.gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(s.draws() == 2u * n);
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("stream id namespaces never collide with node ids") {
  using dsa::StreamPurpose;
  CHECK(dsa::derive_stream_id(StreamPurpose::kChain, 17) == 17);
  std::set<std::uint64_t> ids;
  for (std::uint64_t node = 0; node < 64; ++node) {
    ids.insert(dsa::derive_stream_id(StreamPurpose::kChain, node));
    ids.insert(dsa::derive_stream_id(StreamPurpose::kProtocol, node));
    ids.insert(dsa::derive_stream_id(StreamPurpose::kFabric, node, 1));
    ids.insert(dsa::derive_stream_id(StreamPurpose::kFabric, node, 2));
    ids.insert(dsa::derive_stream_id(StreamPurpose::kProblem, node));
  }
  CHECK(ids.size() == 64u * 5);
  const auto p = dsa::derive_stream_id(StreamPurpose::kProtocol, 3);
  CHECK((p >> 56) == static_cast<std::uint64_t>(StreamPurpose::kProtocol));
}
