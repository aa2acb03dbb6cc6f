#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "irf/rng.hpp"

using irf::Philox4x32;
using irf::RngStream;

TEST_CASE("philox4x32-10 known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of (seed, id, position)") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 7);
  std::vector<std::uint64_t> first;
  for (int i = 0; i < 10; ++i) first.push_back(c.next_u64());
  RngStream d(42, 7);
  d.seek(5);
  CHECK(d.position() == 5);
  for (int i = 5; i < 10; ++i) CHECK(d.next_u64() == first[i]);
}

TEST_CASE("distinct ids and seeds give distinct streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t id = 0; id < 1000; ++id) seen.insert(RngStream(1, id).next_u64());
  CHECK(seen.size() == 1000);
  CHECK(RngStream(1, 0).next_u64() != RngStream(2, 0).next_u64());
  CHECK(irf::derive_seed(1, 0) != irf::derive_seed(1, 1));
  CHECK(irf::derive_seed(1, 5) == irf::derive_seed(1, 5));
}

TEST_CASE("uniform lies in (0, 1] with the right mean and variance") {
  RngStream r(9, 0);
  const int n = 200000;
  double s = 0, s2 = 0, lo = 1, hi = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    s += u;
    s2 += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi <= 1.0);
  const double m = s / n;
  CHECK(std::abs(m - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(s2 / n - m * m - 1.0 / 12) < 2e-3);
}
