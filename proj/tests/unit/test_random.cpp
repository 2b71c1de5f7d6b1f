#include <cmath>

#include "doctest.h"
#include "dphc/random.hpp"

using namespace dphc;

TEST_CASE("philox known answers") {
  // Reference vectors published with the Random123 library.
  const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(zero == Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  const auto ones = Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  CHECK(ones == Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  const auto pi = Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  CHECK(pi == Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms stay inside the open interval") {
  CHECK(uniform_open(0, 0) > 0.0);
  CHECK(uniform_open(0xffffffff, 0xffffffff) < 1.0);
  CHECK(uniform_open(0, 0) == 0x1.0p-53);
  CHECK(uniform_open(0xffffffff, 0xffffffff) == 1.0 - 0x1.0p-53);
}

TEST_CASE("stream normals have unit variance and distinct streams") {
  const auto key = Philox4x32::key_from_seed(42);
  double s = 0, ss = 0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double x = stream_normal(key, Stream::noise, 3, static_cast<std::uint64_t>(i));
    s += x;
    ss += x * x;
  }
  const double mean = s / count, var = ss / count - mean * mean;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(count));
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / count));
  CHECK(stream_normal(key, Stream::noise, 3, 0) != stream_normal(key, Stream::noise, 4, 0));
  CHECK(stream_normal(key, Stream::noise, 3, 0) != stream_normal(key, Stream::vertex, 3, 0));
  CHECK(stream_normal(key, Stream::noise, 3, 0) == stream_normal(key, Stream::noise, 3, 0));
}
