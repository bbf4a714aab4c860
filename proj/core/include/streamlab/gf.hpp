#pragma once

#include <cstdint>

#include "streamlab/rng.hpp"

// Arithmetic modulo the Mersenne prime 2^31 - 1.
namespace streamlab::gf {

using Element = std::uint32_t;
inline constexpr Element kPrime = 0x7fffffffU;

constexpr Element reduce(std::uint64_t x) {
  x = (x & kPrime) + (x >> 31);
  x = (x & kPrime) + (x >> 31);
  return static_cast<Element>(x >= kPrime ? x - kPrime : x);
}
constexpr Element add(Element a, Element b) { return reduce(std::uint64_t{a} + b); }
constexpr Element sub(Element a, Element b) { return reduce(std::uint64_t{a} + kPrime - b); }
constexpr Element neg(Element a) { return a == 0 ? 0 : kPrime - a; }
constexpr Element mul(Element a, Element b) { return reduce(std::uint64_t{a} * b); }

Element pow(Element base, std::uint64_t e);
Element inverse(Element a);

// Uniform over the nonzero elements.
inline Element nonzero_from(std::uint64_t bits) {
  return static_cast<Element>(1 + (bits >> 1) % (kPrime - 1));
}

}  // namespace streamlab::gf
