#include "streamlab/gf.hpp"

#include <stdexcept>

namespace streamlab::gf {

Element pow(Element base, std::uint64_t e) {
  Element r = 1;
  while (e) {
    if (e & 1) r = mul(r, base);
    base = mul(base, base);
    e >>= 1;
  }
  return r;
}

Element inverse(Element a) {
  if (a == 0) throw std::domain_error("zero has no inverse");
  return pow(a, kPrime - 2);
}

}  // namespace streamlab::gf
