#pragma once

namespace rtprop::detail {

// Kahan compensated accumulator; the likelihood sums several hundred
// thousand O(1) terms at survey scale and plain summation loses digits
// the finite-difference oracles can see.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

}  // namespace rtprop::detail
