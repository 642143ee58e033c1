#pragma once

namespace mrd {

// Kahan compensated accumulator. Long Monte Carlo and enumeration sums are
// compared against closed forms at 1e-10..1e-12 tolerances, so plain += is
// not good enough.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double value) {
    const double y = value - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  KahanSum& operator+=(double value) {
    add(value);
    return *this;
  }

  double value() const { return sum; }
  operator double() const { return sum; }
};

}  // namespace mrd
