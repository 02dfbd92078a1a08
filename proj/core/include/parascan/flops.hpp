#pragma once

// Scalar-level flop instrumentation. Arithmetic on counted<T> bumps a
// thread-local tally; the PRAM simulator snapshots the tally around kernel
// iterations to attribute cost to simulated threads.

#include <cmath>
#include <cstdint>

namespace parascan {

struct FlopTally {
  std::uint64_t adds = 0;   // additions and subtractions
  std::uint64_t muls = 0;
  std::uint64_t divs = 0;
  std::uint64_t sqrts = 0;

  std::uint64_t total() const { return adds + muls + divs + sqrts; }

  FlopTally operator-(const FlopTally& o) const {
    return {adds - o.adds, muls - o.muls, divs - o.divs, sqrts - o.sqrts};
  }
  FlopTally& operator+=(const FlopTally& o) {
    adds += o.adds;
    muls += o.muls;
    divs += o.divs;
    sqrts += o.sqrts;
    return *this;
  }
  bool operator==(const FlopTally&) const = default;
};

inline FlopTally& flop_tally() {
  thread_local FlopTally t;
  return t;
}

inline void reset_flop_tally() { flop_tally() = FlopTally{}; }

// Arithmetic wrapper that counts every add/sub, mul, div and sqrt.
// Comparisons, copies and negation are not counted (they are not flops in
// the cost model).
template <typename T>
struct counted {
  T v = T(0);

  counted() = default;
  counted(T x) : v(x) {}  // NOLINT: implicit by design

  friend counted operator+(counted a, counted b) {
    ++flop_tally().adds;
    return counted(a.v + b.v);
  }
  friend counted operator-(counted a, counted b) {
    ++flop_tally().adds;
    return counted(a.v - b.v);
  }
  friend counted operator*(counted a, counted b) {
    ++flop_tally().muls;
    return counted(a.v * b.v);
  }
  friend counted operator/(counted a, counted b) {
    ++flop_tally().divs;
    return counted(a.v / b.v);
  }
  counted operator-() const { return counted(-v); }
  counted& operator+=(counted b) { return *this = *this + b; }
  counted& operator-=(counted b) { return *this = *this - b; }
  counted& operator*=(counted b) { return *this = *this * b; }
  counted& operator/=(counted b) { return *this = *this / b; }

  friend bool operator<(counted a, counted b) { return a.v < b.v; }
  friend bool operator>(counted a, counted b) { return a.v > b.v; }
  friend bool operator<=(counted a, counted b) { return a.v <= b.v; }
  friend bool operator>=(counted a, counted b) { return a.v >= b.v; }
  friend bool operator==(counted a, counted b) { return a.v == b.v; }

  friend counted sqrt(counted a) {
    ++flop_tally().sqrts;
    using std::sqrt;
    return counted(sqrt(a.v));
  }
  friend counted abs(counted a) {
    using std::abs;
    return counted(abs(a.v));
  }
};

using counted_f32 = counted<float>;
using counted_f64 = counted<double>;

// Uniform conversion helpers so numeric code can move between plain and
// counted scalars.
template <typename S>
inline double to_double(S x) {
  return static_cast<double>(x);
}
template <typename T>
inline double to_double(counted<T> x) {
  return static_cast<double>(x.v);
}

template <typename S>
struct scalar_cast_impl {
  static S from(double x) { return static_cast<S>(x); }
};
template <typename T>
struct scalar_cast_impl<counted<T>> {
  static counted<T> from(double x) { return counted<T>(static_cast<T>(x)); }
};
template <typename S>
inline S scalar_from_double(double x) {
  return scalar_cast_impl<S>::from(x);
}

}  // namespace parascan
