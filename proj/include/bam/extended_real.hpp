#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>

namespace bam {

// Log-domain value whose infinite contributions are tracked separately from
// the finite ones. `inf` counts +infinity contributions minus -infinity
// contributions, `fin` is the log of the nonzero factors. Ordered
// lexicographically on (inf, fin), which is a total order.
struct ExtendedReal {
  double fin = 0.0;
  std::int32_t inf = 0;

  constexpr bool finite() const { return inf == 0; }

  constexpr ExtendedReal operator-() const { return {-fin, -inf}; }

  constexpr ExtendedReal& operator+=(ExtendedReal o) {
    fin += o.fin;
    inf += o.inf;
    return *this;
  }

  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    return {a.fin + b.fin, a.inf + b.inf};
  }
  friend constexpr ExtendedReal operator-(ExtendedReal a, ExtendedReal b) {
    return {a.fin - b.fin, a.inf - b.inf};
  }

  // Integer multiple, exact on the infinity count.
  constexpr ExtendedReal times(std::int32_t m) const {
    return {fin * static_cast<double>(m), inf * m};
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.inf == b.inf && a.fin == b.fin;
  }
  friend constexpr bool operator!=(ExtendedReal a, ExtendedReal b) { return !(a == b); }
  friend constexpr bool operator<(ExtendedReal a, ExtendedReal b) {
    return a.inf != b.inf ? a.inf < b.inf : a.fin < b.fin;
  }
  friend constexpr bool operator>(ExtendedReal a, ExtendedReal b) { return b < a; }
  friend constexpr bool operator<=(ExtendedReal a, ExtendedReal b) { return !(b < a); }
  friend constexpr bool operator>=(ExtendedReal a, ExtendedReal b) { return !(a < b); }
};

// Accumulates log(product of numerator factors / product of denominator
// factors) where individual factors may be zero. A zero numerator factor
// contributes one -infinity, a zero denominator factor one +infinity; the
// finite part multiplies only the nonzero factors before taking a single log.
class LogRatio {
 public:
  void num(double f) {
    assert(f >= 0.0);
    if (f == 0.0)
      --inf_;
    else
      num_ *= f;
  }
  void den(double f) {
    assert(f >= 0.0);
    if (f == 0.0)
      ++inf_;
    else
      den_ *= f;
  }
  ExtendedReal value() const { return {std::log(num_ / den_), inf_}; }

 private:
  double num_ = 1.0;
  double den_ = 1.0;
  std::int32_t inf_ = 0;
};

inline ExtendedReal log_ratio(double num, double den) {
  LogRatio r;
  r.num(num);
  r.den(den);
  return r.value();
}

// Collapses the infinity bookkeeping into a plain real by substituting a
// large finite magnitude for each infinite contribution.
inline double materialize(ExtendedReal v, double z_inf) {
  return v.fin + static_cast<double>(v.inf) * z_inf;
}

}  // namespace bam
