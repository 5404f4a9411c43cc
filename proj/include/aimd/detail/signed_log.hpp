#pragma once

#include <cmath>
#include <limits>

namespace aimd {

// A real number stored as sign * exp(log_magnitude).
template <class Real>
struct SignedLog {
  int sign = 1;
  Real log_magnitude{};

  Real value() const {
    using std::exp;
    Real mag = exp(log_magnitude);
    return sign < 0 ? -mag : mag;
  }

  SignedLog& operator*=(const SignedLog& o) {
    sign *= o.sign;
    log_magnitude += o.log_magnitude;
    return *this;
  }
  SignedLog& operator/=(const SignedLog& o) {
    sign *= o.sign;
    log_magnitude -= o.log_magnitude;
    return *this;
  }
  friend SignedLog operator*(SignedLog a, const SignedLog& b) { return a *= b; }
  friend SignedLog operator/(SignedLog a, const SignedLog& b) { return a /= b; }
};

using SignedLogProduct = SignedLog<double>;

template <class Real>
SignedLog<Real> signed_log_of(const Real& v) {
  using std::abs;
  using std::log;
  SignedLog<Real> r;
  r.sign = v < Real(0) ? -1 : 1;
  r.log_magnitude = log(abs(v));
  return r;
}

// Sum of sign_i * exp(l_i) in double; returns the signed log of the total.
class SignedLogSum {
 public:
  void add(int sign, double log_mag) {
    if (log_mag == -std::numeric_limits<double>::infinity()) return;
    if (empty_) {
      ref_ = log_mag;
      empty_ = false;
    } else if (log_mag > ref_) {
      acc_ *= std::exp(ref_ - log_mag);
      ref_ = log_mag;
    }
    acc_ += sign * std::exp(log_mag - ref_);
  }
  SignedLog<double> result() const {
    SignedLog<double> r;
    if (empty_ || acc_ == 0.0) {
      r.sign = 1;
      r.log_magnitude = -std::numeric_limits<double>::infinity();
      return r;
    }
    r.sign = acc_ < 0 ? -1 : 1;
    r.log_magnitude = ref_ + std::log(std::abs(acc_));
    return r;
  }

 private:
  bool empty_ = true;
  double ref_ = 0.0;
  double acc_ = 0.0;
};

}  // namespace aimd
