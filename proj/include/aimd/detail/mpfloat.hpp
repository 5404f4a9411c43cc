#pragma once

#include <mpfr.h>

#include <algorithm>
#include <utility>

namespace aimd::detail {

// Owning MPFR value. Precision travels with each object.
class MpFloat {
 public:
  explicit MpFloat(mpfr_prec_t prec = 128) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  MpFloat(double x, mpfr_prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  MpFloat(const MpFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  MpFloat(MpFloat&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  MpFloat& operator=(const MpFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  MpFloat& operator=(MpFloat&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~MpFloat() { mpfr_clear(v_); }

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  // Binary exponent e with 0.5 <= |v|/2^e < 1; very negative for zero.
  long exponent2() const { return is_zero() ? -(1L << 40) : mpfr_get_exp(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  MpFloat& operator+=(const MpFloat& o) {
    mpfr_add(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator-=(const MpFloat& o) {
    mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator*=(const MpFloat& o) {
    mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator/=(const MpFloat& o) {
    mpfr_div(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator+=(double o) {
    mpfr_add_d(v_, v_, o, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator-=(double o) {
    mpfr_sub_d(v_, v_, o, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator*=(double o) {
    mpfr_mul_d(v_, v_, o, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator/=(double o) {
    mpfr_div_d(v_, v_, o, MPFR_RNDN);
    return *this;
  }

  friend MpFloat operator-(const MpFloat& a) {
    MpFloat r(a.precision());
    mpfr_neg(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend MpFloat operator+(MpFloat a, const MpFloat& b) { return a += b; }
  friend MpFloat operator-(MpFloat a, const MpFloat& b) { return a -= b; }
  friend MpFloat operator*(MpFloat a, const MpFloat& b) { return a *= b; }
  friend MpFloat operator/(MpFloat a, const MpFloat& b) { return a /= b; }
  friend MpFloat operator+(MpFloat a, double b) { return a += b; }
  friend MpFloat operator-(MpFloat a, double b) { return a -= b; }
  friend MpFloat operator*(MpFloat a, double b) { return a *= b; }
  friend MpFloat operator/(MpFloat a, double b) { return a /= b; }
  friend MpFloat operator+(double a, MpFloat b) { return b += a; }
  friend MpFloat operator*(double a, MpFloat b) { return b *= a; }
  friend MpFloat operator-(double a, const MpFloat& b) {
    MpFloat r(b.precision());
    mpfr_d_sub(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }
  friend MpFloat operator/(double a, const MpFloat& b) {
    MpFloat r(b.precision());
    mpfr_d_div(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }

  friend bool operator<(const MpFloat& a, const MpFloat& b) { return mpfr_less_p(a.v_, b.v_); }
  friend bool operator>(const MpFloat& a, const MpFloat& b) { return mpfr_greater_p(a.v_, b.v_); }

  friend MpFloat exp(const MpFloat& a) {
    MpFloat r(a.precision());
    mpfr_exp(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend MpFloat log(const MpFloat& a) {
    MpFloat r(a.precision());
    mpfr_log(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend MpFloat abs(const MpFloat& a) {
    MpFloat r(a.precision());
    mpfr_abs(r.v_, a.v_, MPFR_RNDN);
    return r;
  }

 private:
  mpfr_t v_;
};

inline MpFloat mp(double x, mpfr_prec_t prec) { return MpFloat(x, prec); }

}  // namespace aimd::detail
