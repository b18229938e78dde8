#ifndef PMMHF_ERROR_LAW_HPP
#define PMMHF_ERROR_LAW_HPP

#include <string>

#include "pmmhf/random.hpp"

namespace pmmhf {

/// Distribution of a scalar measurement error. Normal(mean, sd),
/// HalfNormal(scale) = |N(0, scale^2)|, Gamma(shape, rate).
class ErrorLaw {
 public:
  enum class Kind { Normal, HalfNormal, Gamma };

  ErrorLaw() : ErrorLaw(Kind::Normal, 0.0, 1.0) {}

  static ErrorLaw normal(double mean = 0.0, double sd = 1.0);
  static ErrorLaw half_normal(double scale = 1.0);
  static ErrorLaw gamma(double shape, double rate);

  Kind kind() const { return kind_; }
  double first() const { return a_; }
  double second() const { return b_; }

  double mean() const;
  double variance() const;
  /// E[(X - mean)^k] for k >= 0.
  double central_moment(int k) const;
  double log_pdf(double x) const;
  double sample(Rng& rng) const;

  std::string describe() const;

  friend bool operator==(const ErrorLaw&, const ErrorLaw&) = default;

 private:
  ErrorLaw(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}

  Kind kind_;
  double a_;
  double b_;
};

}  // namespace pmmhf

#endif
