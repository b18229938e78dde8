#include "pmmhf/error_law.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "pmmhf/error.hpp"
#include "pmmhf/numeric.hpp"

namespace pmmhf {

ErrorLaw ErrorLaw::normal(double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(mean)) throw DomainError("normal error law needs sd > 0");
  return ErrorLaw(Kind::Normal, mean, sd);
}

ErrorLaw ErrorLaw::half_normal(double scale) {
  if (!(scale > 0.0)) throw DomainError("half-normal error law needs scale > 0");
  return ErrorLaw(Kind::HalfNormal, scale, 0.0);
}

ErrorLaw ErrorLaw::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw DomainError("gamma error law needs shape > 0 and rate > 0");
  return ErrorLaw(Kind::Gamma, shape, rate);
}

double ErrorLaw::mean() const {
  switch (kind_) {
    case Kind::Normal: return a_;
    case Kind::HalfNormal: return a_ * std::sqrt(2.0 / std::numbers::pi);
    case Kind::Gamma: return a_ / b_;
  }
  return 0.0;
}

double ErrorLaw::variance() const {
  switch (kind_) {
    case Kind::Normal: return b_ * b_;
    case Kind::HalfNormal: return a_ * a_ * (1.0 - 2.0 / std::numbers::pi);
    case Kind::Gamma: return a_ / (b_ * b_);
  }
  return 0.0;
}

double ErrorLaw::central_moment(int k) const {
  if (k < 0) throw InputError("negative moment order");
  if (k == 0) return 1.0;
  if (k == 1) return 0.0;
  switch (kind_) {
    case Kind::Normal: {
      if (k % 2 == 1) return 0.0;
      double m = 1.0;
      for (int i = k - 1; i > 1; i -= 2) m *= i;
      return m * std::pow(b_, k);
    }
    case Kind::HalfNormal: {
      // binomial expansion over raw moments of |Z|
      const double mu = std::sqrt(2.0 / std::numbers::pi);
      double acc = 0.0;
      double binom = 1.0;
      for (int i = 0; i <= k; ++i) {
        const double raw = std::exp(0.5 * i * std::log(2.0) + std::lgamma(0.5 * (i + 1)) -
                                    0.5 * std::log(std::numbers::pi));
        acc += binom * raw * std::pow(-mu, k - i);
        binom = binom * (k - i) / (i + 1);
      }
      return acc * std::pow(a_, k);
    }
    case Kind::Gamma: {
      // unit rate: mu_{j+1} = j (mu_j + alpha mu_{j-1})
      std::vector<double> m(static_cast<std::size_t>(k) + 1, 0.0);
      m[0] = 1.0;
      m[1] = 0.0;
      for (int j = 1; j < k; ++j) m[j + 1] = j * (m[j] + a_ * m[j - 1]);
      return m[k] / std::pow(b_, k);
    }
  }
  return 0.0;
}

double ErrorLaw::log_pdf(double x) const {
  switch (kind_) {
    case Kind::Normal: return normal_log_pdf(x, a_, b_ * b_);
    case Kind::HalfNormal:
      return x < 0.0 ? kNegInf : std::log(2.0) + normal_log_pdf(x, 0.0, a_ * a_);
    case Kind::Gamma:
      if (x <= 0.0) return kNegInf;
      return a_ * std::log(b_) - std::lgamma(a_) + (a_ - 1.0) * std::log(x) - b_ * x;
  }
  return kNegInf;
}

double ErrorLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Normal: return a_ + b_ * standard_normal(rng);
    case Kind::HalfNormal: return std::abs(a_ * standard_normal(rng));
    case Kind::Gamma: return std::gamma_distribution<double>(a_, 1.0 / b_)(rng);
  }
  return 0.0;
}

std::string ErrorLaw::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Normal: os << "Normal(" << a_ << ", " << b_ << ")"; break;
    case Kind::HalfNormal: os << "HalfNormal(" << a_ << ")"; break;
    case Kind::Gamma: os << "Gamma(" << a_ << ", " << b_ << ")"; break;
  }
  return os.str();
}

}  // namespace pmmhf
