#pragma once

#include <string>

namespace saem {

/// Robbins-Monro stepsize schedule gamma_k, indexed from k = 1.
/// Values must lie in (0, 1] and be nonincreasing; construction validates
/// the whole horizon it will be used for.
class GammaSchedule {
 public:
  enum class Kind { InverseSqrtK, Power, Constant };

  static GammaSchedule inverse_sqrt() { return GammaSchedule(Kind::InverseSqrtK, 0.5); }
  static GammaSchedule power(double exponent);     // k -> k^-exponent
  static GammaSchedule constant(double value);

  /// Parses "1/sqrt(k)", "constant:<v>" or "power:<e>".
  static GammaSchedule parse(const std::string& text);

  double at(long k) const;  // k >= 1
  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  std::string describe() const;

  /// Throws ConfigError unless gamma is in (0,1] and nonincreasing over
  /// k = 1..horizon.
  void validate(long horizon) const;

 private:
  GammaSchedule(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
};

}  // namespace saem
