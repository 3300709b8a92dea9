#include "saem/schedule.hpp"

#include <cmath>

#include "saem/errors.hpp"

namespace saem {

GammaSchedule GammaSchedule::power(double exponent) {
  if (!(exponent >= 0.0 && exponent <= 1.0))
    throw ConfigError("gamma power exponent must lie in [0, 1]");
  return GammaSchedule(Kind::Power, exponent);
}

GammaSchedule GammaSchedule::constant(double value) {
  if (!(value > 0.0 && value <= 1.0))
    throw ConfigError("constant gamma must lie in (0, 1]");
  return GammaSchedule(Kind::Constant, value);
}

GammaSchedule GammaSchedule::parse(const std::string& text) {
  if (text == "1/sqrt(k)") return inverse_sqrt();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    double value = 0.0;
    try {
      value = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse gamma schedule parameter in '" + text + "'");
    }
    if (head == "constant") return constant(value);
    if (head == "power") return power(value);
  }
  throw ConfigError("unknown gamma schedule '" + text +
                    "' (expected 1/sqrt(k), constant:<v> or power:<e>)");
}

double GammaSchedule::at(long k) const {
  if (k < 1) throw DomainError("gamma schedule is indexed from k = 1");
  switch (kind_) {
    case Kind::InverseSqrtK:
      return 1.0 / std::sqrt(static_cast<double>(k));
    case Kind::Power:
      return std::pow(static_cast<double>(k), -param_);
    case Kind::Constant:
      return param_;
  }
  return 0.0;  // unreachable
}

std::string GammaSchedule::describe() const {
  switch (kind_) {
    case Kind::InverseSqrtK:
      return "1/sqrt(k)";
    case Kind::Power:
      return "power:" + std::to_string(param_);
    case Kind::Constant:
      return "constant:" + std::to_string(param_);
  }
  return "";
}

void GammaSchedule::validate(long horizon) const {
  double prev = 1.0 + 1e-12;
  for (long k = 1; k <= horizon; ++k) {
    const double g = at(k);
    if (!(g > 0.0 && g <= 1.0))
      throw ConfigError("gamma_" + std::to_string(k) + " = " + std::to_string(g) +
                        " outside (0, 1]");
    if (g > prev)
      throw ConfigError("gamma schedule increases at k = " + std::to_string(k));
    prev = g;
  }
}

}  // namespace saem
