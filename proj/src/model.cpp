#include "saem/model.hpp"

#include <cmath>

#include "saem/errors.hpp"

namespace saem {

Latent Model::initial_latent(const Params& /*theta*/, RngStream& rng) const {
  return rng.normal_vector(latent_dim());
}

int Model::unit_dim(int /*unit*/) const { return latent_dim(); }

SufficientStats Model::unit_suff_stats(int unit, const Vector& z_unit) const {
  if (n_units() != 1)
    throw CapabilityError("model declares units but does not implement unit_suff_stats");
  (void)unit;
  return suff_stats(z_unit);
}

SufficientStats Model::exact_posterior_mean_stats(const Params&) const {
  throw CapabilityError("model does not provide an exact posterior");
}

Latent Model::sample_exact_posterior(const Params&, RngStream&) const {
  throw CapabilityError("model does not provide an exact posterior sampler");
}

double Model::marginal_loglik(const Params&) const {
  throw CapabilityError("model does not provide a closed-form marginal log-likelihood");
}

double Model::row_log_predictive(const Latent&, const Vector&, double) const {
  throw CapabilityError("model does not provide a row predictive density");
}

Vector Model::dynamic_preconditioner(const Params&) const {
  throw CapabilityError("model does not provide a dynamic preconditioner");
}

GradientCheckReport check_gradient(const Model& model, const Latent& z,
                                   const Params& theta, double h) {
  if (!(h > 0.0)) throw DomainError("gradient check requires h > 0");
  if (!all_finite(z) || !all_finite(theta))
    throw DomainError("gradient check requires finite z and theta");

  const Vector analytic = model.grad_z_log_joint(z, theta);
  GradientCheckReport report;
  Latent probe = z;
  for (int i = 0; i < z.size(); ++i) {
    probe[i] = z[i] + h;
    const double fp = model.log_joint(probe, theta);
    probe[i] = z[i] - h;
    const double fm = model.log_joint(probe, theta);
    probe[i] = z[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw DataError("non-finite log_joint probing coordinate " + std::to_string(i));
    const double fd = (fp - fm) / (2.0 * h);
    const double rel = std::abs(analytic[i] - fd) / (std::abs(analytic[i]) + 1e-12);
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_coordinate = i;
    }
  }
  return report;
}

Vector mean_field_residual(const Model& model, const SufficientStats& s) {
  if (!model.has_exact_posterior())
    throw CapabilityError("mean_field_residual requires an exact posterior");
  return model.exact_posterior_mean_stats(model.m_step(s)) - s;
}

}  // namespace saem
