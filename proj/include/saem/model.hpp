#pragma once

#include <memory>
#include <string>
#include <vector>

#include "saem/rng.hpp"
#include "saem/types.hpp"

namespace saem {

/// The unnormalized posterior of a single latent unit at fixed parameters,
/// split into prior and likelihood so that consumers can temper the
/// likelihood (annealing) or drop it (prior sampling).
class UnitPosterior {
 public:
  virtual ~UnitPosterior() = default;

  virtual int dim() const = 0;
  virtual double log_prior(const Vector& z) const = 0;
  virtual Vector grad_log_prior(const Vector& z) const = 0;
  virtual double log_lik(const Vector& z) const = 0;
  virtual Vector grad_log_lik(const Vector& z) const = 0;
  virtual Vector sample_prior(RngStream& rng) const = 0;

  double log_density(const Vector& z) const { return log_prior(z) + log_lik(z); }
  Vector grad_log_density(const Vector& z) const {
    return grad_log_prior(z) + grad_log_lik(z);
  }
};

/// Contract every latent-variable model implements.
///
/// The joint density is curved-exponential-family in the statistics:
/// log p(y, z | theta) = S(z) . phi(theta) - psi(theta) + const(y, z),
/// so the M-step is a closed-form map of the statistics alone.
///
/// The latent state is the concatenation of per-unit blocks; models whose
/// posterior couples everything are a single unit. Parameters are handled
/// in an unconstrained chart (scale parameters stored as logs) so that
/// m_step never leaves the admissible set; to_natural() maps back.
///
/// Implementations are immutable after construction and safe to share
/// across threads; all methods are pure functions of their arguments.
class Model {
 public:
  virtual ~Model() = default;

  virtual int latent_dim() const = 0;
  virtual int stat_dim() const = 0;
  virtual int param_dim() const = 0;
  virtual std::vector<std::string> param_names() const = 0;

  /// S(z) for the full latent state. For factorized models this is the sum
  /// of per-unit contributions, taken in unit order.
  virtual SufficientStats suff_stats(const Latent& z) const = 0;

  /// log p(y, z | theta) up to an additive constant in y. The constant in z
  /// and theta must be exact: both the MH ratio and L(s, theta) use it.
  virtual double log_joint(const Latent& z, const Params& theta) const = 0;

  /// d/dz log p(y, z | theta) — the Langevin drift.
  virtual Vector grad_z_log_joint(const Latent& z, const Params& theta) const = 0;

  /// theta_hat(s), the closed-form maximizer of L(s, .). Degenerate moment
  /// inputs are clamped to a variance floor; *clamped is set when that
  /// happens (may be null).
  virtual Params m_step(const SufficientStats& s, bool* clamped = nullptr) const = 0;

  /// L(s, theta) = s . phi(theta) - psi(theta), the statistic-space objective
  /// the M-step maximizes over theta.
  virtual double exp_family_objective(const SufficientStats& s,
                                      const Params& theta) const = 0;

  /// Chart -> natural parameters (identity unless the model overrides).
  virtual Params to_natural(const Params& theta) const { return theta; }

  /// Starting latent state. Defaults to a standard Gaussian draw; models may
  /// override (e.g. to start at the prior mean).
  virtual Latent initial_latent(const Params& theta, RngStream& rng) const;

  // --- unit structure -------------------------------------------------
  // n_units() == 1 means the posterior couples the whole latent vector.

  virtual int n_units() const { return 1; }
  virtual int unit_dim(int unit) const;
  virtual std::unique_ptr<UnitPosterior> unit_posterior(int unit,
                                                        const Params& theta) const = 0;
  /// Contribution of one unit's latent block to S (summed over units).
  virtual SufficientStats unit_suff_stats(int unit, const Vector& z_unit) const;

  // --- optional capabilities ------------------------------------------

  /// s_bar(theta) = E[S(z) | y, theta] in closed form (tractable models only).
  virtual bool has_exact_posterior() const { return false; }
  virtual SufficientStats exact_posterior_mean_stats(const Params& theta) const;

  /// Draw z ~ p(z | y, theta) exactly (tractable models only).
  virtual bool has_exact_sampler() const { return false; }
  virtual Latent sample_exact_posterior(const Params& theta, RngStream& rng) const;

  /// Closed-form marginal log-likelihood log p(y | theta).
  virtual bool has_marginal_loglik() const { return false; }
  virtual double marginal_loglik(const Params& theta) const;

  /// log p(y_row | z, theta) for a fresh row under the shared latent state
  /// (GLM-style models; used for held-out predictive density).
  virtual bool has_row_predictive() const { return false; }
  virtual double row_log_predictive(const Latent& z, const Vector& x_row,
                                    double y_row) const;

  /// Positive diagonal preconditioner derived from the current parameters,
  /// refreshed by the driver every iteration when requested.
  virtual bool has_dynamic_preconditioner() const { return false; }
  virtual Vector dynamic_preconditioner(const Params& theta) const;
};

/// Result of comparing the analytic latent gradient against central finite
/// differences of log_joint.
struct GradientCheckReport {
  double max_rel_error = 0.0;
  int worst_coordinate = -1;
};

/// Checks grad_z_log_joint against central differences with step h.
/// Relative error uses a small absolute floor so zero gradients compare
/// cleanly. Throws DomainError on h <= 0 and DataError when log_joint is
/// non-finite at a probe point (naming the coordinate).
GradientCheckReport check_gradient(const Model& model, const Latent& z,
                                   const Params& theta, double h = 1e-5);

/// h(s) = s_bar(theta_hat(s)) - s. Requires the exact-posterior capability.
Vector mean_field_residual(const Model& model, const SufficientStats& s);

}  // namespace saem
