#pragma once

#include <cstdint>
#include <vector>

#include "saem/model.hpp"

namespace saem::models {

/// Tractable one-way Gaussian testbed with everything in closed form.
///
/// Units i = 1..m each carry one latent level z_i ~ N(mu, tau^2) and n
/// observations y_ij = z_i + eps_ij with unit-variance noise. The posterior
/// of each z_i is Gaussian, so the exact E-step, an exact posterior sampler,
/// the marginal log-likelihood and the marginal MLE are all available.
///
/// theta = (mu, tau^2), chart (mu, log tau^2).
/// S(z) = (mean_i z_i, mean_i z_i^2).
class ConjugateGaussianModel : public Model {
 public:
  /// y: m x n, one row per unit.
  explicit ConjugateGaussianModel(Matrix y, double variance_floor = 1e-8);

  static ConjugateGaussianModel synthetic(int n_units, int obs_per_unit, double mu,
                                          double tau2, std::uint64_t seed);

  int latent_dim() const override { return static_cast<int>(y_.rows()); }
  int stat_dim() const override { return 2; }
  int param_dim() const override { return 2; }
  std::vector<std::string> param_names() const override { return {"mu", "tau2"}; }

  SufficientStats suff_stats(const Latent& z) const override;
  double log_joint(const Latent& z, const Params& theta) const override;
  Vector grad_z_log_joint(const Latent& z, const Params& theta) const override;
  Params m_step(const SufficientStats& s, bool* clamped = nullptr) const override;
  double exp_family_objective(const SufficientStats& s, const Params& theta) const override;
  Params to_natural(const Params& theta) const override;

  int n_units() const override { return static_cast<int>(y_.rows()); }
  int unit_dim(int) const override { return 1; }
  std::unique_ptr<UnitPosterior> unit_posterior(int unit, const Params& theta) const override;
  SufficientStats unit_suff_stats(int unit, const Vector& z_unit) const override;

  bool has_exact_posterior() const override { return true; }
  SufficientStats exact_posterior_mean_stats(const Params& theta) const override;

  bool has_exact_sampler() const override { return true; }
  Latent sample_exact_posterior(const Params& theta, RngStream& rng) const override;

  bool has_marginal_loglik() const override { return true; }
  double marginal_loglik(const Params& theta) const override;

  /// Closed-form maximizer of the marginal log-likelihood (natural scale).
  Params marginal_mle() const;

  /// Chart parameters from natural (mu, tau2).
  static Params chart(double mu, double tau2);

  const Matrix& data() const { return y_; }

 private:
  struct Posterior {
    Vector mean;
    Vector variance;
  };
  Posterior posterior(const Params& theta) const;

  Matrix y_;           // m x n
  Vector row_sums_;
  double variance_floor_;
};

/// Deterministic EM iterates theta_0, theta_1, ..., theta_n (chart scale):
/// s_k = s_bar(theta_k), theta_{k+1} = theta_hat(s_k).
std::vector<Params> oracle_exact_em(const ConjugateGaussianModel& model,
                                    const Params& theta0, int n_iterations);

}  // namespace saem::models
