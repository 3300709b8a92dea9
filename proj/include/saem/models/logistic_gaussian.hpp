#pragma once

#include "saem/model.hpp"

namespace saem::models {

/// Bernoulli log-likelihood sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)]
/// with p = logistic(X beta), evaluated in the softplus form that never
/// overflows for finite inputs.
double logistic_loglik(const Vector& beta, const Matrix& X, const Vector& y);

/// Closed-form M-step for an exchangeable Gaussian prior over d coefficients
/// from s = (sum beta_j, sum beta_j^2): mu = s1/d, sigma^2 = s2/d - mu^2.
/// Degenerate spread is clamped to the floor (reported via *clamped).
/// Returns chart-scale (mu, log sigma).
Params m_step_logistic_gaussian(const SufficientStats& s, int d,
                                double variance_floor = 1e-8, bool* clamped = nullptr);

/// Logistic regression with an exchangeable Gaussian prior on the
/// coefficients: beta ~ N(mu 1, sigma^2 I), y_i ~ Bernoulli(logistic(x_i.beta)).
/// theta = (mu, sigma), chart (mu, log sigma). S(beta) = (sum beta, sum beta^2).
class LogisticGaussianModel : public Model {
 public:
  LogisticGaussianModel(Matrix X, Vector y, double variance_floor = 1e-8);

  int latent_dim() const override { return static_cast<int>(X_.cols()); }
  int stat_dim() const override { return 2; }
  int param_dim() const override { return 2; }
  std::vector<std::string> param_names() const override { return {"mu", "sigma"}; }

  SufficientStats suff_stats(const Latent& beta) const override;
  double log_joint(const Latent& beta, const Params& theta) const override;
  Vector grad_z_log_joint(const Latent& beta, const Params& theta) const override;
  Params m_step(const SufficientStats& s, bool* clamped = nullptr) const override;
  double exp_family_objective(const SufficientStats& s, const Params& theta) const override;
  Params to_natural(const Params& theta) const override;

  std::unique_ptr<UnitPosterior> unit_posterior(int unit, const Params& theta) const override;

  bool has_row_predictive() const override { return true; }
  double row_log_predictive(const Latent& beta, const Vector& x_row,
                            double y_row) const override;

  static Params chart(double mu, double sigma);

  const Matrix& design() const { return X_; }
  const Vector& response() const { return y_; }

 private:
  Matrix X_;
  Vector y_;
  double variance_floor_;
};

}  // namespace saem::models
