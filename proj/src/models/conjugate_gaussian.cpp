#include "saem/models/conjugate_gaussian.hpp"

#include <cmath>

#include "saem/errors.hpp"

namespace saem::models {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

struct GaussianUnitPosterior final : public UnitPosterior {
  double mu, tau2;     // prior
  Vector y;            // this unit's observations

  int dim() const override { return 1; }
  double log_prior(const Vector& z) const override {
    const double d = z[0] - mu;
    return -0.5 * d * d / tau2 - 0.5 * (kLog2Pi + std::log(tau2));
  }
  Vector grad_log_prior(const Vector& z) const override {
    Vector g(1);
    g[0] = -(z[0] - mu) / tau2;
    return g;
  }
  double log_lik(const Vector& z) const override {
    const double n = static_cast<double>(y.size());
    return -0.5 * (y.array() - z[0]).square().sum() - 0.5 * n * kLog2Pi;
  }
  Vector grad_log_lik(const Vector& z) const override {
    Vector g(1);
    g[0] = (y.array() - z[0]).sum();
    return g;
  }
  Vector sample_prior(RngStream& rng) const override {
    Vector z(1);
    z[0] = mu + std::sqrt(tau2) * rng.normal();
    return z;
  }
};

}  // namespace

ConjugateGaussianModel::ConjugateGaussianModel(Matrix y, double variance_floor)
    : y_(std::move(y)), variance_floor_(variance_floor) {
  if (y_.rows() < 1 || y_.cols() < 1)
    throw DataError("conjugate-Gaussian model needs at least one unit and observation");
  row_sums_ = y_.rowwise().sum();
}

ConjugateGaussianModel ConjugateGaussianModel::synthetic(int n_units, int obs_per_unit,
                                                         double mu, double tau2,
                                                         std::uint64_t seed) {
  if (n_units < 1 || obs_per_unit < 1)
    throw DomainError("synthetic oracle needs positive unit/observation counts");
  if (!(tau2 > 0.0)) throw DomainError("synthetic oracle needs tau2 > 0");
  RngStream rng(seed);
  Matrix y(n_units, obs_per_unit);
  for (int i = 0; i < n_units; ++i) {
    const double level = mu + std::sqrt(tau2) * rng.normal();
    for (int j = 0; j < obs_per_unit; ++j) y(i, j) = level + rng.normal();
  }
  return ConjugateGaussianModel(std::move(y));
}

Params ConjugateGaussianModel::chart(double mu, double tau2) {
  Params theta(2);
  theta << mu, std::log(tau2);
  return theta;
}

SufficientStats ConjugateGaussianModel::suff_stats(const Latent& z) const {
  const double m = static_cast<double>(y_.rows());
  SufficientStats s(2);
  s << z.sum() / m, z.squaredNorm() / m;
  return s;
}

SufficientStats ConjugateGaussianModel::unit_suff_stats(int, const Vector& z_unit) const {
  const double m = static_cast<double>(y_.rows());
  SufficientStats s(2);
  s << z_unit[0] / m, z_unit[0] * z_unit[0] / m;
  return s;
}

double ConjugateGaussianModel::log_joint(const Latent& z, const Params& theta) const {
  const double mu = theta[0];
  const double tau2 = std::exp(theta[1]);
  const double m = static_cast<double>(y_.rows());
  const double n = static_cast<double>(y_.cols());
  double quad_lik = 0.0;
  for (Eigen::Index i = 0; i < y_.rows(); ++i)
    quad_lik += (y_.row(i).array() - z[i]).square().sum();
  const double prior = -0.5 * (z.array() - mu).square().sum() / tau2 -
                       0.5 * m * (kLog2Pi + std::log(tau2));
  return prior - 0.5 * quad_lik - 0.5 * m * n * kLog2Pi;
}

Vector ConjugateGaussianModel::grad_z_log_joint(const Latent& z, const Params& theta) const {
  const double mu = theta[0];
  const double tau2 = std::exp(theta[1]);
  const double n = static_cast<double>(y_.cols());
  return (-(z.array() - mu) / tau2 + (row_sums_.array() - n * z.array())).matrix();
}

Params ConjugateGaussianModel::m_step(const SufficientStats& s, bool* clamped) const {
  double tau2 = s[1] - s[0] * s[0];
  bool was_clamped = false;
  if (!(tau2 > variance_floor_)) {
    tau2 = variance_floor_;
    was_clamped = true;
  }
  if (clamped) *clamped = was_clamped;
  return chart(s[0], tau2);
}

double ConjugateGaussianModel::exp_family_objective(const SufficientStats& s,
                                                    const Params& theta) const {
  const double mu = theta[0];
  const double tau2 = std::exp(theta[1]);
  const double m = static_cast<double>(y_.rows());
  return m * (s[0] * mu / tau2 - 0.5 * s[1] / tau2 - 0.5 * mu * mu / tau2 -
              0.5 * (kLog2Pi + std::log(tau2)));
}

Params ConjugateGaussianModel::to_natural(const Params& theta) const {
  Params natural(2);
  natural << theta[0], std::exp(theta[1]);
  return natural;
}

std::unique_ptr<UnitPosterior> ConjugateGaussianModel::unit_posterior(
    int unit, const Params& theta) const {
  if (unit < 0 || unit >= n_units()) throw DomainError("unit index out of range");
  auto post = std::make_unique<GaussianUnitPosterior>();
  post->mu = theta[0];
  post->tau2 = std::exp(theta[1]);
  post->y = y_.row(unit).transpose();
  return post;
}

ConjugateGaussianModel::Posterior ConjugateGaussianModel::posterior(
    const Params& theta) const {
  const double mu = theta[0];
  const double tau2 = std::exp(theta[1]);
  const double n = static_cast<double>(y_.cols());
  const double precision = 1.0 / tau2 + n;
  Posterior post;
  post.mean = ((row_sums_.array() + mu / tau2) / precision).matrix();
  post.variance = Vector::Constant(y_.rows(), 1.0 / precision);
  return post;
}

SufficientStats ConjugateGaussianModel::exact_posterior_mean_stats(
    const Params& theta) const {
  const Posterior post = posterior(theta);
  const double m = static_cast<double>(y_.rows());
  SufficientStats s(2);
  s << post.mean.sum() / m,
      (post.mean.array().square() + post.variance.array()).sum() / m;
  return s;
}

Latent ConjugateGaussianModel::sample_exact_posterior(const Params& theta,
                                                      RngStream& rng) const {
  const Posterior post = posterior(theta);
  Latent z(y_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z[i] = post.mean[i] + std::sqrt(post.variance[i]) * rng.normal();
  return z;
}

double ConjugateGaussianModel::marginal_loglik(const Params& theta) const {
  // Unit means carry all the parameter information:
  //   y_bar_i ~ N(mu, (1 + n tau^2) / n), residuals are parameter-free.
  const double mu = theta[0];
  const double tau2 = std::exp(theta[1]);
  const double n = static_cast<double>(y_.cols());
  const double m = static_cast<double>(y_.rows());
  double ll = -0.5 * m * n * kLog2Pi - 0.5 * m * std::log(1.0 + n * tau2);
  for (Eigen::Index i = 0; i < y_.rows(); ++i) {
    const double dev_sq = (y_.row(i).array() - mu).square().sum();
    const double dev_sum = row_sums_[i] - n * mu;
    ll -= 0.5 * (dev_sq - tau2 / (1.0 + n * tau2) * dev_sum * dev_sum);
  }
  return ll;
}

Params ConjugateGaussianModel::marginal_mle() const {
  const double n = static_cast<double>(y_.cols());
  const Vector unit_means = row_sums_ / n;
  const double mu = unit_means.mean();
  const double between = (unit_means.array() - mu).square().mean();
  const double tau2 = std::max(between - 1.0 / n, variance_floor_);
  Params natural(2);
  natural << mu, tau2;
  return natural;
}

std::vector<Params> oracle_exact_em(const ConjugateGaussianModel& model,
                                    const Params& theta0, int n_iterations) {
  if (n_iterations < 1) throw DomainError("oracle_exact_em requires n >= 1");
  std::vector<Params> iterates;
  iterates.reserve(static_cast<std::size_t>(n_iterations) + 1);
  iterates.push_back(theta0);
  Params theta = theta0;
  for (int k = 0; k < n_iterations; ++k) {
    theta = model.m_step(model.exact_posterior_mean_stats(theta));
    iterates.push_back(theta);
  }
  return iterates;
}

}  // namespace saem::models
