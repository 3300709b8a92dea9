#include "saem/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "saem/errors.hpp"

namespace saem {

namespace {

bool position_ok(const Vector& x) {
  return x.allFinite() && x.cwiseAbs().maxCoeff() <= kDivergenceBound;
}

// Proposal mean of the preconditioned Langevin move from x.
Vector drift_mean(const Vector& x, const Vector& grad, double eta,
                  const KernelConfig& cfg) {
  if (cfg.preconditioner)
    return x + eta * cfg.preconditioner->cwiseProduct(grad);
  return x + eta * grad;
}

// |v|^2 weighted by P^-1 (identity when no preconditioner).
double precond_sq_norm(const Vector& v, const KernelConfig& cfg) {
  if (cfg.preconditioner) return v.cwiseQuotient(*cfg.preconditioner).dot(v);
  return v.squaredNorm();
}

Vector scaled_noise(Eigen::Index n, double eta, const KernelConfig& cfg,
                    RngStream& rng) {
  Vector xi = rng.normal_vector(n);
  if (cfg.preconditioner)
    return std::sqrt(2.0 * eta) * cfg.preconditioner->cwiseSqrt().cwiseProduct(xi);
  return std::sqrt(2.0 * eta) * xi;
}

}  // namespace

void KernelConfig::validate(Eigen::Index dim) const {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ConfigError("kernel stepsize eta must be positive and finite");
  if (preconditioner) {
    if (dim >= 0 && preconditioner->size() != dim)
      throw ConfigError("preconditioner dimension does not match the latent dimension");
    if ((preconditioner->array() <= 0.0).any() || !preconditioner->allFinite())
      throw ConfigError("preconditioner entries must be positive and finite");
  }
  if (adaptation) {
    if (!adjusted)
      throw ConfigError("stepsize adaptation requires the adjusted (MALA) kernel");
    if (!(adaptation->target_accept > 0.0 && adaptation->target_accept < 1.0))
      throw ConfigError("target acceptance rate must lie in (0, 1)");
    if (adaptation->adaptation_steps < 0)
      throw ConfigError("adaptation_steps must be nonnegative");
  }
}

KernelState make_kernel_state(Vector position, const KernelConfig& cfg) {
  KernelState state;
  state.position = std::move(position);
  if (cfg.adaptation) {
    DualAveragingState da;
    da.log_eta = std::log(cfg.eta);
    da.log_eta_avg = da.log_eta;
    da.mu = std::log(10.0 * cfg.eta);
    state.dual_averaging = da;
  }
  return state;
}

double kernel_eta(const KernelState& state, const KernelConfig& cfg) {
  if (state.dual_averaging) {
    const auto& da = *state.dual_averaging;
    return std::exp(da.frozen ? da.log_eta_avg : da.log_eta);
  }
  return cfg.eta;
}

void ula_step(KernelState& state, const TargetDensity& target,
              const KernelConfig& cfg, RngStream& rng) {
  const double eta = kernel_eta(state, cfg);
  const Vector grad = target.grad_log_density(state.position);
  Vector next = drift_mean(state.position, grad, eta, cfg) +
                scaled_noise(state.position.size(), eta, cfg, rng);
  ++state.proposal_count;
  ++state.accept_count;  // unadjusted: every move is taken
  if (!position_ok(next))
    throw DivergenceError("ULA position left the finite region (eta = " +
                              std::to_string(eta) + ")",
                          state.proposal_count);
  state.position = std::move(next);
}

double mala_log_accept_ratio(const TargetDensity& target, const KernelConfig& cfg,
                             double eta, const Vector& x, const Vector& xp,
                             double log_density_x) {
  const double log_density_xp = target.log_density(xp);
  if (!std::isfinite(log_density_xp)) {
    // -inf target density is a legitimate zero-probability region.
    if (log_density_xp == -std::numeric_limits<double>::infinity())
      return -std::numeric_limits<double>::infinity();
    throw DomainError("non-finite log density at MALA proposal");
  }
  const Vector fwd_mean = drift_mean(x, target.grad_log_density(x), eta, cfg);
  const Vector bwd_mean = drift_mean(xp, target.grad_log_density(xp), eta, cfg);
  const double log_q_fwd = -precond_sq_norm(xp - fwd_mean, cfg) / (4.0 * eta);
  const double log_q_bwd = -precond_sq_norm(x - bwd_mean, cfg) / (4.0 * eta);
  return log_density_xp - log_density_x + log_q_bwd - log_q_fwd;
}

double mala_step(KernelState& state, const TargetDensity& target,
                 const KernelConfig& cfg, RngStream& rng) {
  const double eta = kernel_eta(state, cfg);
  const double log_density_x = target.log_density(state.position);
  if (!std::isfinite(log_density_x))
    throw DomainError("non-finite log density at the current MALA state");

  const Vector grad = target.grad_log_density(state.position);
  const Vector proposal = drift_mean(state.position, grad, eta, cfg) +
                          scaled_noise(state.position.size(), eta, cfg, rng);
  ++state.proposal_count;

  double accept_prob = 0.0;
  if (position_ok(proposal)) {
    const double log_ratio = mala_log_accept_ratio(target, cfg, eta, state.position,
                                                   proposal, log_density_x);
    accept_prob = std::isnan(log_ratio) ? 0.0 : std::min(1.0, std::exp(log_ratio));
    if (std::log(rng.uniform()) < log_ratio) {
      state.position = proposal;
      ++state.accept_count;
    }
  }
  // Non-finite proposals count as rejections: the chain stays put.
  return accept_prob;
}

void adapt_stepsize(KernelState& state, double accept_prob, const KernelConfig& cfg) {
  if (!state.dual_averaging || !cfg.adaptation) return;
  auto& da = *state.dual_averaging;
  if (da.frozen) return;
  const auto& ad = *cfg.adaptation;

  da.iteration += 1;
  const double m = static_cast<double>(da.iteration);
  const double w = 1.0 / (m + ad.t0);
  da.h_avg = (1.0 - w) * da.h_avg + w * (ad.target_accept - accept_prob);
  da.log_eta = da.mu - std::sqrt(m) / ad.gamma * da.h_avg;
  da.log_eta = std::clamp(da.log_eta, -40.0, 40.0);  // saturate extreme stepsizes
  const double decay = std::pow(m, -ad.kappa);
  da.log_eta_avg = decay * da.log_eta + (1.0 - decay) * da.log_eta_avg;
  if (da.iteration >= ad.adaptation_steps) da.frozen = true;
}

ChainResult run_chain(const Latent& initial, long n_steps, const TargetDensity& target,
                      const KernelConfig& cfg, RngStream& rng, bool record_trace) {
  cfg.validate(initial.size());
  if (n_steps < 0) throw DomainError("run_chain requires n_steps >= 0");

  ChainResult result;
  result.state = make_kernel_state(initial, cfg);
  if (record_trace) result.trace.reserve(static_cast<std::size_t>(n_steps));

  for (long step = 0; step < n_steps; ++step) {
    if (cfg.adjusted) {
      const double accept_prob = mala_step(result.state, target, cfg, rng);
      adapt_stepsize(result.state, accept_prob, cfg);
    } else {
      ula_step(result.state, target, cfg, rng);
    }
    if (record_trace) result.trace.push_back(result.state.position);
  }
  return result;
}

}  // namespace saem
