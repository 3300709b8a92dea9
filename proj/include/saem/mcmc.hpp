#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "saem/rng.hpp"
#include "saem/types.hpp"

namespace saem {

/// Unnormalized target for a Langevin kernel.
struct TargetDensity {
  std::function<double(const Vector&)> log_density;
  std::function<Vector(const Vector&)> grad_log_density;
};

struct AdaptationConfig {
  double target_accept = 0.57;
  long adaptation_steps = 0;
  // Dual-averaging constants (Nesterov-style primal-dual averaging with the
  // usual shrinkage-to-mu parameterization).
  double t0 = 10.0;
  double kappa = 0.75;
  double gamma = 0.05;
};

/// One Langevin kernel: stepsize eta, adjusted -> MALA, unadjusted -> ULA.
/// The optional positive diagonal preconditioner rescales drift and noise;
/// adaptation tunes eta toward a target acceptance rate (MALA only).
struct KernelConfig {
  double eta = 1e-2;
  bool adjusted = false;
  std::optional<Vector> preconditioner;
  std::optional<AdaptationConfig> adaptation;

  void validate(Eigen::Index dim = -1) const;  // throws ConfigError
};

struct DualAveragingState {
  double log_eta = 0.0;      // stepsize in use while adapting
  double log_eta_avg = 0.0;  // decayed average; frozen value after the window
  double h_avg = 0.0;        // running average of (target - alpha)
  double mu = 0.0;           // shrinkage anchor, log(10 * eta0)
  long iteration = 0;
  bool frozen = false;
};

struct KernelState {
  Vector position;
  long accept_count = 0;
  long proposal_count = 0;
  std::optional<DualAveragingState> dual_averaging;

  double acceptance_rate() const {
    return proposal_count > 0
               ? static_cast<double>(accept_count) / static_cast<double>(proposal_count)
               : 0.0;
  }
};

/// Positions (or SA iterates) beyond this magnitude count as divergence.
inline constexpr double kDivergenceBound = 1e8;

KernelState make_kernel_state(Vector position, const KernelConfig& cfg);

/// Stepsize currently in effect (adapted value when adaptation is active).
double kernel_eta(const KernelState& state, const KernelConfig& cfg);

/// One unadjusted Langevin step:
///   x' = x + eta * P . grad(x) + sqrt(2 eta) * sqrt(P) . xi,  xi ~ N(0, I).
/// Never rejects. Throws DivergenceError when x' leaves the finite region.
void ula_step(KernelState& state, const TargetDensity& target,
              const KernelConfig& cfg, RngStream& rng);

/// One Metropolis-adjusted Langevin step. Proposes via the ULA formula and
/// accepts with the usual MH ratio under the preconditioned Gaussian
/// proposal. Non-finite proposals count as rejections. Returns the
/// acceptance probability of the proposal (for stepsize adaptation).
double mala_step(KernelState& state, const TargetDensity& target,
                 const KernelConfig& cfg, RngStream& rng);

/// Log MH acceptance ratio for a MALA move x -> xp (exposed for tests).
double mala_log_accept_ratio(const TargetDensity& target, const KernelConfig& cfg,
                             double eta, const Vector& x, const Vector& xp,
                             double log_density_x);

/// Dual-averaging update of log eta toward the target acceptance rate.
/// No-op once the window is exhausted (eta frozen at the averaged value).
void adapt_stepsize(KernelState& state, double accept_prob, const KernelConfig& cfg);

struct ChainResult {
  KernelState state;
  std::vector<Vector> trace;  // intermediate positions when requested
};

/// Applies n_steps kernel steps (MALA when cfg.adjusted, else ULA), driving
/// adaptation when configured. Divergence errors propagate with their step
/// index.
ChainResult run_chain(const Latent& initial, long n_steps, const TargetDensity& target,
                      const KernelConfig& cfg, RngStream& rng, bool record_trace = false);

}  // namespace saem
