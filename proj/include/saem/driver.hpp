#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "saem/mcmc.hpp"
#include "saem/model.hpp"
#include "saem/schedule.hpp"
#include "saem/types.hpp"

namespace saem {

struct SaemConfig {
  long n_iterations = 100;
  long mcmc_steps_per_iter = 4;
  long initial_burn_in = 0;  // MCMC steps before the first iteration
  GammaSchedule gamma = GammaSchedule::inverse_sqrt();
  KernelConfig kernel;
  std::uint64_t seed = 0;
  bool record_trace = true;
  // Replace the kernel with the model's exact posterior sampler (tractable
  // models only; the zero-bias reference configuration).
  bool exact_estep = false;
  // Refresh the kernel preconditioner from the current parameters each
  // iteration via Model::dynamic_preconditioner.
  bool model_preconditioner = false;

  void validate() const;  // throws ConfigError
};

struct TraceRecord {
  long k = 0;
  double gamma = 0.0;
  double accept_rate = 0.0;       // over this iteration's kernel steps
  Params theta;                   // natural scale
  SufficientStats s;
  std::optional<double> h_norm;   // |h(s_k)| when the model has an exact E-step
  bool m_step_clamped = false;
};

enum class RunStatus { Completed, Diverged };

struct Trace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::Completed;
  long diverged_at = -1;          // iteration index when diverged
  std::string divergence_message;
  Latent final_latent;
  Params final_theta;             // chart scale
  SufficientStats final_s;
  double mean_accept_rate = 0.0;  // over all recorded iterations

  bool diverged() const { return status == RunStatus::Diverged; }
};

/// Starting point for a run. Exactly one of theta0 (chart scale) or s0 must
/// be set: burn-in targets m_step(s0) when s0 is given, else theta0, and in
/// the latter case s starts from S(z) after burn-in.
struct SaemInit {
  std::optional<Params> theta0;
  std::optional<SufficientStats> s0;
  std::optional<Latent> z0;
};

/// Robbins-Monro step: (1 - gamma) * s + gamma * stat.
/// Throws DomainError unless gamma is in (0, 1] and dims match, and
/// DivergenceError when the result is non-finite.
SufficientStats sa_update(const SufficientStats& s, const SufficientStats& stat,
                          double gamma);

/// Runs the stochastic-approximation EM loop: warm-started kernel moves on
/// the latent state, the SA update of the statistics, and the closed-form
/// M-step. Factorized models get one persistent chain per unit, each with
/// its own random stream; statistics are summed in unit order. Kernel
/// divergence ends the run early with the partial trace retained.
Trace run_saem(const Model& model, const SaemConfig& cfg, const SaemInit& init);

struct ReplicateRun {
  int replicate = 0;
  std::uint64_t seed = 0;
  Trace trace;
};

/// Runs independent replicates with seeds split from cfg.seed. The factory
/// receives the replicate index and a stream for data splitting; replicates
/// may run on up to n_workers threads. Divergence of a replicate is recorded
/// in its trace, not fatal to the batch.
std::vector<ReplicateRun> run_replicates(
    const std::function<std::shared_ptr<const Model>(int replicate, RngStream& rng)>&
        make_model,
    const SaemConfig& cfg, const SaemInit& init, int n_replicates, int n_workers = 1);

/// Writes one row per iteration: k, gamma, accept_rate, theta_1.., s_1..,
/// h_norm (empty when unavailable). Leading '#' lines carry metadata.
void write_trace_csv(const Trace& trace, const std::string& path,
                     const std::vector<std::string>& param_names,
                     const std::vector<std::string>& metadata = {});

}  // namespace saem
